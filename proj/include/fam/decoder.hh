// fam/decoder.hh
// Time-synchronous prefix-tree Viterbi beam search with an n-gram LM over
// factorized emission scores, plus forced alignment over a fixed word
// sequence.  Both consume a precomputed per-frame emission score table over
// dense context indices, which keeps the search independent of the scoring
// path.

// Copyright 2026  The factored-am authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FAM_DECODER_HH_
#define FAM_DECODER_HH_

#include <vector>

#include "fam/lm.hh"
#include "fam/model.hh"
#include "fam/prefix_tree.hh"
#include "fam/priors.hh"

namespace fam {

struct TransitionModel {
  double loop = 0.5;          // phoneme-state loop; forward = 1 - loop
  double silence_loop = 0.8;  // silence loop; exit = 1 - silence_loop

  void validate() const {
    FAM_CHECK(loop > 0 && loop < 1) << "loop probability must be in (0,1)";
    FAM_CHECK(silence_loop > 0 && silence_loop < 1)
        << "silence loop probability must be in (0,1)";
  }
};

struct DecoderConfig {
  int beam = 2000;           // max active hypotheses per frame
  double score_beam = 12.0;  // log-domain width below the frame best
  double word_end_beam = 12.0;
  double lm_scale = 10.0;
  std::vector<double> prior_scales = {0.7};  // per factor, or broadcast
  TransitionModel transitions;
  // Approximate the right context by silence at word ends instead of
  // forking per successor start phoneme.
  bool within_word_context_only = false;

  static DecoderConfig FromConfig(const Config &cfg,
                                  const std::string &section = "decoder");
};

struct DecodeResult {
  std::vector<int> words;
  double score = 0;
  std::vector<int> active_states;  // per frame, after pruning
  double seconds = 0;
};

// Search over an emission table (T x context_count, log domain).
DecodeResult viterbi_decode(const MatF &emission, const PrefixTree &tree,
                            const NgramLM &lm, const PhonemeInventory &inv,
                            const DecoderConfig &cfg);

// Convenience wrapper: scores the frames with the model and priors, then
// searches.
DecodeResult decode_utterance(const FactoredNet &model,
                              const PriorTable &priors, const MatF &frames,
                              const PrefixTree &tree, const NgramLM &lm,
                              const DecoderConfig &cfg);

// All dense context ids for an inventory.
std::vector<int> all_context_ids(const PhonemeInventory &inv);

// ---- forced alignment ----

// State graph of a fixed word sequence with optional silence at the
// utterance edges and between words; used by forced alignment and by the
// exhaustive-search oracle.
struct ForcedGraph {
  struct State {
    int ctx_id = 0;
    double loop_cost = 0;
    double fwd_cost = 0;       // charged when leaving for a successor
    std::vector<int> succ;
    bool initial = false;
    bool final_state = false;
  };
  std::vector<State> states;
};

ForcedGraph build_forced_graph(const std::vector<int> &words,
                               const Lexicon &lexicon,
                               const PhonemeInventory &inv,
                               const TransitionModel &tm);

// Best monotone path score through the graph; -inf when T is too short.
// When `path` is given it receives the per-frame context of the best path.
double forced_path_score(const MatF &emission, const ForcedGraph &graph,
                         std::vector<TriphoneContext> *path = nullptr,
                         const PhonemeInventory *inv = nullptr);

// Best state path of an utterance through its word sequence.
std::vector<TriphoneContext> forced_align(const FactoredNet &model,
                                          const PriorTable &priors,
                                          const MatF &frames,
                                          const std::vector<int> &words,
                                          const Lexicon &lexicon,
                                          const DecoderConfig &cfg);

}  // namespace fam

#endif  // FAM_DECODER_HH_
