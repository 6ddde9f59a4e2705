// fam/corpus.hh
// Synthetic co-articulated corpus: lexicon, generative triphone Gaussian
// emissions with ground-truth alignments, and the corpus container format.

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

#ifndef FAM_CORPUS_HH_
#define FAM_CORPUS_HH_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fam/config.hh"
#include "fam/inventory.hh"
#include "fam/matrix.hh"

namespace fam {

struct GeneratorConfig {
  int num_phonemes = 10;
  int feature_dim = 20;
  int vocab_size = 50;
  int word_len_min = 2;
  int word_len_max = 5;
  double coarticulation = 0.6;  // alpha; 0 disables context shifts
  double emission_noise = 0.5;  // sigma_em
  double base_scale = 0.5;      // std of the per-state base means
  double mean_duration = 3.0;   // frames per phoneme state (geometric)
  double silence_mean_duration = 5.0;
  double silence_prob = 0.3;  // silence insertion at word boundaries
  int utt_len_min = 2;
  int utt_len_max = 5;
  std::uint64_t seed = 1;

  void validate() const;
  static GeneratorConfig FromConfig(const Config &cfg,
                                    const std::string &section = "generator");
};

struct Lexicon {
  std::vector<std::string> names;        // word id -> spelling
  std::vector<std::vector<int>> prons;   // word id -> phoneme ids

  int num_words() const { return static_cast<int>(prons.size()); }
  void validate(const PhonemeInventory &inv) const;

  static Lexicon Read(const std::string &path, const PhonemeInventory &inv);
  void Write(const std::string &path, const PhonemeInventory &inv) const;
};

// Concatenated pronunciations (no silence entries).
std::vector<int> spell(const Lexicon &lexicon, const std::vector<int> &words);

struct Utterance {
  std::string id;
  std::vector<int> words;
  std::vector<int> phoneme_string;  // symbol ids, silence entries included
  MatF frames;                      // T x D
  std::vector<TriphoneContext> alignment;  // length T

  int num_frames() const { return static_cast<int>(frames.rows()); }
};

struct Corpus {
  PhonemeInventory inventory{PhonemeInventory::Synthetic(2)};
  int feature_dim = 0;
  std::vector<Utterance> utterances;
};

Lexicon generate_lexicon(const GeneratorConfig &cfg);

// Emission mean tables are drawn once per corpus from cfg.seed, so train/
// dev/test splits generated with the same seed share them; utterance
// sampling is offset by `utterance_seed_offset`.
Corpus generate_corpus(const GeneratorConfig &cfg, const Lexicon &lexicon,
                       int n_utterances,
                       std::uint64_t utterance_seed_offset = 0,
                       const std::string &id_prefix = "utt");

Corpus read_corpus(const std::string &path);
void write_corpus(const Corpus &corpus, const std::string &path);

}  // namespace fam

#endif  // FAM_CORPUS_HH_
