// fam/harness.hh
// Scale grid search and the model-comparison experiment runner.

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

#ifndef FAM_HARNESS_HH_
#define FAM_HARNESS_HH_

#include <string>
#include <vector>

#include "fam/decoder.hh"
#include "fam/oracle.hh"
#include "fam/wer.hh"

namespace fam {

struct GridSpec {
  std::vector<double> prior_scales = {0.0, 0.3, 0.7, 1.0};
  std::vector<double> lm_scales = {5, 10, 15, 20};
  // Cartesian product over factors instead of one shared scale.
  bool per_factor = false;
  // Cap on dev utterances per grid point; 0 decodes the whole dev set.
  int max_utterances = 0;

  void validate() const;
  static GridSpec FromConfig(const Config &cfg,
                             const std::string &section = "grid");
};

struct GridResult {
  std::vector<double> prior_scales;  // per decomposition factor
  double lm_scale = 0;
  WerReport dev;
  long points = 0;
};

// Decodes the dev set at every grid point and keeps the first point
// attaining the minimum WER (enumeration order: prior scales outer, LM
// scale inner), so ties break deterministically.  Factor posteriors are
// computed once per utterance and shared across grid points.  With
// partial_factor set, only the normalized center factor is scored and the
// scale grid applies to it.
GridResult grid_search(const FactoredNet &model, const PriorTable &priors,
                       const Corpus &dev, const PrefixTree &tree,
                       const NgramLM &lm, const GridSpec &grid,
                       const DecoderConfig &base, bool partial_factor = false);

// ---- experiment runner ----

// One comparison row: a decomposition, its pre-training plan and the
// decoding mode.  Parsed from descriptors like
//   "tri-forward/mono+di+tri", "diphone/none", or
//   "tri-symmetric/mono+di+tri/partial"; the third field accepts
//   "partial" (center-factor-only decoding) and "rb" (right-branch
//   diphone pre-training).
struct RowSpec {
  std::string name;
  DecompTag tag = DecompTag::kMonophone;
  std::vector<Stage> pretrain_stages;  // empty = direct target training
  bool include_right_branch = false;
  bool partial_factor = false;
};

RowSpec parse_row_spec(const std::string &descriptor);

struct RowResult {
  std::string name;
  bool ok = false;
  std::string error;
  std::vector<double> prior_scales;
  double lm_scale = 0;
  WerReport dev;
  WerReport test;
  double train_seconds = 0;
  double decode_seconds = 0;
  long decoded_frames = 0;
  long head_evaluations = 0;
};

// Fully prepared experiment inputs shared by all rows.
struct ExperimentSetup {
  GeneratorConfig gen;
  Lexicon lexicon;
  Corpus train, dev, test;
  NgramLM lm{NgramLM::Uniform(1)};
  PrefixTree tree;

  // Generates corpora from [generator]/[data] sections and trains a bigram
  // LM on the training transcripts.
  static ExperimentSetup Build(const Config &cfg);
};

// Trains, estimates priors, grid-searches on dev and decodes test.
RowResult run_row(const RowSpec &row, const ExperimentSetup &setup,
                  const ModelDims &dims, const TrainConfig &tcfg,
                  const GridSpec &grid, const DecoderConfig &dcfg);

// Runs every row; a failing row is reported with its error and the others
// continue.
std::vector<RowResult> run_comparison(const std::vector<RowSpec> &rows,
                                      const ExperimentSetup &setup,
                                      const ModelDims &dims,
                                      const TrainConfig &tcfg,
                                      const GridSpec &grid,
                                      const DecoderConfig &dcfg);

// Deterministic machine-readable table (tab-separated, fixed precision,
// no timings).
std::string render_machine_table(const std::vector<RowResult> &rows);
// Human-readable rendering, timings included.
std::string render_text_table(const std::vector<RowResult> &rows);

}  // namespace fam

#endif  // FAM_HARNESS_HH_
