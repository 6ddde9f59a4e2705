// fam/priors.hh
// Factor priors estimated by grouped activation averaging, and the scaled
// emission scoring that combines factor posteriors with priors.

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

#ifndef FAM_PRIORS_HH_
#define FAM_PRIORS_HH_

#include <map>
#include <string>
#include <vector>

#include "fam/model.hh"

namespace fam {

// Mixed-radix index over a factor's conditioning labels, in factor.cond
// order.  An unconditioned factor has a single tuple (index 0).
int cond_tuple_count(const PhonemeInventory &inv, const Factor &factor);
int cond_tuple_index(const PhonemeInventory &inv, const Factor &factor,
                     const TriphoneContext &ctx);

struct PriorTable {
  struct FactorPrior {
    Factor factor;
    MatF table;  // cond tuples x predicted-variable cardinality
  };
  std::vector<FactorPrior> factors;
  double floor = 1e-6;

  int factor_index(const Factor &f) const;  // -1 when absent
  double log_prior(int factor, int cond_tuple, int target) const;

  static PriorTable Read(const std::string &path);
  void Write(const std::string &path) const;
};

// Averages head softmax outputs over a training subset, grouped by the
// aligned conditioning labels; empty groups fall back to the marginal
// average (logged).  Covers the model's decomposition factors.
PriorTable estimate_priors(const FactoredNet &model, const Corpus &corpus,
                           int max_frames = 100000, double floor = 1e-6);

// ---- scoring ----

// Log posteriors of every decomposition factor for the conditioning tuples
// required by a requested context set, for all frames of one utterance.
// Each head is evaluated once per distinct conditioning tuple.
struct FactorPosteriors {
  std::vector<Factor> factors;
  // per factor: cond tuple index -> T x out log posteriors
  std::vector<std::map<int, MatF>> log_post;
  // distinct conditioning tuples evaluated per factor (per frame)
  std::vector<long> head_evaluations;
};

FactorPosteriors compute_factor_posteriors(
    const FactoredNet &model, const MatF &frames,
    const std::vector<int> &context_ids);

// Emission scores (T x contexts):
//   sum_f [ log q_f(context|x) - scale_f * log prior_f(context) ].
// Scales are per factor, parallel to decomposition_factors(model.tag());
// a single-element vector is broadcast.
MatF scores_from_posteriors(const FactorPosteriors &fp,
                            const PriorTable &priors,
                            const PhonemeInventory &inv,
                            const std::vector<int> &context_ids,
                            const std::vector<double> &scales);

MatF batch_context_scores(const FactoredNet &model, const PriorTable &priors,
                          const MatF &frames,
                          const std::vector<int> &context_ids,
                          const std::vector<double> &scales);

// Naive single-context path, the reference for the batched one.
double emission_score(const FactoredNet &model, const PriorTable &priors,
                      const MatF &frames, int t, const TriphoneContext &ctx,
                      const std::vector<double> &scales);

// Partial-factor scoring: only the normalized center factor
// log q(C|cond,x) - scale * log prior(C|cond).
MatF center_factor_scores(const FactoredNet &model, const PriorTable &priors,
                          const MatF &frames,
                          const std::vector<int> &context_ids,
                          double scale);

// Same, over already-computed posteriors.
MatF center_scores_from_posteriors(const FactorPosteriors &fp,
                                   const PriorTable &priors,
                                   const PhonemeInventory &inv,
                                   const std::vector<int> &context_ids,
                                   double scale);

std::vector<double> resolve_scales(const FactoredNet &model,
                                   const std::vector<double> &scales);

}  // namespace fam

#endif  // FAM_PRIORS_HH_
