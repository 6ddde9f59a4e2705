// fam/oracle.hh
// Exact brute-force references on small discrete problems: joint posterior
// tables, exact factor conditionals, count-based priors and exhaustive
// decoding.  These are the ground truth the factorization and search tests
// compare against.

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

#ifndef FAM_ORACLE_HH_
#define FAM_ORACLE_HH_

#include <vector>

#include "fam/decoder.hh"
#include "fam/priors.hh"

namespace fam {

// A fully tabulated joint p(x, phi_l, sigma_c, phi_r) over a discrete
// feature alphabet and a small inventory.  Exact posteriors and factor
// conditionals follow by enumeration, which is what permits 1e-12
// comparisons.
struct TabularTask {
  PhonemeInventory inv{PhonemeInventory::Synthetic(2)};
  int num_features = 0;
  MatD joint;  // num_features x context_count(inv); >= 0, sums to 1

  void validate() const;

  // Random positive joint; left and right contexts are dependent given x
  // in general position.
  static TabularTask Random(int num_phonemes, int num_features,
                            std::uint64_t seed);
  // Product-form joint p(x) p(c|x) p(l|x) p(r|x) over phoneme-state
  // contexts only, so the contexts are independent given the feature.
  static TabularTask RandomIndependent(int num_phonemes, int num_features,
                                       std::uint64_t seed);
};

struct ExactPosteriors {
  MatD posterior;           // num_features x contexts; valid rows sum to 1
  std::vector<char> valid;  // feature symbols with nonzero marginal
};

ExactPosteriors exact_posteriors(const TabularTask &task);

// Per-factor conditional tables p(target | cond, x) by marginalizing the
// joint.  tables[f][x] is cond-tuples x target-cardinality; entries whose
// conditioning event has zero probability are NaN (undefined).
struct ExactFactors {
  std::vector<Factor> factors;
  std::vector<std::vector<MatD>> tables;
};

ExactFactors exact_factors(const TabularTask &task, DecompTag tag);

// Reconstruction of the joint posterior from the factor tables; NaN where
// any needed entry is undefined.
MatD factor_product(const TabularTask &task, const ExactFactors &factors);

// Max |product - posterior| over entries defined on both sides.
double max_factorization_deviation(const TabularTask &task, DecompTag tag);

// Empirical conditional frequencies p(target | cond) over aligned corpus
// frames; rows with no observations are uniform.  Reference for the
// activation-averaged priors.
MatD count_based_prior(const Corpus &corpus, const Factor &factor,
                       long max_frames = 1000000);

// Exact argmax over all word sequences up to max_words and all monotone
// alignments, with the same emission table, transition model and LM scale
// as the beam decoder.  Ties keep the enumeration-first sequence (shorter
// first, then lexicographic in word ids).
struct ExhaustiveResult {
  std::vector<int> words;
  double score = 0;
  long sequences = 0;  // scored hypotheses
};

ExhaustiveResult exhaustive_decode(const MatF &emission,
                                   const Lexicon &lexicon, const NgramLM &lm,
                                   const PhonemeInventory &inv,
                                   const TransitionModel &tm, double lm_scale,
                                   int max_words, long enumeration_cap = 1000000);

}  // namespace fam

#endif  // FAM_ORACLE_HH_
