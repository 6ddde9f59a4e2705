// fam/oracle.cc

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

#include "fam/oracle.hh"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>

namespace fam {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

void TabularTask::validate() const {
  FAM_CHECK(num_features >= 1) << "empty feature alphabet";
  FAM_CHECK(joint.rows() == num_features &&
            joint.cols() == context_count(inv))
      << "joint table is " << joint.rows() << "x" << joint.cols()
      << ", expected " << num_features << "x" << context_count(inv);
  FAM_CHECK((joint.array() >= 0).all()) << "negative joint probability";
  FAM_CHECK(std::abs(joint.sum() - 1.0) < 1e-9)
      << "joint table sums to " << joint.sum();
}

TabularTask TabularTask::Random(int num_phonemes, int num_features,
                                std::uint64_t seed) {
  TabularTask task;
  task.inv = PhonemeInventory::Synthetic(num_phonemes);
  task.num_features = num_features;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  task.joint.resize(num_features, context_count(task.inv));
  const auto contexts = enumerate_contexts(task.inv);
  for (int x = 0; x < num_features; ++x) {
    for (size_t i = 0; i < contexts.size(); ++i) {
      double p = u(rng);
      // Couple the left and right contexts given x so the symmetric
      // independence assumption is measurably wrong.
      if (contexts[i].left == contexts[i].right) p *= 5.0;
      task.joint(x, static_cast<int>(i)) = p;
    }
  }
  task.joint /= task.joint.sum();
  task.validate();
  return task;
}

TabularTask TabularTask::RandomIndependent(int num_phonemes, int num_features,
                                           std::uint64_t seed) {
  TabularTask task;
  task.inv = PhonemeInventory::Synthetic(num_phonemes);
  task.num_features = num_features;
  const int P = num_phonemes;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto random_dist = [&](int n) {
    VecD v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    v /= v.sum();
    return v;
  };
  VecD px = random_dist(num_features);
  task.joint = MatD::Zero(num_features, context_count(task.inv));
  for (int x = 0; x < num_features; ++x) {
    VecD pl = random_dist(P + 1);
    VecD pc = random_dist(kStatesPerPhoneme * P);
    VecD pr = random_dist(P + 1);
    for (int l = 0; l <= P; ++l)
      for (int c = 0; c < kStatesPerPhoneme * P; ++c)
        for (int r = 0; r <= P; ++r) {
          int idx = context_index(task.inv, {l, c, r});
          task.joint(x, idx) = px(x) * pl(l) * pc(c) * pr(r);
        }
  }
  task.validate();
  return task;
}

ExactPosteriors exact_posteriors(const TabularTask &task) {
  task.validate();
  ExactPosteriors ep;
  ep.posterior = MatD::Constant(task.num_features, task.joint.cols(), kNan);
  ep.valid.assign(task.num_features, 1);
  for (int x = 0; x < task.num_features; ++x) {
    double px = task.joint.row(x).sum();
    if (px <= 0) {
      ep.valid[x] = 0;
      std::cerr << "oracle: feature symbol " << x
                << " has zero marginal, excluded\n";
      continue;
    }
    ep.posterior.row(x) = task.joint.row(x) / px;
  }
  return ep;
}

ExactFactors exact_factors(const TabularTask &task, DecompTag tag) {
  task.validate();
  ExactFactors ef;
  ef.factors = decomposition_factors(tag);
  const auto contexts = enumerate_contexts(task.inv);
  for (const Factor &f : ef.factors) {
    const int n_ct = cond_tuple_count(task.inv, f);
    const int card = var_cardinality(task.inv, f.target);
    std::vector<MatD> per_x;
    for (int x = 0; x < task.num_features; ++x) {
      MatD num = MatD::Zero(n_ct, card);
      VecD den = VecD::Zero(n_ct);
      for (size_t i = 0; i < contexts.size(); ++i) {
        int ct = cond_tuple_index(task.inv, f, contexts[i]);
        int tv = var_value(contexts[i], f.target);
        double p = task.joint(x, static_cast<int>(i));
        num(ct, tv) += p;
        den(ct) += p;
      }
      for (int ct = 0; ct < n_ct; ++ct) {
        if (den(ct) > 0)
          num.row(ct) /= den(ct);
        else
          num.row(ct).setConstant(kNan);
      }
      per_x.push_back(std::move(num));
    }
    ef.tables.push_back(std::move(per_x));
  }
  return ef;
}

MatD factor_product(const TabularTask &task, const ExactFactors &factors) {
  const auto contexts = enumerate_contexts(task.inv);
  MatD prod = MatD::Ones(task.num_features, task.joint.cols());
  for (int x = 0; x < task.num_features; ++x) {
    double px = task.joint.row(x).sum();
    if (px <= 0) {
      prod.row(x).setConstant(kNan);
      continue;
    }
    for (size_t i = 0; i < contexts.size(); ++i) {
      for (size_t f = 0; f < factors.factors.size(); ++f) {
        int ct = cond_tuple_index(task.inv, factors.factors[f], contexts[i]);
        int tv = var_value(contexts[i], factors.factors[f].target);
        prod(x, static_cast<int>(i)) *= factors.tables[f][x](ct, tv);
      }
    }
  }
  return prod;
}

double max_factorization_deviation(const TabularTask &task, DecompTag tag) {
  ExactPosteriors ep = exact_posteriors(task);
  MatD prod = factor_product(task, exact_factors(task, tag));
  double dev = 0;
  for (int x = 0; x < task.num_features; ++x) {
    if (!ep.valid[x]) continue;
    for (int c = 0; c < prod.cols(); ++c) {
      if (std::isnan(prod(x, c))) continue;
      dev = std::max(dev, std::abs(prod(x, c) - ep.posterior(x, c)));
    }
  }
  return dev;
}

MatD count_based_prior(const Corpus &corpus, const Factor &factor,
                       long max_frames) {
  const PhonemeInventory &inv = corpus.inventory;
  const int n_ct = cond_tuple_count(inv, factor);
  const int card = var_cardinality(inv, factor.target);
  MatD counts = MatD::Zero(n_ct, card);
  long seen = 0;
  for (const Utterance &utt : corpus.utterances) {
    for (const TriphoneContext &ctx : utt.alignment) {
      if (seen++ >= max_frames) break;
      counts(cond_tuple_index(inv, factor, ctx), var_value(ctx, factor.target)) +=
          1;
    }
    if (seen >= max_frames) break;
  }
  for (int ct = 0; ct < n_ct; ++ct) {
    double total = counts.row(ct).sum();
    if (total > 0)
      counts.row(ct) /= total;
    else
      counts.row(ct).setConstant(1.0 / card);
  }
  return counts;
}

ExhaustiveResult exhaustive_decode(const MatF &emission,
                                   const Lexicon &lexicon, const NgramLM &lm,
                                   const PhonemeInventory &inv,
                                   const TransitionModel &tm, double lm_scale,
                                   int max_words, long enumeration_cap) {
  FAM_CHECK(max_words >= 1) << "max_words must be >= 1";
  const int V = lexicon.num_words();
  long total = 0, pow = 1;
  for (int k = 1; k <= max_words; ++k) {
    FAM_CHECK(pow <= enumeration_cap / V)
        << "enumeration space exceeds cap " << enumeration_cap;
    pow *= V;
    total += pow;
    FAM_CHECK(total <= enumeration_cap)
        << "enumeration space " << total << " exceeds cap " << enumeration_cap;
  }
  ExhaustiveResult best;
  best.score = kNegInf;
  std::vector<int> seq;
  auto score_seq = [&]() {
    ++best.sequences;
    ForcedGraph g = build_forced_graph(seq, lexicon, inv, tm);
    double s = forced_path_score(emission, g);
    if (s == kNegInf) return;  // utterance too short for this sequence
    s += lm_scale * lm.sequence_log_prob(seq);
    if (s > best.score) {
      best.score = s;
      best.words = seq;
    }
  };
  // Shorter sequences first, lexicographic within a length.
  for (int len = 1; len <= max_words; ++len) {
    seq.assign(len, 0);
    for (;;) {
      score_seq();
      int pos = len - 1;
      while (pos >= 0 && seq[pos] == V - 1) seq[pos--] = 0;
      if (pos < 0) break;
      ++seq[pos];
    }
  }
  FAM_CHECK(best.score > kNegInf)
      << "no word sequence fits in " << emission.rows() << " frames";
  return best;
}

}  // namespace fam
