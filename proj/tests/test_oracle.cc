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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fam/decoder.hh"
#include "fam/lm.hh"
#include "fam/oracle.hh"

using namespace fam;

TEST_CASE("tabular task validation") {
  TabularTask task = TabularTask::Random(2, 3, 1);
  CHECK_NOTHROW(task.validate());
  task.joint(0, 0) += 0.5;
  CHECK_THROWS(task.validate());
  task = TabularTask::Random(2, 3, 1);
  task.joint(0, 0) = -task.joint(0, 0);
  CHECK_THROWS(task.validate());
}

TEST_CASE("exact posteriors: rows sum to one") {
  TabularTask task = TabularTask::Random(3, 4, 5);
  ExactPosteriors ep = exact_posteriors(task);
  for (int x = 0; x < task.num_features; ++x) {
    REQUIRE(ep.valid[x]);
    CHECK(ep.posterior.row(x).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((ep.posterior.row(x).array() >= 0).all());
  }
}

TEST_CASE("zero-marginal feature symbols are excluded") {
  TabularTask task = TabularTask::Random(2, 3, 9);
  double mass = task.joint.row(1).sum();
  task.joint.row(1).setZero();
  task.joint /= task.joint.sum();
  ExactPosteriors ep = exact_posteriors(task);
  CHECK(ep.valid[0]);
  CHECK(!ep.valid[1]);
  CHECK(ep.valid[2]);
  CHECK(std::isnan(ep.posterior(1, 0)));
  (void)mass;
}

TEST_CASE("chain-rule factorizations reproduce the posterior exactly") {
  // Forward and backward decompositions are exact chain rules, no
  // independence assumption: the factor product must equal the joint
  // posterior to machine precision on any task.
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    TabularTask task = TabularTask::Random(2, 4, seed);
    CHECK(max_factorization_deviation(task, DecompTag::kTriForward) < 1e-12);
    CHECK(max_factorization_deviation(task, DecompTag::kTriBackward) < 1e-12);
  }
}

TEST_CASE("symmetric factorization is exact only under independence") {
  TabularTask ind = TabularTask::RandomIndependent(2, 4, 11);
  CHECK(max_factorization_deviation(ind, DecompTag::kTriSymmetric) < 1e-10);
  TabularTask dep = TabularTask::Random(2, 4, 11);
  CHECK(max_factorization_deviation(dep, DecompTag::kTriSymmetric) > 0.01);
}

TEST_CASE("factor tables are conditionals") {
  TabularTask task = TabularTask::Random(2, 3, 21);
  ExactFactors ef = exact_factors(task, DecompTag::kTriForward);
  REQUIRE(ef.factors.size() == 3);
  for (size_t f = 0; f < ef.factors.size(); ++f)
    for (int x = 0; x < task.num_features; ++x) {
      const MatD &tbl = ef.tables[f][x];
      for (int ct = 0; ct < tbl.rows(); ++ct) {
        if (std::isnan(tbl(ct, 0))) continue;
        CHECK(tbl.row(ct).sum() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
}

TEST_CASE("count-based priors from an aligned corpus") {
  GeneratorConfig gcfg;
  gcfg.num_phonemes = 3;
  gcfg.feature_dim = 4;
  gcfg.vocab_size = 5;
  gcfg.seed = 2;
  Lexicon lex = generate_lexicon(gcfg);
  Corpus corpus = generate_corpus(gcfg, lex, 30);
  Factor center_given_left = factor_from_key("C|L");
  MatD prior = count_based_prior(corpus, center_given_left, 1000000);
  REQUIRE(prior.rows() ==
          cond_tuple_count(corpus.inventory, center_given_left));
  for (int r = 0; r < prior.rows(); ++r)
    CHECK(prior.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
  // Silence frames dominate the silence-left row's silence-center column?
  // At least: every entry is a probability.
  CHECK((prior.array() >= 0).all());
  CHECK((prior.array() <= 1).all());

  // max_frames restricts the counts deterministically.
  MatD small = count_based_prior(corpus, center_given_left, 50);
  CHECK(small != prior);
}

// ---- exhaustive decoding ----

namespace {

struct ToyTask {
  PhonemeInventory inv{PhonemeInventory::Synthetic(3)};
  Lexicon lexicon;
  NgramLM lm;
  TransitionModel tm;

  ToyTask() {
    lexicon.names = {"w0", "w1"};
    lexicon.prons = {{0, 1}, {2, 0}};
    std::vector<std::vector<int>> text = {{0, 1}, {1, 0}, {0, 0}, {1}};
    lm = NgramLM::TrainBigram(text, lexicon.num_words());
  }

  // Emission matrix that makes the forced path of `words` sharply optimal.
  MatF sharp_emission(const std::vector<int> &words, int frames_per_state) {
    std::vector<int> ps;
    ps.push_back(inv.silence_symbol());
    for (int w : words) {
      for (int p : lexicon.prons[w]) ps.push_back(p);
      ps.push_back(inv.silence_symbol());
    }
    std::vector<int> path;  // context ids per frame
    for (size_t pos = 0; pos < ps.size(); ++pos) {
      int states = ps[pos] == inv.silence_symbol() ? 1 : kStatesPerPhoneme;
      for (int st = 0; st < states; ++st) {
        int id = context_index(inv, map_state_class(inv, ps, static_cast<int>(pos), st));
        for (int k = 0; k < frames_per_state; ++k) path.push_back(id);
      }
    }
    MatF em = MatF::Constant(static_cast<int>(path.size()), context_count(inv),
                             -20.0f);
    for (size_t t = 0; t < path.size(); ++t)
      em(static_cast<int>(t), path[t]) = 0.0f;
    return em;
  }
};

}  // namespace

TEST_CASE("exhaustive decode recovers a sharply encoded word sequence") {
  ToyTask toy;
  for (std::vector<int> truth :
       {std::vector<int>{0}, std::vector<int>{1, 0}, std::vector<int>{0, 1}}) {
    MatF em = toy.sharp_emission(truth, 2);
    ExhaustiveResult res = exhaustive_decode(em, toy.lexicon, toy.lm, toy.inv,
                                             toy.tm, 1.0, 3);
    CHECK(res.words == truth);
    CHECK(res.sequences == 2 + 4 + 8);
  }
}

TEST_CASE("exhaustive decode is invariant to constant emission shifts") {
  ToyTask toy;
  MatF em = toy.sharp_emission({1, 0}, 2);
  ExhaustiveResult a = exhaustive_decode(em, toy.lexicon, toy.lm, toy.inv,
                                         toy.tm, 1.0, 2);
  MatF shifted = em.array() + 3.7f;
  ExhaustiveResult b = exhaustive_decode(shifted, toy.lexicon, toy.lm, toy.inv,
                                         toy.tm, 1.0, 2);
  CHECK(a.words == b.words);
  // Score shifts by T * 3.7.
  CHECK(b.score - a.score ==
        doctest::Approx(3.7 * em.rows()).epsilon(1e-4));
}

TEST_CASE("exhaustive decode enforces the enumeration cap") {
  ToyTask toy;
  MatF em = toy.sharp_emission({0}, 1);
  CHECK_THROWS(exhaustive_decode(em, toy.lexicon, toy.lm, toy.inv, toy.tm,
                                 1.0, 40, 1000));
}

TEST_CASE("exhaustive decode fails when no sequence fits") {
  ToyTask toy;
  // 2 frames cannot fit silence + 2 phonemes * 3 states + silence.
  MatF em = MatF::Zero(2, context_count(toy.inv));
  CHECK_THROWS(exhaustive_decode(em, toy.lexicon, toy.lm, toy.inv, toy.tm,
                                 1.0, 1));
}
