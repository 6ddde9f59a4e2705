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
#include <cstdio>

#include "doctest.h"
#include "fam/lm.hh"

using namespace fam;

namespace {

Lexicon toy_lexicon(int n) {
  Lexicon lex;
  for (int w = 0; w < n; ++w) {
    lex.names.push_back("w" + std::to_string(w));
    lex.prons.push_back({w % 2, (w / 2) % 2});
  }
  return lex;
}

}  // namespace

TEST_CASE("uniform lm") {
  NgramLM lm = NgramLM::Uniform(3);
  CHECK(lm.order() == 1);
  CHECK(lm.sentence_end() == 3);
  for (int w = 0; w <= 3; ++w)
    CHECK(lm.log_prob(NgramLM::kSentenceStart, w) ==
          doctest::Approx(std::log(0.25)));
  CHECK(lm.history_mass(0) == doctest::Approx(1.0));
  CHECK_THROWS(NgramLM::Uniform(0));
}

TEST_CASE("unigram counts with add-0.5 smoothing") {
  // Sequences: "0 1", "0".  Counts: w0=2, w1=1, </s>=2, vocab 2.
  // Smoothed: (c + 0.5) / (5 + 1.5).
  NgramLM lm = NgramLM::TrainUnigram({{0, 1}, {0}}, 2);
  CHECK(lm.log_prob(0, 0) == doctest::Approx(std::log(2.5 / 6.5)));
  CHECK(lm.log_prob(0, 1) == doctest::Approx(std::log(1.5 / 6.5)));
  CHECK(lm.log_prob(0, lm.sentence_end()) ==
        doctest::Approx(std::log(2.5 / 6.5)));
  // Unigram probabilities ignore the history.
  CHECK(lm.log_prob(1, 0) == lm.log_prob(NgramLM::kSentenceStart, 0));
  CHECK(lm.history_mass(0) == doctest::Approx(1.0));
  CHECK_THROWS(lm.log_prob(0, 5));
  CHECK_THROWS(NgramLM::TrainUnigram({{7}}, 2));
}

TEST_CASE("bigram absolute discounting reference values") {
  // One sequence "0 1"; bigram counts: (<s>,0)=1, (0,1)=1, (1,</s>)=1.
  NgramLM lm = NgramLM::TrainBigram({{0, 1}}, 2, 0.75);
  CHECK(lm.order() == 2);
  // Unigram base: counts w0=1.5, w1=1.5, </s>=1.5 over total 4.5 -> 1/3.
  double uni = 1.0 / 3.0;
  // p(1|0) = (1 - 0.75)/1 + 0.75 * 1 * uni
  CHECK(lm.log_prob(0, 1) == doctest::Approx(std::log(0.25 + 0.75 * uni)));
  // Unseen successor backs off: p(0|0) = b(0) * p_uni(0), b(0) = 0.75.
  CHECK(lm.log_prob(0, 0) == doctest::Approx(std::log(0.75 * uni)));
  // History with no observed bigrams at all: plain unigram.
  CHECK(lm.log_prob(1, 0) ==
        doctest::Approx(std::log(0.75 * uni)));  // (1,</s>) seen, b(1)=0.75
}

TEST_CASE("bigram histories are normalized") {
  std::vector<std::vector<int>> text = {
      {0, 1, 2}, {2, 1}, {0, 0, 3}, {3}, {1, 2, 3, 0}};
  NgramLM lm = NgramLM::TrainBigram(text, 4);
  for (int h = NgramLM::kSentenceStart; h < 4; ++h)
    CHECK(lm.history_mass(h) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("sequence_log_prob is the sum of the transitions") {
  NgramLM lm = NgramLM::TrainBigram({{0, 1}, {1, 0}}, 2);
  std::vector<int> seq = {0, 1};
  double expect = lm.log_prob(NgramLM::kSentenceStart, 0) +
                  lm.log_prob(0, 1) + lm.log_prob(1, lm.sentence_end());
  CHECK(lm.sequence_log_prob(seq) == doctest::Approx(expect));
  CHECK(lm.sequence_log_prob({}) ==
        doctest::Approx(lm.log_prob(NgramLM::kSentenceStart,
                                    lm.sentence_end())));
}

TEST_CASE("arpa round trip preserves probabilities") {
  Lexicon lex = toy_lexicon(4);
  std::vector<std::vector<int>> text = {{0, 1, 2}, {2, 1}, {3, 0}, {1}};
  for (int order : {1, 2}) {
    NgramLM lm = order == 1 ? NgramLM::TrainUnigram(text, 4)
                            : NgramLM::TrainBigram(text, 4);
    lm.WriteArpa("test_lm_rt.arpa", lex);
    NgramLM back = NgramLM::ReadArpa("test_lm_rt.arpa", lex);
    CHECK(back.order() == lm.order());
    CHECK(back.vocab_size() == 4);
    for (int h = NgramLM::kSentenceStart; h < 4; ++h)
      for (int w = 0; w <= 4; ++w)
        CHECK(back.log_prob(h, w) ==
              doctest::Approx(lm.log_prob(h, w)).epsilon(1e-5));
  }
  std::remove("test_lm_rt.arpa");
}

TEST_CASE("arpa reader rejects garbage") {
  {
    std::ofstream out("test_lm_bad.arpa");
    out << "no data section here\n";
  }
  CHECK_THROWS(NgramLM::ReadArpa("test_lm_bad.arpa", toy_lexicon(2)));
  {
    std::ofstream out("test_lm_bad.arpa");
    out << "\\data\\\nngram 1=3\n\n\\1-grams:\n-0.5\tunknown_word\n\\end\\\n";
  }
  CHECK_THROWS(NgramLM::ReadArpa("test_lm_bad.arpa", toy_lexicon(2)));
  std::remove("test_lm_bad.arpa");
  CHECK_THROWS(NgramLM::ReadArpa("test_lm_missing_file.arpa", toy_lexicon(2)));
}
