// fam/lm.hh
// Count-based n-gram language model (order 1 or 2) with absolute
// discounting, plus standard ARPA text format reading and writing.

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

#ifndef FAM_LM_HH_
#define FAM_LM_HH_

#include <map>
#include <string>
#include <vector>

#include "fam/corpus.hh"

namespace fam {

// Histories: kSentenceStart or a word id.  Successors: word ids or
// kSentenceEnd.  Probabilities are natural-log internally, log10 in ARPA
// files.
class NgramLM {
 public:
  static constexpr int kSentenceStart = -1;

  static NgramLM Uniform(int vocab_size);
  static NgramLM TrainUnigram(const std::vector<std::vector<int>> &sequences,
                              int vocab_size);
  static NgramLM TrainBigram(const std::vector<std::vector<int>> &sequences,
                             int vocab_size, double discount = 0.75);

  static NgramLM ReadArpa(const std::string &path, const Lexicon &lexicon);
  void WriteArpa(const std::string &path, const Lexicon &lexicon) const;

  int order() const { return order_; }
  int vocab_size() const { return vocab_; }
  int sentence_end() const { return vocab_; }

  // prev: kSentenceStart or word id; word: word id or sentence_end().
  double log_prob(int prev, int word) const;

  double sequence_log_prob(const std::vector<int> &words) const;

  // Per-history total probability mass; should be 1 within tolerance.
  double history_mass(int prev) const;

 private:
  int order_ = 1;
  int vocab_ = 0;
  std::vector<double> unigram_;              // vocab+1 entries, log
  std::map<std::pair<int, int>, double> bigram_;  // log
  std::map<int, double> backoff_;            // per history, log
};

}  // namespace fam

#endif  // FAM_LM_HH_
