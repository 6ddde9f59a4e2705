// fam/lm.cc

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

#include "fam/lm.hh"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fam {

namespace {
constexpr double kLn10 = 2.302585092994046;
}

NgramLM NgramLM::Uniform(int vocab_size) {
  FAM_CHECK(vocab_size >= 1) << "empty vocabulary";
  NgramLM lm;
  lm.order_ = 1;
  lm.vocab_ = vocab_size;
  lm.unigram_.assign(vocab_size + 1, -std::log(vocab_size + 1.0));
  return lm;
}

NgramLM NgramLM::TrainUnigram(const std::vector<std::vector<int>> &sequences,
                              int vocab_size) {
  FAM_CHECK(vocab_size >= 1) << "empty vocabulary";
  NgramLM lm;
  lm.order_ = 1;
  lm.vocab_ = vocab_size;
  // Add-0.5 smoothing so every word and the end token have mass.
  std::vector<double> counts(vocab_size + 1, 0.5);
  double total = 0.5 * (vocab_size + 1);
  for (const auto &seq : sequences) {
    for (int w : seq) {
      FAM_CHECK(w >= 0 && w < vocab_size) << "word id out of range: " << w;
      counts[w] += 1;
    }
    counts[vocab_size] += 1;  // </s>
    total += seq.size() + 1;
  }
  lm.unigram_.resize(vocab_size + 1);
  for (int w = 0; w <= vocab_size; ++w)
    lm.unigram_[w] = std::log(counts[w] / total);
  return lm;
}

NgramLM NgramLM::TrainBigram(const std::vector<std::vector<int>> &sequences,
                             int vocab_size, double discount) {
  FAM_CHECK(discount > 0 && discount < 1) << "discount must be in (0,1)";
  NgramLM lm = TrainUnigram(sequences, vocab_size);
  lm.order_ = 2;
  // Interpolated absolute discounting:
  //   p(w|h) = max(c(h,w)-d,0)/c(h) + b(h) * p_uni(w),
  //   b(h) = d * N1+(h) / c(h).
  std::map<int, std::map<int, long>> counts;
  for (const auto &seq : sequences) {
    int prev = kSentenceStart;
    for (int w : seq) {
      ++counts[prev][w];
      prev = w;
    }
    ++counts[prev][vocab_size];
  }
  for (const auto &[hist, succ] : counts) {
    long total = 0;
    for (const auto &[w, c] : succ) total += c;
    double b = discount * static_cast<double>(succ.size()) /
               static_cast<double>(total);
    lm.backoff_[hist] = std::log(b);
    for (const auto &[w, c] : succ) {
      double p = (static_cast<double>(c) - discount) /
                     static_cast<double>(total) +
                 b * std::exp(lm.unigram_[w]);
      lm.bigram_[{hist, w}] = std::log(p);
    }
  }
  return lm;
}

double NgramLM::log_prob(int prev, int word) const {
  FAM_CHECK(word >= 0 && word <= vocab_) << "bad word id " << word;
  FAM_CHECK(prev >= kSentenceStart && prev < vocab_)
      << "bad history id " << prev;
  if (order_ == 1) return unigram_[word];
  auto it = bigram_.find({prev, word});
  if (it != bigram_.end()) return it->second;
  auto bo = backoff_.find(prev);
  double b = bo == backoff_.end() ? 0.0 : bo->second;
  return b + unigram_[word];
}

double NgramLM::sequence_log_prob(const std::vector<int> &words) const {
  double lp = 0;
  int prev = kSentenceStart;
  for (int w : words) {
    lp += log_prob(prev, w);
    prev = w;
  }
  return lp + log_prob(prev, sentence_end());
}

double NgramLM::history_mass(int prev) const {
  double mass = 0;
  for (int w = 0; w <= vocab_; ++w) mass += std::exp(log_prob(prev, w));
  return mass;
}

// ---- ARPA ----

namespace {
std::string token_name(int id, const Lexicon &lex) {
  if (id == NgramLM::kSentenceStart) return "<s>";
  if (id == lex.num_words()) return "</s>";
  return lex.names[id];
}

int token_id(const std::string &name, const Lexicon &lex) {
  if (name == "<s>") return NgramLM::kSentenceStart;
  if (name == "</s>") return lex.num_words();
  for (int w = 0; w < lex.num_words(); ++w)
    if (lex.names[w] == name) return w;
  throw Error("ARPA token not in lexicon: " + name);
}
}  // namespace

void NgramLM::WriteArpa(const std::string &path, const Lexicon &lexicon) const {
  FAM_CHECK(lexicon.num_words() == vocab_)
      << "lexicon size does not match LM vocabulary";
  std::ofstream out(path);
  FAM_CHECK(out.good()) << "cannot write LM file " << path;
  out.precision(7);
  out << "\\data\\\n";
  // <s> carries no probability of its own but holds a backoff weight.
  out << "ngram 1=" << (vocab_ + 2) << "\n";
  if (order_ == 2) out << "ngram 2=" << bigram_.size() << "\n";
  out << "\n\\1-grams:\n";
  auto backoff_of = [&](int hist) {
    auto it = backoff_.find(hist);
    return it == backoff_.end() ? 0.0 : it->second / kLn10;
  };
  out << "-99\t<s>";
  if (order_ == 2) out << "\t" << backoff_of(kSentenceStart);
  out << "\n";
  for (int w = 0; w <= vocab_; ++w) {
    out << unigram_[w] / kLn10 << "\t" << token_name(w, lexicon);
    if (order_ == 2 && w < vocab_) out << "\t" << backoff_of(w);
    out << "\n";
  }
  if (order_ == 2) {
    out << "\n\\2-grams:\n";
    for (const auto &[key, lp] : bigram_) {
      out << lp / kLn10 << "\t" << token_name(key.first, lexicon) << " "
          << token_name(key.second, lexicon) << "\n";
    }
  }
  out << "\n\\end\\\n";
}

NgramLM NgramLM::ReadArpa(const std::string &path, const Lexicon &lexicon) {
  std::ifstream in(path);
  FAM_CHECK(in.good()) << "cannot open LM file " << path;
  NgramLM lm;
  lm.vocab_ = lexicon.num_words();
  lm.unigram_.assign(lm.vocab_ + 1, -99 * kLn10);
  std::string line;
  // \data\ section
  bool have_data = false;
  std::vector<long> ngram_counts;
  while (std::getline(in, line)) {
    if (line.rfind("\\data\\", 0) == 0) {
      have_data = true;
      continue;
    }
    if (have_data) {
      if (line.rfind("ngram", 0) == 0) {
        size_t eq = line.find('=');
        FAM_CHECK(eq != std::string::npos) << path << ": malformed " << line;
        ngram_counts.push_back(std::stol(line.substr(eq + 1)));
        continue;
      }
      if (!line.empty() && line[0] == '\\') break;
    }
  }
  FAM_CHECK(have_data && !ngram_counts.empty())
      << path << ": missing \\data\\ section";
  FAM_CHECK(ngram_counts.size() <= 2)
      << path << ": only order 1 and 2 are supported";
  lm.order_ = static_cast<int>(ngram_counts.size());
  // `line` now holds "\1-grams:".
  int current = 0;
  if (line.rfind("\\1-grams:", 0) == 0) current = 1;
  while (current != 0 && std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("\\end\\", 0) == 0) break;
    if (line.rfind("\\2-grams:", 0) == 0) {
      current = 2;
      continue;
    }
    std::istringstream ss(line);
    double logp = 0;
    ss >> logp;
    FAM_CHECK(!ss.fail()) << path << ": malformed n-gram line: " << line;
    if (current == 1) {
      std::string tok;
      ss >> tok;
      double bow = 0;
      ss >> bow;  // optional
      int id = token_id(tok, lexicon);
      if (id != kSentenceStart) lm.unigram_[id] = logp * kLn10;
      if (lm.order_ == 2 && id != lm.vocab_ && !ss.fail() && bow != 0.0)
        lm.backoff_[id] = bow * kLn10;
      else if (lm.order_ == 2 && id != lm.vocab_)
        lm.backoff_[id] = 0.0;
    } else {
      std::string t1, t2;
      ss >> t1 >> t2;
      lm.bigram_[{token_id(t1, lexicon), token_id(t2, lexicon)}] =
          logp * kLn10;
    }
  }
  return lm;
}

}  // namespace fam
