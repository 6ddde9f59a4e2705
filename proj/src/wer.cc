// fam/wer.cc

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

#include "fam/wer.hh"

#include <algorithm>

namespace fam {

WerReport align_words(const std::vector<int> &reference,
                      const std::vector<int> &hypothesis) {
  const int n = static_cast<int>(reference.size());
  const int m = static_cast<int>(hypothesis.size());
  // cost[i][j]: edits aligning ref[0..i) with hyp[0..j).
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1));
  for (int i = 0; i <= n; ++i) cost[i][0] = i;
  for (int j = 0; j <= m; ++j) cost[0][j] = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      int sub = cost[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]);
      int del = cost[i - 1][j] + 1;
      int ins = cost[i][j - 1] + 1;
      cost[i][j] = std::min({sub, del, ins});
    }
  }
  WerReport r;
  r.reference_words = n;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] ==
            cost[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1])) {
      if (reference[i - 1] != hypothesis[j - 1]) ++r.substitutions;
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++r.deletions;
      --i;
    } else {
      ++r.insertions;
      --j;
    }
  }
  return r;
}

WerReport wer(const std::map<std::string, std::vector<int>> &references,
              const std::map<std::string, std::vector<int>> &hypotheses) {
  FAM_CHECK(references.size() == hypotheses.size())
      << "utterance count mismatch: " << references.size()
      << " references vs " << hypotheses.size() << " hypotheses";
  WerReport total;
  for (const auto &[id, ref] : references) {
    auto it = hypotheses.find(id);
    FAM_CHECK(it != hypotheses.end()) << "no hypothesis for utterance " << id;
    WerReport r = align_words(ref, it->second);
    total.substitutions += r.substitutions;
    total.deletions += r.deletions;
    total.insertions += r.insertions;
    total.reference_words += r.reference_words;
  }
  return total;
}

}  // namespace fam
