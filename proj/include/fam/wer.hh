// fam/wer.hh
// Corpus-level word error rate by Levenshtein alignment with unit costs.

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

#ifndef FAM_WER_HH_
#define FAM_WER_HH_

#include <map>
#include <string>
#include <vector>

#include "fam/common.hh"

namespace fam {

struct WerReport {
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long reference_words = 0;

  double percent() const {
    FAM_CHECK(reference_words > 0) << "empty reference";
    return 100.0 * (substitutions + deletions + insertions) /
           static_cast<double>(reference_words);
  }
};

// Edit counts of one aligned pair; ties prefer substitution over
// deletion over insertion (fixed for determinism, counts are minimal
// either way).
WerReport align_words(const std::vector<int> &reference,
                      const std::vector<int> &hypothesis);

// Corpus-level: sum of edits over sum of reference words, matched by
// utterance id.  Missing or extra ids are an error.
WerReport wer(const std::map<std::string, std::vector<int>> &references,
              const std::map<std::string, std::vector<int>> &hypotheses);

}  // namespace fam

#endif  // FAM_WER_HH_
