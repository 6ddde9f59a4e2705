// fam/prefix_tree.cc

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

#include "fam/prefix_tree.hh"

#include <algorithm>

namespace fam {

PrefixTree build_prefix_tree(const Lexicon &lexicon) {
  FAM_CHECK(lexicon.num_words() > 0) << "empty lexicon";
  PrefixTree tree;
  tree.nodes.emplace_back();  // root
  for (int w = 0; w < lexicon.num_words(); ++w) {
    const auto &pron = lexicon.prons[w];
    FAM_CHECK(!pron.empty()) << "empty pronunciation for word " << w;
    int node = 0;
    for (int ph : pron) {
      auto it = tree.nodes[node].children.find(ph);
      if (it == tree.nodes[node].children.end()) {
        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().phoneme = ph;
        tree.nodes.back().parent = node;
        tree.nodes[node].children[ph] = id;
        node = id;
      } else {
        node = it->second;
      }
    }
    tree.nodes[node].word_ends.push_back(w);
  }
  for (const auto &[ph, id] : tree.nodes[0].children)
    tree.start_phonemes.push_back(ph);
  return tree;
}

}  // namespace fam
