// fam/prefix_tree.hh

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

#ifndef FAM_PREFIX_TREE_HH_
#define FAM_PREFIX_TREE_HH_

#include <map>
#include <vector>

#include "fam/corpus.hh"

namespace fam {

// Lexicon organized as a deterministic shared-prefix tree.  Node 0 is the
// root and carries no phoneme; every other node is one phoneme of a
// pronunciation prefix with a 3-state HMM chain.  Homophones share the full
// chain and fork at the word-end annotation.
struct PrefixTree {
  struct Node {
    int phoneme = -1;
    int parent = -1;
    std::map<int, int> children;  // next phoneme -> node id
    std::vector<int> word_ends;   // words whose pronunciation ends here
  };

  std::vector<Node> nodes;
  std::vector<int> start_phonemes;  // distinct first phonemes, sorted

  int root_child(int phoneme) const {
    auto it = nodes[0].children.find(phoneme);
    return it == nodes[0].children.end() ? -1 : it->second;
  }
  // HMM state count (3 per non-root node).
  int num_states() const {
    return kStatesPerPhoneme * (static_cast<int>(nodes.size()) - 1);
  }
};

PrefixTree build_prefix_tree(const Lexicon &lexicon);

}  // namespace fam

#endif  // FAM_PREFIX_TREE_HH_
