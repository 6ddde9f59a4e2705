// fam/inventory.hh
// Phoneme set, context-independent state labels and triphone state classes.

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

#ifndef FAM_INVENTORY_HH_
#define FAM_INVENTORY_HH_

#include <string>
#include <vector>

#include "fam/common.hh"

namespace fam {

constexpr int kStatesPerPhoneme = 3;

// Phoneme alphabet plus a distinguished single-state silence entity.
// Symbol ids: 0..P-1 are phonemes, P is silence.  Center-state label ids:
// phoneme*3+state for 0..3P-1, 3P is the silence label.
class PhonemeInventory {
 public:
  PhonemeInventory(std::vector<std::string> phonemes, std::string silence);

  // p0..p{P-1} with silence "sil"; handy for synthetic corpora.
  static PhonemeInventory Synthetic(int num_phonemes);

  // Line-based text file: first line is the silence symbol, then one
  // phoneme per line.
  static PhonemeInventory Read(const std::string &path);
  void Write(const std::string &path) const;

  int num_phonemes() const { return static_cast<int>(phonemes_.size()); }
  // Context alphabet size P+1 (phonemes plus silence).
  int num_symbols() const { return num_phonemes() + 1; }
  int silence_symbol() const { return num_phonemes(); }
  // 3P+1 state labels.
  int num_center_labels() const {
    return kStatesPerPhoneme * num_phonemes() + 1;
  }
  int silence_center_label() const {
    return kStatesPerPhoneme * num_phonemes();
  }

  int center_label(int phoneme, int state) const;
  // Phoneme of a non-silence center label.
  int center_phoneme(int label) const { return label / kStatesPerPhoneme; }
  int center_state(int label) const { return label % kStatesPerPhoneme; }

  const std::string &symbol_name(int symbol) const;
  std::string center_label_name(int label) const;
  int find_symbol(const std::string &name) const;  // -1 when unknown

 private:
  std::vector<std::string> phonemes_;
  std::string silence_;
};

// 3P+1, the CI state-label count.
int state_label_count(const PhonemeInventory &inv);

// The state class (phi_l, sigma_c, phi_r).  Fields are ids as defined by
// PhonemeInventory.  The silence label always has silence on both sides.
struct TriphoneContext {
  int left = 0;    // symbol id
  int center = 0;  // center label id
  int right = 0;   // symbol id

  bool operator==(const TriphoneContext &o) const = default;
};

// Dense enumeration: phoneme-state contexts first,
// ((left * 3P + center) * (P+1) + right), then the silence context last.
int context_count(const PhonemeInventory &inv);
int context_index(const PhonemeInventory &inv, const TriphoneContext &ctx);
TriphoneContext context_from_index(const PhonemeInventory &inv, int index);

// Every valid context exactly once, in dense-index order.
std::vector<TriphoneContext> enumerate_contexts(const PhonemeInventory &inv);

std::string context_name(const PhonemeInventory &inv,
                         const TriphoneContext &ctx);

// State class of state `state` of the phoneme at `pos` in an utterance-level
// phoneme string (symbol ids, silence entries included).  Neighbors are the
// adjacent entries, with silence substituting at the edges; silence itself is
// context-independent.
TriphoneContext map_state_class(const PhonemeInventory &inv,
                                const std::vector<int> &phoneme_string,
                                int pos, int state);

}  // namespace fam

#endif  // FAM_INVENTORY_HH_
