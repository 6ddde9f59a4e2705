// fam/inventory.cc

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

#include "fam/inventory.hh"

#include <fstream>
#include <set>

namespace fam {

PhonemeInventory::PhonemeInventory(std::vector<std::string> phonemes,
                                   std::string silence)
    : phonemes_(std::move(phonemes)), silence_(std::move(silence)) {
  FAM_CHECK(phonemes_.size() >= 2) << "inventory needs at least 2 phonemes";
  FAM_CHECK(!silence_.empty()) << "empty silence symbol";
  std::set<std::string> seen;
  for (const auto &p : phonemes_) {
    FAM_CHECK(!p.empty()) << "empty phoneme symbol";
    FAM_CHECK(p != silence_) << "phoneme collides with silence: " << p;
    FAM_CHECK(seen.insert(p).second) << "duplicate phoneme: " << p;
  }
}

PhonemeInventory PhonemeInventory::Synthetic(int num_phonemes) {
  std::vector<std::string> ph;
  for (int i = 0; i < num_phonemes; ++i) ph.push_back("p" + std::to_string(i));
  return PhonemeInventory(std::move(ph), "sil");
}

PhonemeInventory PhonemeInventory::Read(const std::string &path) {
  std::ifstream in(path);
  FAM_CHECK(in.good()) << "cannot open inventory file " << path;
  std::string silence;
  FAM_CHECK(static_cast<bool>(std::getline(in, silence)))
      << "inventory file is empty: " << path;
  std::vector<std::string> ph;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ph.push_back(line);
  }
  return PhonemeInventory(std::move(ph), silence);
}

void PhonemeInventory::Write(const std::string &path) const {
  std::ofstream out(path);
  FAM_CHECK(out.good()) << "cannot write inventory file " << path;
  out << silence_ << "\n";
  for (const auto &p : phonemes_) out << p << "\n";
}

int PhonemeInventory::center_label(int phoneme, int state) const {
  FAM_CHECK(phoneme >= 0 && phoneme < num_phonemes())
      << "bad phoneme id " << phoneme;
  FAM_CHECK(state >= 0 && state < kStatesPerPhoneme) << "bad state " << state;
  return phoneme * kStatesPerPhoneme + state;
}

const std::string &PhonemeInventory::symbol_name(int symbol) const {
  FAM_CHECK(symbol >= 0 && symbol <= num_phonemes())
      << "bad symbol id " << symbol;
  return symbol == num_phonemes() ? silence_ : phonemes_[symbol];
}

std::string PhonemeInventory::center_label_name(int label) const {
  if (label == silence_center_label()) return silence_;
  return phonemes_[center_phoneme(label)] + "." +
         std::to_string(center_state(label));
}

int PhonemeInventory::find_symbol(const std::string &name) const {
  if (name == silence_) return silence_symbol();
  for (int i = 0; i < num_phonemes(); ++i)
    if (phonemes_[i] == name) return i;
  return -1;
}

int state_label_count(const PhonemeInventory &inv) {
  return inv.num_center_labels();
}

int context_count(const PhonemeInventory &inv) {
  const int s = inv.num_symbols();
  return s * (inv.num_center_labels() - 1) * s + 1;
}

int context_index(const PhonemeInventory &inv, const TriphoneContext &ctx) {
  const int s = inv.num_symbols();
  const int c = inv.num_center_labels() - 1;  // phoneme-state labels
  if (ctx.center == inv.silence_center_label()) {
    FAM_CHECK(ctx.left == inv.silence_symbol() &&
              ctx.right == inv.silence_symbol())
        << "silence center with non-silence context";
    return s * c * s;
  }
  FAM_CHECK(ctx.left >= 0 && ctx.left < s) << "bad left symbol " << ctx.left;
  FAM_CHECK(ctx.right >= 0 && ctx.right < s)
      << "bad right symbol " << ctx.right;
  FAM_CHECK(ctx.center >= 0 && ctx.center < c)
      << "bad center label " << ctx.center;
  return (ctx.left * c + ctx.center) * s + ctx.right;
}

TriphoneContext context_from_index(const PhonemeInventory &inv, int index) {
  const int s = inv.num_symbols();
  const int c = inv.num_center_labels() - 1;
  FAM_CHECK(index >= 0 && index < context_count(inv))
      << "context index out of range: " << index;
  if (index == s * c * s)
    return {inv.silence_symbol(), inv.silence_center_label(),
            inv.silence_symbol()};
  TriphoneContext ctx;
  ctx.right = index % s;
  ctx.center = (index / s) % c;
  ctx.left = index / (s * c);
  return ctx;
}

std::vector<TriphoneContext> enumerate_contexts(const PhonemeInventory &inv) {
  std::vector<TriphoneContext> out;
  out.reserve(context_count(inv));
  for (int i = 0; i < context_count(inv); ++i)
    out.push_back(context_from_index(inv, i));
  return out;
}

std::string context_name(const PhonemeInventory &inv,
                         const TriphoneContext &ctx) {
  return inv.symbol_name(ctx.left) + "/" + inv.center_label_name(ctx.center) +
         "/" + inv.symbol_name(ctx.right);
}

TriphoneContext map_state_class(const PhonemeInventory &inv,
                                const std::vector<int> &phoneme_string,
                                int pos, int state) {
  const int m = static_cast<int>(phoneme_string.size());
  FAM_CHECK(pos >= 0 && pos < m) << "phoneme position out of range: " << pos;
  const int sil = inv.silence_symbol();
  const int ph = phoneme_string[pos];
  if (ph == sil)
    return {sil, inv.silence_center_label(), sil};
  const int left = pos > 0 ? phoneme_string[pos - 1] : sil;
  const int right = pos + 1 < m ? phoneme_string[pos + 1] : sil;
  return {left, inv.center_label(ph, state), right};
}

}  // namespace fam
