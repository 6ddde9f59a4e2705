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
#include <cstdio>
#include <set>

#include "doctest.h"
#include "fam/inventory.hh"

using namespace fam;

TEST_CASE("inventory construction validates symbols") {
  CHECK_NOTHROW(PhonemeInventory({"a", "b"}, "sil"));
  CHECK_THROWS(PhonemeInventory({"a"}, "sil"));            // P >= 2
  CHECK_THROWS(PhonemeInventory({"a", "a"}, "sil"));       // duplicate
  CHECK_THROWS(PhonemeInventory({"a", ""}, "sil"));        // empty symbol
  CHECK_THROWS(PhonemeInventory({"a", "sil"}, "sil"));     // collision
  CHECK_THROWS(PhonemeInventory({"a", "b"}, ""));          // empty silence
}

TEST_CASE("state label count is 3P+1") {
  CHECK(state_label_count(PhonemeInventory::Synthetic(45)) == 136);
  CHECK(state_label_count(PhonemeInventory::Synthetic(10)) == 31);
  CHECK(state_label_count(PhonemeInventory::Synthetic(2)) == 7);
}

TEST_CASE("center label scheme") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(4);
  CHECK(inv.center_label(0, 0) == 0);
  CHECK(inv.center_label(2, 1) == 7);
  CHECK(inv.center_phoneme(7) == 2);
  CHECK(inv.center_state(7) == 1);
  CHECK(inv.silence_center_label() == 12);
  CHECK(inv.silence_symbol() == 4);
  CHECK_THROWS(inv.center_label(4, 0));
  CHECK_THROWS(inv.center_label(0, 3));
}

TEST_CASE("context enumeration count and determinism") {
  PhonemeInventory inv2 = PhonemeInventory::Synthetic(2);
  // (P+1) * 3P * (P+1) + 1
  CHECK(context_count(inv2) == 3 * 6 * 3 + 1);
  CHECK(enumerate_contexts(inv2).size() == 55);
  PhonemeInventory inv3 = PhonemeInventory::Synthetic(3);
  CHECK(context_count(inv3) == 4 * 9 * 4 + 1);

  auto a = enumerate_contexts(inv3);
  auto b = enumerate_contexts(inv3);
  CHECK(a == b);

  // Each context appears exactly once and round-trips through its index.
  std::set<int> seen;
  for (size_t i = 0; i < a.size(); ++i) {
    int idx = context_index(inv3, a[i]);
    CHECK(idx == static_cast<int>(i));
    CHECK(seen.insert(idx).second);
    CHECK(context_from_index(inv3, idx) == a[i]);
  }
}

TEST_CASE("state label count equals distinct centers in enumeration") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(3);
  std::set<int> centers;
  for (const TriphoneContext &c : enumerate_contexts(inv))
    centers.insert(c.center);
  CHECK(static_cast<int>(centers.size()) == state_label_count(inv));
}

TEST_CASE("silence context must be fully silent") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(2);
  TriphoneContext bad{0, inv.silence_center_label(), inv.silence_symbol()};
  CHECK_THROWS(context_index(inv, bad));
}

TEST_CASE("map_state_class neighbor lookup") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(3);
  int a = 0, b = 1, sil = inv.silence_symbol();
  std::vector<int> ps = {sil, a, b, sil};
  // 2nd state of "a"
  TriphoneContext ctx = map_state_class(inv, ps, 1, 1);
  CHECK(ctx.left == sil);
  CHECK(ctx.center == inv.center_label(a, 1));
  CHECK(ctx.right == b);
  // 1st state of "b"
  ctx = map_state_class(inv, ps, 2, 0);
  CHECK(ctx.left == a);
  CHECK(ctx.center == inv.center_label(b, 0));
  CHECK(ctx.right == sil);
  // silence frame
  ctx = map_state_class(inv, ps, 0, 0);
  CHECK(ctx == TriphoneContext{sil, inv.silence_center_label(), sil});
  CHECK_THROWS(map_state_class(inv, ps, 4, 0));
}

TEST_CASE("map_state_class output is always enumerable") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(3);
  std::vector<int> ps = {3, 0, 1, 2, 3, 2, 1, 3};
  for (int pos = 0; pos < static_cast<int>(ps.size()); ++pos) {
    int states = ps[pos] == inv.silence_symbol() ? 1 : kStatesPerPhoneme;
    for (int st = 0; st < states; ++st) {
      TriphoneContext ctx = map_state_class(inv, ps, pos, st);
      int idx = context_index(inv, ctx);
      CHECK(idx >= 0);
      CHECK(idx < context_count(inv));
    }
  }
}

TEST_CASE("inventory file round trip") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(5);
  std::string path = "test_inventory_rt.txt";
  inv.Write(path);
  PhonemeInventory back = PhonemeInventory::Read(path);
  CHECK(back.num_phonemes() == inv.num_phonemes());
  for (int i = 0; i <= inv.num_phonemes(); ++i)
    CHECK(back.symbol_name(i) == inv.symbol_name(i));
  std::remove(path.c_str());
}

TEST_CASE("find_symbol") {
  PhonemeInventory inv = PhonemeInventory::Synthetic(3);
  CHECK(inv.find_symbol("p1") == 1);
  CHECK(inv.find_symbol("sil") == 3);
  CHECK(inv.find_symbol("nope") == -1);
}
