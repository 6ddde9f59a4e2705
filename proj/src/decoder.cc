// fam/decoder.cc

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

#include "fam/decoder.hh"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace fam {

DecoderConfig DecoderConfig::FromConfig(const Config &cfg,
                                        const std::string &s) {
  DecoderConfig d;
  d.beam = cfg.get_int(s, "beam", d.beam);
  d.score_beam = cfg.get_double(s, "score_beam", d.score_beam);
  d.word_end_beam = cfg.get_double(s, "word_end_beam", d.word_end_beam);
  d.lm_scale = cfg.get_double(s, "lm_scale", d.lm_scale);
  d.prior_scales = cfg.get_double_list(s, "prior_scales", d.prior_scales);
  d.transitions.loop = cfg.get_double(s, "loop", d.transitions.loop);
  d.transitions.silence_loop =
      cfg.get_double(s, "silence_loop", d.transitions.silence_loop);
  d.within_word_context_only = cfg.get_bool(s, "within_word_context_only",
                                            d.within_word_context_only);
  d.transitions.validate();
  FAM_CHECK(d.beam >= 1) << "beam must be >= 1";
  return d;
}

std::vector<int> all_context_ids(const PhonemeInventory &inv) {
  std::vector<int> ids(context_count(inv));
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Token {
  double score = kNegInf;
  int bp = -1;
};

struct BpEntry {
  int word;
  int prev;
};

// Search state key:  kind(1) node(20) rctx(7) state(2) lctx(7) prev+1(20).
inline std::uint64_t tree_key(int node, int rctx, int state, int lctx,
                              int prev) {
  std::uint64_t k = 0;
  k = (k << 20) | static_cast<std::uint64_t>(node);
  k = (k << 7) | static_cast<std::uint64_t>(rctx);
  k = (k << 2) | static_cast<std::uint64_t>(state);
  k = (k << 7) | static_cast<std::uint64_t>(lctx);
  k = (k << 20) | static_cast<std::uint64_t>(prev + 1);
  return k;
}

inline std::uint64_t sil_key(int prev) {
  return (1ull << 60) | static_cast<std::uint64_t>(prev + 1);
}

struct KeyFields {
  bool silence;
  int node, rctx, state, lctx, prev;
};

inline KeyFields unpack(std::uint64_t k) {
  KeyFields f;
  f.silence = (k >> 60) != 0;
  f.prev = static_cast<int>(k & 0xfffff) - 1;
  if (!f.silence) {
    f.lctx = static_cast<int>((k >> 20) & 0x7f);
    f.state = static_cast<int>((k >> 27) & 0x3);
    f.rctx = static_cast<int>((k >> 29) & 0x7f);
    f.node = static_cast<int>((k >> 36) & 0xfffff);
  }
  return f;
}

}  // namespace

DecodeResult viterbi_decode(const MatF &emission, const PrefixTree &tree,
                            const NgramLM &lm, const PhonemeInventory &inv,
                            const DecoderConfig &cfg) {
  auto t_start = std::chrono::steady_clock::now();
  cfg.transitions.validate();
  const int T = static_cast<int>(emission.rows());
  FAM_CHECK(T > 0) << "empty utterance";
  FAM_CHECK(emission.cols() == context_count(inv))
      << "emission table has " << emission.cols() << " contexts, expected "
      << context_count(inv);
  const int P = inv.num_phonemes();
  const int sil = inv.silence_symbol();
  const int sil_ctx = context_index(
      inv, {sil, inv.silence_center_label(), sil});
  const double loop_c = std::log(cfg.transitions.loop);
  const double fwd_c = std::log(1.0 - cfg.transitions.loop);
  const double sl_c = std::log(cfg.transitions.silence_loop);
  const double sx_c = std::log(1.0 - cfg.transitions.silence_loop);
  const double lms = cfg.lm_scale;

  auto ctx_id = [&](int l, int ph, int st, int r) {
    return (l * (kStatesPerPhoneme * P) + ph * kStatesPerPhoneme + st) *
               (P + 1) +
           r;
  };

  // Right-context choices offered when entering each node's phoneme: the
  // next phonemes in the tree, plus at word ends either silence only
  // (within-word approximation) or silence and every successor start
  // phoneme.
  std::vector<std::vector<int>> entry_rctx(tree.nodes.size());
  for (size_t n = 1; n < tree.nodes.size(); ++n) {
    std::set<int> rs;
    for (const auto &[ph, id] : tree.nodes[n].children) rs.insert(ph);
    if (!tree.nodes[n].word_ends.empty()) {
      rs.insert(sil);
      if (!cfg.within_word_context_only)
        for (int ph : tree.start_phonemes) rs.insert(ph);
    }
    entry_rctx[n].assign(rs.begin(), rs.end());
  }

  std::vector<BpEntry> arena;
  std::unordered_map<std::uint64_t, Token> cand;
  auto relax = [&](std::uint64_t key, double score, int bp) {
    Token &t = cand[key];
    if (score > t.score) {
      t.score = score;
      t.bp = bp;
    }
  };
  auto enter_node = [&](int node, double score, int bp, int lctx, int prev) {
    for (int r : entry_rctx[node])
      relax(tree_key(node, r, 0, lctx, prev), score, bp);
  };

  std::vector<std::pair<std::uint64_t, Token>> active;
  DecodeResult result;
  double prev_best = 0;

  for (int t = 0; t < T; ++t) {
    cand.clear();
    if (t == 0) {
      relax(sil_key(NgramLM::kSentenceStart), 0.0, -1);
      for (const auto &[ph, node] : tree.nodes[0].children)
        enter_node(node, 0.0, -1, sil, NgramLM::kSentenceStart);
    } else {
      for (const auto &[key, tok] : active) {
        KeyFields f = unpack(key);
        if (f.silence) {
          relax(key, tok.score + sl_c, tok.bp);
          double ex = tok.score + sx_c;
          for (const auto &[ph, node] : tree.nodes[0].children)
            enter_node(node, ex, tok.bp, sil, f.prev);
          continue;
        }
        const PrefixTree::Node &node = tree.nodes[f.node];
        relax(key, tok.score + loop_c, tok.bp);
        if (f.state < kStatesPerPhoneme - 1) {
          relax(tree_key(f.node, f.rctx, f.state + 1, f.lctx, f.prev),
                tok.score + fwd_c, tok.bp);
          continue;
        }
        double base = tok.score + fwd_c;
        // Within-word continuation to the child matching the committed
        // right context.
        if (f.rctx != sil) {
          auto it = node.children.find(f.rctx);
          if (it != node.children.end())
            enter_node(it->second, base, tok.bp, node.phoneme, f.prev);
        }
        // Word-end commitments.
        if (!node.word_ends.empty() &&
            tok.score >= prev_best - cfg.word_end_beam) {
          bool to_silence = f.rctx == sil;
          int succ_node =
              to_silence || cfg.within_word_context_only
                  ? -1
                  : tree.root_child(f.rctx);
          for (int we : node.word_ends) {
            double s2 = base + lms * lm.log_prob(f.prev, we);
            int bp2 = static_cast<int>(arena.size());
            arena.push_back({we, tok.bp});
            if (to_silence) {
              relax(sil_key(we), s2, bp2);
              if (cfg.within_word_context_only)
                for (const auto &[ph, n2] : tree.nodes[0].children)
                  enter_node(n2, s2, bp2, node.phoneme, we);
            } else if (succ_node >= 0) {
              enter_node(succ_node, s2, bp2, node.phoneme, we);
            }
          }
        }
      }
    }
    FAM_CHECK(!cand.empty()) << "beam collapsed at frame " << t;

    // Emission and pruning.
    double best = kNegInf;
    for (auto &[key, tok] : cand) {
      KeyFields f = unpack(key);
      int ctx = f.silence
                    ? sil_ctx
                    : ctx_id(f.lctx, tree.nodes[f.node].phoneme, f.state,
                             f.rctx);
      tok.score += emission(t, ctx);
      best = std::max(best, tok.score);
    }
    active.clear();
    for (const auto &[key, tok] : cand)
      if (tok.score >= best - cfg.score_beam) active.emplace_back(key, tok);
    if (static_cast<int>(active.size()) > cfg.beam) {
      std::nth_element(active.begin(), active.begin() + cfg.beam,
                       active.end(), [](const auto &a, const auto &b) {
                         return a.second.score > b.second.score;
                       });
      active.resize(cfg.beam);
    }
    result.active_states.push_back(static_cast<int>(active.size()));
    prev_best = best;
  }

  // Finalization: accept word ends with silence right context, or silence
  // after the last word; the sentence-end LM probability applies.
  double best_final = kNegInf;
  int best_bp = -1;
  for (const auto &[key, tok] : active) {
    KeyFields f = unpack(key);
    if (f.silence) {
      if (f.prev == NgramLM::kSentenceStart) continue;  // no words decoded
      double s = tok.score + lms * lm.log_prob(f.prev, lm.sentence_end());
      if (s > best_final) {
        best_final = s;
        best_bp = tok.bp;
      }
      continue;
    }
    const PrefixTree::Node &node = tree.nodes[f.node];
    if (f.state != kStatesPerPhoneme - 1 || f.rctx != sil ||
        node.word_ends.empty())
      continue;
    for (int we : node.word_ends) {
      double s = tok.score + lms * (lm.log_prob(f.prev, we) +
                                    lm.log_prob(we, lm.sentence_end()));
      if (s > best_final) {
        best_final = s;
        best_bp = static_cast<int>(arena.size());
        arena.push_back({we, tok.bp});
      }
    }
  }
  FAM_CHECK(best_final > kNegInf)
      << "no final hypothesis survived (utterance too short for any word?)";
  result.score = best_final;
  for (int bp = best_bp; bp != -1; bp = arena[bp].prev)
    result.words.push_back(arena[bp].word);
  std::reverse(result.words.begin(), result.words.end());
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

DecodeResult decode_utterance(const FactoredNet &model,
                              const PriorTable &priors, const MatF &frames,
                              const PrefixTree &tree, const NgramLM &lm,
                              const DecoderConfig &cfg) {
  MatF emission =
      batch_context_scores(model, priors, frames,
                           all_context_ids(model.inventory()),
                           cfg.prior_scales);
  return viterbi_decode(emission, tree, lm, model.inventory(), cfg);
}

// ---- forced alignment ----

ForcedGraph build_forced_graph(const std::vector<int> &words,
                               const Lexicon &lexicon,
                               const PhonemeInventory &inv,
                               const TransitionModel &tm) {
  tm.validate();
  FAM_CHECK(!words.empty()) << "empty word sequence";
  const int N = static_cast<int>(words.size());
  const int sil = inv.silence_symbol();
  const double loop_c = std::log(tm.loop);
  const double fwd_c = std::log(1.0 - tm.loop);
  const double sl_c = std::log(tm.silence_loop);
  const double sx_c = std::log(1.0 - tm.silence_loop);

  struct Occ {
    int ph, word, k, len;
    std::vector<int> lefts, rights;
    int offset = 0;  // first state id
  };
  std::vector<Occ> occs;
  std::vector<int> word_first_occ(N, -1);
  for (int i = 0; i < N; ++i) {
    FAM_CHECK(words[i] >= 0 && words[i] < lexicon.num_words())
        << "word id out of range: " << words[i];
    const auto &pron = lexicon.prons[words[i]];
    for (int k = 0; k < static_cast<int>(pron.size()); ++k) {
      Occ o;
      o.ph = pron[k];
      o.word = i;
      o.k = k;
      o.len = static_cast<int>(pron.size());
      if (k > 0) {
        o.lefts = {pron[k - 1]};
      } else if (i == 0) {
        o.lefts = {sil};
      } else {
        o.lefts = {sil, lexicon.prons[words[i - 1]].back()};
      }
      if (k < o.len - 1) {
        o.rights = {pron[k + 1]};
      } else if (i == N - 1) {
        o.rights = {sil};
      } else {
        o.rights = {sil, lexicon.prons[words[i + 1]].front()};
      }
      if (word_first_occ[i] < 0)
        word_first_occ[i] = static_cast<int>(occs.size());
      occs.push_back(std::move(o));
    }
  }
  int next_id = 0;
  for (Occ &o : occs) {
    o.offset = next_id;
    next_id += static_cast<int>(o.lefts.size() * o.rights.size()) *
               kStatesPerPhoneme;
  }
  std::vector<int> sil_slot(N + 1);
  for (int b = 0; b <= N; ++b) sil_slot[b] = next_id++;

  ForcedGraph g;
  g.states.resize(next_id);
  auto occ_state = [&](int j, int li, int ri, int st) {
    const Occ &o = occs[j];
    return o.offset +
           ((li * static_cast<int>(o.rights.size()) + ri) *
                kStatesPerPhoneme +
            st);
  };
  // Entry states of a word: every (left variant index, right variant) pair
  // at state 0 of its first phoneme, for a given left symbol.
  auto enter_word = [&](int i, int left_sym, std::vector<int> *out) {
    int j = word_first_occ[i];
    const Occ &o = occs[j];
    for (int li = 0; li < static_cast<int>(o.lefts.size()); ++li) {
      if (o.lefts[li] != left_sym) continue;
      for (int ri = 0; ri < static_cast<int>(o.rights.size()); ++ri)
        out->push_back(occ_state(j, li, ri, 0));
    }
  };

  for (int j = 0; j < static_cast<int>(occs.size()); ++j) {
    const Occ &o = occs[j];
    for (int li = 0; li < static_cast<int>(o.lefts.size()); ++li) {
      for (int ri = 0; ri < static_cast<int>(o.rights.size()); ++ri) {
        for (int st = 0; st < kStatesPerPhoneme; ++st) {
          ForcedGraph::State &s = g.states[occ_state(j, li, ri, st)];
          s.ctx_id = context_index(
              inv, {o.lefts[li], inv.center_label(o.ph, st), o.rights[ri]});
          s.loop_cost = loop_c;
          s.fwd_cost = fwd_c;
          if (st < kStatesPerPhoneme - 1) {
            s.succ.push_back(occ_state(j, li, ri, st + 1));
            continue;
          }
          // Leaving the phoneme.
          if (o.k < o.len - 1) {
            const Occ &n = occs[j + 1];
            // Next occurrence's left is this phoneme (single variant).
            for (int ri2 = 0; ri2 < static_cast<int>(n.rights.size()); ++ri2)
              s.succ.push_back(occ_state(j + 1, 0, ri2, 0));
          } else {
            int i = o.word;
            if (o.rights[ri] == sil) {
              s.succ.push_back(sil_slot[i + 1]);
              if (i == N - 1) s.final_state = true;
            } else {
              // Straight into the next word, left context is this phoneme.
              enter_word(i + 1, o.ph, &s.succ);
            }
          }
        }
      }
    }
  }
  for (int b = 0; b <= N; ++b) {
    ForcedGraph::State &s = g.states[sil_slot[b]];
    s.ctx_id =
        context_index(inv, {sil, inv.silence_center_label(), sil});
    s.loop_cost = sl_c;
    s.fwd_cost = sx_c;
    if (b < N)
      enter_word(b, sil, &s.succ);
    else
      s.final_state = true;
    if (b == 0) s.initial = true;
  }
  {
    std::vector<int> entries;
    enter_word(0, sil, &entries);
    for (int e : entries) g.states[e].initial = true;
  }
  return g;
}

double forced_path_score(const MatF &emission, const ForcedGraph &graph,
                         std::vector<TriphoneContext> *path,
                         const PhonemeInventory *inv) {
  const int T = static_cast<int>(emission.rows());
  const int S = static_cast<int>(graph.states.size());
  FAM_CHECK(T > 0) << "empty utterance";
  std::vector<double> prev(S, kNegInf), cur(S, kNegInf);
  std::vector<std::vector<int>> back;
  if (path) back.assign(T, std::vector<int>(S, -1));
  for (int s = 0; s < S; ++s)
    if (graph.states[s].initial)
      prev[s] = emission(0, graph.states[s].ctx_id);
  for (int t = 1; t < T; ++t) {
    std::fill(cur.begin(), cur.end(), kNegInf);
    for (int s = 0; s < S; ++s) {
      if (prev[s] == kNegInf) continue;
      const ForcedGraph::State &st = graph.states[s];
      double loop = prev[s] + st.loop_cost;
      if (loop > cur[s]) {
        cur[s] = loop;
        if (path) back[t][s] = s;
      }
      double fwd = prev[s] + st.fwd_cost;
      for (int n : st.succ) {
        if (fwd > cur[n]) {
          cur[n] = fwd;
          if (path) back[t][n] = s;
        }
      }
    }
    for (int s = 0; s < S; ++s)
      if (cur[s] != kNegInf) cur[s] += emission(t, graph.states[s].ctx_id);
    prev.swap(cur);
  }
  double best = kNegInf;
  int best_s = -1;
  for (int s = 0; s < S; ++s) {
    if (!graph.states[s].final_state) continue;
    if (prev[s] > best) {
      best = prev[s];
      best_s = s;
    }
  }
  if (path) {
    path->clear();
    FAM_CHECK(best > kNegInf)
        << "utterance too short for the required state sequence";
    FAM_CHECK(inv != nullptr) << "inventory required for path extraction";
    std::vector<int> states(T);
    int s = best_s;
    for (int t = T - 1; t >= 0; --t) {
      states[t] = s;
      if (t > 0) s = back[t][s];
    }
    for (int t = 0; t < T; ++t)
      path->push_back(context_from_index(*inv, graph.states[states[t]].ctx_id));
  }
  return best;
}

std::vector<TriphoneContext> forced_align(const FactoredNet &model,
                                          const PriorTable &priors,
                                          const MatF &frames,
                                          const std::vector<int> &words,
                                          const Lexicon &lexicon,
                                          const DecoderConfig &cfg) {
  const PhonemeInventory &inv = model.inventory();
  MatF emission = batch_context_scores(model, priors, frames,
                                       all_context_ids(inv),
                                       cfg.prior_scales);
  ForcedGraph graph =
      build_forced_graph(words, lexicon, inv, cfg.transitions);
  std::vector<TriphoneContext> path;
  forced_path_score(emission, graph, &path, &inv);
  return path;
}

}  // namespace fam
