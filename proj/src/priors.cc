// fam/priors.cc

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

#include "fam/priors.hh"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

namespace fam {

int cond_tuple_count(const PhonemeInventory &inv, const Factor &factor) {
  int n = 1;
  for (Var v : factor.cond) n *= var_cardinality(inv, v);
  return n;
}

int cond_tuple_index(const PhonemeInventory &inv, const Factor &factor,
                     const TriphoneContext &ctx) {
  int idx = 0;
  for (Var v : factor.cond)
    idx = idx * var_cardinality(inv, v) + var_value(ctx, v);
  return idx;
}

int PriorTable::factor_index(const Factor &f) const {
  for (int i = 0; i < static_cast<int>(factors.size()); ++i)
    if (factors[i].factor == f) return i;
  return -1;
}

double PriorTable::log_prior(int factor, int cond_tuple, int target) const {
  double p = factors[factor].table(cond_tuple, target);
  FAM_CHECK(p > 0) << "prior entry is zero after flooring; factor "
                   << factors[factor].factor.key();
  return std::log(p);
}

void PriorTable::Write(const std::string &path) const {
  std::ofstream out(path);
  FAM_CHECK(out.good()) << "cannot write prior file " << path;
  out << "FAMPRIORS 1\n" << floor << " " << factors.size() << "\n";
  out.precision(17);
  for (const FactorPrior &f : factors) {
    out << "factor " << f.factor.key() << " " << f.table.rows() << " "
        << f.table.cols() << "\n";
    for (int r = 0; r < f.table.rows(); ++r) {
      for (int c = 0; c < f.table.cols(); ++c)
        out << (c ? " " : "") << f.table(r, c);
      out << "\n";
    }
  }
}

PriorTable PriorTable::Read(const std::string &path) {
  std::ifstream in(path);
  FAM_CHECK(in.good()) << "cannot open prior file " << path;
  std::string magic;
  int version = 0;
  in >> magic >> version;
  FAM_CHECK(magic == "FAMPRIORS" && version == 1)
      << path << ": malformed prior file";
  PriorTable pt;
  size_t n = 0;
  in >> pt.floor >> n;
  for (size_t i = 0; i < n; ++i) {
    std::string tag, key;
    long rows = 0, cols = 0;
    in >> tag >> key >> rows >> cols;
    FAM_CHECK(in.good() && tag == "factor") << path << ": malformed factor";
    FactorPrior f;
    f.factor = factor_from_key(key);
    f.table.resize(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) in >> f.table(r, c);
    FAM_CHECK(in.good()) << path << ": truncated prior table for " << key;
    pt.factors.push_back(std::move(f));
  }
  return pt;
}

namespace {

void floor_and_normalize(MatF &table, double floor) {
  for (int r = 0; r < table.rows(); ++r) {
    float s = table.row(r).sum();
    FAM_CHECK(s > 0) << "cannot normalize an all-zero prior row";
    table.row(r) /= s;
    table.row(r) = table.row(r).cwiseMax(static_cast<float>(floor));
    table.row(r) /= table.row(r).sum();
  }
}

}  // namespace

PriorTable estimate_priors(const FactoredNet &model, const Corpus &corpus,
                           int max_frames, double floor) {
  FactoredNet &m = const_cast<FactoredNet &>(model);
  const PhonemeInventory &inv = model.inventory();
  std::vector<Factor> factors = decomposition_factors(model.tag());
  PriorTable pt;
  pt.floor = floor;

  // Grouped posterior sums and group frame counts per factor.
  std::vector<MatF> sums;
  std::vector<std::vector<long>> counts;
  for (const Factor &f : factors) {
    FAM_CHECK(model.head_index(f) >= 0)
        << "model lacks head " << f.key() << " for prior estimation";
    sums.push_back(MatF::Zero(cond_tuple_count(inv, f),
                              var_cardinality(inv, f.target)));
    counts.emplace_back(cond_tuple_count(inv, f), 0);
  }

  long seen = 0;
  const int batch = 1024;
  for (const Utterance &utt : corpus.utterances) {
    if (max_frames > 0 && seen >= max_frames) break;
    MatF windowed = windowed_features(utt.frames, model.dims().context_window);
    for (int b = 0; b < utt.num_frames(); b += batch) {
      int e = std::min(utt.num_frames(), b + batch);
      if (max_frames > 0 && seen >= max_frames) break;
      MatF x = windowed.middleRows(b, e - b);
      BatchLabels<float> labels;
      for (int t = b; t < e; ++t) {
        const TriphoneContext &ctx = utt.alignment[t];
        labels.left.push_back(ctx.left);
        labels.center.push_back(ctx.center);
        labels.right.push_back(ctx.right);
      }
      MatF enc = m.encode(x, false).top();
      for (size_t fi = 0; fi < factors.size(); ++fi) {
        int h = model.head_index(factors[fi]);
        MatF post = m.head_posteriors(h, enc, labels);
        for (int r = 0; r < post.rows(); ++r) {
          int cond = cond_tuple_index(inv, factors[fi],
                                      utt.alignment[b + r]);
          sums[fi].row(cond) += post.row(r);
          ++counts[fi][cond];
        }
      }
      seen += e - b;
    }
  }
  FAM_CHECK(seen > 0) << "no frames available for prior estimation";

  for (size_t fi = 0; fi < factors.size(); ++fi) {
    PriorTable::FactorPrior f;
    f.factor = factors[fi];
    f.table = sums[fi];
    // Marginal fallback for conditioning groups with zero frames.
    VecF marginal = sums[fi].colwise().sum().transpose();
    marginal /= marginal.sum();
    int empty = 0;
    for (int r = 0; r < f.table.rows(); ++r) {
      if (counts[fi][r] == 0) {
        f.table.row(r) = marginal.transpose();
        ++empty;
      } else {
        f.table.row(r) /= static_cast<float>(counts[fi][r]);
      }
    }
    if (empty > 0)
      std::cerr << "prior estimation: factor " << f.factor.key() << ": "
                << empty << " empty conditioning groups fell back to the "
                << "marginal average\n";
    floor_and_normalize(f.table, floor);
    pt.factors.push_back(std::move(f));
  }
  return pt;
}

// ---- scoring ----

std::vector<double> resolve_scales(const FactoredNet &model,
                                   const std::vector<double> &scales) {
  size_t n = decomposition_factors(model.tag()).size();
  FAM_CHECK(!scales.empty()) << "empty prior scale list";
  for (double s : scales) FAM_CHECK(s >= 0) << "prior scales must be >= 0";
  if (scales.size() == 1) return std::vector<double>(n, scales[0]);
  FAM_CHECK(scales.size() == n)
      << "expected " << n << " prior scales, got " << scales.size();
  return scales;
}

FactorPosteriors compute_factor_posteriors(
    const FactoredNet &model, const MatF &frames,
    const std::vector<int> &context_ids) {
  FactoredNet &m = const_cast<FactoredNet &>(model);
  const PhonemeInventory &inv = model.inventory();
  FactorPosteriors fp;
  fp.factors = decomposition_factors(model.tag());
  const int T = static_cast<int>(frames.rows());
  MatF windowed = windowed_features(frames, model.dims().context_window);
  MatF enc = m.encode(windowed, false).top();
  for (const Factor &f : fp.factors) {
    int h = model.head_index(f);
    FAM_CHECK(h >= 0) << "model lacks head " << f.key() << " for scoring";
    // Distinct conditioning tuples among the requested contexts.  The tuple
    // is represented by one witness context carrying its labels.
    std::map<int, TriphoneContext> tuples;
    for (int id : context_ids) {
      TriphoneContext ctx = context_from_index(inv, id);
      tuples.emplace(cond_tuple_index(inv, f, ctx), ctx);
    }
    std::map<int, MatF> log_post;
    const Mlp<float> &mlp = model.head_mlp(h);
    if (mlp.layers().size() == 2) {
      // The head first layer splits into an encoder part shared by all
      // conditioning tuples and a per-tuple embedding part.
      const Linear<float> &l1 = mlp.layers()[0];
      const Linear<float> &l2 = mlp.layers()[1];
      const int E = static_cast<int>(enc.cols());
      MatF shared = enc * l1.weight.value.leftCols(E).transpose();
      for (const auto &[cond, witness] : tuples) {
        VecF offset = l1.bias.value.col(0);
        int off = E;
        for (Var v : f.cond) {
          const Embedding<float> &emb =
              m.embedding(v);
          int label = var_value(witness, v);
          offset += l1.weight.value.middleCols(off, emb.dim()) *
                    emb.table.value.row(label).transpose();
          off += emb.dim();
        }
        MatF hidden = shared;
        hidden.rowwise() += offset.transpose();
        hidden = hidden.array().tanh();
        MatF logits = hidden * l2.weight.value.transpose();
        logits.rowwise() += l2.bias.value.col(0).transpose();
        log_post.emplace(cond, log_softmax_rows(logits));
      }
    } else {
      for (const auto &[cond, witness] : tuples) {
        BatchLabels<float> labels;
        labels.left.assign(T, witness.left);
        labels.center.assign(T, witness.center);
        labels.right.assign(T, witness.right);
        auto act = mlp.forward(m.head_input(h, enc, labels), false);
        log_post.emplace(cond, log_softmax_rows(act.top()));
      }
    }
    fp.head_evaluations.push_back(static_cast<long>(tuples.size()));
    fp.log_post.push_back(std::move(log_post));
  }
  return fp;
}

MatF scores_from_posteriors(const FactorPosteriors &fp,
                            const PriorTable &priors,
                            const PhonemeInventory &inv,
                            const std::vector<int> &context_ids,
                            const std::vector<double> &scales) {
  FAM_CHECK(scales.size() == fp.factors.size())
      << "scale count does not match factor count";
  const int T = fp.log_post.empty() || fp.log_post[0].empty()
                    ? 0
                    : static_cast<int>(fp.log_post[0].begin()->second.rows());
  MatF scores = MatF::Zero(T, static_cast<int>(context_ids.size()));
  for (size_t fi = 0; fi < fp.factors.size(); ++fi) {
    const Factor &f = fp.factors[fi];
    int pi = priors.factor_index(f);
    FAM_CHECK(pi >= 0) << "prior table lacks factor " << f.key();
    for (size_t ci = 0; ci < context_ids.size(); ++ci) {
      TriphoneContext ctx = context_from_index(inv, context_ids[ci]);
      int cond = cond_tuple_index(inv, f, ctx);
      int target = var_value(ctx, f.target);
      const MatF &lp = fp.log_post[fi].at(cond);
      float prior_term = static_cast<float>(
          scales[fi] * priors.log_prior(pi, cond, target));
      scores.col(static_cast<int>(ci)) +=
          lp.col(target) - VecF::Constant(T, prior_term);
    }
  }
  return scores;
}

MatF batch_context_scores(const FactoredNet &model, const PriorTable &priors,
                          const MatF &frames,
                          const std::vector<int> &context_ids,
                          const std::vector<double> &scales) {
  FactorPosteriors fp = compute_factor_posteriors(model, frames, context_ids);
  return scores_from_posteriors(fp, priors, model.inventory(), context_ids,
                                resolve_scales(model, scales));
}

double emission_score(const FactoredNet &model, const PriorTable &priors,
                      const MatF &frames, int t, const TriphoneContext &ctx,
                      const std::vector<double> &scales) {
  FactoredNet &m = const_cast<FactoredNet &>(model);
  const PhonemeInventory &inv = model.inventory();
  std::vector<double> s = resolve_scales(model, scales);
  MatF windowed = windowed_features(frames, model.dims().context_window);
  MatF row = windowed.row(t);
  MatF enc = m.encode(row, false).top();
  BatchLabels<float> labels;
  labels.left = {ctx.left};
  labels.center = {ctx.center};
  labels.right = {ctx.right};
  double score = 0;
  std::vector<Factor> factors = decomposition_factors(model.tag());
  for (size_t fi = 0; fi < factors.size(); ++fi) {
    int h = model.head_index(factors[fi]);
    FAM_CHECK(h >= 0) << "model lacks head " << factors[fi].key();
    auto act = m.head_mlp(h).forward(m.head_input(h, enc, labels), false);
    MatF lp = log_softmax_rows(act.top());
    int pi = priors.factor_index(factors[fi]);
    FAM_CHECK(pi >= 0) << "prior table lacks factor " << factors[fi].key();
    int cond = cond_tuple_index(inv, factors[fi], ctx);
    int target = var_value(ctx, factors[fi].target);
    score += lp(0, target) - s[fi] * priors.log_prior(pi, cond, target);
  }
  return score;
}

MatF center_scores_from_posteriors(const FactorPosteriors &fp,
                                   const PriorTable &priors,
                                   const PhonemeInventory &inv,
                                   const std::vector<int> &context_ids,
                                   double scale) {
  // Pick the factor predicting the center state.
  int center_fi = -1;
  for (size_t fi = 0; fi < fp.factors.size(); ++fi)
    if (fp.factors[fi].target == Var::kCenter)
      center_fi = static_cast<int>(fi);
  FAM_CHECK(center_fi >= 0) << "decomposition has no center factor";
  std::vector<double> scales(fp.factors.size(), 0.0);
  scales[center_fi] = scale;
  // Zero out the non-center posteriors as well: only the normalized center
  // factor contributes.
  FactorPosteriors partial = fp;
  for (size_t fi = 0; fi < partial.factors.size(); ++fi) {
    if (static_cast<int>(fi) == center_fi) continue;
    for (auto &[cond, lp] : partial.log_post[fi]) lp.setZero();
  }
  return scores_from_posteriors(partial, priors, inv, context_ids, scales);
}

MatF center_factor_scores(const FactoredNet &model, const PriorTable &priors,
                          const MatF &frames,
                          const std::vector<int> &context_ids,
                          double scale) {
  FactorPosteriors fp = compute_factor_posteriors(model, frames, context_ids);
  return center_scores_from_posteriors(fp, priors, model.inventory(),
                                       context_ids, scale);
}

}  // namespace fam
