// fam/harness.cc

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

#include "fam/harness.hh"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace fam {

void GridSpec::validate() const {
  FAM_CHECK(!prior_scales.empty() && !lm_scales.empty())
      << "empty grid axis";
  for (double s : prior_scales)
    FAM_CHECK(s >= 0) << "prior scales must be >= 0";
  for (double s : lm_scales) FAM_CHECK(s >= 0) << "LM scales must be >= 0";
}

GridSpec GridSpec::FromConfig(const Config &cfg, const std::string &s) {
  GridSpec g;
  g.prior_scales = cfg.get_double_list(s, "prior_scales", g.prior_scales);
  g.lm_scales = cfg.get_double_list(s, "lm_scales", g.lm_scales);
  g.per_factor = cfg.get_bool(s, "per_factor", g.per_factor);
  g.max_utterances = cfg.get_int(s, "max_utterances", g.max_utterances);
  g.validate();
  return g;
}

namespace {

// Prior-scale assignments in enumeration order: one shared value per list
// entry, or the cartesian product with the first factor as the outer digit.
std::vector<std::vector<double>> prior_points(const GridSpec &grid,
                                              size_t num_factors) {
  std::vector<std::vector<double>> points;
  if (!grid.per_factor || num_factors == 1) {
    for (double v : grid.prior_scales)
      points.emplace_back(num_factors, v);
    return points;
  }
  std::vector<size_t> digit(num_factors, 0);
  for (;;) {
    std::vector<double> p(num_factors);
    for (size_t i = 0; i < num_factors; ++i)
      p[i] = grid.prior_scales[digit[i]];
    points.push_back(std::move(p));
    size_t i = num_factors;
    while (i > 0 && ++digit[i - 1] == grid.prior_scales.size())
      digit[--i] = 0;
    if (i == 0) break;
  }
  return points;
}

long edits(const WerReport &r) {
  return r.substitutions + r.deletions + r.insertions;
}

void accumulate(WerReport &total, const WerReport &r) {
  total.substitutions += r.substitutions;
  total.deletions += r.deletions;
  total.insertions += r.insertions;
  total.reference_words += r.reference_words;
}

}  // namespace

GridResult grid_search(const FactoredNet &model, const PriorTable &priors,
                       const Corpus &dev, const PrefixTree &tree,
                       const NgramLM &lm, const GridSpec &grid,
                       const DecoderConfig &base, bool partial_factor) {
  grid.validate();
  FAM_CHECK(!dev.utterances.empty()) << "empty dev corpus";
  const PhonemeInventory &inv = model.inventory();
  const std::vector<int> ctx_ids = all_context_ids(inv);
  const size_t num_factors = decomposition_factors(model.tag()).size();
  std::vector<std::vector<double>> scales = prior_points(grid, num_factors);
  struct Point {
    std::vector<double> prior_scales;
    double lm_scale;
    WerReport report;
    bool failed = false;
    std::string error;
  };
  std::vector<Point> points;
  for (const auto &ps : scales)
    for (double ls : grid.lm_scales) points.push_back({ps, ls, {}});

  size_t n_utts = dev.utterances.size();
  if (grid.max_utterances > 0)
    n_utts = std::min(n_utts, static_cast<size_t>(grid.max_utterances));
  for (size_t u = 0; u < n_utts; ++u) {
    const Utterance &utt = dev.utterances[u];
    FactorPosteriors fp =
        compute_factor_posteriors(model, utt.frames, ctx_ids);
    // Cache the emission table per distinct prior-scale assignment; it is
    // independent of the LM scale.
    MatF emission;
    const std::vector<double> *last_scales = nullptr;
    for (Point &pt : points) {
      if (pt.failed) continue;
      if (last_scales == nullptr || *last_scales != pt.prior_scales) {
        emission = partial_factor
                       ? center_scores_from_posteriors(
                             fp, priors, inv, ctx_ids, pt.prior_scales[0])
                       : scores_from_posteriors(fp, priors, inv, ctx_ids,
                                                pt.prior_scales);
        last_scales = &pt.prior_scales;
      }
      DecoderConfig cfg = base;
      cfg.lm_scale = pt.lm_scale;
      try {
        DecodeResult res = viterbi_decode(emission, tree, lm, inv, cfg);
        accumulate(pt.report, align_words(utt.words, res.words));
      } catch (const Error &e) {
        // A collapsed search marks the grid point as unusable; the search
        // over the remaining points continues.
        pt.failed = true;
        pt.error = "grid point (prior " + std::to_string(pt.prior_scales[0]) +
                   ", lm " + std::to_string(pt.lm_scale) + "), utterance " +
                   utt.id + ": " + e.what();
        std::cerr << "grid search: dropping " << pt.error << "\n";
      }
    }
  }

  GridResult best;
  best.points = static_cast<long>(points.size());
  const Point *winner = nullptr;
  for (const Point &pt : points) {
    if (pt.failed) continue;
    if (winner == nullptr || edits(pt.report) < edits(winner->report))
      winner = &pt;
  }
  if (winner == nullptr)
    throw Error("every grid point failed; last: " + points.back().error);
  best.prior_scales = winner->prior_scales;
  best.lm_scale = winner->lm_scale;
  best.dev = winner->report;
  return best;
}

// ---- experiment runner ----

RowSpec parse_row_spec(const std::string &descriptor) {
  RowSpec row;
  row.name = descriptor;
  std::vector<std::string> parts;
  std::stringstream ss(descriptor);
  std::string part;
  while (std::getline(ss, part, '/')) parts.push_back(part);
  FAM_CHECK(!parts.empty()) << "empty row descriptor";
  row.tag = decomp_from_string(parts[0]);
  if (parts.size() > 1 && parts[1] != "none" && !parts[1].empty()) {
    std::stringstream st(parts[1]);
    std::string stage;
    while (std::getline(st, stage, '+')) {
      if (stage == "mono")
        row.pretrain_stages.push_back(Stage::kMonophone);
      else if (stage == "di")
        row.pretrain_stages.push_back(Stage::kDiphone);
      else if (stage == "tri")
        row.pretrain_stages.push_back(Stage::kTriphone);
      else
        throw Error("unknown stage '" + stage + "' in row " + descriptor);
    }
  }
  for (size_t i = 2; i < parts.size(); ++i) {
    if (parts[i] == "partial")
      row.partial_factor = true;
    else if (parts[i] == "rb")
      row.include_right_branch = true;
    else
      throw Error("unknown row option '" + parts[i] + "' in " + descriptor);
  }
  return row;
}

ExperimentSetup ExperimentSetup::Build(const Config &cfg) {
  ExperimentSetup s;
  s.gen = GeneratorConfig::FromConfig(cfg);
  int n_train = cfg.get_int("data", "train_utterances", 2000);
  int n_dev = cfg.get_int("data", "dev_utterances", 200);
  int n_test = cfg.get_int("data", "test_utterances", 200);
  s.lexicon = generate_lexicon(s.gen);
  s.train = generate_corpus(s.gen, s.lexicon, n_train, 0, "train");
  s.dev = generate_corpus(s.gen, s.lexicon, n_dev, 1000000, "dev");
  s.test = generate_corpus(s.gen, s.lexicon, n_test, 2000000, "test");
  std::vector<std::vector<int>> transcripts;
  for (const Utterance &u : s.train.utterances)
    transcripts.push_back(u.words);
  s.lm = NgramLM::TrainBigram(transcripts, s.lexicon.num_words());
  s.tree = build_prefix_tree(s.lexicon);
  return s;
}

RowResult run_row(const RowSpec &row, const ExperimentSetup &setup,
                  const ModelDims &dims, const TrainConfig &tcfg,
                  const GridSpec &grid, const DecoderConfig &dcfg) {
  RowResult res;
  res.name = row.name;
  auto t0 = std::chrono::steady_clock::now();
  StagePlan plan;
  plan.stages = row.pretrain_stages;
  plan.include_right_branch = row.include_right_branch;
  FactoredNet model =
      run_stage_plan(row.tag, plan, setup.train, setup.dev, dims, tcfg);
  PriorTable priors = estimate_priors(model, setup.train);
  res.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  GridResult gr = grid_search(model, priors, setup.dev, setup.tree, setup.lm,
                              grid, dcfg, row.partial_factor);
  res.prior_scales = gr.prior_scales;
  res.lm_scale = gr.lm_scale;
  res.dev = gr.dev;

  const PhonemeInventory &inv = model.inventory();
  const std::vector<int> ctx_ids = all_context_ids(inv);
  auto t1 = std::chrono::steady_clock::now();
  for (const Utterance &utt : setup.test.utterances) {
    FactorPosteriors fp =
        compute_factor_posteriors(model, utt.frames, ctx_ids);
    MatF emission =
        row.partial_factor
            ? center_scores_from_posteriors(fp, priors, inv, ctx_ids,
                                            gr.prior_scales[0])
            : scores_from_posteriors(fp, priors, inv, ctx_ids,
                                     gr.prior_scales);
    DecoderConfig cfg = dcfg;
    cfg.lm_scale = gr.lm_scale;
    DecodeResult dr = viterbi_decode(emission, setup.tree, setup.lm, inv, cfg);
    accumulate(res.test, align_words(utt.words, dr.words));
    res.decoded_frames += utt.num_frames();
    for (long h : fp.head_evaluations) res.head_evaluations += h;
  }
  res.decode_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1)
          .count();
  res.ok = true;
  return res;
}

std::vector<RowResult> run_comparison(const std::vector<RowSpec> &rows,
                                      const ExperimentSetup &setup,
                                      const ModelDims &dims,
                                      const TrainConfig &tcfg,
                                      const GridSpec &grid,
                                      const DecoderConfig &dcfg) {
  FAM_CHECK(!rows.empty()) << "no comparison rows configured";
  std::vector<RowResult> results;
  for (const RowSpec &row : rows) {
    try {
      results.push_back(run_row(row, setup, dims, tcfg, grid, dcfg));
    } catch (const std::exception &e) {
      RowResult r;
      r.name = row.name;
      r.ok = false;
      r.error = e.what();
      std::cerr << "row " << row.name << " failed: " << e.what() << "\n";
      results.push_back(std::move(r));
    }
  }
  return results;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string join_scales(const std::vector<double> &scales) {
  std::string s;
  for (size_t i = 0; i < scales.size(); ++i)
    s += (i ? "," : "") + fmt(scales[i]);
  return s;
}
}  // namespace

std::string render_machine_table(const std::vector<RowResult> &rows) {
  std::string out =
      "name\tstatus\tprior_scales\tlm_scale\tdev_wer\ttest_wer\t"
      "test_sub\ttest_del\ttest_ins\ttest_ref_words\n";
  for (const RowResult &r : rows) {
    out += r.name + "\t";
    if (!r.ok) {
      out += "error\t-\t-\t-\t-\t-\t-\t-\t-\n";
      continue;
    }
    out += "ok\t" + join_scales(r.prior_scales) + "\t" + fmt(r.lm_scale) +
           "\t" + fmt(r.dev.percent()) + "\t" + fmt(r.test.percent()) + "\t" +
           std::to_string(r.test.substitutions) + "\t" +
           std::to_string(r.test.deletions) + "\t" +
           std::to_string(r.test.insertions) + "\t" +
           std::to_string(r.test.reference_words) + "\n";
  }
  return out;
}

std::string render_text_table(const std::vector<RowResult> &rows) {
  std::ostringstream out;
  out << "model comparison\n";
  for (const RowResult &r : rows) {
    if (!r.ok) {
      out << "  " << r.name << ": FAILED: " << r.error << "\n";
      continue;
    }
    out << "  " << r.name << ": test WER " << fmt(r.test.percent())
        << "% (dev " << fmt(r.dev.percent()) << "%, prior scales "
        << join_scales(r.prior_scales) << ", lm scale " << fmt(r.lm_scale)
        << ", train " << fmt(r.train_seconds) << "s, decode "
        << fmt(r.decode_seconds) << "s, " << r.decoded_frames << " frames, "
        << r.head_evaluations << " head evals)\n";
  }
  return out.str();
}

}  // namespace fam
