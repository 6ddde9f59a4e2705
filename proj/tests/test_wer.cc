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
#include "doctest.h"
#include "fam/harness.hh"
#include "fam/wer.hh"

using namespace fam;

TEST_CASE("perfect hypothesis has zero errors") {
  WerReport r = align_words({1, 2, 3}, {1, 2, 3});
  CHECK(r.substitutions == 0);
  CHECK(r.deletions == 0);
  CHECK(r.insertions == 0);
  CHECK(r.reference_words == 3);
  CHECK(r.percent() == doctest::Approx(0.0));
}

TEST_CASE("single substitution") {
  WerReport r = align_words({1, 2, 3}, {1, 9, 3});
  CHECK(r.substitutions == 1);
  CHECK(r.deletions == 0);
  CHECK(r.insertions == 0);
  CHECK(r.percent() == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("empty hypothesis is all deletions") {
  WerReport r = align_words({4, 5}, {});
  CHECK(r.deletions == 2);
  CHECK(r.substitutions == 0);
  CHECK(r.insertions == 0);
  CHECK(r.percent() == doctest::Approx(100.0));
}

TEST_CASE("pure insertions") {
  WerReport r = align_words({7}, {7, 8, 9});
  CHECK(r.insertions == 2);
  CHECK(r.substitutions == 0);
  CHECK(r.deletions == 0);
  CHECK(r.percent() == doctest::Approx(200.0));
}

TEST_CASE("wer above 100 percent is possible") {
  WerReport r = align_words({1}, {2, 3, 4, 5});
  CHECK(r.substitutions + r.insertions == 4);
  CHECK(r.percent() == doctest::Approx(400.0));
}

TEST_CASE("alignment is invariant under label renaming") {
  std::vector<int> ref = {0, 1, 2, 1, 0};
  std::vector<int> hyp = {0, 2, 2, 1};
  WerReport a = align_words(ref, hyp);
  auto rename = [](std::vector<int> v) {
    for (int &x : v) x = 1000 - x;
    return v;
  };
  WerReport b = align_words(rename(ref), rename(hyp));
  CHECK(a.substitutions == b.substitutions);
  CHECK(a.deletions == b.deletions);
  CHECK(a.insertions == b.insertions);
}

TEST_CASE("corpus-level wer sums per-utterance counts") {
  std::map<std::string, std::vector<int>> refs = {{"u1", {1, 2}},
                                                  {"u2", {3}}};
  std::map<std::string, std::vector<int>> hyps = {{"u1", {1, 9}},
                                                  {"u2", {3}}};
  WerReport r = wer(refs, hyps);
  CHECK(r.substitutions == 1);
  CHECK(r.reference_words == 3);
  CHECK(r.percent() == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("mismatched utterance ids are an error") {
  std::map<std::string, std::vector<int>> refs = {{"u1", {1}}};
  std::map<std::string, std::vector<int>> hyps = {{"u2", {1}}};
  CHECK_THROWS(wer(refs, hyps));
  hyps = {{"u1", {1}}, {"u2", {1}}};
  CHECK_THROWS(wer(refs, hyps));
  WerReport empty;
  CHECK_THROWS(empty.percent());
}

// ---- harness ----

TEST_CASE("row spec parsing") {
  RowSpec r = parse_row_spec("tri-forward/mono+di+tri");
  CHECK(r.name == "tri-forward/mono+di+tri");
  CHECK(r.tag == DecompTag::kTriForward);
  CHECK(r.pretrain_stages ==
        std::vector<Stage>{Stage::kMonophone, Stage::kDiphone,
                           Stage::kTriphone});
  CHECK(!r.include_right_branch);
  CHECK(!r.partial_factor);

  r = parse_row_spec("diphone/none");
  CHECK(r.tag == DecompTag::kDiphone);
  CHECK(r.pretrain_stages.empty());

  r = parse_row_spec("tri-symmetric/mono+tri/partial");
  CHECK(r.tag == DecompTag::kTriSymmetric);
  CHECK(r.partial_factor);

  r = parse_row_spec("tri-forward/mono+di+tri/rb");
  CHECK(r.include_right_branch);

  CHECK_THROWS(parse_row_spec("no-slashes"));
  CHECK_THROWS(parse_row_spec("monophone/bogus-stage"));
  CHECK_THROWS(parse_row_spec("monophone/none/bogus-option"));
}

TEST_CASE("grid spec validation and config parsing") {
  GridSpec g;
  CHECK_NOTHROW(g.validate());
  g.prior_scales.clear();
  CHECK_THROWS(g.validate());

  Config cfg = Config::Parse(
      "[grid]\nprior_scales = 0.0, 1.0\nlm_scales = 2\nmax_utterances = 5\n");
  GridSpec parsed = GridSpec::FromConfig(cfg);
  CHECK(parsed.prior_scales == std::vector<double>{0.0, 1.0});
  CHECK(parsed.lm_scales == std::vector<double>{2.0});
  CHECK(parsed.max_utterances == 5);
}

namespace {

// A tiny end-to-end setup small enough for per-test training.
struct TinyExperiment {
  Config cfg = Config::Parse(R"(
[generator]
num_phonemes = 3
feature_dim = 6
vocab_size = 5
word_len_min = 2
word_len_max = 3
coarticulation = 0.5
emission_noise = 0.3
base_scale = 1.0
seed = 5
[data]
train_utterances = 60
dev_utterances = 8
test_utterances = 8
)");
  ExperimentSetup setup = ExperimentSetup::Build(cfg);

  FactoredNet train_quick_model() {
    ModelDims dims;
    dims.context_window = 1;
    dims.encoder_hidden = {32, 32};
    dims.head_hidden = 32;
    dims.dropout = 0.0;
    TrainConfig tc;
    tc.epochs = 6;
    tc.focal_gamma = 0.0;
    tc.adam.learning_rate = 2e-3;
    tc.adam.l2 = 0.0;
    FactoredNet net(setup.train.inventory, setup.train.feature_dim,
                    DecompTag::kMonophone,
                    decomposition_factors(DecompTag::kMonophone), dims, 3);
    train_model(net, setup.train, setup.dev, tc);
    return net;
  }
};

}  // namespace

TEST_CASE("grid search returns the argmin over its grid") {
  TinyExperiment exp;
  FactoredNet net = exp.train_quick_model();
  PriorTable priors = estimate_priors(net, exp.setup.train);
  DecoderConfig base;
  base.beam = 500;
  base.score_beam = 20;
  base.word_end_beam = 20;
  GridSpec grid;
  grid.prior_scales = {0.0, 0.7};
  grid.lm_scales = {1.0, 3.0};
  GridResult res = grid_search(net, priors, exp.setup.dev, exp.setup.tree,
                               exp.setup.lm, grid, base);
  CHECK(res.points == 4);
  REQUIRE(res.prior_scales.size() == 1);  // one factor for monophone

  // Re-decoding at the reported point reproduces the reported WER.
  DecoderConfig best = base;
  best.prior_scales = res.prior_scales;
  best.lm_scale = res.lm_scale;
  std::map<std::string, std::vector<int>> refs, hyps;
  for (const Utterance &utt : exp.setup.dev.utterances) {
    refs[utt.id] = utt.words;
    hyps[utt.id] = decode_utterance(net, priors, utt.frames, exp.setup.tree,
                                    exp.setup.lm, best)
                       .words;
  }
  WerReport direct = wer(refs, hyps);
  CHECK(direct.substitutions == res.dev.substitutions);
  CHECK(direct.deletions == res.dev.deletions);
  CHECK(direct.insertions == res.dev.insertions);

  // Every other grid point is no better.
  for (double ps : grid.prior_scales)
    for (double ls : grid.lm_scales) {
      DecoderConfig point = base;
      point.prior_scales = {ps};
      point.lm_scale = ls;
      std::map<std::string, std::vector<int>> h;
      for (const Utterance &utt : exp.setup.dev.utterances)
        h[utt.id] = decode_utterance(net, priors, utt.frames, exp.setup.tree,
                                     exp.setup.lm, point)
                        .words;
      CHECK(wer(refs, h).percent() >= res.dev.percent() - 1e-9);
    }
}

TEST_CASE("duplicate grid points keep the first minimum deterministically") {
  TinyExperiment exp;
  FactoredNet net = exp.train_quick_model();
  PriorTable priors = estimate_priors(net, exp.setup.train);
  DecoderConfig base;
  base.beam = 500;
  GridSpec grid;
  grid.prior_scales = {0.5, 0.5};
  grid.lm_scales = {2.0, 2.0};
  GridResult res = grid_search(net, priors, exp.setup.dev, exp.setup.tree,
                               exp.setup.lm, grid, base);
  CHECK(res.points == 4);
  CHECK(res.prior_scales == std::vector<double>{0.5});
  CHECK(res.lm_scale == 2.0);
}

TEST_CASE("machine table is deterministic across identical runs") {
  RowResult a;
  a.name = "row-a";
  a.ok = true;
  a.prior_scales = {0.7};
  a.lm_scale = 10;
  a.dev = {1, 2, 3, 50};
  a.test = {2, 0, 1, 40};
  a.train_seconds = 1.25;  // timings must not appear
  RowResult b = a;
  b.train_seconds = 99.0;
  b.decode_seconds = 7.0;
  CHECK(render_machine_table({a}) == render_machine_table({b}));
  CHECK(render_machine_table({a}).find("1.25") == std::string::npos);

  RowResult failed;
  failed.name = "broken";
  failed.ok = false;
  failed.error = "boom";
  std::string table = render_machine_table({a, failed});
  CHECK(table.find("broken") != std::string::npos);
}
