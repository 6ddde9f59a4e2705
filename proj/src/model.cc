// fam/model.cc

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

#include "fam/model.hh"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fam {

std::string to_string(DecompTag tag) {
  switch (tag) {
    case DecompTag::kMonophone: return "monophone";
    case DecompTag::kDiphone: return "diphone";
    case DecompTag::kTriForward: return "tri-forward";
    case DecompTag::kTriSymmetric: return "tri-symmetric";
    case DecompTag::kTriBackward: return "tri-backward";
  }
  FAM_ERROR() << "bad decomposition tag";
}

DecompTag decomp_from_string(const std::string &name) {
  if (name == "monophone") return DecompTag::kMonophone;
  if (name == "diphone") return DecompTag::kDiphone;
  if (name == "tri-forward") return DecompTag::kTriForward;
  if (name == "tri-symmetric") return DecompTag::kTriSymmetric;
  if (name == "tri-backward") return DecompTag::kTriBackward;
  throw Error("unknown decomposition: " + name);
}

int var_cardinality(const PhonemeInventory &inv, Var v) {
  return v == Var::kCenter ? inv.num_center_labels() : inv.num_symbols();
}

int var_value(const TriphoneContext &ctx, Var v) {
  switch (v) {
    case Var::kLeft: return ctx.left;
    case Var::kCenter: return ctx.center;
    default: return ctx.right;
  }
}

namespace {
char var_letter(Var v) {
  return v == Var::kLeft ? 'L' : v == Var::kCenter ? 'C' : 'R';
}

Var var_from_letter(char c) {
  switch (c) {
    case 'L': return Var::kLeft;
    case 'C': return Var::kCenter;
    case 'R': return Var::kRight;
  }
  throw Error(std::string("bad factor variable letter: ") + c);
}
}  // namespace

std::string Factor::key() const {
  std::string k(1, var_letter(target));
  k += '|';
  for (Var v : cond) k += var_letter(v);
  return k;
}

Factor factor_from_key(const std::string &key) {
  FAM_CHECK(key.size() >= 2 && key[1] == '|') << "bad factor key: " << key;
  Factor f;
  f.target = var_from_letter(key[0]);
  for (size_t i = 2; i < key.size(); ++i)
    f.cond.push_back(var_from_letter(key[i]));
  return f;
}

std::vector<Factor> decomposition_factors(DecompTag tag) {
  using V = Var;
  switch (tag) {
    case DecompTag::kMonophone:
      return {{V::kCenter, {}}};
    case DecompTag::kDiphone:
      return {{V::kCenter, {V::kLeft}}, {V::kLeft, {}}};
    case DecompTag::kTriForward:
      return {{V::kRight, {V::kLeft, V::kCenter}},
              {V::kCenter, {V::kLeft}},
              {V::kLeft, {}}};
    case DecompTag::kTriSymmetric:
      return {{V::kCenter, {V::kLeft, V::kRight}},
              {V::kLeft, {}},
              {V::kRight, {}}};
    case DecompTag::kTriBackward:
      return {{V::kLeft, {V::kCenter, V::kRight}},
              {V::kRight, {V::kCenter}},
              {V::kCenter, {}}};
  }
  FAM_ERROR() << "bad decomposition tag";
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::kMonophone: return "monophone";
    case Stage::kDiphone: return "diphone";
    case Stage::kTriphone: return "triphone";
  }
  FAM_ERROR() << "bad stage";
}

std::vector<Factor> stage_factors(DecompTag target, Stage stage,
                                  bool include_right_branch) {
  using V = Var;
  switch (stage) {
    case Stage::kMonophone:
      if (target == DecompTag::kMonophone) return {{V::kCenter, {}}};
      return {{V::kLeft, {}}, {V::kCenter, {}}, {V::kRight, {}}};
    case Stage::kDiphone: {
      std::vector<Factor> f = {{V::kLeft, {}}, {V::kCenter, {V::kLeft}}};
      if (include_right_branch) f.push_back({V::kRight, {V::kCenter}});
      return f;
    }
    case Stage::kTriphone:
      return decomposition_factors(target);
  }
  FAM_ERROR() << "bad stage";
}

ModelDims ModelDims::FromConfig(const Config &cfg, const std::string &s) {
  ModelDims d;
  d.context_window = cfg.get_int(s, "context_window", d.context_window);
  auto hidden = cfg.get_double_list(
      s, "encoder_hidden",
      std::vector<double>(d.encoder_hidden.begin(), d.encoder_hidden.end()));
  d.encoder_hidden.assign(hidden.begin(), hidden.end());
  d.head_hidden = cfg.get_int(s, "head_hidden", d.head_hidden);
  d.left_embedding_dim =
      cfg.get_int(s, "left_embedding_dim", d.left_embedding_dim);
  d.right_embedding_dim =
      cfg.get_int(s, "right_embedding_dim", d.right_embedding_dim);
  d.center_embedding_dim =
      cfg.get_int(s, "center_embedding_dim", d.center_embedding_dim);
  d.dropout = cfg.get_double(s, "dropout", d.dropout);
  return d;
}

MatF windowed_features(const MatF &frames, int context) {
  const int T = static_cast<int>(frames.rows());
  const int D = static_cast<int>(frames.cols());
  MatF out = MatF::Zero(T, (2 * context + 1) * D);
  for (int t = 0; t < T; ++t)
    for (int k = -context; k <= context; ++k) {
      int src = t + k;
      if (src < 0 || src >= T) continue;
      out.block(t, (k + context) * D, 1, D) = frames.row(src);
    }
  return out;
}

// ---- training ----

TrainConfig TrainConfig::FromConfig(const Config &cfg, const std::string &s) {
  TrainConfig t;
  t.epochs = cfg.get_int(s, "epochs", t.epochs);
  t.batch_size = cfg.get_int(s, "batch_size", t.batch_size);
  t.focal_gamma = cfg.get_double(s, "focal_gamma", t.focal_gamma);
  t.adam.learning_rate =
      cfg.get_double(s, "learning_rate", t.adam.learning_rate);
  t.adam.l2 = cfg.get_double(s, "l2", t.adam.l2);
  t.adam.gradient_noise_variance = cfg.get_double(
      s, "gradient_noise_variance", t.adam.gradient_noise_variance);
  t.adam.nesterov = cfg.get_bool(s, "nesterov", t.adam.nesterov);
  t.newbob_decay = cfg.get_double(s, "newbob_decay", t.newbob_decay);
  t.newbob_floor = cfg.get_double(s, "newbob_floor", t.newbob_floor);
  t.dev_eval_max_frames =
      cfg.get_int(s, "dev_eval_max_frames", t.dev_eval_max_frames);
  t.seed = static_cast<std::uint64_t>(cfg.get_int(s, "seed", 1));
  t.verbose = cfg.get_bool(s, "verbose", t.verbose);
  return t;
}

namespace {

struct FrameRef {
  int utt;
  int t;
};

std::vector<FrameRef> all_frames(const Corpus &corpus) {
  std::vector<FrameRef> out;
  for (int u = 0; u < static_cast<int>(corpus.utterances.size()); ++u)
    for (int t = 0; t < corpus.utterances[u].num_frames(); ++t)
      out.push_back({u, t});
  return out;
}

// Windowed inputs and per-variable labels for a slice of frame refs.
void assemble_batch(const Corpus &corpus, const std::vector<FrameRef> &refs,
                    size_t begin, size_t end, int context, MatF *x,
                    BatchLabels<float> *labels) {
  const int D = corpus.feature_dim;
  const int n = static_cast<int>(end - begin);
  x->setZero(n, (2 * context + 1) * D);
  labels->left.resize(n);
  labels->center.resize(n);
  labels->right.resize(n);
  for (int i = 0; i < n; ++i) {
    const FrameRef &ref = refs[begin + i];
    const Utterance &utt = corpus.utterances[ref.utt];
    const int T = utt.num_frames();
    for (int k = -context; k <= context; ++k) {
      int src = ref.t + k;
      if (src < 0 || src >= T) continue;
      x->block(i, (k + context) * D, 1, D) = utt.frames.row(src);
    }
    const TriphoneContext &ctx = utt.alignment[ref.t];
    labels->left[i] = ctx.left;
    labels->center[i] = ctx.center;
    labels->right[i] = ctx.right;
  }
}

}  // namespace

double frame_error_rate(FactoredNet &model, const Corpus &corpus,
                        int max_frames) {
  std::vector<FrameRef> refs = all_frames(corpus);
  if (max_frames > 0 && static_cast<int>(refs.size()) > max_frames)
    refs.resize(max_frames);
  FAM_CHECK(!refs.empty()) << "no frames to evaluate";
  long errors = 0, total = 0;
  const int batch = 1024;
  MatF x;
  BatchLabels<float> labels;
  for (size_t b = 0; b < refs.size(); b += batch) {
    size_t e = std::min(refs.size(), b + batch);
    assemble_batch(corpus, refs, b, e, model.dims().context_window, &x,
                   &labels);
    std::vector<long> head_errors;
    model.loss(x, labels, 0.0, false, nullptr, false, &head_errors);
    for (long he : head_errors) errors += he;
    total += static_cast<long>(e - b) * model.num_heads();
  }
  return static_cast<double>(errors) / static_cast<double>(total);
}

EpochStats train_epoch(FactoredNet &model, const Corpus &train,
                       const Corpus &dev, Adam<float> &opt,
                       NewbobState &newbob, const TrainConfig &cfg,
                       std::mt19937_64 &rng) {
  std::vector<FrameRef> refs = all_frames(train);
  FAM_CHECK(!refs.empty()) << "empty training corpus";
  std::shuffle(refs.begin(), refs.end(), rng);
  double loss_sum = 0;
  long frames = 0;
  MatF x;
  BatchLabels<float> labels;
  for (size_t b = 0; b < refs.size(); b += cfg.batch_size) {
    size_t e = std::min(refs.size(), b + cfg.batch_size);
    assemble_batch(train, refs, b, e, model.dims().context_window, &x,
                   &labels);
    model.zero_grads();
    float loss =
        model.loss(x, labels, cfg.focal_gamma, true, &rng, true, nullptr);
    opt.set_learning_rate(newbob.learning_rate);
    opt.step();
    loss_sum += static_cast<double>(loss) * static_cast<double>(e - b);
    frames += static_cast<long>(e - b);
  }
  EpochStats stats;
  stats.train_loss = loss_sum / static_cast<double>(frames);
  stats.dev_frame_error_rate =
      frame_error_rate(model, dev, cfg.dev_eval_max_frames);
  newbob.update(stats.dev_frame_error_rate);
  stats.learning_rate = newbob.learning_rate;
  return stats;
}

std::vector<EpochStats> train_model(FactoredNet &model, const Corpus &train,
                                    const Corpus &dev,
                                    const TrainConfig &cfg) {
  AdamConfig adam_cfg = cfg.adam;
  adam_cfg.noise_seed = cfg.seed ^ 0x5851f42d4c957f2dull;
  Adam<float> opt(model.parameters(), adam_cfg);
  NewbobState newbob;
  newbob.learning_rate = cfg.adam.learning_rate;
  newbob.decay = cfg.newbob_decay;
  newbob.floor = cfg.newbob_floor;
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 17);
  std::vector<EpochStats> history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochStats stats = train_epoch(model, train, dev, opt, newbob, cfg, rng);
    if (cfg.verbose)
      std::cerr << "epoch " << (epoch + 1) << " loss " << stats.train_loss
                << " dev-fer " << stats.dev_frame_error_rate << " lr "
                << stats.learning_rate << "\n";
    history.push_back(stats);
  }
  return history;
}

// ---- multi-stage pre-training ----

StagePlan StagePlan::FromConfig(const Config &cfg, const std::string &s) {
  StagePlan plan;
  for (const std::string &name :
       cfg.get_string_list(s, "stages", std::vector<std::string>{})) {
    if (name == "monophone")
      plan.stages.push_back(Stage::kMonophone);
    else if (name == "diphone")
      plan.stages.push_back(Stage::kDiphone);
    else if (name == "triphone")
      plan.stages.push_back(Stage::kTriphone);
    else
      throw Error("unknown stage: " + name);
  }
  auto epochs = cfg.get_double_list(s, "epochs_per_stage",
                                    std::vector<double>{-1.0});
  if (!(epochs.size() == 1 && epochs[0] < 0))
    plan.epochs_per_stage.assign(epochs.begin(), epochs.end());
  plan.include_right_branch =
      cfg.get_bool(s, "include_right_branch", plan.include_right_branch);
  return plan;
}

namespace {
Stage target_stage(DecompTag tag) {
  switch (tag) {
    case DecompTag::kMonophone: return Stage::kMonophone;
    case DecompTag::kDiphone: return Stage::kDiphone;
    default: return Stage::kTriphone;
  }
}
}  // namespace

FactoredNet run_stage_plan(DecompTag target, const StagePlan &plan,
                           const Corpus &train, const Corpus &dev,
                           const ModelDims &dims, const TrainConfig &cfg) {
  std::vector<Stage> stages = plan.stages;
  Stage final_stage = target_stage(target);
  if (stages.empty() || stages.back() != final_stage)
    stages.push_back(final_stage);
  for (size_t i = 0; i + 1 < stages.size(); ++i)
    FAM_CHECK(static_cast<int>(stages[i]) < static_cast<int>(stages[i + 1]))
        << "stage plan must be an increasing prefix of [monophone, diphone, "
           "triphone]";
  FAM_CHECK(static_cast<int>(stages.front()) <=
            static_cast<int>(final_stage))
      << "stage plan exceeds the target decomposition: "
      << to_string(stages.front()) << " for " << to_string(target);
  if (!plan.epochs_per_stage.empty())
    FAM_CHECK(plan.epochs_per_stage.size() == stages.size())
        << "epochs_per_stage length " << plan.epochs_per_stage.size()
        << " does not match stage count " << stages.size();

  std::optional<FactoredNet> model;
  for (size_t i = 0; i < stages.size(); ++i) {
    std::vector<Factor> heads =
        stage_factors(target, stages[i], plan.include_right_branch);
    FactoredNet next(train.inventory, train.feature_dim, target, heads, dims,
                     cfg.seed);
    if (model.has_value()) {
      next.copy_matching_parameters(*model);
      next.stage_history = model->stage_history;
    }
    TrainConfig stage_cfg = cfg;
    if (!plan.epochs_per_stage.empty())
      stage_cfg.epochs = plan.epochs_per_stage[i];
    stage_cfg.seed = cfg.seed + 101 * i;
    train_model(next, train, dev, stage_cfg);
    next.stage_history.push_back(to_string(stages[i]));
    model.emplace(std::move(next));
  }
  return std::move(*model);
}

// ---- checkpoints ----

void save_checkpoint(const FactoredNet &model, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  FAM_CHECK(out.good()) << "cannot write checkpoint " << path;
  const PhonemeInventory &inv = model.inventory();
  out << "FAMCKPT 1\n";
  out << to_string(model.tag()) << " " << inv.num_phonemes() << " "
      << model.feature_dim() << "\n";
  out << inv.symbol_name(inv.silence_symbol());
  for (int p = 0; p < inv.num_phonemes(); ++p)
    out << " " << inv.symbol_name(p);
  out << "\n";
  const ModelDims &d = model.dims();
  out << d.context_window << " " << d.head_hidden << " "
      << d.left_embedding_dim << " " << d.right_embedding_dim << " "
      << d.center_embedding_dim << " " << d.dropout << " "
      << d.encoder_hidden.size();
  for (int h : d.encoder_hidden) out << " " << h;
  out << "\n";
  out << model.head_specs().size();
  for (const Factor &f : model.head_specs()) out << " " << f.key();
  out << "\n";
  out << model.stage_history.size();
  for (const std::string &s : model.stage_history) out << " " << s;
  out << "\n";
  auto params = const_cast<FactoredNet &>(model).parameters();
  out << params.size() << "\n";
  for (const Parameter<float> *p : params) {
    out << p->name << " " << p->value.rows() << " " << p->value.cols()
        << "\n";
    out.write(reinterpret_cast<const char *>(p->value.data()),
              static_cast<std::streamsize>(sizeof(float)) * p->value.size());
    out << "\n";
  }
  FAM_CHECK(out.good()) << "write failure on checkpoint " << path;
}

FactoredNet load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  FAM_CHECK(in.good()) << "cannot open checkpoint " << path;
  std::string magic, tag_name;
  int version = 0, P = 0, D = 0;
  in >> magic >> version >> tag_name >> P >> D;
  FAM_CHECK(magic == "FAMCKPT" && version == 1)
      << path << ": malformed checkpoint header";
  std::string silence;
  in >> silence;
  std::vector<std::string> phonemes(P);
  for (auto &p : phonemes) in >> p;
  PhonemeInventory inv(std::move(phonemes), silence);
  ModelDims d;
  size_t n_hidden = 0;
  in >> d.context_window >> d.head_hidden >> d.left_embedding_dim >>
      d.right_embedding_dim >> d.center_embedding_dim >> d.dropout >>
      n_hidden;
  d.encoder_hidden.resize(n_hidden);
  for (auto &h : d.encoder_hidden) in >> h;
  size_t n_heads = 0;
  in >> n_heads;
  std::vector<Factor> heads;
  for (size_t i = 0; i < n_heads; ++i) {
    std::string key;
    in >> key;
    heads.push_back(factor_from_key(key));
  }
  size_t n_stages = 0;
  in >> n_stages;
  std::vector<std::string> stage_history(n_stages);
  for (auto &s : stage_history) in >> s;
  FactoredNet model(inv, D, decomp_from_string(tag_name), heads, d, 0);
  model.stage_history = stage_history;
  size_t n_params = 0;
  in >> n_params;
  std::map<std::string, Parameter<float> *> by_name;
  for (auto *p : model.parameters()) by_name[p->name] = p;
  FAM_CHECK(n_params == by_name.size())
      << path << ": checkpoint has " << n_params << " tensors, model needs "
      << by_name.size();
  for (size_t i = 0; i < n_params; ++i) {
    std::string name;
    long rows = 0, cols = 0;
    in >> name >> rows >> cols;
    auto it = by_name.find(name);
    FAM_CHECK(it != by_name.end()) << path << ": unexpected tensor " << name;
    FAM_CHECK(it->second->value.rows() == rows &&
              it->second->value.cols() == cols)
        << path << ": shape mismatch for tensor " << name;
    in.get();
    in.read(reinterpret_cast<char *>(it->second->value.data()),
            static_cast<std::streamsize>(sizeof(float)) * rows * cols);
    FAM_CHECK(in.gcount() ==
              static_cast<std::streamsize>(sizeof(float)) * rows * cols)
        << path << ": truncated tensor " << name;
  }
  return model;
}

// ---- gradient checks ----

namespace {

MatD random_batch(int rows, int cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatD x(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) x(r, c) = dist(rng);
  return x;
}

std::vector<int> random_targets(int n, int card, std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> pick(0, card - 1);
  std::vector<int> t(n);
  for (int i = 0; i < n; ++i) t[i] = pick(rng);
  return t;
}

double check_mlp(const std::vector<int> &hidden, double gamma,
                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int batch = 8, in = 5, out = 4;
  Mlp<double> mlp(in, hidden, out, Mlp<double>::Output::kLinear, 0.0, "gc",
                  rng);
  MatD x = random_batch(batch, in, rng);
  std::vector<int> targets = random_targets(batch, out, rng);
  auto loss_fn = [&]() {
    auto act = mlp.forward(x, false);
    return focal_cross_entropy(softmax_rows(act.top()), targets, gamma);
  };
  auto grad_fn = [&]() {
    auto act = mlp.forward(x, false);
    MatD dlogits;
    focal_cross_entropy(softmax_rows(act.top()), targets, gamma, &dlogits);
    mlp.backward(x, act, dlogits);
  };
  return gradient_check<double>(mlp.parameters(), loss_fn, grad_fn, 1e-5, 5,
                                seed + 1);
}

double check_factored(double gamma, double dropout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PhonemeInventory inv = PhonemeInventory::Synthetic(3);
  ModelDims dims;
  dims.context_window = 1;
  dims.encoder_hidden = {8, 8};
  dims.head_hidden = 8;
  dims.left_embedding_dim = 3;
  dims.right_embedding_dim = 3;
  dims.center_embedding_dim = 4;
  dims.dropout = dropout;
  const int feature_dim = 4, batch = 8;
  FactoredNetT<double> net(inv, feature_dim, DecompTag::kTriForward,
                           decomposition_factors(DecompTag::kTriForward),
                           dims, seed);
  MatD x = random_batch(batch, net.window_dim(), rng);
  BatchLabels<double> labels;
  labels.left = random_targets(batch, inv.num_symbols(), rng);
  labels.center = random_targets(batch, inv.num_center_labels(), rng);
  labels.right = random_targets(batch, inv.num_symbols(), rng);
  const bool train = dropout > 0;
  // A fixed dropout rng per evaluation keeps the loss a deterministic
  // function of the parameters.
  auto loss_fn = [&]() {
    std::mt19937_64 drop_rng(seed + 7);
    return net.loss(x, labels, gamma, train, &drop_rng, false);
  };
  auto grad_fn = [&]() {
    std::mt19937_64 drop_rng(seed + 7);
    net.loss(x, labels, gamma, train, &drop_rng, true);
  };
  return gradient_check<double>(net.parameters(), loss_fn, grad_fn, 1e-5, 3,
                                seed + 2);
}

}  // namespace

std::vector<GradCheckReport> run_gradient_checks(std::uint64_t seed) {
  std::vector<GradCheckReport> reports;
  reports.push_back({"linear+softmax+ce", check_mlp({}, 0.0, seed)});
  reports.push_back({"mlp+focal(gamma=2)", check_mlp({6}, 2.0, seed + 11)});
  reports.push_back(
      {"factored+embeddings(gamma=0)", check_factored(0.0, 0.0, seed + 23)});
  reports.push_back(
      {"factored+embeddings(gamma=2)", check_factored(2.0, 0.0, seed + 31)});
  reports.push_back(
      {"factored+dropout(gamma=2)", check_factored(2.0, 0.25, seed + 41)});
  return reports;
}

}  // namespace fam
