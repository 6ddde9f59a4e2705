// fam/model.hh
// Factorized context-dependent acoustic model: chain-rule decompositions of
// the triphone-state posterior, per-factor embedding/MLP/softmax heads on a
// shared windowed feed-forward encoder, joint training and multi-stage
// phonetic pre-training.

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

#ifndef FAM_MODEL_HH_
#define FAM_MODEL_HH_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fam/corpus.hh"
#include "fam/inventory.hh"
#include "fam/net.hh"

namespace fam {

enum class DecompTag {
  kMonophone,
  kDiphone,
  kTriForward,
  kTriSymmetric,
  kTriBackward,
};

std::string to_string(DecompTag tag);
DecompTag decomp_from_string(const std::string &name);

enum class Var { kLeft = 0, kCenter = 1, kRight = 2 };

int var_cardinality(const PhonemeInventory &inv, Var v);
int var_value(const TriphoneContext &ctx, Var v);

// One conditional factor p(target | cond..., x).
struct Factor {
  Var target;
  std::vector<Var> cond;  // conditioning order is fixed per decomposition

  std::string key() const;  // e.g. "C|L"
  bool operator==(const Factor &o) const = default;
};

Factor factor_from_key(const std::string &key);

// The factor list of a decomposition, outermost factor first:
//   monophone:     p(C|x)
//   diphone:       p(C|L,x) p(L|x)
//   tri-forward:   p(R|L,C,x) p(C|L,x) p(L|x)
//   tri-symmetric: p(C|L,R,x) p(L|x) p(R|x)
//   tri-backward:  p(L|C,R,x) p(R|C,x) p(C|x)
std::vector<Factor> decomposition_factors(DecompTag tag);

enum class Stage { kMonophone, kDiphone, kTriphone };
std::string to_string(Stage s);

// Head set trained at a pre-training stage.  The monophone stage trains the
// three context-free heads; the diphone stage trains p(L|x), p(C|L,x) and
// optionally the p(R|C,x) branch; the triphone stage is the target
// decomposition itself.
std::vector<Factor> stage_factors(DecompTag target, Stage stage,
                                  bool include_right_branch);

struct ModelDims {
  int context_window = 4;  // frames on each side of the center frame
  std::vector<int> encoder_hidden = {128, 128};
  int head_hidden = 128;
  int left_embedding_dim = 10;
  int right_embedding_dim = 10;
  int center_embedding_dim = 30;
  double dropout = 0.1;

  static ModelDims FromConfig(const Config &cfg,
                              const std::string &section = "model");
};

// Windowed frame encoding: each row is the frame concatenated with its
// +-context neighbors, zero padded at the utterance edges.
MatF windowed_features(const MatF &frames, int context);

template <typename S>
struct BatchLabels {
  std::vector<int> left, center, right;

  const std::vector<int> &of(Var v) const {
    switch (v) {
      case Var::kLeft: return left;
      case Var::kCenter: return center;
      default: return right;
    }
  }
};

// The factorized network for one head set.  All heads are independent flows
// on top of a shared encoder; each head input is the encoder output
// concatenated with the embeddings of exactly its conditioning variables.
template <typename S>
class FactoredNetT {
 public:
  FactoredNetT(const PhonemeInventory &inv, int feature_dim, DecompTag tag,
               std::vector<Factor> heads, const ModelDims &dims,
               std::uint64_t seed);

  const PhonemeInventory &inventory() const { return inv_; }
  int feature_dim() const { return feature_dim_; }
  const ModelDims &dims() const { return dims_; }
  DecompTag tag() const { return tag_; }
  const std::vector<Factor> &head_specs() const { return head_specs_; }
  int num_heads() const { return static_cast<int>(head_specs_.size()); }
  int head_index(const Factor &f) const;  // -1 when absent
  int window_dim() const {
    return feature_dim_ * (2 * dims_.context_window + 1);
  }

  // Encoder output for a batch of windowed frames.
  typename Mlp<S>::Activations encode(const Mat<S> &windowed, bool train,
                                      std::mt19937_64 *rng = nullptr) const;

  // Head input for given conditioning labels (one per row of enc_out).
  Mat<S> head_input(int head, const Mat<S> &enc_out,
                    const BatchLabels<S> &labels) const;

  // Posteriors of one head; eval mode.
  Mat<S> head_posteriors(int head, const Mat<S> &enc_out,
                         const BatchLabels<S> &labels) const;

  // Joint focal-CE loss over all heads (sum of per-head batch means); when
  // accumulate_grads is set, backpropagates into all parameters.
  S loss(const Mat<S> &windowed, const BatchLabels<S> &labels, double gamma,
         bool train, std::mt19937_64 *rng, bool accumulate_grads,
         std::vector<long> *head_errors = nullptr);

  std::vector<Parameter<S> *> parameters();
  void zero_grads();

  // Copies every parameter whose name and shape match; used for stage
  // carryover and checkpoint loading.  Returns the copied names.
  std::vector<std::string> copy_matching_parameters(FactoredNetT<S> &from);

  const Mlp<S> &encoder() const { return encoder_; }
  Mlp<S> &encoder() { return encoder_; }
  Mlp<S> &head_mlp(int head) { return heads_[head]; }
  const Mlp<S> &head_mlp(int head) const { return heads_[head]; }
  Embedding<S> &embedding(Var v) { return embeddings_.at(static_cast<int>(v)); }
  bool has_embedding(Var v) const {
    return embeddings_.count(static_cast<int>(v)) > 0;
  }

  std::vector<std::string> stage_history;  // training metadata

 private:
  PhonemeInventory inv_;
  int feature_dim_;
  DecompTag tag_;
  std::vector<Factor> head_specs_;
  ModelDims dims_;
  Mlp<S> encoder_;
  std::map<int, Embedding<S>> embeddings_;  // keyed by Var
  std::vector<Mlp<S>> heads_;
};

using FactoredNet = FactoredNetT<float>;

// ---- training ----

struct TrainConfig {
  int epochs = 8;
  int batch_size = 256;
  double focal_gamma = 2.0;
  AdamConfig adam;
  double newbob_decay = 0.8944271909999159;  // sqrt(0.8)
  double newbob_floor = 5e-6;
  int dev_eval_max_frames = 20000;
  std::uint64_t seed = 1;
  bool verbose = false;

  static TrainConfig FromConfig(const Config &cfg,
                                const std::string &section = "training");
};

struct EpochStats {
  double train_loss = 0;
  double dev_frame_error_rate = 0;
  double learning_rate = 0;
};

// One shuffled pass over all training frames followed by a dev FER
// evaluation; the caller owns the optimizer and Newbob state.
EpochStats train_epoch(FactoredNet &model, const Corpus &train,
                       const Corpus &dev, Adam<float> &opt,
                       NewbobState &newbob, const TrainConfig &cfg,
                       std::mt19937_64 &rng);

// Full training run of a fixed head set.
std::vector<EpochStats> train_model(FactoredNet &model, const Corpus &train,
                                    const Corpus &dev, const TrainConfig &cfg);

// Frame error rate averaged over heads, with conditioning labels read from
// the ground-truth alignment.
double frame_error_rate(FactoredNet &model, const Corpus &corpus,
                        int max_frames);

// ---- multi-stage pre-training ----

struct StagePlan {
  std::vector<Stage> stages;  // prefix of [mono, di, tri]; the final target
                              // stage is appended when missing
  std::vector<int> epochs_per_stage;  // empty: cfg.epochs everywhere
  bool include_right_branch = false;

  static StagePlan FromConfig(const Config &cfg,
                              const std::string &section = "stages");
};

// Trains stage by stage, carrying retained heads and the encoder forward
// verbatim; newly added heads are freshly initialized.
FactoredNet run_stage_plan(DecompTag target, const StagePlan &plan,
                           const Corpus &train, const Corpus &dev,
                           const ModelDims &dims, const TrainConfig &cfg);

// ---- checkpoints ----

void save_checkpoint(const FactoredNet &model, const std::string &path);
FactoredNet load_checkpoint(const std::string &path);

// ---- gradient checks ----

// Central-finite-difference checks in double precision, one per layer type
// and focal setting.
struct GradCheckReport {
  std::string name;
  double max_rel_error = 0;
};

std::vector<GradCheckReport> run_gradient_checks(std::uint64_t seed);

// ---- template definitions ----

namespace internal {
inline std::uint64_t component_seed(std::uint64_t seed,
                                    const std::string &name) {
  std::uint64_t h = seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
  for (char c : name) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ull;
  return h;
}
}  // namespace internal

template <typename S>
FactoredNetT<S>::FactoredNetT(const PhonemeInventory &inv, int feature_dim,
                              DecompTag tag, std::vector<Factor> heads,
                              const ModelDims &dims, std::uint64_t seed)
    : inv_(inv),
      feature_dim_(feature_dim),
      tag_(tag),
      head_specs_(std::move(heads)),
      dims_(dims) {
  FAM_CHECK(!head_specs_.empty()) << "model needs at least one head";
  // Per-component rng streams keyed by name, so a component shared between
  // two head sets starts from identical values for the same seed.
  {
    std::vector<int> hidden(dims_.encoder_hidden.begin(),
                            dims_.encoder_hidden.end() - 1);
    std::mt19937_64 rng(internal::component_seed(seed, "encoder"));
    encoder_ = Mlp<S>(window_dim(), hidden, dims_.encoder_hidden.back(),
                      Mlp<S>::Output::kTanh, dims_.dropout, "encoder", rng);
  }
  for (const Factor &f : head_specs_) {
    for (Var v : f.cond) {
      int key = static_cast<int>(v);
      if (embeddings_.count(key)) continue;
      int dim = v == Var::kLeft     ? dims_.left_embedding_dim
                : v == Var::kRight ? dims_.right_embedding_dim
                                   : dims_.center_embedding_dim;
      std::string name = std::string("emb[") +
                         (v == Var::kLeft     ? "L"
                          : v == Var::kRight ? "R"
                                             : "C") +
                         "]";
      std::mt19937_64 rng(internal::component_seed(seed, name));
      Embedding<S> emb;
      emb.init(var_cardinality(inv_, v), dim, name, rng);
      embeddings_.emplace(key, std::move(emb));
    }
  }
  for (const Factor &f : head_specs_) {
    int in = dims_.encoder_hidden.back();
    for (Var v : f.cond) in += embeddings_.at(static_cast<int>(v)).dim();
    std::string name = "head[" + f.key() + "]";
    std::mt19937_64 rng(internal::component_seed(seed, name));
    heads_.emplace_back(in, std::vector<int>{dims_.head_hidden},
                        var_cardinality(inv_, f.target),
                        Mlp<S>::Output::kLinear, dims_.dropout, name, rng);
  }
}

template <typename S>
int FactoredNetT<S>::head_index(const Factor &f) const {
  for (int i = 0; i < num_heads(); ++i)
    if (head_specs_[i] == f) return i;
  return -1;
}

template <typename S>
typename Mlp<S>::Activations FactoredNetT<S>::encode(
    const Mat<S> &windowed, bool train, std::mt19937_64 *rng) const {
  return encoder_.forward(windowed, train, rng);
}

template <typename S>
Mat<S> FactoredNetT<S>::head_input(int head, const Mat<S> &enc_out,
                                   const BatchLabels<S> &labels) const {
  const Factor &f = head_specs_[head];
  int cols = static_cast<int>(enc_out.cols());
  for (Var v : f.cond) cols += embeddings_.at(static_cast<int>(v)).dim();
  Mat<S> in(enc_out.rows(), cols);
  in.leftCols(enc_out.cols()) = enc_out;
  int off = static_cast<int>(enc_out.cols());
  for (Var v : f.cond) {
    const Embedding<S> &emb = embeddings_.at(static_cast<int>(v));
    in.middleCols(off, emb.dim()) = emb.forward(labels.of(v));
    off += emb.dim();
  }
  return in;
}

template <typename S>
Mat<S> FactoredNetT<S>::head_posteriors(int head, const Mat<S> &enc_out,
                                        const BatchLabels<S> &labels) const {
  auto act = heads_[head].forward(head_input(head, enc_out, labels), false);
  return softmax_rows(act.top());
}

template <typename S>
S FactoredNetT<S>::loss(const Mat<S> &windowed, const BatchLabels<S> &labels,
                        double gamma, bool train, std::mt19937_64 *rng,
                        bool accumulate_grads,
                        std::vector<long> *head_errors) {
  auto enc_act = encoder_.forward(windowed, train, rng);
  const Mat<S> &enc_out = enc_act.top();
  Mat<S> d_enc;
  if (accumulate_grads) d_enc.setZero(enc_out.rows(), enc_out.cols());
  if (head_errors) head_errors->assign(num_heads(), 0);
  S total = 0;
  for (int h = 0; h < num_heads(); ++h) {
    const Factor &f = head_specs_[h];
    Mat<S> in = head_input(h, enc_out, labels);
    auto act = heads_[h].forward(in, train, rng);
    Mat<S> post = softmax_rows(act.top());
    const std::vector<int> &targets = labels.of(f.target);
    Mat<S> dlogits;
    total += focal_cross_entropy(post, targets, gamma,
                                 accumulate_grads ? &dlogits : nullptr);
    if (head_errors) {
      for (int r = 0; r < post.rows(); ++r) {
        int best = 0;
        post.row(r).maxCoeff(&best);
        if (best != targets[r]) ++(*head_errors)[h];
      }
    }
    if (accumulate_grads) {
      Mat<S> din = heads_[h].backward(in, act, std::move(dlogits));
      d_enc += din.leftCols(enc_out.cols());
      int off = static_cast<int>(enc_out.cols());
      for (Var v : f.cond) {
        Embedding<S> &emb = embeddings_.at(static_cast<int>(v));
        emb.backward(labels.of(v), din.middleCols(off, emb.dim()));
        off += emb.dim();
      }
    }
  }
  if (accumulate_grads) encoder_.backward(windowed, enc_act, std::move(d_enc));
  return total;
}

template <typename S>
std::vector<Parameter<S> *> FactoredNetT<S>::parameters() {
  std::vector<Parameter<S> *> out;
  for (auto *p : encoder_.parameters()) out.push_back(p);
  for (auto &[key, emb] : embeddings_) out.push_back(&emb.table);
  for (auto &h : heads_)
    for (auto *p : h.parameters()) out.push_back(p);
  return out;
}

template <typename S>
void FactoredNetT<S>::zero_grads() {
  for (auto *p : parameters()) p->zero_grad();
}

template <typename S>
std::vector<std::string> FactoredNetT<S>::copy_matching_parameters(
    FactoredNetT<S> &from) {
  std::map<std::string, Parameter<S> *> source;
  for (auto *p : from.parameters()) source[p->name] = p;
  std::vector<std::string> copied;
  for (auto *p : parameters()) {
    auto it = source.find(p->name);
    if (it == source.end()) continue;
    if (it->second->value.rows() != p->value.rows() ||
        it->second->value.cols() != p->value.cols())
      continue;
    p->value = it->second->value;
    copied.push_back(p->name);
  }
  return copied;
}

}  // namespace fam

#endif  // FAM_MODEL_HH_
