// fam/net.hh
// Minimal neural network engine: dense layers, embeddings, dropout, softmax
// with focal cross-entropy, Nesterov-Adam, Newbob scheduling and a finite
// difference gradient checker.  Templated on the scalar type; training uses
// float, gradient checks double.

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

#ifndef FAM_NET_HH_
#define FAM_NET_HH_

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fam/common.hh"
#include "fam/matrix.hh"

namespace fam {

template <typename S>
struct Parameter {
  std::string name;
  Mat<S> value;
  Mat<S> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// ---- layers ----

template <typename S>
struct Linear {
  Parameter<S> weight;  // out x in
  Parameter<S> bias;    // out x 1

  void init(int in, int out, const std::string &name, std::mt19937_64 &rng) {
    // Uniform fan-in scaling.
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    weight.name = name + ".weight";
    weight.value.resize(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c)
        weight.value(r, c) = static_cast<S>(dist(rng));
    bias.name = name + ".bias";
    bias.value.setZero(out, 1);
    weight.zero_grad();
    bias.zero_grad();
  }

  int in_dim() const { return static_cast<int>(weight.value.cols()); }
  int out_dim() const { return static_cast<int>(weight.value.rows()); }

  Mat<S> forward(const Mat<S> &x) const {
    FAM_CHECK(x.cols() == weight.value.cols())
        << weight.name << ": input dim " << x.cols() << " != "
        << weight.value.cols();
    Mat<S> y = x * weight.value.transpose();
    y.rowwise() += bias.value.col(0).transpose();
    return y;
  }

  // Accumulates parameter gradients, returns gradient w.r.t. the input.
  Mat<S> backward(const Mat<S> &x, const Mat<S> &dy) {
    weight.grad.noalias() += dy.transpose() * x;
    bias.grad.col(0).noalias() += dy.colwise().sum().transpose();
    return dy * weight.value;
  }
};

// Feed-forward stack: tanh on every hidden layer, linear or tanh output,
// inverted dropout after each tanh in train mode.
template <typename S>
class Mlp {
 public:
  enum class Output { kLinear, kTanh };

  struct Activations {
    // post[i] is the output of layer i after activation (and dropout).
    std::vector<Mat<S>> post;
    std::vector<Mat<S>> mask;  // dropout masks, empty in eval mode
    const Mat<S> &top() const { return post.back(); }
  };

  Mlp() = default;
  Mlp(int in, const std::vector<int> &hidden, int out, Output output_kind,
      double dropout, const std::string &name, std::mt19937_64 &rng)
      : output_kind_(output_kind), dropout_(dropout) {
    int prev = in;
    for (size_t i = 0; i < hidden.size(); ++i) {
      Linear<S> l;
      l.init(prev, hidden[i], name + ".h" + std::to_string(i), rng);
      prev = hidden[i];
      layers_.push_back(std::move(l));
    }
    Linear<S> l;
    l.init(prev, out, name + ".out", rng);
    layers_.push_back(std::move(l));
  }

  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }

  Activations forward(const Mat<S> &x, bool train,
                      std::mt19937_64 *rng = nullptr) const {
    Activations act;
    const Mat<S> *cur = &x;
    for (size_t i = 0; i < layers_.size(); ++i) {
      Mat<S> y = layers_[i].forward(*cur);
      bool last = (i + 1 == layers_.size());
      if (!last || output_kind_ == Output::kTanh) y = y.array().tanh();
      if (!last && train && dropout_ > 0.0) {
        FAM_CHECK(rng != nullptr) << "dropout needs an rng in train mode";
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        Mat<S> mask(y.rows(), y.cols());
        const S keep = static_cast<S>(1.0 / (1.0 - dropout_));
        for (int r = 0; r < y.rows(); ++r)
          for (int c = 0; c < y.cols(); ++c)
            mask(r, c) = coin(*rng) < dropout_ ? S(0) : keep;
        y = y.cwiseProduct(mask);
        act.mask.push_back(std::move(mask));
      } else if (!last) {
        act.mask.emplace_back();
      }
      act.post.push_back(std::move(y));
      cur = &act.post.back();
    }
    return act;
  }

  Mat<S> backward(const Mat<S> &x, const Activations &act, Mat<S> dtop) {
    for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
      bool last = (i + 1 == static_cast<int>(layers_.size()));
      if (!last || output_kind_ == Output::kTanh) {
        // d tanh: y' = 1 - y^2, with y before dropout.  Post-activation is
        // stored after dropout, so undo the mask first.
        Mat<S> y = act.post[i];
        if (!last && static_cast<size_t>(i) < act.mask.size() &&
            act.mask[i].size() > 0) {
          dtop = dtop.cwiseProduct(act.mask[i]);
          // Recover pre-dropout activation: mask is either 0 or 1/(1-p);
          // where it is 0 the gradient is already 0.
          for (int r = 0; r < y.rows(); ++r)
            for (int c = 0; c < y.cols(); ++c)
              if (act.mask[i](r, c) != S(0))
                y(r, c) /= act.mask[i](r, c);
        }
        dtop = dtop.cwiseProduct((S(1) - y.array().square()).matrix());
      }
      const Mat<S> &input = i == 0 ? x : act.post[i - 1];
      dtop = layers_[i].backward(input, dtop);
    }
    return dtop;
  }

  std::vector<Parameter<S> *> parameters() {
    std::vector<Parameter<S> *> out;
    for (auto &l : layers_) {
      out.push_back(&l.weight);
      out.push_back(&l.bias);
    }
    return out;
  }

  std::vector<Linear<S>> &layers() { return layers_; }
  const std::vector<Linear<S>> &layers() const { return layers_; }
  double dropout() const { return dropout_; }

 private:
  std::vector<Linear<S>> layers_;
  Output output_kind_ = Output::kLinear;
  double dropout_ = 0.0;
};

template <typename S>
struct Embedding {
  Parameter<S> table;  // V x dim

  void init(int vocab, int dim, const std::string &name,
            std::mt19937_64 &rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    table.name = name;
    table.value.resize(vocab, dim);
    for (int r = 0; r < vocab; ++r)
      for (int c = 0; c < dim; ++c)
        table.value(r, c) = static_cast<S>(dist(rng));
    table.zero_grad();
  }

  int dim() const { return static_cast<int>(table.value.cols()); }

  Mat<S> forward(const std::vector<int> &ids) const {
    Mat<S> out(static_cast<int>(ids.size()), table.value.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
      FAM_CHECK(ids[i] >= 0 && ids[i] < table.value.rows())
          << table.name << ": id out of range: " << ids[i];
      out.row(static_cast<int>(i)) = table.value.row(ids[i]);
    }
    return out;
  }

  void backward(const std::vector<int> &ids, const Mat<S> &dout) {
    for (size_t i = 0; i < ids.size(); ++i)
      table.grad.row(ids[i]) += dout.row(static_cast<int>(i));
  }
};

// ---- softmax and focal cross-entropy ----

template <typename S>
Mat<S> softmax_rows(const Mat<S> &logits) {
  Mat<S> out(logits.rows(), logits.cols());
  for (int r = 0; r < logits.rows(); ++r) {
    S m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename S>
Mat<S> log_softmax_rows(const Mat<S> &logits) {
  Mat<S> out(logits.rows(), logits.cols());
  for (int r = 0; r < logits.rows(); ++r) {
    S m = logits.row(r).maxCoeff();
    S lse = std::log((logits.row(r).array() - m).exp().sum()) + m;
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

// Mean over the batch of -(1-p_t)^gamma * log p_t.  When dlogits is given it
// receives the gradient w.r.t. the logits producing `posteriors`, scaled by
// 1/batch.
template <typename S>
S focal_cross_entropy(const Mat<S> &posteriors, const std::vector<int> &targets,
                      double gamma, Mat<S> *dlogits = nullptr) {
  FAM_CHECK(gamma >= 0.0) << "focal factor must be non-negative";
  const int n = static_cast<int>(posteriors.rows());
  FAM_CHECK(static_cast<int>(targets.size()) == n)
      << "target count does not match batch size";
  const S tiny = std::numeric_limits<S>::min();
  if (dlogits) dlogits->setZero(posteriors.rows(), posteriors.cols());
  S loss = 0;
  for (int r = 0; r < n; ++r) {
    FAM_CHECK(std::abs(posteriors.row(r).sum() - S(1)) < S(1e-4))
        << "posterior row does not sum to 1";
    int t = targets[r];
    FAM_CHECK(t >= 0 && t < posteriors.cols())
        << "target index out of range: " << t;
    S p = std::max(posteriors(r, t), tiny);
    S w = gamma == 0.0 ? S(1) : static_cast<S>(std::pow(S(1) - p, gamma));
    loss += -w * std::log(p);
    if (dlogits) {
      // dL/dp_t, then chain through softmax: dp_t/dz_k = p_t (delta - p_k).
      S dldp = gamma == 0.0
                   ? -S(1) / p
                   : static_cast<S>(gamma) *
                             static_cast<S>(std::pow(S(1) - p, gamma - 1)) *
                             std::log(p) -
                         w / p;
      for (int k = 0; k < posteriors.cols(); ++k) {
        S jac = p * ((k == t ? S(1) : S(0)) - posteriors(r, k));
        (*dlogits)(r, k) += dldp * jac / static_cast<S>(n);
      }
    }
  }
  return loss / static_cast<S>(n);
}

// ---- optimizer ----

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 0.01;
  double gradient_noise_variance = 0.0;  // 0.3 for paper-faithful runs
  bool nesterov = true;
  std::uint64_t noise_seed = 0;
};

template <typename S>
class Adam {
 public:
  Adam(std::vector<Parameter<S> *> params, const AdamConfig &cfg)
      : params_(std::move(params)), cfg_(cfg), noise_rng_(cfg.noise_seed) {
    FAM_CHECK(cfg_.learning_rate > 0) << "learning rate must be positive";
    for (auto *p : params_) {
      m_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    std::normal_distribution<double> noise(
        0.0, std::sqrt(cfg_.gradient_noise_variance));
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    for (size_t i = 0; i < params_.size(); ++i) {
      Parameter<S> &p = *params_[i];
      FAM_CHECK(p.grad.allFinite())
          << "non-finite gradient in parameter " << p.name;
      Mat<S> g = p.grad;
      if (cfg_.l2 > 0) g += static_cast<S>(cfg_.l2) * p.value;
      if (cfg_.gradient_noise_variance > 0)
        for (int r = 0; r < g.rows(); ++r)
          for (int c = 0; c < g.cols(); ++c)
            g(r, c) += static_cast<S>(noise(noise_rng_));
      m_[i] = static_cast<S>(b1) * m_[i] + static_cast<S>(1 - b1) * g;
      v_[i] = static_cast<S>(b2) * v_[i] +
              static_cast<S>(1 - b2) * g.cwiseProduct(g);
      const double bc2 = 1.0 - std::pow(b2, t_);
      Mat<S> vhat = v_[i] / static_cast<S>(bc2);
      Mat<S> update;
      if (cfg_.nesterov) {
        // Nesterov momentum lookahead applied to the first moment.
        const double bc1_next = 1.0 - std::pow(b1, t_ + 1);
        const double bc1 = 1.0 - std::pow(b1, t_);
        update = static_cast<S>(b1 / bc1_next) * m_[i] +
                 static_cast<S>((1 - b1) / bc1) * g;
      } else {
        const double bc1 = 1.0 - std::pow(b1, t_);
        update = m_[i] / static_cast<S>(bc1);
      }
      p.value -= static_cast<S>(lr_override_ > 0 ? lr_override_
                                                 : cfg_.learning_rate) *
                 update.cwiseQuotient(
                     (vhat.array().sqrt() + static_cast<S>(cfg_.epsilon))
                         .matrix());
    }
  }

  void set_learning_rate(double lr) { lr_override_ = lr; }
  long step_count() const { return t_; }

 private:
  std::vector<Parameter<S> *> params_;
  std::vector<Mat<S>> m_, v_;
  AdamConfig cfg_;
  long t_ = 0;
  double lr_override_ = -1;
  std::mt19937_64 noise_rng_;
};

// ---- Newbob learning-rate control ----

struct NewbobState {
  double learning_rate = 5e-4;
  double decay = 0.8944271909999159;  // sqrt(0.8)
  double floor = 5e-6;
  double best_dev_fer = std::numeric_limits<double>::infinity();

  // Decays the rate when the dev frame error rate failed to improve.
  void update(double dev_fer) {
    FAM_CHECK(dev_fer >= 0.0 && dev_fer <= 1.0) << "bad frame error rate";
    if (dev_fer < best_dev_fer) {
      best_dev_fer = dev_fer;
    } else {
      learning_rate = std::max(floor, learning_rate * decay);
    }
  }
};

// ---- gradient check ----

// Central finite differences on a sampled coordinate subset.  `compute_loss`
// must be a pure forward evaluation; `compute_grads` must leave the analytic
// gradient in each parameter's grad field.  Returns the max relative error.
template <typename S>
double gradient_check(const std::vector<Parameter<S> *> &params,
                      const std::function<S()> &compute_loss,
                      const std::function<void()> &compute_grads, double eps,
                      int samples_per_param, std::uint64_t seed) {
  for (auto *p : params) p->zero_grad();
  compute_grads();
  std::mt19937_64 rng(seed);
  double max_rel = 0;
  for (auto *p : params) {
    const long n = p->value.size();
    std::uniform_int_distribution<long> pick(0, n - 1);
    for (int s = 0; s < samples_per_param; ++s) {
      long idx = n <= samples_per_param ? (s % n) : pick(rng);
      S *coef = p->value.data() + idx;
      S saved = *coef;
      *coef = saved + static_cast<S>(eps);
      S up = compute_loss();
      *coef = saved - static_cast<S>(eps);
      S down = compute_loss();
      *coef = saved;
      double numeric = (static_cast<double>(up) - static_cast<double>(down)) /
                       (2 * eps);
      double analytic = static_cast<double>(*(p->grad.data() + idx));
      double denom = std::max(1.0, std::abs(numeric) + std::abs(analytic));
      max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
    }
  }
  return max_rel;
}

}  // namespace fam

#endif  // FAM_NET_HH_
