// Copyright 2026 The slimdp Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slimdp/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "slimdp/random.h"

namespace slimdp {

void ModelSpec::Validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument(
        "model needs at least 2 layer sizes (input and classes)");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
  }
}

ParamLayout::ParamLayout(const ModelSpec& spec) : sizes_(spec.layer_sizes) {
  spec.Validate();
  offsets_.reserve(sizes_.size());
  size_t offset = 0;
  offsets_.push_back(0);
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offset += static_cast<size_t>(sizes_[l] + 1) * sizes_[l + 1];
    offsets_.push_back(offset);
  }
}

size_t ParamLayout::WeightIndex(int layer, int row, int col) const {
  return offsets_[layer] + static_cast<size_t>(row) * in_dim(layer) + col;
}

size_t ParamLayout::BiasIndex(int layer, int row) const {
  return offsets_[layer] + static_cast<size_t>(out_dim(layer)) * in_dim(layer) +
         row;
}

size_t ParamLayout::FlatIndex(const Coordinate& c) const {
  if (c.layer < 0 || c.layer >= layer_count() || c.row < 0 ||
      c.row >= out_dim(c.layer) || c.col < 0 || c.col > in_dim(c.layer)) {
    throw std::out_of_range("coordinate outside the parameter layout");
  }
  return c.col == in_dim(c.layer) ? BiasIndex(c.layer, c.row)
                                  : WeightIndex(c.layer, c.row, c.col);
}

ParamLayout::Coordinate ParamLayout::Locate(size_t flat) const {
  if (flat >= size()) throw std::out_of_range("flat index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  const int layer = static_cast<int>(it - offsets_.begin()) - 1;
  const size_t local = flat - offsets_[layer];
  const size_t in = in_dim(layer);
  const size_t weights = in * out_dim(layer);
  if (local < weights) {
    return {layer, static_cast<int>(local / in), static_cast<int>(local % in)};
  }
  return {layer, static_cast<int>(local - weights), static_cast<int>(in)};
}

size_t ParamCount(const ModelSpec& spec) { return ParamLayout(spec).size(); }

ParamVector InitParams(const ModelSpec& spec) {
  const ParamLayout layout(spec);
  ParamVector w(layout.size(), 0.0f);
  std::mt19937_64 rng(DeriveSeed(spec.seed, kTagModelInit));
  for (int l = 0; l < layout.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layout.in_dim(l)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const size_t weights =
        static_cast<size_t>(layout.in_dim(l)) * layout.out_dim(l);
    for (size_t i = 0; i < weights; ++i) {
      w[layout.offset(l) + i] = static_cast<float>(dist(rng));
    }
  }
  return w;
}

namespace {

void CheckFinite(std::span<const float> v, const char* what) {
  for (float x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string("non-finite value in ") + what);
    }
  }
}

// Activations of every layer for `rows` samples, in double precision.
// acts[0] is the input; acts[L] holds the logits.
class Forward {
 public:
  Forward(const ModelSpec& spec, std::span<const float> w)
      : layout_(spec), weights_(w.begin(), w.end()) {
    if (w.size() != layout_.size()) {
      throw std::invalid_argument("parameter vector length " +
                                  std::to_string(w.size()) + " != model size " +
                                  std::to_string(layout_.size()));
    }
    CheckFinite(w, "parameters");
  }

  void Run(std::span<const float> x, size_t rows) {
    const int layers = layout_.layer_count();
    acts_.resize(layers + 1);
    acts_[0].assign(x.begin(), x.begin() + rows * layout_.in_dim(0));
    for (int l = 0; l < layers; ++l) {
      const size_t in = layout_.in_dim(l);
      const size_t out = layout_.out_dim(l);
      const double* wm = weights_.data() + layout_.offset(l);
      const double* bias = wm + in * out;
      const std::vector<double>& a = acts_[l];
      std::vector<double>& z = acts_[l + 1];
      z.assign(rows * out, 0.0);
      const bool hidden = l + 1 < layers;
      for (size_t r = 0; r < rows; ++r) {
        const double* ar = a.data() + r * in;
        for (size_t o = 0; o < out; ++o) {
          const double* wo = wm + o * in;
          double s = bias[o];
          for (size_t i = 0; i < in; ++i) s += wo[i] * ar[i];
          z[r * out + o] = hidden ? std::max(s, 0.0) : s;
        }
      }
    }
  }

  const ParamLayout& layout() const { return layout_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<std::vector<double>>& acts() { return acts_; }
  const std::vector<double>& logits() const { return acts_.back(); }

 private:
  ParamLayout layout_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> acts_;
};

void CheckBatch(const ModelSpec& spec, size_t dim, std::span<const float> x,
                std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("empty batch");
  if (static_cast<int>(dim) != spec.input_dim()) {
    throw std::invalid_argument("batch dim " + std::to_string(dim) +
                                " != model input dim " +
                                std::to_string(spec.input_dim()));
  }
  if (x.size() != labels.size() * dim) {
    throw std::invalid_argument("feature matrix size does not match labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= spec.class_count()) {
      throw std::invalid_argument("label " + std::to_string(y) +
                                  " outside [0, " +
                                  std::to_string(spec.class_count()) + ")");
    }
  }
  CheckFinite(x, "features");
}

// Log-sum-exp of one logit row.
double LogSumExp(const double* z, size_t c) {
  const double m = *std::max_element(z, z + c);
  double s = 0.0;
  for (size_t j = 0; j < c; ++j) s += std::exp(z[j] - m);
  return m + std::log(s);
}

}  // namespace

LossAndGradient LossAndGrad(const ModelSpec& spec, std::span<const float> w,
                            const MiniBatch& batch) {
  CheckBatch(spec, batch.dim, batch.features, batch.labels);
  Forward fwd(spec, w);
  const size_t rows = batch.size();
  fwd.Run(batch.features, rows);
  const ParamLayout& layout = fwd.layout();
  const int layers = layout.layer_count();
  const size_t classes = spec.class_count();
  const double inv_rows = 1.0 / static_cast<double>(rows);

  // dz holds dLoss/dz for the current layer's pre-activations.
  std::vector<double> dz(rows * classes);
  double loss = 0.0;
  const std::vector<double>& logits = fwd.logits();
  for (size_t r = 0; r < rows; ++r) {
    const double* zr = logits.data() + r * classes;
    const double lse = LogSumExp(zr, classes);
    const int y = batch.labels[r];
    loss += lse - zr[y];
    for (size_t j = 0; j < classes; ++j) {
      dz[r * classes + j] = std::exp(zr[j] - lse) * inv_rows;
    }
    dz[r * classes + y] -= inv_rows;
  }

  std::vector<double> grad(layout.size(), 0.0);
  std::vector<double> da;
  for (int l = layers - 1; l >= 0; --l) {
    const size_t in = layout.in_dim(l);
    const size_t out = layout.out_dim(l);
    const double* wm = fwd.weights().data() + layout.offset(l);
    double* gw = grad.data() + layout.offset(l);
    double* gb = gw + in * out;
    const std::vector<double>& a = fwd.acts()[l];
    for (size_t r = 0; r < rows; ++r) {
      const double* ar = a.data() + r * in;
      for (size_t o = 0; o < out; ++o) {
        const double d = dz[r * out + o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* go = gw + o * in;
        for (size_t i = 0; i < in; ++i) go[i] += d * ar[i];
      }
    }
    if (l == 0) break;
    da.assign(rows * in, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      double* dar = da.data() + r * in;
      for (size_t o = 0; o < out; ++o) {
        const double d = dz[r * out + o];
        if (d == 0.0) continue;
        const double* wo = wm + o * in;
        for (size_t i = 0; i < in; ++i) dar[i] += d * wo[i];
      }
    }
    // ReLU mask: a > 0 exactly where the pre-activation was positive.
    for (size_t k = 0; k < da.size(); ++k) {
      if (a[k] <= 0.0) da[k] = 0.0;
    }
    dz.swap(da);
  }

  LossAndGradient result;
  result.loss = loss * inv_rows;
  result.grad.assign(grad.begin(), grad.end());
  return result;
}

double BatchLoss(const ModelSpec& spec, std::span<const float> w,
                 const MiniBatch& batch) {
  CheckBatch(spec, batch.dim, batch.features, batch.labels);
  Forward fwd(spec, w);
  fwd.Run(batch.features, batch.size());
  const size_t classes = spec.class_count();
  double loss = 0.0;
  for (size_t r = 0; r < batch.size(); ++r) {
    const double* zr = fwd.logits().data() + r * classes;
    loss += LogSumExp(zr, classes) - zr[batch.labels[r]];
  }
  return loss / static_cast<double>(batch.size());
}

LocalTrainResult LocalTrain(const ModelSpec& spec, std::span<const float> w,
                            std::span<const MiniBatch> batches, float lr) {
  if (batches.empty()) throw std::invalid_argument("local training needs p >= 1");
  if (!(lr >= 0.0f) || !std::isfinite(lr)) {
    throw std::invalid_argument("learning rate must be finite and >= 0");
  }
  LocalTrainResult result;
  result.weights.assign(w.begin(), w.end());
  result.delta.assign(w.size(), 0.0f);
  double loss_sum = 0.0;
  for (const MiniBatch& batch : batches) {
    const LossAndGradient lg = LossAndGrad(spec, result.weights, batch);
    loss_sum += lg.loss;
    for (size_t i = 0; i < w.size(); ++i) {
      result.delta[i] += lr * lg.grad[i];
      result.weights[i] = w[i] - result.delta[i];
    }
  }
  result.mean_loss = loss_sum / static_cast<double>(batches.size());
  return result;
}

namespace {

constexpr size_t kEvalChunk = 256;

}  // namespace

EvalResult Evaluate(const ModelSpec& spec, std::span<const float> w,
                    std::span<const float> features,
                    std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
  const size_t dim = spec.input_dim();
  CheckBatch(spec, dim, features, labels);
  Forward fwd(spec, w);
  const size_t classes = spec.class_count();
  double loss = 0.0;
  size_t correct = 0;
  for (size_t start = 0; start < labels.size(); start += kEvalChunk) {
    const size_t rows = std::min(kEvalChunk, labels.size() - start);
    fwd.Run(features.subspan(start * dim, rows * dim), rows);
    for (size_t r = 0; r < rows; ++r) {
      const double* zr = fwd.logits().data() + r * classes;
      const int y = labels[start + r];
      loss += LogSumExp(zr, classes) - zr[y];
      const auto best = std::max_element(zr, zr + classes) - zr;
      if (best == y) ++correct;
    }
  }
  const double m = static_cast<double>(labels.size());
  return {loss / m, static_cast<double>(correct) / m};
}

std::vector<int> Predict(const ModelSpec& spec, std::span<const float> w,
                         std::span<const float> features) {
  const size_t dim = spec.input_dim();
  if (features.size() % dim != 0) {
    throw std::invalid_argument("feature matrix is not a multiple of input dim");
  }
  CheckFinite(features, "features");
  const size_t total = features.size() / dim;
  Forward fwd(spec, w);
  const size_t classes = spec.class_count();
  std::vector<int> out(total);
  for (size_t start = 0; start < total; start += kEvalChunk) {
    const size_t rows = std::min(kEvalChunk, total - start);
    fwd.Run(features.subspan(start * dim, rows * dim), rows);
    for (size_t r = 0; r < rows; ++r) {
      const double* zr = fwd.logits().data() + r * classes;
      out[start + r] =
          static_cast<int>(std::max_element(zr, zr + classes) - zr);
    }
  }
  return out;
}

}  // namespace slimdp
