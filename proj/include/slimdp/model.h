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

#ifndef SLIMDP_MODEL_H_
#define SLIMDP_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace slimdp {

// All model parameters as one flat vector of 32-bit reals. Communication
// operators address coordinates 0..n-1 of this vector.
using ParamVector = std::vector<float>;

// A fully connected network: layer_sizes = {input, hidden..., classes}.
// Hidden layers use ReLU; the output layer feeds a softmax.
struct ModelSpec {
  std::vector<int> layer_sizes;
  uint64_t seed = 0;

  void Validate() const;
  int input_dim() const { return layer_sizes.front(); }
  int class_count() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }
};

// Flat layout of the parameters. Layer l occupies a contiguous block starting
// at offset(l): first its weight matrix (out x in, row-major, so row = output
// unit and col = input unit), then its out biases. A bias is addressed as
// column `in` of its row.
class ParamLayout {
 public:
  struct Coordinate {
    int layer = 0;
    int row = 0;
    int col = 0;

    bool operator==(const Coordinate&) const = default;
  };

  explicit ParamLayout(const ModelSpec& spec);

  size_t size() const { return offsets_.back(); }
  size_t offset(int layer) const { return offsets_[layer]; }
  int in_dim(int layer) const { return sizes_[layer]; }
  int out_dim(int layer) const { return sizes_[layer + 1]; }
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }

  size_t WeightIndex(int layer, int row, int col) const;
  size_t BiasIndex(int layer, int row) const;
  size_t FlatIndex(const Coordinate& c) const;
  Coordinate Locate(size_t flat) const;

 private:
  std::vector<int> sizes_;
  std::vector<size_t> offsets_;
};

size_t ParamCount(const ModelSpec& spec);

// Row-major B x d features with one label per row.
struct MiniBatch {
  size_t dim = 0;
  std::vector<float> features;
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ParamVector InitParams(const ModelSpec& spec);

struct LossAndGradient {
  double loss = 0.0;
  ParamVector grad;
};

// Mean softmax cross-entropy over the batch and its gradient. Arithmetic is
// carried out in double precision and the gradient is rounded to float.
LossAndGradient LossAndGrad(const ModelSpec& spec, std::span<const float> w,
                            const MiniBatch& batch);

// Loss only, in double precision.
double BatchLoss(const ModelSpec& spec, std::span<const float> w,
                 const MiniBatch& batch);

struct LocalTrainResult {
  ParamVector weights;
  // delta = accumulated SGD steps, so weights == w_in - delta exactly.
  ParamVector delta;
  // Mean of the per-step batch losses.
  double mean_loss = 0.0;
};

// Runs one plain SGD step per batch. The update is accumulated in `delta` and
// the iterate is always formed as w_in - delta, which makes the server rule
// w - delta reproduce the local trajectory bit for bit.
LocalTrainResult LocalTrain(const ModelSpec& spec, std::span<const float> w,
                            std::span<const MiniBatch> batches, float lr);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalResult Evaluate(const ModelSpec& spec, std::span<const float> w,
                    std::span<const float> features,
                    std::span<const int> labels);

// Argmax class per row; ties go to the lower class index.
std::vector<int> Predict(const ModelSpec& spec, std::span<const float> w,
                         std::span<const float> features);

}  // namespace slimdp

#endif  // SLIMDP_MODEL_H_
