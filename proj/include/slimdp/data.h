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

#ifndef SLIMDP_DATA_H_
#define SLIMDP_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slimdp/model.h"

namespace slimdp {

// Immutable classification dataset: m rows of d features plus a label each.
struct Dataset {
  size_t dim = 0;
  int class_count = 0;
  std::vector<float> features;  // m x dim, row-major
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
  void Validate() const;
  MiniBatch Gather(std::span<const size_t> rows) const;
  Dataset Subset(std::span<const size_t> rows) const;
};

struct SyntheticSpec {
  int dim = 32;
  int classes = 10;
  size_t samples = 20000;
  uint64_t teacher_seed = 1;
  double noise = 0.0;
  int teacher_hidden = 64;
};

// The frozen teacher network that labels synthetic data.
struct Teacher {
  ModelSpec spec;
  ParamVector params;
};

Teacher MakeTeacher(const SyntheticSpec& spec);

// Standard-normal features labelled by the teacher's argmax; round(noise * m)
// labels are then resampled uniformly.
Dataset GenSynthetic(const SyntheticSpec& spec);

// One worker's slice of the training set.
struct Shard {
  int owner = 0;
  std::vector<size_t> indices;

  size_t size() const { return indices.size(); }
};

// Random permutation cut into K contiguous slices; the first m % K shards get
// one extra row.
std::vector<Shard> Partition(const Dataset& ds, int workers, uint64_t seed);

// Splits off `test_count` random rows as a held-out set.
std::pair<Dataset, Dataset> SplitHoldout(const Dataset& ds, size_t test_count,
                                         uint64_t seed);

// Endless epoch-wise mini-batch stream over a shard. Each epoch is a fresh
// permutation; the last batch of an epoch may be short. The dataset must
// outlive the stream.
class BatchStream {
 public:
  BatchStream(const Dataset& ds, Shard shard, size_t batch_size, uint64_t seed);

  MiniBatch Next();

  size_t epoch() const { return epoch_; }
  size_t batch_size() const { return batch_size_; }
  const Shard& shard() const { return shard_; }

 private:
  void Reshuffle();

  const Dataset* ds_;
  Shard shard_;
  size_t batch_size_;
  uint64_t seed_;
  size_t epoch_ = 0;
  size_t cursor_ = 0;
  std::vector<size_t> order_;
};

// CSV rows of `f1,...,fd,label`. Errors carry the 1-based line number.
Dataset LoadCsv(const std::filesystem::path& path);
Dataset ParseCsv(std::istream& in);

}  // namespace slimdp

#endif  // SLIMDP_DATA_H_
