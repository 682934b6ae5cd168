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

#include "slimdp/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "slimdp/random.h"

namespace slimdp {

void Dataset::Validate() const {
  if (labels.empty()) throw std::invalid_argument("dataset has no rows");
  if (dim == 0) throw std::invalid_argument("dataset has zero feature dim");
  if (features.size() != labels.size() * dim) {
    throw std::invalid_argument("dataset feature matrix is ragged");
  }
  for (int y : labels) {
    if (y < 0 || y >= class_count) {
      throw std::invalid_argument("dataset label out of range");
    }
  }
}

MiniBatch Dataset::Gather(std::span<const size_t> rows) const {
  MiniBatch batch;
  batch.dim = dim;
  batch.features.reserve(rows.size() * dim);
  batch.labels.reserve(rows.size());
  for (size_t r : rows) {
    const auto first = features.begin() + static_cast<ptrdiff_t>(r * dim);
    batch.features.insert(batch.features.end(), first,
                          first + static_cast<ptrdiff_t>(dim));
    batch.labels.push_back(labels[r]);
  }
  return batch;
}

Dataset Dataset::Subset(std::span<const size_t> rows) const {
  MiniBatch b = Gather(rows);
  Dataset out;
  out.dim = dim;
  out.class_count = class_count;
  out.features = std::move(b.features);
  out.labels = std::move(b.labels);
  return out;
}

Teacher MakeTeacher(const SyntheticSpec& spec) {
  Teacher t;
  t.spec.layer_sizes = {spec.dim};
  if (spec.teacher_hidden > 0) t.spec.layer_sizes.push_back(spec.teacher_hidden);
  t.spec.layer_sizes.push_back(spec.classes);
  t.spec.seed = DeriveSeed(spec.teacher_seed, kTagTeacher);
  t.params = InitParams(t.spec);
  return t;
}

Dataset GenSynthetic(const SyntheticSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("synthetic dim must be >= 1");
  if (spec.classes < 2) throw std::invalid_argument("synthetic classes must be >= 2");
  if (spec.samples < static_cast<size_t>(spec.classes)) {
    throw std::invalid_argument("synthetic samples must be >= classes");
  }
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) {
    throw std::invalid_argument("label noise must lie in [0, 1]");
  }
  Dataset ds;
  ds.dim = spec.dim;
  ds.class_count = spec.classes;
  ds.features.resize(spec.samples * spec.dim);
  std::mt19937_64 feat_rng(DeriveSeed(spec.teacher_seed, kTagFeatures));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (float& x : ds.features) x = static_cast<float>(normal(feat_rng));

  const Teacher teacher = MakeTeacher(spec);
  ds.labels = Predict(teacher.spec, teacher.params, ds.features);

  const auto flips = static_cast<size_t>(
      std::floor(spec.noise * static_cast<double>(spec.samples) + 0.5));
  if (flips > 0) {
    std::mt19937_64 noise_rng(DeriveSeed(spec.teacher_seed, kTagLabelNoise));
    std::vector<size_t> rows(spec.samples);
    std::iota(rows.begin(), rows.end(), size_t{0});
    std::shuffle(rows.begin(), rows.end(), noise_rng);
    std::uniform_int_distribution<int> label(0, spec.classes - 1);
    for (size_t i = 0; i < flips; ++i) ds.labels[rows[i]] = label(noise_rng);
  }
  return ds;
}

std::vector<Shard> Partition(const Dataset& ds, int workers, uint64_t seed) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  const size_t m = ds.size();
  if (static_cast<size_t>(workers) > m) {
    throw std::invalid_argument("more workers (" + std::to_string(workers) +
                                ") than samples (" + std::to_string(m) + ")");
  }
  std::vector<size_t> perm(m);
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::mt19937_64 rng(DeriveSeed(seed, kTagPartition));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Shard> shards(workers);
  const size_t base = m / workers;
  const size_t extra = m % workers;
  size_t start = 0;
  for (int k = 0; k < workers; ++k) {
    const size_t len = base + (static_cast<size_t>(k) < extra ? 1 : 0);
    shards[k].owner = k;
    shards[k].indices.assign(perm.begin() + static_cast<ptrdiff_t>(start),
                             perm.begin() + static_cast<ptrdiff_t>(start + len));
    start += len;
  }
  return shards;
}

std::pair<Dataset, Dataset> SplitHoldout(const Dataset& ds, size_t test_count,
                                         uint64_t seed) {
  if (test_count == 0 || test_count >= ds.size()) {
    throw std::invalid_argument("held-out size must be in [1, m)");
  }
  std::vector<size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::mt19937_64 rng(DeriveSeed(seed, kTagHoldout));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::span<const size_t> all(perm);
  std::vector<size_t> train(all.begin() + static_cast<ptrdiff_t>(test_count),
                            all.end());
  std::vector<size_t> test(all.begin(),
                           all.begin() + static_cast<ptrdiff_t>(test_count));
  // Keep the original row order inside each part.
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {ds.Subset(train), ds.Subset(test)};
}

BatchStream::BatchStream(const Dataset& ds, Shard shard, size_t batch_size,
                         uint64_t seed)
    : ds_(&ds), shard_(std::move(shard)), batch_size_(batch_size), seed_(seed) {
  if (batch_size_ < 1 || batch_size_ > shard_.size()) {
    throw std::invalid_argument("batch size " + std::to_string(batch_size_) +
                                " must be in [1, shard size " +
                                std::to_string(shard_.size()) + "]");
  }
  Reshuffle();
}

void BatchStream::Reshuffle() {
  order_ = shard_.indices;
  std::mt19937_64 rng(DeriveSeed(seed_, kTagBatches, shard_.owner, epoch_));
  std::shuffle(order_.begin(), order_.end(), rng);
  cursor_ = 0;
}

MiniBatch BatchStream::Next() {
  if (cursor_ == order_.size()) {
    ++epoch_;
    Reshuffle();
  }
  const size_t len = std::min(batch_size_, order_.size() - cursor_);
  MiniBatch batch =
      ds_->Gather(std::span<const size_t>(order_).subspan(cursor_, len));
  cursor_ += len;
  return batch;
}

namespace {

std::string_view Trim(std::string_view s) {
  const auto not_space = [](char c) {
    return c != ' ' && c != '\t' && c != '\r' && c != '\n';
  };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void CsvError(size_t line, const std::string& what) {
  throw std::runtime_error("csv line " + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset ParseCsv(std::istream& in) {
  Dataset ds;
  std::string raw;
  size_t line_no = 0;
  int max_label = -1;
  std::vector<std::string_view> cells;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = Trim(raw);
    if (line.empty()) continue;
    cells.clear();
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      cells.push_back(Trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() < 2) CsvError(line_no, "expected at least one feature and a label");
    const size_t d = cells.size() - 1;
    if (ds.dim == 0) {
      ds.dim = d;
    } else if (d != ds.dim) {
      CsvError(line_no, "expected " + std::to_string(ds.dim) +
                            " features, found " + std::to_string(d));
    }
    for (size_t j = 0; j < d; ++j) {
      float v = 0.0f;
      const auto cell = cells[j];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        CsvError(line_no, "non-numeric feature '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) CsvError(line_no, "non-finite feature");
      ds.features.push_back(v);
    }
    const auto cell = cells.back();
    int label = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
      CsvError(line_no, "non-integer label '" + std::string(cell) + "'");
    }
    if (label < 0) CsvError(line_no, "negative label " + std::to_string(label));
    max_label = std::max(max_label, label);
    ds.labels.push_back(label);
  }
  if (ds.labels.empty()) throw std::runtime_error("csv: no rows");
  ds.class_count = max_label + 1;
  return ds;
}

Dataset LoadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file " + path.string());
  try {
    return ParseCsv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace slimdp
