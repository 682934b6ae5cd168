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

#include "slimdp/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace slimdp {

void SignificanceConfig::Validate() const {
  if (fixed_c && !(*fixed_c >= 0.0 && std::isfinite(*fixed_c))) {
    throw std::invalid_argument("significance coefficient c must be >= 0");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

uint64_t IndexSignature(std::span<const uint32_t> indices) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint32_t idx : indices) {
    for (int b = 0; b < 4; ++b) {
      h ^= (idx >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void CheckMagnitudes(std::span<const double> v, const char* name) {
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string(name) +
                                  " must hold finite magnitudes >= 0");
    }
  }
}

}  // namespace

double AutoScaleC(std::span<const double> w_abs, std::span<const double> g_abs,
                  double epsilon) {
  return Mean(w_abs) / (Mean(g_abs) + epsilon);
}

std::vector<double> Significance(std::span<const double> w_abs,
                                 std::span<const double> g_abs,
                                 const SignificanceConfig& cfg) {
  cfg.Validate();
  if (w_abs.size() != g_abs.size()) {
    throw std::invalid_argument("significance inputs differ in length");
  }
  CheckMagnitudes(w_abs, "w_abs");
  CheckMagnitudes(g_abs, "g_abs");
  const double c =
      cfg.fixed_c ? *cfg.fixed_c : AutoScaleC(w_abs, g_abs, cfg.epsilon);
  std::vector<double> scores(w_abs.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = w_abs[i] + c * g_abs[i];
  }
  return scores;
}

size_t FractionCount(double fraction, size_t n) {
  const double x = fraction * static_cast<double>(n);
  if (!(x > 0.0)) return 0;
  // Slack absorbs representation error in products such as 0.15 * 1000.
  const auto k = static_cast<size_t>(std::floor(x + 0.5 + 1e-9));
  return std::min(k, n);
}

size_t CoreSize(size_t n, double beta) { return FractionCount(beta, n); }

size_t ExplorerSize(size_t n, size_t core_size, double alpha, double beta) {
  return std::min(FractionCount(alpha - beta, n), n - std::min(core_size, n));
}

CoreSet SelectCore(std::span<const double> scores, double beta,
                   uint32_t epoch) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("beta must lie in [0, 1]");
  }
  const size_t n = scores.size();
  const size_t k = CoreSize(n, beta);
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const auto more_significant = [&](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  if (k < n) {
    std::nth_element(order.begin(), order.begin() + static_cast<ptrdiff_t>(k),
                     order.end(), more_significant);
  }
  CoreSet core;
  core.indices.assign(order.begin(), order.begin() + static_cast<ptrdiff_t>(k));
  std::sort(core.indices.begin(), core.indices.end());
  core.signature = IndexSignature(core.indices);
  core.epoch = epoch;
  return core;
}

ExplorerSet SampleExplorer(size_t n, const CoreSet& core, double alpha,
                           double beta, uint64_t seed, int worker) {
  if (!(beta >= 0.0 && beta <= alpha && alpha <= 1.0)) {
    throw std::invalid_argument("need 0 <= beta <= alpha <= 1");
  }
  ExplorerSet explorer;
  explorer.worker = worker;
  const size_t size = ExplorerSize(n, core.indices.size(), alpha, beta);
  if (size == 0) return explorer;

  std::vector<uint32_t> pool;
  pool.reserve(n - core.indices.size());
  auto next_core = core.indices.begin();
  for (uint32_t i = 0; i < n; ++i) {
    if (next_core != core.indices.end() && *next_core == i) {
      ++next_core;
      continue;
    }
    pool.push_back(i);
  }
  // Partial Fisher-Yates: the first `size` slots end up a uniform sample.
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  explorer.indices.assign(pool.begin(), pool.begin() + static_cast<ptrdiff_t>(size));
  std::sort(explorer.indices.begin(), explorer.indices.end());
  return explorer;
}

IndexSet CommSet(const CoreSet& core, const ExplorerSet& explorer) {
  IndexSet out;
  out.reserve(core.indices.size() + explorer.indices.size());
  std::set_union(core.indices.begin(), core.indices.end(),
                 explorer.indices.begin(), explorer.indices.end(),
                 std::back_inserter(out));
  if (out.size() != core.indices.size() + explorer.indices.size()) {
    throw std::logic_error("explorer overlaps the core");
  }
  return out;
}

}  // namespace slimdp
