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

#ifndef SLIMDP_SELECTION_H_
#define SLIMDP_SELECTION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace slimdp {

// Ascending, duplicate-free parameter indices.
using IndexSet = std::vector<uint32_t>;

// Weight of the gradient term in score_i = |w_i| + c * |g_i|. With no fixed
// value, c is rescaled on every call to mean|w| / (mean|g| + epsilon).
struct SignificanceConfig {
  std::optional<double> fixed_c;
  double epsilon = 1e-12;

  void Validate() const;
};

// Top-significance coordinates, refreshed every q communication rounds. Both
// ends of a link cache the indices and exchange only `signature`.
struct CoreSet {
  IndexSet indices;
  uint64_t signature = 0;
  uint32_t epoch = 0;
};

// Per-worker random coordinates outside the core, resampled every round.
struct ExplorerSet {
  int worker = 0;
  IndexSet indices;
};

// Stable FNV-1a hash over the little-endian bytes of the index list.
uint64_t IndexSignature(std::span<const uint32_t> indices);

double AutoScaleC(std::span<const double> w_abs, std::span<const double> g_abs,
                  double epsilon);

std::vector<double> Significance(std::span<const double> w_abs,
                                 std::span<const double> g_abs,
                                 const SignificanceConfig& cfg);

// round-half-up(fraction * n), clamped to [0, n].
size_t FractionCount(double fraction, size_t n);
size_t CoreSize(size_t n, double beta);
size_t ExplorerSize(size_t n, size_t core_size, double alpha, double beta);

// The CoreSize(n, beta) highest scores; ties go to the lower index.
CoreSet SelectCore(std::span<const double> scores, double beta,
                   uint32_t epoch = 0);

// Uniform sample without replacement from the complement of the core.
ExplorerSet SampleExplorer(size_t n, const CoreSet& core, double alpha,
                           double beta, uint64_t seed, int worker = 0);

// Sorted union of core and explorer; throws if they overlap.
IndexSet CommSet(const CoreSet& core, const ExplorerSet& explorer);

}  // namespace slimdp

#endif  // SLIMDP_SELECTION_H_
