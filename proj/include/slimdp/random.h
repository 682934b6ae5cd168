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

#ifndef SLIMDP_RANDOM_H_
#define SLIMDP_RANDOM_H_

#include <cstdint>

namespace slimdp {

// Role tags for sub-seed derivation. Every stream of randomness in an
// experiment is DeriveSeed(experiment_seed, tag, ...) so that changing one
// consumer never perturbs another.
inline constexpr uint64_t kTagModelInit = 0x6d6f64656c696e69ULL;
inline constexpr uint64_t kTagTeacher = 0x7465616368657273ULL;
inline constexpr uint64_t kTagFeatures = 0x6665617475726573ULL;
inline constexpr uint64_t kTagLabelNoise = 0x6c6162656c6e6f69ULL;
inline constexpr uint64_t kTagPartition = 0x706172746974696fULL;
inline constexpr uint64_t kTagHoldout = 0x686f6c646f757473ULL;
inline constexpr uint64_t kTagBatches = 0x6261746368657321ULL;
inline constexpr uint64_t kTagExplorer = 0x6578706c6f726572ULL;
inline constexpr uint64_t kTagQuant = 0x7175616e74697a65ULL;

inline constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr uint64_t DeriveSeed(uint64_t base, uint64_t tag,
                                     uint64_t a = 0, uint64_t b = 0) {
  return SplitMix64(SplitMix64(SplitMix64(base ^ tag) ^ a) ^ b);
}

}  // namespace slimdp

#endif  // SLIMDP_RANDOM_H_
