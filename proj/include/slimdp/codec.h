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

#ifndef SLIMDP_CODEC_H_
#define SLIMDP_CODEC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slimdp/model.h"
#include "slimdp/selection.h"

namespace slimdp {

// Wire format (little-endian). Every frame starts with a 16-byte common
// header {u8 kind, u8 flags, u16 reserved, u32 round, u32 worker, u32 n}
// followed by a kind-specific tail:
//   Full  : u32 count                              payload count x f32
//   Core  : u64 signature, u32 epoch, u32 count    payload count x f32
//   KV    : u32 count                              payload count x (u32, f32)
//   Quant : u32 bucket, u32 count                  payload scales then codes
// Quant frames store the bit width in `flags`. See docs/wire_format.md.
enum class FrameKind : uint8_t { kFull = 1, kCore = 2, kKv = 3, kQuant = 4 };

const char* FrameKindName(FrameKind kind);

struct FrameHeader {
  FrameKind kind = FrameKind::kFull;
  uint8_t flags = 0;
  uint32_t round = 0;
  uint32_t worker = 0;
  uint32_t n = 0;
  uint64_t signature = 0;  // Core only
  uint32_t epoch = 0;      // Core only
  uint32_t bucket = 0;     // Quant only
  uint32_t count = 0;
};

struct WireFrame {
  FrameHeader header;
  std::vector<uint8_t> payload;
};

// Round and sender stamped into each header.
struct FrameTag {
  uint32_t round = 0;
  uint32_t worker = 0;
};

// Raised when a frame disagrees with its header or with the receiver's cache.
class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuantParams {
  int bits = 8;
  uint32_t bucket = 512;

  void Validate() const;
  // Number of non-zero magnitude levels, s = 2^bits - 1.
  uint32_t levels() const { return (1u << bits) - 1u; }
};

// index -> value over a subset of 0..n-1, indices ascending.
struct SparseUpdate {
  uint32_t n = 0;
  IndexSet indices;
  std::vector<float> values;
};

WireFrame EncodeFull(std::span<const float> values, FrameTag tag = {});
ParamVector DecodeFull(const WireFrame& frame);

// Values listed in the core's ascending index order; the indices themselves
// stay in the receiver's cache.
WireFrame EncodeCore(std::span<const float> values_at_core, const CoreSet& core,
                     uint32_t n, FrameTag tag = {});
SparseUpdate DecodeCore(const WireFrame& frame, const CoreSet& cached_core);

WireFrame EncodeKv(const SparseUpdate& sparse, FrameTag tag = {});
SparseUpdate DecodeKv(const WireFrame& frame);

// Bucketed stochastic quantization with per-bucket max-magnitude scale.
// Each coordinate takes bits+1 packed bits (magnitude level, then sign).
WireFrame QuantEncode(std::span<const float> values, const QuantParams& qp,
                      uint64_t seed, FrameTag tag = {});
std::vector<float> QuantDecode(const WireFrame& frame);

// Exact payload size in 32-bit words; headers are not counted.
uint64_t PayloadWords(const WireFrame& frame);
uint64_t QuantPayloadWords(uint64_t count, const QuantParams& qp);
size_t HeaderBytes(FrameKind kind);

std::vector<uint8_t> SerializeFrame(const WireFrame& frame);
WireFrame ParseFrame(std::span<const uint8_t> bytes);

// Gathers values[i] for i in `indices`.
std::vector<float> GatherValues(std::span<const float> values,
                                std::span<const uint32_t> indices);

}  // namespace slimdp

#endif  // SLIMDP_CODEC_H_
