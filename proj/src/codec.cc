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

#include "slimdp/codec.h"

#include <bit>
#include <cmath>
#include <random>

namespace slimdp {

namespace {

constexpr size_t kCommonHeaderBytes = 16;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<uint8_t>(v >> (8 * b)));
}

void PutU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(v >> (8 * b)));
}

void PutF32(std::vector<uint8_t>& out, float v) {
  PutU32(out, std::bit_cast<uint32_t>(v));
}

uint32_t GetU32(std::span<const uint8_t> in, size_t at) {
  uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(in[at + b]) << (8 * b);
  return v;
}

uint64_t GetU64(std::span<const uint8_t> in, size_t at) {
  uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<uint64_t>(in[at + b]) << (8 * b);
  return v;
}

float GetF32(std::span<const uint8_t> in, size_t at) {
  return std::bit_cast<float>(GetU32(in, at));
}

uint32_t CheckedCount(size_t count) {
  if (count > UINT32_MAX) throw CodecError("frame holds more than 2^32 values");
  return static_cast<uint32_t>(count);
}

FrameHeader MakeHeader(FrameKind kind, FrameTag tag, size_t n, size_t count) {
  FrameHeader h;
  h.kind = kind;
  h.round = tag.round;
  h.worker = tag.worker;
  h.n = CheckedCount(n);
  h.count = CheckedCount(count);
  return h;
}

void ExpectKind(const WireFrame& frame, FrameKind kind) {
  if (frame.header.kind != kind) {
    throw CodecError(std::string("expected ") + FrameKindName(kind) +
                     " frame, got " + FrameKindName(frame.header.kind));
  }
}

void CheckPayloadLength(const WireFrame& frame) {
  const uint64_t expected = PayloadWords(frame) * 4;
  if (frame.payload.size() != expected) {
    throw CodecError(std::string(FrameKindName(frame.header.kind)) +
                     " frame payload is " + std::to_string(frame.payload.size()) +
                     " bytes, header declares " + std::to_string(expected) +
                     " (truncated payload)");
  }
}

uint64_t BucketCount(uint64_t count, uint32_t bucket) {
  return (count + bucket - 1) / bucket;
}

}  // namespace

const char* FrameKindName(FrameKind kind) {
  switch (kind) {
    case FrameKind::kFull:
      return "Full";
    case FrameKind::kCore:
      return "Core";
    case FrameKind::kKv:
      return "KV";
    case FrameKind::kQuant:
      return "Quant";
  }
  return "Unknown";
}

void QuantParams::Validate() const {
  if (bits < 1 || bits > 16) throw std::invalid_argument("quant bits must be in [1, 16]");
  if (bucket < 1) throw std::invalid_argument("quant bucket must be >= 1");
}

uint64_t QuantPayloadWords(uint64_t count, const QuantParams& qp) {
  const uint64_t code_bits = count * static_cast<uint64_t>(qp.bits + 1);
  return (code_bits + 31) / 32 + BucketCount(count, qp.bucket);
}

uint64_t PayloadWords(const WireFrame& frame) {
  const FrameHeader& h = frame.header;
  switch (h.kind) {
    case FrameKind::kFull:
    case FrameKind::kCore:
      return h.count;
    case FrameKind::kKv:
      return 2ull * h.count;
    case FrameKind::kQuant:
      if (h.bucket == 0) throw CodecError("Quant frame with zero bucket size");
      return QuantPayloadWords(h.count, {h.flags, h.bucket});
  }
  throw CodecError("unknown frame kind");
}

size_t HeaderBytes(FrameKind kind) {
  switch (kind) {
    case FrameKind::kFull:
    case FrameKind::kKv:
      return kCommonHeaderBytes + 4;
    case FrameKind::kCore:
      return kCommonHeaderBytes + 16;
    case FrameKind::kQuant:
      return kCommonHeaderBytes + 8;
  }
  throw CodecError("unknown frame kind");
}

std::vector<float> GatherValues(std::span<const float> values,
                                std::span<const uint32_t> indices) {
  std::vector<float> out;
  out.reserve(indices.size());
  for (uint32_t i : indices) out.push_back(values[i]);
  return out;
}

WireFrame EncodeFull(std::span<const float> values, FrameTag tag) {
  WireFrame frame;
  frame.header = MakeHeader(FrameKind::kFull, tag, values.size(), values.size());
  frame.payload.reserve(values.size() * 4);
  for (float v : values) {
    if (!std::isfinite(v)) throw CodecError("Full frame: non-finite value");
    PutF32(frame.payload, v);
  }
  return frame;
}

ParamVector DecodeFull(const WireFrame& frame) {
  ExpectKind(frame, FrameKind::kFull);
  CheckPayloadLength(frame);
  if (frame.header.count != frame.header.n) {
    throw CodecError("Full frame count differs from n");
  }
  ParamVector out(frame.header.count);
  for (size_t i = 0; i < out.size(); ++i) out[i] = GetF32(frame.payload, 4 * i);
  return out;
}

WireFrame EncodeCore(std::span<const float> values_at_core, const CoreSet& core,
                     uint32_t n, FrameTag tag) {
  if (values_at_core.size() != core.indices.size()) {
    throw CodecError("Core frame: " + std::to_string(values_at_core.size()) +
                     " values for a core of " +
                     std::to_string(core.indices.size()));
  }
  WireFrame frame;
  frame.header = MakeHeader(FrameKind::kCore, tag, n, values_at_core.size());
  frame.header.signature = core.signature;
  frame.header.epoch = core.epoch;
  frame.payload.reserve(values_at_core.size() * 4);
  for (float v : values_at_core) PutF32(frame.payload, v);
  return frame;
}

SparseUpdate DecodeCore(const WireFrame& frame, const CoreSet& cached_core) {
  ExpectKind(frame, FrameKind::kCore);
  const FrameHeader& h = frame.header;
  if (h.signature != cached_core.signature) {
    throw CodecError("stale core cache: frame signature does not match");
  }
  if (h.epoch != cached_core.epoch) {
    throw CodecError("stale core cache: frame epoch " + std::to_string(h.epoch) +
                     " != cached epoch " + std::to_string(cached_core.epoch));
  }
  if (h.count != cached_core.indices.size()) {
    throw CodecError("Core frame count differs from cached core size");
  }
  CheckPayloadLength(frame);
  SparseUpdate out;
  out.n = h.n;
  out.indices = cached_core.indices;
  out.values.resize(h.count);
  for (size_t i = 0; i < h.count; ++i) out.values[i] = GetF32(frame.payload, 4 * i);
  return out;
}

WireFrame EncodeKv(const SparseUpdate& sparse, FrameTag tag) {
  if (sparse.indices.size() != sparse.values.size()) {
    throw CodecError("KV frame: index and value counts differ");
  }
  WireFrame frame;
  frame.header = MakeHeader(FrameKind::kKv, tag, sparse.n, sparse.indices.size());
  frame.payload.reserve(sparse.indices.size() * 8);
  for (size_t i = 0; i < sparse.indices.size(); ++i) {
    const uint32_t idx = sparse.indices[i];
    if (idx >= sparse.n) {
      throw CodecError("KV frame: index " + std::to_string(idx) +
                       " out of range for n = " + std::to_string(sparse.n));
    }
    if (i > 0 && idx <= sparse.indices[i - 1]) {
      throw CodecError("KV frame: indices must be strictly ascending");
    }
    PutU32(frame.payload, idx);
    PutF32(frame.payload, sparse.values[i]);
  }
  return frame;
}

SparseUpdate DecodeKv(const WireFrame& frame) {
  ExpectKind(frame, FrameKind::kKv);
  CheckPayloadLength(frame);
  SparseUpdate out;
  out.n = frame.header.n;
  out.indices.resize(frame.header.count);
  out.values.resize(frame.header.count);
  for (size_t i = 0; i < frame.header.count; ++i) {
    out.indices[i] = GetU32(frame.payload, 8 * i);
    out.values[i] = GetF32(frame.payload, 8 * i + 4);
    if (out.indices[i] >= out.n ||
        (i > 0 && out.indices[i] <= out.indices[i - 1])) {
      throw CodecError("KV frame: malformed index list");
    }
  }
  return out;
}

WireFrame QuantEncode(std::span<const float> values, const QuantParams& qp,
                      uint64_t seed, FrameTag tag) {
  qp.Validate();
  WireFrame frame;
  frame.header = MakeHeader(FrameKind::kQuant, tag, values.size(), values.size());
  frame.header.flags = static_cast<uint8_t>(qp.bits);
  frame.header.bucket = qp.bucket;

  const size_t count = values.size();
  const size_t buckets = BucketCount(count, qp.bucket);
  const double s = qp.levels();
  std::vector<float> scales(buckets, 0.0f);
  for (size_t i = 0; i < count; ++i) {
    if (!std::isfinite(values[i])) throw CodecError("Quant frame: non-finite value");
    float& scale = scales[i / qp.bucket];
    scale = std::max(scale, std::fabs(values[i]));
  }
  frame.payload.reserve(QuantPayloadWords(count, qp) * 4);
  for (float scale : scales) PutF32(frame.payload, scale);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int width = qp.bits + 1;
  uint64_t acc = 0;
  int acc_bits = 0;
  for (size_t i = 0; i < count; ++i) {
    const double u = uniform(rng);
    const float scale = scales[i / qp.bucket];
    uint32_t level = 0;
    if (scale > 0.0f) {
      const double x = std::fabs(static_cast<double>(values[i])) / scale * s;
      const double lo = std::floor(x);
      level = static_cast<uint32_t>(lo) + (u < x - lo ? 1u : 0u);
      level = std::min(level, qp.levels());
    }
    const uint32_t sign = values[i] < 0.0f ? 1u : 0u;
    acc |= static_cast<uint64_t>(level | (sign << qp.bits)) << acc_bits;
    acc_bits += width;
    if (acc_bits >= 32) {
      PutU32(frame.payload, static_cast<uint32_t>(acc));
      acc >>= 32;
      acc_bits -= 32;
    }
  }
  if (acc_bits > 0) PutU32(frame.payload, static_cast<uint32_t>(acc));
  return frame;
}

std::vector<float> QuantDecode(const WireFrame& frame) {
  ExpectKind(frame, FrameKind::kQuant);
  const FrameHeader& h = frame.header;
  const QuantParams qp{h.flags, h.bucket};
  qp.Validate();
  CheckPayloadLength(frame);
  const size_t buckets = BucketCount(h.count, qp.bucket);
  const double s = qp.levels();
  const int width = qp.bits + 1;
  const uint32_t mask = (1u << width) - 1u;
  std::vector<float> out(h.count);
  uint64_t acc = 0;
  int acc_bits = 0;
  size_t word = buckets;
  for (size_t i = 0; i < h.count; ++i) {
    if (acc_bits < width) {
      acc |= static_cast<uint64_t>(GetU32(frame.payload, 4 * word++)) << acc_bits;
      acc_bits += 32;
    }
    const uint32_t code = static_cast<uint32_t>(acc) & mask;
    acc >>= width;
    acc_bits -= width;
    const uint32_t level = code & qp.levels();
    const bool negative = (code >> qp.bits) != 0;
    const double scale = GetF32(frame.payload, 4 * (i / qp.bucket));
    const double magnitude = static_cast<double>(level) / s * scale;
    out[i] = static_cast<float>(negative ? -magnitude : magnitude);
  }
  return out;
}

std::vector<uint8_t> SerializeFrame(const WireFrame& frame) {
  const FrameHeader& h = frame.header;
  std::vector<uint8_t> out;
  out.reserve(HeaderBytes(h.kind) + frame.payload.size());
  out.push_back(static_cast<uint8_t>(h.kind));
  out.push_back(h.flags);
  out.push_back(0);
  out.push_back(0);
  PutU32(out, h.round);
  PutU32(out, h.worker);
  PutU32(out, h.n);
  switch (h.kind) {
    case FrameKind::kCore:
      PutU64(out, h.signature);
      PutU32(out, h.epoch);
      break;
    case FrameKind::kQuant:
      PutU32(out, h.bucket);
      break;
    default:
      break;
  }
  PutU32(out, h.count);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

WireFrame ParseFrame(std::span<const uint8_t> bytes) {
  if (bytes.size() < kCommonHeaderBytes) throw CodecError("truncated frame header");
  WireFrame frame;
  FrameHeader& h = frame.header;
  const uint8_t kind = bytes[0];
  if (kind < 1 || kind > 4) throw CodecError("unknown frame kind " + std::to_string(kind));
  h.kind = static_cast<FrameKind>(kind);
  if (bytes.size() < HeaderBytes(h.kind)) throw CodecError("truncated frame header");
  h.flags = bytes[1];
  h.round = GetU32(bytes, 4);
  h.worker = GetU32(bytes, 8);
  h.n = GetU32(bytes, 12);
  size_t at = kCommonHeaderBytes;
  if (h.kind == FrameKind::kCore) {
    h.signature = GetU64(bytes, at);
    h.epoch = GetU32(bytes, at + 8);
    at += 12;
  } else if (h.kind == FrameKind::kQuant) {
    h.bucket = GetU32(bytes, at);
    at += 4;
  }
  h.count = GetU32(bytes, at);
  at += 4;
  frame.payload.assign(bytes.begin() + static_cast<ptrdiff_t>(at), bytes.end());
  CheckPayloadLength(frame);
  return frame;
}

}  // namespace slimdp
