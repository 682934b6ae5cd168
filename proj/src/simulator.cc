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

#include "slimdp/simulator.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

#include "slimdp/random.h"

namespace slimdp {

const char* MethodName(Method method) {
  switch (method) {
    case Method::kPlump:
      return "plump";
    case Method::kQuant:
      return "quant";
    case Method::kSlim:
      return "slim";
  }
  return "unknown";
}

std::optional<Method> ParseMethod(std::string_view name) {
  if (name == "plump") return Method::kPlump;
  if (name == "quant") return Method::kQuant;
  if (name == "slim") return Method::kSlim;
  return std::nullopt;
}

const char* AggregationName(Aggregation agg) {
  return agg == Aggregation::kMean ? "mean" : "sum";
}

std::optional<Aggregation> ParseAggregation(std::string_view name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "sum") return Aggregation::kSum;
  return std::nullopt;
}

void CostModel::Validate() const {
  if (!(latency_s >= 0.0) || !(compute_s >= 0.0)) {
    throw std::invalid_argument("latency and compute time must be >= 0");
  }
  if (!(bandwidth_bytes_per_s > 0.0)) {
    throw std::invalid_argument("bandwidth must be > 0");
  }
}

double CommTime(uint64_t words, const CostModel& cost) {
  return cost.latency_s +
         4.0 * static_cast<double>(words) / cost.bandwidth_bytes_per_s;
}

void ProtocolConfig::Validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(alpha <= 1.0)) throw std::invalid_argument("alpha must be <= 1");
  if (beta > alpha) throw std::invalid_argument("beta must not exceed alpha");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("lr must be finite and >= 0");
  }
  if (!(eta_prime >= 0.0) || !std::isfinite(eta_prime)) {
    throw std::invalid_argument("eta-prime must be finite and >= 0");
  }
  if (!(lr_decay > 0.0) || lr_decay_every < 0) {
    throw std::invalid_argument("lr decay must be > 0 with a period >= 0");
  }
  quant.Validate();
  significance.Validate();
}

float ProtocolConfig::LearningRate(uint32_t round) const {
  if (lr_decay_every <= 0) return static_cast<float>(lr);
  return static_cast<float>(lr * std::pow(lr_decay, round / lr_decay_every));
}

bool ProtocolConfig::IsFullPushRound(uint32_t round) const {
  return method == Method::kSlim && (round + 1) % q == 0;
}

WorkerPush WorkerRound(WorkerState& ws, uint32_t round, const ModelSpec& spec,
                       const ProtocolConfig& cfg) {
  std::vector<MiniBatch> batches;
  batches.reserve(cfg.p);
  WorkerPush push;
  push.worker = ws.k;
  for (int j = 0; j < cfg.p; ++j) {
    batches.push_back(ws.stream.Next());
    push.samples += batches.back().size();
  }
  LocalTrainResult trained =
      LocalTrain(spec, ws.local, batches, cfg.LearningRate(round));
  ws.local = std::move(trained.weights);
  push.train_loss = trained.mean_loss;

  const FrameTag tag{round, static_cast<uint32_t>(ws.k)};
  const std::vector<float>& delta = trained.delta;
  const auto n = static_cast<uint32_t>(delta.size());
  switch (cfg.method) {
    case Method::kPlump:
      push.frames.push_back(EncodeFull(delta, tag));
      break;
    case Method::kQuant:
      push.frames.push_back(QuantEncode(
          delta, cfg.quant, DeriveSeed(cfg.seed, kTagQuant, ws.k, round), tag));
      break;
    case Method::kSlim:
      push.explorer = SampleExplorer(n, ws.cached_core, cfg.alpha, cfg.beta,
                                     DeriveSeed(cfg.seed, kTagExplorer, ws.k, round),
                                     ws.k);
      if (cfg.IsFullPushRound(round)) {
        push.frames.push_back(EncodeFull(delta, tag));
      } else {
        push.frames.push_back(EncodeCore(
            GatherValues(delta, ws.cached_core.indices), ws.cached_core, n, tag));
        push.frames.push_back(EncodeKv(
            {n, push.explorer.indices, GatherValues(delta, push.explorer.indices)},
            tag));
      }
      break;
  }
  return push;
}

void ServerApply(ServerState& ss, std::span<const WorkerPush> pushes,
                 const ProtocolConfig& cfg) {
  if (pushes.size() != static_cast<size_t>(cfg.workers)) {
    throw std::runtime_error("missing worker frame: got pushes from " +
                             std::to_string(pushes.size()) + " of " +
                             std::to_string(cfg.workers) + " workers");
  }
  const size_t n = ss.global.size();
  std::vector<double> sum(n, 0.0);
  std::vector<uint32_t> count(n, 0);
  bool all_full = true;
  const auto add_sparse = [&](const SparseUpdate& u) {
    for (size_t j = 0; j < u.indices.size(); ++j) {
      sum[u.indices[j]] += u.values[j];
      ++count[u.indices[j]];
    }
  };
  const auto add_dense = [&](std::span<const float> v) {
    if (v.size() != n) throw CodecError("dense frame length differs from n");
    for (size_t i = 0; i < n; ++i) {
      sum[i] += v[i];
      ++count[i];
    }
  };

  std::vector<double> magnitude;
  for (size_t k = 0; k < pushes.size(); ++k) {
    const WorkerPush& push = pushes[k];
    if (push.worker != static_cast<int>(k)) {
      throw std::runtime_error("pushes must arrive in ascending worker order");
    }
    if (push.frames.empty()) {
      throw std::runtime_error("missing worker frame from worker " +
                               std::to_string(k));
    }
    for (const WireFrame& frame : push.frames) {
      if (frame.header.round != ss.t) {
        throw std::runtime_error("frame for round " +
                                 std::to_string(frame.header.round) +
                                 " arrived in round " + std::to_string(ss.t));
      }
      switch (frame.header.kind) {
        case FrameKind::kFull: {
          const ParamVector v = DecodeFull(frame);
          add_dense(v);
          if (cfg.method == Method::kSlim) {
            magnitude.resize(n, 0.0);
            for (size_t i = 0; i < n; ++i) magnitude[i] += std::fabs(v[i]);
          }
          break;
        }
        case FrameKind::kCore:
          all_full = false;
          add_sparse(DecodeCore(frame, ss.core));
          break;
        case FrameKind::kKv:
          all_full = false;
          add_sparse(DecodeKv(frame));
          break;
        case FrameKind::kQuant:
          all_full = false;
          add_dense(QuantDecode(frame));
          break;
      }
    }
  }

  const bool mean = cfg.aggregation == Aggregation::kMean;
  for (size_t i = 0; i < n; ++i) {
    if (count[i] == 0) continue;
    const double agg = mean ? sum[i] / count[i] : sum[i];
    ss.global[i] -= static_cast<float>(cfg.eta_prime * agg);
  }
  if (cfg.method == Method::kSlim && all_full) {
    for (double& m : magnitude) m /= static_cast<double>(pushes.size());
    ss.update_magnitude = std::move(magnitude);
  }
}

CoreSet CoreSelectionRound(const ServerState& ss, const ProtocolConfig& cfg) {
  if (!ss.update_magnitude) {
    throw std::logic_error(
        "core selection needs update magnitudes from a full push");
  }
  std::vector<double> w_abs(ss.global.size());
  for (size_t i = 0; i < w_abs.size(); ++i) w_abs[i] = std::fabs(ss.global[i]);
  const std::vector<double> scores =
      Significance(w_abs, *ss.update_magnitude, cfg.significance);
  return SelectCore(scores, cfg.beta, ss.core.epoch + 1);
}

CoreSet BootstrapCore(std::span<const float> global, double beta) {
  std::vector<double> w_abs(global.size());
  for (size_t i = 0; i < w_abs.size(); ++i) w_abs[i] = std::fabs(global[i]);
  const std::vector<double> zero(global.size(), 0.0);
  return SelectCore(Significance(w_abs, zero, {0.0, 1e-12}), beta, 0);
}

std::vector<WireFrame> ServerPull(const ServerState& ss, const WorkerPush& push,
                                  const ProtocolConfig& cfg) {
  const FrameTag tag{ss.t, static_cast<uint32_t>(push.worker)};
  std::vector<WireFrame> frames;
  const bool full = cfg.method != Method::kSlim ||
                    (cfg.full_pull_on_full_push && cfg.IsFullPushRound(ss.t));
  if (full) {
    frames.push_back(EncodeFull(ss.global, tag));
    return frames;
  }
  const auto n = static_cast<uint32_t>(ss.global.size());
  frames.push_back(EncodeCore(GatherValues(ss.global, ss.core.indices), ss.core,
                              n, tag));
  frames.push_back(EncodeKv(
      {n, push.explorer.indices, GatherValues(ss.global, push.explorer.indices)},
      tag));
  return frames;
}

void MergeSparse(ParamVector& local, const SparseUpdate& pulled) {
  if (pulled.n != local.size()) {
    throw std::invalid_argument("pulled update has a different n");
  }
  for (size_t j = 0; j < pulled.indices.size(); ++j) {
    local[pulled.indices[j]] = pulled.values[j];
  }
}

void WorkerPullMerge(WorkerState& ws, std::span<const WireFrame> frames) {
  for (const WireFrame& frame : frames) {
    switch (frame.header.kind) {
      case FrameKind::kFull: {
        ParamVector global = DecodeFull(frame);
        if (global.size() != ws.local.size()) {
          throw std::invalid_argument("pulled model has a different n");
        }
        ws.local = std::move(global);
        break;
      }
      case FrameKind::kCore:
        MergeSparse(ws.local, DecodeCore(frame, ws.cached_core));
        break;
      case FrameKind::kKv:
        MergeSparse(ws.local, DecodeKv(frame));
        break;
      case FrameKind::kQuant:
        throw std::invalid_argument("pulls are never quantized");
    }
  }
}

int ResolveThreads(int requested, int workers) {
  int threads = requested;
  if (threads <= 0) {
    threads = workers;
    if (const char* env = std::getenv("SLIMDP_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) threads = std::min(threads, cap);
    }
  }
  return std::clamp(threads, 1, std::max(workers, 1));
}

Simulation::Simulation(const ProtocolConfig& cfg, const ModelSpec& spec,
                       const Dataset& train, const CostModel& cost, int threads)
    : cfg_(cfg), spec_(spec), cost_(cost),
      threads_(ResolveThreads(threads, cfg.workers)) {
  cfg_.Validate();
  cost_.Validate();
  spec_.Validate();
  train.Validate();
  if (static_cast<int>(train.dim) != spec_.input_dim() ||
      train.class_count > spec_.class_count()) {
    throw std::invalid_argument("dataset does not match the model's input/classes");
  }
  server_.global = InitParams(spec_);
  if (server_.global.size() > UINT32_MAX) {
    throw std::invalid_argument("models beyond 2^32 parameters are unsupported");
  }
  if (cfg_.method == Method::kSlim) {
    server_.core = BootstrapCore(server_.global, cfg_.beta);
  }
  std::vector<Shard> shards = Partition(train, cfg_.workers, cfg_.seed);
  workers_.reserve(cfg_.workers);
  for (int k = 0; k < cfg_.workers; ++k) {
    workers_.push_back(WorkerState{
        k, server_.global, server_.core,
        BatchStream(train, std::move(shards[k]), cfg_.batch_size, cfg_.seed)});
  }
}

RoundMetrics Simulation::Step() {
  const auto wall_start = std::chrono::steady_clock::now();
  const uint32_t t = server_.t;
  const int k_count = cfg_.workers;
  std::vector<WorkerPush> pushes(k_count);

  // Local training phase; each worker touches only its own state.
  if (threads_ <= 1) {
    for (int k = 0; k < k_count; ++k) {
      pushes[k] = WorkerRound(workers_[k], t, spec_, cfg_);
    }
  } else {
    std::vector<std::exception_ptr> errors(threads_);
    std::vector<std::thread> pool;
    pool.reserve(threads_);
    for (int j = 0; j < threads_; ++j) {
      pool.emplace_back([&, j] {
        try {
          for (int k = j; k < k_count; k += threads_) {
            pushes[k] = WorkerRound(workers_[k], t, spec_, cfg_);
          }
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  RoundMetrics m;
  m.round = t + 1;
  for (const WorkerPush& push : pushes) {
    uint64_t words = 0;
    for (const WireFrame& f : push.frames) words += PayloadWords(f);
    m.push_words += words;
    m.max_push_words = std::max(m.max_push_words, words);
    m.samples += push.samples;
    m.train_loss += push.train_loss;
  }
  m.train_loss /= k_count;

  ServerApply(server_, pushes, cfg_);

  for (int k = 0; k < k_count; ++k) {
    const std::vector<WireFrame> pulled = ServerPull(server_, pushes[k], cfg_);
    uint64_t words = 0;
    for (const WireFrame& f : pulled) words += PayloadWords(f);
    m.pull_words += words;
    m.max_pull_words = std::max(m.max_pull_words, words);
    WorkerPullMerge(workers_[k], pulled);
  }

  ++server_.t;
  if (cfg_.method == Method::kSlim && server_.t % cfg_.q == 0) {
    server_.core = CoreSelectionRound(server_, cfg_);
    for (WorkerState& ws : workers_) ws.cached_core = server_.core;
  }

  m.sim_comp_s = cfg_.p * cost_.compute_s;
  m.sim_comm_s = CommTime(m.max_push_words, cost_) + CommTime(m.max_pull_words, cost_);
  m.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           wall_start)
                 .count();
  return m;
}

std::vector<RoundMetrics> RunSimulation(
    const ProtocolConfig& cfg, const ModelSpec& spec, const Dataset& train,
    const Dataset& test, const SimulationOptions& opts,
    const std::function<void(const RoundMetrics&)>& on_round) {
  if (opts.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (opts.eval_every < 1) throw std::invalid_argument("eval-every must be >= 1");
  test.Validate();
  Simulation sim(cfg, spec, train, opts.cost, opts.threads);
  std::vector<RoundMetrics> out;
  out.reserve(opts.rounds);
  for (int r = 0; r < opts.rounds; ++r) {
    RoundMetrics m = sim.Step();
    if (m.round % opts.eval_every == 0 || r + 1 == opts.rounds) {
      const EvalResult eval =
          Evaluate(spec, sim.global(), test.features, test.labels);
      m.evaluated = true;
      m.test_loss = eval.loss;
      m.test_accuracy = eval.accuracy;
    }
    if (on_round) on_round(m);
    out.push_back(m);
  }
  return out;
}

}  // namespace slimdp
