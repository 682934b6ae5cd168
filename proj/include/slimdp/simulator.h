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

#ifndef SLIMDP_SIMULATOR_H_
#define SLIMDP_SIMULATOR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slimdp/codec.h"
#include "slimdp/data.h"
#include "slimdp/model.h"
#include "slimdp/selection.h"

namespace slimdp {

// plump: full update push, full model pull.
// quant: quantized update push, full model pull.
// slim:  core (key-cached) + explorer (key-value) push and pull, with a full
//        push on the last round before each core reselection.
enum class Method { kPlump, kQuant, kSlim };

const char* MethodName(Method method);
std::optional<Method> ParseMethod(std::string_view name);

// How the server folds the contributions that reach one coordinate.
enum class Aggregation { kMean, kSum };

const char* AggregationName(Aggregation agg);
std::optional<Aggregation> ParseAggregation(std::string_view name);

struct CostModel {
  double latency_s = 1e-3;
  double bandwidth_bytes_per_s = 1e8;
  double compute_s = 5e-4;  // per mini-batch

  void Validate() const;
};

// latency + 4 * words / bandwidth.
double CommTime(uint64_t words, const CostModel& cost);

struct ProtocolConfig {
  Method method = Method::kPlump;
  double alpha = 0.3;
  double beta = 0.15;
  int p = 1;   // local SGD steps per communication round
  int q = 50;  // communication rounds per core reselection
  double eta_prime = 1.0;
  double lr = 0.05;
  // lr(t) = lr * lr_decay^floor(t / lr_decay_every); disabled when every = 0.
  double lr_decay = 1.0;
  int lr_decay_every = 0;
  size_t batch_size = 32;
  QuantParams quant;
  int workers = 4;
  uint64_t seed = 1;
  Aggregation aggregation = Aggregation::kMean;
  // Pull the whole model on slim full-push rounds instead of core+explorer.
  bool full_pull_on_full_push = false;
  SignificanceConfig significance;

  void Validate() const;
  float LearningRate(uint32_t round) const;
  bool IsFullPushRound(uint32_t round) const;
};

struct ServerState {
  ParamVector global;
  CoreSet core;
  uint32_t t = 0;
  // mean_k |delta_k| from the latest full push; consumed by core selection.
  std::optional<std::vector<double>> update_magnitude;
};

struct WorkerState {
  int k = 0;
  ParamVector local;
  CoreSet cached_core;
  BatchStream stream;
};

struct WorkerPush {
  int worker = 0;
  std::vector<WireFrame> frames;
  ExplorerSet explorer;
  double train_loss = 0.0;
  uint64_t samples = 0;
};

// LocalTrain over p batches, explorer sampling (slim) and push frames.
WorkerPush WorkerRound(WorkerState& ws, uint32_t round, const ModelSpec& spec,
                       const ProtocolConfig& cfg);

// Synchronous update from exactly one push per worker, folded in ascending
// worker order. Caches update magnitudes when every push is a Full frame.
void ServerApply(ServerState& ss, std::span<const WorkerPush> pushes,
                 const ProtocolConfig& cfg);

// Core reselection from |global| and the cached update magnitudes.
CoreSet CoreSelectionRound(const ServerState& ss, const ProtocolConfig& cfg);

// Round-zero core: magnitude only, no gradient information yet.
CoreSet BootstrapCore(std::span<const float> global, double beta);

// Frames the server returns to one worker for the round it just pushed.
std::vector<WireFrame> ServerPull(const ServerState& ss, const WorkerPush& push,
                                  const ProtocolConfig& cfg);

// Overwrites local coordinates present in the pulled frames.
void WorkerPullMerge(WorkerState& ws, std::span<const WireFrame> frames);
void MergeSparse(ParamVector& local, const SparseUpdate& pulled);

struct RoundMetrics {
  uint32_t round = 0;  // rounds completed, 1-based
  uint64_t samples = 0;  // this round, all workers
  double train_loss = 0.0;  // mean over workers
  bool evaluated = false;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  uint64_t push_words = 0;  // summed over workers
  uint64_t pull_words = 0;
  uint64_t max_push_words = 0;  // slowest worker
  uint64_t max_pull_words = 0;
  double sim_comp_s = 0.0;
  double sim_comm_s = 0.0;
  double wall_s = 0.0;
};

// Thread count for the local-training phase: `requested` if positive, else
// SLIMDP_THREADS, else the worker count; always capped by both.
int ResolveThreads(int requested, int workers);

class Simulation {
 public:
  // `train` must outlive the simulation.
  Simulation(const ProtocolConfig& cfg, const ModelSpec& spec,
             const Dataset& train, const CostModel& cost, int threads = 0);

  // One synchronous communication round: train, push, apply, pull, merge,
  // and core reselection when due.
  RoundMetrics Step();

  const ServerState& server() const { return server_; }
  const std::vector<WorkerState>& workers() const { return workers_; }
  const ParamVector& global() const { return server_.global; }
  const ModelSpec& spec() const { return spec_; }
  int threads() const { return threads_; }

 private:
  ProtocolConfig cfg_;
  ModelSpec spec_;
  CostModel cost_;
  int threads_;
  ServerState server_;
  std::vector<WorkerState> workers_;
};

struct SimulationOptions {
  int rounds = 100;
  int eval_every = 10;
  CostModel cost;
  int threads = 0;
};

// Runs `rounds` rounds, evaluating the global model on `test` every
// eval_every rounds and after the last one.
std::vector<RoundMetrics> RunSimulation(
    const ProtocolConfig& cfg, const ModelSpec& spec, const Dataset& train,
    const Dataset& test, const SimulationOptions& opts,
    const std::function<void(const RoundMetrics&)>& on_round = {});

}  // namespace slimdp

#endif  // SLIMDP_SIMULATOR_H_
