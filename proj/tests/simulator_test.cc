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

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "slimdp/random.h"

namespace slimdp {
namespace {

// A linear model with exactly 1000 parameters: (99 + 1) x 10.
const ModelSpec kLinear{{99, 10}, 3};

const Dataset& LinearData() {
  static const Dataset ds = GenSynthetic({99, 10, 800, 2, 0.0, 0});
  return ds;
}

const Dataset& SmallData() {
  static const Dataset ds = GenSynthetic({6, 3, 300, 4, 0.05, 8});
  return ds;
}

const ModelSpec kSmall{{6, 10, 3}, 5};

ProtocolConfig Config(Method m, int workers = 4) {
  ProtocolConfig c;
  c.method = m;
  c.workers = workers;
  c.batch_size = 8;
  c.lr = 0.1;
  c.q = 5;
  return c;
}

WorkerPush KvPush(int worker, uint32_t n, IndexSet idx, std::vector<float> val) {
  WorkerPush p;
  p.worker = worker;
  p.frames.push_back(EncodeKv({n, std::move(idx), std::move(val)}));
  return p;
}

TEST_CASE("comm time is latency plus bytes over bandwidth") {
  const CostModel cost{1e-3, 1e9, 0.0};
  CHECK(CommTime(450, cost) == doctest::Approx(0.0010018).epsilon(1e-12));
  CHECK(CommTime(0, cost) == 1e-3);
  const CostModel no_latency{0.0, 1e8, 0.0};
  CHECK(CommTime(450, no_latency) / CommTime(1000, no_latency) ==
        doctest::Approx(2 * 0.3 - 0.15));
}

TEST_CASE("server applies the mean of contributing workers") {
  ServerState ss;
  ss.global = {1.0f, 2.0f, 3.0f};
  ProtocolConfig cfg = Config(Method::kSlim, 2);
  const std::vector<WorkerPush> pushes = {KvPush(0, 3, {0}, {0.1f}),
                                          KvPush(1, 3, {0}, {0.3f})};
  ServerApply(ss, pushes, cfg);
  CHECK(ss.global[0] == doctest::Approx(0.8f));
  CHECK(ss.global[1] == 2.0f);
  CHECK(ss.global[2] == 3.0f);
  CHECK_FALSE(ss.update_magnitude.has_value());

  ServerState sum_ss;
  sum_ss.global = {1.0f, 2.0f, 3.0f};
  cfg.aggregation = Aggregation::kSum;
  cfg.eta_prime = 0.5;
  ServerApply(sum_ss, pushes, cfg);
  CHECK(sum_ss.global[0] == doctest::Approx(0.8f));
}

TEST_CASE("server enforces the barrier") {
  ServerState ss;
  ss.global = {1.0f, 2.0f};
  const ProtocolConfig cfg = Config(Method::kPlump, 2);
  std::vector<WorkerPush> one = {KvPush(0, 2, {0}, {1.0f})};
  CHECK_THROWS_WITH_AS(ServerApply(ss, one, cfg),
                       doctest::Contains("missing worker frame"),
                       std::runtime_error);
  std::vector<WorkerPush> empty(2);
  empty[1].worker = 1;
  CHECK_THROWS_AS(ServerApply(ss, empty, cfg), std::runtime_error);
  std::vector<WorkerPush> late = {KvPush(0, 2, {0}, {1.0f}),
                                  KvPush(1, 2, {1}, {1.0f})};
  late[1].frames[0].header.round = 1;
  CHECK_THROWS_AS(ServerApply(ss, late, cfg), std::runtime_error);
  CHECK(ss.global == std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("full pushes cache the mean update magnitude for slim") {
  ServerState ss;
  ss.global = {0.0f, 0.0f};
  const ProtocolConfig cfg = Config(Method::kSlim, 2);
  std::vector<WorkerPush> pushes(2);
  for (int k = 0; k < 2; ++k) pushes[k].worker = k;
  pushes[0].frames.push_back(EncodeFull(std::vector<float>{0.5f, -1.0f}));
  pushes[1].frames.push_back(EncodeFull(std::vector<float>{-0.25f, 0.0f}));
  ServerApply(ss, pushes, cfg);
  REQUIRE(ss.update_magnitude.has_value());
  CHECK(*ss.update_magnitude == std::vector<double>{0.375, 0.5});
  CHECK(ss.global == std::vector<float>{-0.125f, 0.5f});
}

TEST_CASE("merge overwrites pulled coordinates only") {
  ParamVector local = {1, 2, 3};
  MergeSparse(local, {3, {1}, {9}});
  CHECK(local == ParamVector{1, 9, 3});
  MergeSparse(local, {3, {}, {}});
  CHECK(local == ParamVector{1, 9, 3});
  MergeSparse(local, {3, {0, 1, 2}, {7, 8, 9}});
  CHECK(local == ParamVector{7, 8, 9});
  CHECK_THROWS_AS(MergeSparse(local, {4, {}, {}}), std::invalid_argument);
}

TEST_CASE("core selection") {
  ServerState ss;
  ss.global = {0.1f, -0.9f, 0.4f, 0.0f, -0.2f};
  ProtocolConfig cfg = Config(Method::kSlim);
  cfg.beta = 0.4;
  CHECK_THROWS_AS(CoreSelectionRound(ss, cfg), std::logic_error);
  CHECK(BootstrapCore(ss.global, 0.4).indices == IndexSet{1, 2});
  ss.update_magnitude = std::vector<double>{0.0, 0.0, 0.0, 5.0, 0.0};
  cfg.significance.fixed_c = 0.0;
  CHECK(CoreSelectionRound(ss, cfg).indices == IndexSet{1, 2});
  cfg.significance.fixed_c = 1.0;
  const CoreSet c = CoreSelectionRound(ss, cfg);
  CHECK(c.indices == IndexSet{1, 3});
  CHECK(c.epoch == ss.core.epoch + 1);
  CHECK(CoreSelectionRound(ss, cfg).indices == c.indices);
  cfg.beta = 1.0;
  cfg.alpha = 1.0;
  CHECK(CoreSelectionRound(ss, cfg).indices == IndexSet{0, 1, 2, 3, 4});
}

TEST_CASE("protocol validation") {
  ProtocolConfig cfg = Config(Method::kSlim);
  cfg.alpha = 0.2;
  cfg.beta = 0.3;
  CHECK_THROWS_WITH_AS(cfg.Validate(), "beta must not exceed alpha",
                       std::invalid_argument);
  cfg = Config(Method::kSlim);
  cfg.p = 0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = Config(Method::kSlim);
  cfg.q = 0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = Config(Method::kSlim);
  cfg.alpha = 1.1;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  CHECK(ParseMethod("quant") == Method::kQuant);
  CHECK_FALSE(ParseMethod("fast").has_value());
  CHECK(ParseAggregation("sum") == Aggregation::kSum);
}

TEST_CASE("learning rate steps down on schedule") {
  ProtocolConfig cfg;
  cfg.lr = 0.4;
  CHECK(cfg.LearningRate(1000) == 0.4f);
  cfg.lr_decay = 0.5;
  cfg.lr_decay_every = 10;
  CHECK(cfg.LearningRate(9) == 0.4f);
  CHECK(cfg.LearningRate(10) == 0.2f);
  CHECK(cfg.LearningRate(25) == 0.1f);
}

TEST_CASE("slim push and pull words follow the schedule") {
  ProtocolConfig cfg = Config(Method::kSlim);
  cfg.alpha = 0.3;
  cfg.beta = 0.15;
  Simulation sim(cfg, kLinear, LinearData(), {}, 1);
  REQUIRE(sim.global().size() == 1000);
  uint64_t push_total = 0;
  for (int r = 0; r < 10; ++r) {
    const RoundMetrics m = sim.Step();
    const bool full = (r + 1) % 5 == 0;
    CHECK(m.max_push_words == (full ? 1000u : 450u));
    CHECK(m.push_words == 4 * m.max_push_words);
    CHECK(m.max_pull_words == 450);
    CHECK(m.samples == 32);
    CHECK(m.sim_comm_s == doctest::Approx(CommTime(m.max_push_words, {}) +
                                          CommTime(450, {})));
    CHECK(m.sim_comp_s == 5e-4);
    if (r < 5) push_total += m.max_push_words;
  }
  CHECK(push_total == 4 * 450 + 1000);
  CHECK(sim.server().core.epoch == 2);
  for (const WorkerState& ws : sim.workers()) {
    CHECK(ws.cached_core.signature == sim.server().core.signature);
  }
}

TEST_CASE("full pull flag widens pulls on full-push rounds") {
  ProtocolConfig cfg = Config(Method::kSlim);
  cfg.full_pull_on_full_push = true;
  Simulation sim(cfg, kLinear, LinearData(), {}, 1);
  for (int r = 0; r < 5; ++r) {
    CHECK(sim.Step().max_pull_words == (r == 4 ? 1000u : 450u));
  }
}

TEST_CASE("plump and quant word counts") {
  Simulation plump(Config(Method::kPlump), kLinear, LinearData(), {}, 1);
  const RoundMetrics p = plump.Step();
  CHECK(p.max_push_words == 1000);
  CHECK(p.max_pull_words == 1000);
  Simulation quant(Config(Method::kQuant), kLinear, LinearData(), {}, 1);
  const RoundMetrics q = quant.Step();
  CHECK(q.max_push_words == QuantPayloadWords(1000, {}));
  CHECK(q.max_pull_words == 1000);
}

TEST_CASE("slim with full sets matches plump bitwise") {
  for (int p : {1, 3}) {
    ProtocolConfig plump = Config(Method::kPlump, 3);
    plump.p = p;
    ProtocolConfig slim = plump;
    slim.method = Method::kSlim;
    slim.alpha = 1.0;
    slim.beta = 1.0;
    Simulation a(plump, kSmall, SmallData(), {}, 1);
    Simulation b(slim, kSmall, SmallData(), {}, 1);
    for (int r = 0; r < 12; ++r) {
      a.Step();
      b.Step();
      CHECK(a.global() == b.global());
    }
  }
}

TEST_CASE("single worker plump replays sequential SGD") {
  ProtocolConfig cfg = Config(Method::kPlump, 1);
  Simulation sim(cfg, kSmall, SmallData(), {}, 1);
  ParamVector w = InitParams(kSmall);
  BatchStream stream(SmallData(), Partition(SmallData(), 1, cfg.seed)[0],
                     cfg.batch_size, cfg.seed);
  for (int r = 0; r < 40; ++r) {
    sim.Step();
    const ParamVector g = LossAndGrad(kSmall, w, stream.Next()).grad;
    for (size_t i = 0; i < w.size(); ++i) w[i] -= cfg.LearningRate(r) * g[i];
    REQUIRE(sim.global() == w);
  }
}

TEST_CASE("thread count does not change results") {
  for (Method m : {Method::kPlump, Method::kQuant, Method::kSlim}) {
    ProtocolConfig cfg = Config(m, 4);
    Simulation one(cfg, kSmall, SmallData(), {}, 1);
    Simulation many(cfg, kSmall, SmallData(), {}, 4);
    CHECK(many.threads() == 4);
    for (int r = 0; r < 12; ++r) {
      const RoundMetrics a = one.Step();
      const RoundMetrics b = many.Step();
      CHECK(a.train_loss == b.train_loss);
      CHECK(a.push_words == b.push_words);
    }
    CHECK(one.global() == many.global());
    for (int k = 0; k < 4; ++k) {
      CHECK(one.workers()[k].local == many.workers()[k].local);
    }
  }
}

TEST_CASE("thread resolution honours the environment cap") {
  CHECK(ResolveThreads(3, 8) == 3);
  CHECK(ResolveThreads(16, 4) == 4);
  ::setenv("SLIMDP_THREADS", "2", 1);
  CHECK(ResolveThreads(0, 8) == 2);
  ::unsetenv("SLIMDP_THREADS");
  CHECK(ResolveThreads(0, 8) == 8);
}

TEST_CASE("run simulation evaluates on cadence and learns") {
  const Dataset& data = SmallData();
  const auto [train, test] = SplitHoldout(data, 60, 1);
  SimulationOptions opts;
  opts.rounds = 23;
  opts.eval_every = 10;
  ProtocolConfig cfg = Config(Method::kSlim, 2);
  cfg.alpha = 0.5;
  cfg.beta = 0.25;
  int seen = 0;
  const std::vector<RoundMetrics> ms =
      RunSimulation(cfg, kSmall, train, test, opts,
                    [&](const RoundMetrics&) { ++seen; });
  CHECK(seen == 23);
  for (const RoundMetrics& m : ms) {
    CHECK(m.evaluated == (m.round == 10 || m.round == 20 || m.round == 23));
  }
  CHECK(ms.back().round == 23);
  CHECK(ms.front().train_loss > ms.back().train_loss);
  CHECK_THROWS_AS(RunSimulation(cfg, kSmall, train, test, {0, 1}),
                  std::invalid_argument);
}

TEST_CASE("stale worker cache is detected on pull") {
  ProtocolConfig cfg = Config(Method::kSlim, 2);
  Simulation sim(cfg, kSmall, SmallData(), {}, 1);
  sim.Step();
  WorkerState ws = sim.workers()[0];
  ws.cached_core.signature ^= 1;
  WorkerPush push;
  push.worker = 0;
  const std::vector<WireFrame> frames = ServerPull(sim.server(), push, cfg);
  CHECK_THROWS_WITH_AS(WorkerPullMerge(ws, frames),
                       doctest::Contains("stale core cache"), CodecError);
}

}  // namespace
}  // namespace slimdp
