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
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "slimdp/random.h"

namespace slimdp {
namespace {

CoreSet CoreOf(IndexSet indices) {
  CoreSet c;
  c.signature = IndexSignature(indices);
  c.indices = std::move(indices);
  return c;
}

TEST_CASE("significance is magnitude plus scaled gradient") {
  const std::vector<double> w = {0.5, 0.2, 0.05};
  const std::vector<double> g = {0.1, 0.4, 0.0};
  const std::vector<double> s = Significance(w, g, {1.0, 1e-12});
  CHECK(s[0] == doctest::Approx(0.6));
  CHECK(s[1] == doctest::Approx(0.6));
  CHECK(s[2] == 0.05);
  CHECK(Significance(w, g, {0.0, 1e-12}) == w);
}

TEST_CASE("auto scale matches the mean ratio") {
  const std::vector<double> w = {0.5, 0.2, 0.05};
  const std::vector<double> g = {0.1, 0.4, 0.0};
  CHECK(AutoScaleC(w, g, 1e-12) ==
        doctest::Approx((0.75 / 3) / (0.5 / 3 + 1e-12)));
  const std::vector<double> zero(3, 0.0);
  CHECK(AutoScaleC(w, zero, 1e-12) == doctest::Approx(0.25 / 1e-12));
  CHECK(Significance(w, zero, {}) == w);

  // Scaling g by 10 scales c by 1/10.
  std::vector<double> g10 = g;
  for (double& x : g10) x *= 10.0;
  CHECK(AutoScaleC(w, g10, 1e-12) * 10.0 ==
        doctest::Approx(AutoScaleC(w, g, 1e-12)));
  const std::vector<double> s1 = Significance(w, g, {});
  const std::vector<double> s10 = Significance(w, g10, {});
  for (size_t i = 0; i < 3; ++i) CHECK(s1[i] == doctest::Approx(s10[i]));
}

TEST_CASE("significance rejects signed or mismatched input") {
  const std::vector<double> w = {0.5, -0.2};
  const std::vector<double> g = {0.1, 0.1};
  CHECK_THROWS_AS(Significance(w, g, {}), std::invalid_argument);
  CHECK_THROWS_AS(Significance(g, std::vector<double>{0.1}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Significance(g, g, {-1.0, 1e-12}), std::invalid_argument);
  CHECK_THROWS_AS(Significance(g, g, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("fraction counts round half up") {
  CHECK(FractionCount(0.15, 1000) == 150);
  CHECK(FractionCount(0.15, 10000) == 1500);
  CHECK(FractionCount(0.5, 3) == 2);
  CHECK(FractionCount(0.25, 2) == 1);
  CHECK(FractionCount(0.0, 10) == 0);
  CHECK(FractionCount(1.0, 10) == 10);
  CHECK(FractionCount(1.2, 10) == 10);
  CHECK(ExplorerSize(10, 3, 0.5, 0.3) == 2);
  CHECK(ExplorerSize(10, 9, 0.9, 0.0) == 1);
}

TEST_CASE("core takes the top scores with ties to the lower index") {
  const std::vector<double> s = {0.6, 0.6, 0.05};
  CHECK(SelectCore(s, 1.0 / 3.0).indices == IndexSet{0});
  CHECK(SelectCore(s, 0.0).indices.empty());
  CHECK(SelectCore(s, 1.0).indices == IndexSet{0, 1, 2});
  const std::vector<double> t = {0.1, 0.9, 0.3, 0.9, 0.7, 0.2};
  const CoreSet c = SelectCore(t, 0.5, 4);
  CHECK(c.indices == IndexSet{1, 3, 4});
  CHECK(c.epoch == 4);
  CHECK(c.signature == IndexSignature(c.indices));
  CHECK_THROWS_AS(SelectCore(t, 1.5), std::invalid_argument);
}

TEST_CASE("core agrees with a full sort on random scores") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> level(0, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 1 + rng() % 300;
    std::vector<double> s(n);
    for (double& x : s) x = level(rng) * 0.05;  // many ties
    const double beta = (rng() % 101) / 100.0;
    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return s[a] > s[b]; });
    IndexSet expect(order.begin(), order.begin() + CoreSize(n, beta));
    std::sort(expect.begin(), expect.end());
    CHECK(SelectCore(s, beta).indices == expect);
  }
}

TEST_CASE("raising a core member's score keeps it in the core") {
  std::vector<double> s = {0.3, 0.1, 0.8, 0.5, 0.2};
  const CoreSet before = SelectCore(s, 0.4);
  CHECK(before.indices == IndexSet{2, 3});
  s[3] = 0.9;
  CHECK(SelectCore(s, 0.4).indices == before.indices);
  const std::vector<double> w = {0.3, 0.1, 0.8};
  std::vector<double> g = {0.0, 0.0, 0.0};
  const double base = Significance(w, g, {2.0, 1e-12})[1];
  g[1] = 0.5;
  CHECK(Significance(w, g, {2.0, 1e-12})[1] >= base);
}

TEST_CASE("signature depends on the index sequence") {
  const IndexSet a = {1, 5, 9};
  const IndexSet b = {1, 5, 10};
  CHECK(IndexSignature(a) == IndexSignature(IndexSet{1, 5, 9}));
  CHECK(IndexSignature(a) != IndexSignature(b));
  CHECK(IndexSignature({}) == 0xcbf29ce484222325ULL);
}

TEST_CASE("explorer draws from the core complement") {
  const CoreSet core = CoreOf({0, 1, 2});
  const ExplorerSet e = SampleExplorer(10, core, 0.5, 0.3, 99, 2);
  CHECK(e.worker == 2);
  REQUIRE(e.indices.size() == 2);
  CHECK(std::is_sorted(e.indices.begin(), e.indices.end()));
  CHECK(e.indices[0] != e.indices[1]);
  for (uint32_t i : e.indices) CHECK(i >= 3);
  CHECK(SampleExplorer(10, core, 0.5, 0.3, 99).indices == e.indices);
  CHECK(SampleExplorer(10, core, 0.3, 0.3, 99).indices.empty());
  CHECK_THROWS_AS(SampleExplorer(10, core, 0.2, 0.3, 1), std::invalid_argument);
}

TEST_CASE("explorer is uniform over the complement") {
  const size_t n = 20;
  const CoreSet core = CoreOf({3, 7, 11, 15});
  const double alpha = 0.5, beta = 0.2;
  const int trials = 10000;
  std::vector<int> hits(n, 0);
  for (int t = 0; t < trials; ++t) {
    const ExplorerSet e =
        SampleExplorer(n, core, alpha, beta, DeriveSeed(5, kTagExplorer, 0, t));
    CHECK(e.indices.size() == 6);
    for (uint32_t i : e.indices) ++hits[i];
  }
  const double p = 6.0 / 16.0;
  const double sd = std::sqrt(trials * p * (1.0 - p));
  for (size_t i = 0; i < n; ++i) {
    const bool in_core = std::binary_search(core.indices.begin(),
                                            core.indices.end(), uint32_t(i));
    if (in_core) {
      CHECK(hits[i] == 0);
    } else {
      CHECK(std::fabs(hits[i] - trials * p) < 3 * sd);
    }
  }
}

TEST_CASE("comm set is the disjoint union") {
  const CoreSet core = CoreOf({1, 5});
  CHECK(CommSet(core, {0, {2, 9}}) == IndexSet{1, 2, 5, 9});
  CHECK(CommSet(core, {}) == core.indices);
  CHECK_THROWS_AS(CommSet(core, {0, {5}}), std::logic_error);
}

TEST_CASE("comm set size law") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng() % 500;
    const double alpha = (rng() % 101) / 100.0;
    const double beta = alpha * ((rng() % 101) / 100.0);
    std::vector<double> s(n);
    for (double& x : s) x = std::uniform_real_distribution<double>()(rng);
    const CoreSet core = SelectCore(s, beta);
    const ExplorerSet e = SampleExplorer(n, core, alpha, beta, rng());
    const IndexSet all = CommSet(core, e);
    const size_t expect =
        std::min(FractionCount(beta, n), n) +
        std::min(FractionCount(alpha - beta, n), n - core.indices.size());
    CHECK(all.size() == expect);
    CHECK(all.size() <= n);
    CHECK(std::fabs(static_cast<double>(all.size()) - alpha * n) <= 1.0 + 1e-9);
  }
}

}  // namespace
}  // namespace slimdp
