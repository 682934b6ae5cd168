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

#ifndef SLIMDP_EXPERIMENT_H_
#define SLIMDP_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slimdp/data.h"
#include "slimdp/simulator.h"

namespace slimdp {

struct DataSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  std::string csv_path;
  SyntheticSpec synthetic;
  // Teacher seed; the experiment seed when unset.
  std::optional<uint64_t> synthetic_seed;
  size_t synthetic_test = 4000;
  double csv_test_fraction = 0.2;
};

// Everything a run needs. Keys of the flat `key=value` format are the CLI
// flag names without the leading dashes.
struct ExperimentConfig {
  std::optional<Method> method;
  ProtocolConfig protocol;
  std::vector<int> hidden = {96, 64};
  DataSource data;
  int rounds = 2000;
  int eval_every = 50;
  CostModel cost;
  std::optional<double> target_accuracy;
  std::string out = "run";
  int threads = 0;

  // Fills protocol.method from `method` and checks every field.
  void Validate();
};

// Sets one key; unknown keys and malformed values throw with the key name.
void ApplyConfigValue(ExperimentConfig& cfg, std::string_view key,
                      std::string_view value);

// Every recognised key, in canonical order.
std::vector<std::string_view> ConfigKeys();

// Parses `key=value` lines; '#' starts a comment.
ExperimentConfig ParseConfigText(std::string_view text);
ExperimentConfig LoadConfigFile(const std::filesystem::path& path);

// Canonical `key=value` text, one key per line in a fixed order.
std::string SerializeConfig(const ExperimentConfig& cfg);

// Config file first (if any), then overrides in order; validated.
ExperimentConfig BuildConfig(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::pair<std::string, std::string>>& overrides);

struct LoadedData {
  Dataset train;
  Dataset test;
};

LoadedData LoadData(const ExperimentConfig& cfg);
ModelSpec BuildModelSpec(const ExperimentConfig& cfg, const Dataset& train);

struct RunSummary {
  std::string method;
  double final_accuracy = 0.0;
  double final_test_loss = 0.0;
  uint32_t rounds = 0;
  uint64_t samples = 0;
  uint64_t total_push_words = 0;
  uint64_t total_pull_words = 0;
  double sim_comp_s = 0.0;
  double sim_comm_s = 0.0;
  std::optional<double> target_accuracy;
  std::optional<uint32_t> rounds_to_target;
  // Filled only when compared against a baseline.
  std::optional<double> speed_d;
  std::optional<double> speed_a;
};

struct RunOutput {
  std::vector<RoundMetrics> metrics;
  RunSummary summary;
  size_t param_count = 0;
};

RunOutput RunExperiment(const ExperimentConfig& cfg);

RunSummary Summarize(const std::vector<RoundMetrics>& metrics, Method method,
                     std::optional<double> target_accuracy);

inline constexpr std::string_view kMetricsCsvHeader =
    "round,samples,train_loss,test_loss,test_acc,push_words,pull_words,"
    "sim_comp_s,sim_comm_s,wall_s";

// One row per evaluated round. samples, words and seconds are cumulative.
void WriteMetricsCsv(std::ostream& out, const std::vector<RoundMetrics>& metrics);
std::string SummaryJson(const RunSummary& summary);

// Writes <out>.csv and <out>.json.
void WriteRunOutputs(const std::string& out_prefix, const RunOutput& run);

struct MetricsRow {
  uint32_t round = 0;
  uint64_t samples = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  uint64_t push_words = 0;
  uint64_t pull_words = 0;
  double sim_comp_s = 0.0;
  double sim_comm_s = 0.0;
  double wall_s = 0.0;

  double sim_total_s() const { return sim_comp_s + sim_comm_s; }
};

std::vector<MetricsRow> ReadMetricsCsv(std::istream& in);
std::vector<MetricsRow> ReadMetricsCsv(const std::filesystem::path& path);
std::vector<MetricsRow> ToRows(const std::vector<RoundMetrics>& metrics);

struct Comparison {
  std::string name;
  double final_accuracy = 0.0;
  // (baseline seconds per sample) / (candidate seconds per sample).
  double speed_d = 0.0;
  // Time to the baseline's final accuracy, baseline over candidate; empty if
  // the candidate never gets there.
  std::optional<double> speed_a;
  double comm_time_saving = 0.0;
  double word_saving = 0.0;
};

Comparison CompareRuns(const std::vector<MetricsRow>& baseline,
                       const std::vector<MetricsRow>& candidate,
                       std::string name = {});

std::string FormatComparisonTable(const std::vector<Comparison>& rows);
std::string ComparisonJson(const std::vector<Comparison>& rows);

// Shortest text that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace slimdp

#endif  // SLIMDP_EXPERIMENT_H_
