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

// Command-line front end: train, compare, sweep.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "slimdp/experiment.h"

namespace {

using slimdp::Comparison;
using slimdp::ExperimentConfig;

const std::map<std::string, std::string>& FlagHelp() {
  static const std::map<std::string, std::string> help = {
      {"method", "plump | quant | slim"},
      {"alpha", "communication-set fraction of parameters"},
      {"beta", "core fraction of parameters (<= alpha)"},
      {"p", "local mini-batches per communication round"},
      {"q", "communication rounds per core reselection"},
      {"workers", "number of workers K"},
      {"seed", "experiment seed"},
      {"rounds", "communication rounds R"},
      {"eval-every", "evaluate every E rounds"},
      {"lr", "local learning rate"},
      {"eta-prime", "server step scale"},
      {"quant-bits", "quantization bits"},
      {"quant-bucket", "quantization bucket size"},
      {"latency", "per-message latency (s)"},
      {"bandwidth", "link bandwidth (bytes/s)"},
      {"compute-s", "compute time per mini-batch (s)"},
      {"data", "synthetic | csv:PATH"},
      {"out", "output prefix for <out>.csv and <out>.json"},
      {"threads", "worker threads (0: SLIMDP_THREADS or K)"},
  };
  return help;
}

// Registers --<key> for every config key; values land in `values`.
void AddConfigFlags(CLI::App* app, std::map<std::string, std::string>& values,
                    std::optional<std::string>& config_file,
                    const std::vector<std::string>& skip = {}) {
  app->add_option("--config", config_file, "key=value config file");
  for (std::string_view key : slimdp::ConfigKeys()) {
    const std::string name(key);
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    const auto it = FlagHelp().find(name);
    app->add_option("--" + name, values[name],
                    it != FlagHelp().end() ? it->second : "");
  }
}

std::vector<std::pair<std::string, std::string>> CollectOverrides(
    CLI::App* app, const std::map<std::string, std::string>& values) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, value] : values) {
    if (app->count("--" + key) > 0) out.emplace_back(key, value);
  }
  return out;
}

std::optional<std::filesystem::path> AsPath(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::filesystem::path(*s);
}

void PrintSummary(const slimdp::RunOutput& run, const ExperimentConfig& cfg) {
  const auto& s = run.summary;
  std::cout << "method=" << s.method << " n=" << run.param_count
            << " rounds=" << s.rounds << " final_acc=" << s.final_accuracy
            << " push_words=" << s.total_push_words
            << " pull_words=" << s.total_pull_words
            << " sim_comp_s=" << s.sim_comp_s << " sim_comm_s=" << s.sim_comm_s
            << "\nwrote " << cfg.out << ".csv and " << cfg.out << ".json\n";
}

std::vector<double> ParseList(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronous data-parallel training simulator"};
  app.require_subcommand(1);

  std::map<std::string, std::string> train_values;
  std::optional<std::string> train_config;
  CLI::App* train = app.add_subcommand("train", "run one experiment");
  AddConfigFlags(train, train_values, train_config);
  bool print_config = false;
  train->add_flag("--print-config", print_config,
                  "print the normalized config and exit");

  std::string baseline_csv;
  std::vector<std::string> candidate_csvs;
  std::optional<std::string> compare_json;
  CLI::App* compare = app.add_subcommand("compare", "speedups against a baseline run");
  compare->add_option("baseline", baseline_csv, "baseline metrics CSV")->required();
  compare->add_option("candidates", candidate_csvs, "candidate metrics CSVs")
      ->required();
  compare->add_option("--json", compare_json, "also write the table as JSON");

  std::map<std::string, std::string> sweep_values;
  std::optional<std::string> sweep_config;
  std::string alphas = "0.3";
  std::string betas = "0,0.15,0.3";
  bool sweep_baseline = false;
  CLI::App* sweep =
      app.add_subcommand("sweep", "slim runs over the cartesian product of alphas x betas");
  AddConfigFlags(sweep, sweep_values, sweep_config, {"method", "alpha", "beta"});
  sweep->add_option("--alphas", alphas, "comma-separated alpha values");
  sweep->add_option("--betas", betas, "comma-separated beta values");
  sweep->add_flag("--with-baseline", sweep_baseline,
                  "also run plump and report speedups against it");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      ExperimentConfig cfg = slimdp::BuildConfig(
          AsPath(train_config), CollectOverrides(train, train_values));
      if (print_config) {
        std::cout << slimdp::SerializeConfig(cfg);
        return 0;
      }
      const slimdp::RunOutput run = slimdp::RunExperiment(cfg);
      slimdp::WriteRunOutputs(cfg.out, run);
      PrintSummary(run, cfg);
      return 0;
    }

    if (compare->parsed()) {
      const auto base = slimdp::ReadMetricsCsv(std::filesystem::path(baseline_csv));
      std::vector<Comparison> rows;
      rows.push_back(slimdp::CompareRuns(base, base, baseline_csv));
      for (const std::string& path : candidate_csvs) {
        rows.push_back(slimdp::CompareRuns(
            base, slimdp::ReadMetricsCsv(std::filesystem::path(path)), path));
      }
      std::cout << slimdp::FormatComparisonTable(rows);
      if (compare_json) {
        std::ofstream out(*compare_json);
        if (!out) throw std::runtime_error("cannot write " + *compare_json);
        out << slimdp::ComparisonJson(rows) << '\n';
      }
      return 0;
    }

    if (sweep->parsed()) {
      auto overrides = CollectOverrides(sweep, sweep_values);
      ExperimentConfig base_cfg = sweep_config
                                      ? slimdp::LoadConfigFile(*sweep_config)
                                      : ExperimentConfig{};
      for (const auto& [key, value] : overrides) {
        slimdp::ApplyConfigValue(base_cfg, key, value);
      }
      const std::string prefix = base_cfg.out;
      std::vector<Comparison> rows;
      std::optional<std::vector<slimdp::MetricsRow>> baseline;
      if (sweep_baseline) {
        ExperimentConfig cfg = base_cfg;
        cfg.method = slimdp::Method::kPlump;
        cfg.out = prefix + "_plump";
        cfg.Validate();
        const auto run = slimdp::RunExperiment(cfg);
        slimdp::WriteRunOutputs(cfg.out, run);
        baseline = slimdp::ToRows(run.metrics);
        rows.push_back(slimdp::CompareRuns(*baseline, *baseline, "plump"));
      }
      for (double alpha : ParseList(alphas, "--alphas")) {
        for (double beta : ParseList(betas, "--betas")) {
          if (beta > alpha) continue;
          ExperimentConfig cfg = base_cfg;
          cfg.method = slimdp::Method::kSlim;
          cfg.protocol.alpha = alpha;
          cfg.protocol.beta = beta;
          const std::string name = "slim_a" + slimdp::FormatDouble(alpha) + "_b" +
                                   slimdp::FormatDouble(beta);
          cfg.out = prefix + "_" + name;
          cfg.Validate();
          const auto run = slimdp::RunExperiment(cfg);
          slimdp::WriteRunOutputs(cfg.out, run);
          const auto run_rows = slimdp::ToRows(run.metrics);
          rows.push_back(slimdp::CompareRuns(baseline ? *baseline : run_rows,
                                             run_rows, name));
          std::cerr << name << ": final_acc=" << run.summary.final_accuracy << '\n';
        }
      }
      std::cout << slimdp::FormatComparisonTable(rows);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
