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

#include "slimdp/experiment.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace slimdp {

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, ptr);
}

namespace {

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  throw std::invalid_argument(std::string(key) + ": invalid value '" +
                              std::string(value) + "' (expected " +
                              std::string(expected) + ")");
}

double ToDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() ||
      !std::isfinite(out)) {
    BadValue(key, v, "a number");
  }
  return out;
}

template <typename Int>
Int ToInt(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    BadValue(key, v, "an integer");
  }
  return out;
}

bool ToBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  BadValue(key, v, "true or false");
}

std::vector<int> ToIntList(std::string_view key, std::string_view v) {
  std::vector<int> out;
  if (v.empty() || v == "none") return out;
  size_t start = 0;
  while (true) {
    const size_t comma = v.find(',', start);
    out.push_back(ToInt<int>(key, v.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string JoinInts(const std::vector<int>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

struct KeySpec {
  std::string_view key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  // Empty result: key omitted from the canonical text.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

#define SLIMDP_DOUBLE_KEY(name, field)                                      \
  KeySpec {                                                                 \
    name, [](ExperimentConfig& c, std::string_view v) {                     \
      c.field = ToDouble(name, v);                                          \
    },                                                                      \
        [](const ExperimentConfig& c) -> std::optional<std::string> {       \
          return FormatDouble(c.field);                                     \
        }                                                                   \
  }

#define SLIMDP_INT_KEY(name, field, type)                                   \
  KeySpec {                                                                 \
    name, [](ExperimentConfig& c, std::string_view v) {                     \
      c.field = ToInt<type>(name, v);                                       \
    },                                                                      \
        [](const ExperimentConfig& c) -> std::optional<std::string> {       \
          return std::to_string(c.field);                                   \
        }                                                                   \
  }

const std::vector<KeySpec>& Keys() {
  static const std::vector<KeySpec> keys = {
      {"method",
       [](ExperimentConfig& c, std::string_view v) {
         c.method = ParseMethod(v);
         if (!c.method) BadValue("method", v, "one of {plump, quant, slim}");
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.method) return std::nullopt;
         return MethodName(*c.method);
       }},
      SLIMDP_DOUBLE_KEY("alpha", protocol.alpha),
      SLIMDP_DOUBLE_KEY("beta", protocol.beta),
      SLIMDP_INT_KEY("p", protocol.p, int),
      SLIMDP_INT_KEY("q", protocol.q, int),
      SLIMDP_INT_KEY("workers", protocol.workers, int),
      SLIMDP_INT_KEY("seed", protocol.seed, uint64_t),
      SLIMDP_INT_KEY("batch", protocol.batch_size, size_t),
      SLIMDP_DOUBLE_KEY("lr", protocol.lr),
      SLIMDP_DOUBLE_KEY("lr-decay", protocol.lr_decay),
      SLIMDP_INT_KEY("lr-decay-every", protocol.lr_decay_every, int),
      SLIMDP_DOUBLE_KEY("eta-prime", protocol.eta_prime),
      {"aggregation",
       [](ExperimentConfig& c, std::string_view v) {
         const auto agg = ParseAggregation(v);
         if (!agg) BadValue("aggregation", v, "mean or sum");
         c.protocol.aggregation = *agg;
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return AggregationName(c.protocol.aggregation);
       }},
      {"full-pull-on-full-push",
       [](ExperimentConfig& c, std::string_view v) {
         c.protocol.full_pull_on_full_push = ToBool("full-pull-on-full-push", v);
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return c.protocol.full_pull_on_full_push ? "true" : "false";
       }},
      {"sig-c",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "auto") {
           c.protocol.significance.fixed_c.reset();
         } else {
           c.protocol.significance.fixed_c = ToDouble("sig-c", v);
         }
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         const auto& fixed = c.protocol.significance.fixed_c;
         return fixed ? FormatDouble(*fixed) : "auto";
       }},
      SLIMDP_DOUBLE_KEY("sig-epsilon", protocol.significance.epsilon),
      {"quant-bits",
       [](ExperimentConfig& c, std::string_view v) {
         c.protocol.quant.bits = ToInt<int>("quant-bits", v);
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return std::to_string(c.protocol.quant.bits);
       }},
      SLIMDP_INT_KEY("quant-bucket", protocol.quant.bucket, uint32_t),
      {"hidden",
       [](ExperimentConfig& c, std::string_view v) {
         c.hidden = ToIntList("hidden", v);
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return JoinInts(c.hidden);
       }},
      {"data",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "synthetic") {
           c.data.kind = DataSource::Kind::kSynthetic;
           c.data.csv_path.clear();
         } else if (v.substr(0, 4) == "csv:" && v.size() > 4) {
           c.data.kind = DataSource::Kind::kCsv;
           c.data.csv_path = std::string(v.substr(4));
         } else {
           BadValue("data", v, "synthetic or csv:PATH");
         }
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (c.data.kind == DataSource::Kind::kSynthetic) return "synthetic";
         return "csv:" + c.data.csv_path;
       }},
      SLIMDP_INT_KEY("synth-dim", data.synthetic.dim, int),
      SLIMDP_INT_KEY("synth-classes", data.synthetic.classes, int),
      SLIMDP_INT_KEY("synth-samples", data.synthetic.samples, size_t),
      SLIMDP_INT_KEY("synth-test", data.synthetic_test, size_t),
      SLIMDP_DOUBLE_KEY("synth-noise", data.synthetic.noise),
      SLIMDP_INT_KEY("synth-teacher-hidden", data.synthetic.teacher_hidden, int),
      {"synth-seed",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "auto") {
           c.data.synthetic_seed.reset();
         } else {
           c.data.synthetic_seed = ToInt<uint64_t>("synth-seed", v);
         }
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return c.data.synthetic_seed ? std::to_string(*c.data.synthetic_seed)
                                      : "auto";
       }},
      SLIMDP_DOUBLE_KEY("test-fraction", data.csv_test_fraction),
      SLIMDP_INT_KEY("rounds", rounds, int),
      SLIMDP_INT_KEY("eval-every", eval_every, int),
      SLIMDP_DOUBLE_KEY("latency", cost.latency_s),
      SLIMDP_DOUBLE_KEY("bandwidth", cost.bandwidth_bytes_per_s),
      SLIMDP_DOUBLE_KEY("compute-s", cost.compute_s),
      {"target-acc",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "none") {
           c.target_accuracy.reset();
         } else {
           c.target_accuracy = ToDouble("target-acc", v);
         }
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return c.target_accuracy ? FormatDouble(*c.target_accuracy) : "none";
       }},
      {"out", [](ExperimentConfig& c, std::string_view v) { c.out = v; },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return c.out;
       }},
      SLIMDP_INT_KEY("threads", threads, int),
  };
  return keys;
}

#undef SLIMDP_DOUBLE_KEY
#undef SLIMDP_INT_KEY

std::string_view TrimView(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

void ExperimentConfig::Validate() {
  if (!method) {
    throw std::invalid_argument(
        "method: missing (choose one of {plump, quant, slim})");
  }
  protocol.method = *method;
  protocol.Validate();
  cost.Validate();
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("eval-every must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden: layer sizes must be >= 1");
  }
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
  if (target_accuracy && !(*target_accuracy >= 0.0 && *target_accuracy <= 1.0)) {
    throw std::invalid_argument("target-acc must lie in [0, 1]");
  }
  if (out.empty()) throw std::invalid_argument("out must not be empty");
  if (data.kind == DataSource::Kind::kSynthetic) {
    const SyntheticSpec& s = data.synthetic;
    if (s.dim < 1) throw std::invalid_argument("synth-dim must be >= 1");
    if (s.classes < 2) throw std::invalid_argument("synth-classes must be >= 2");
    if (s.samples < static_cast<size_t>(s.classes)) {
      throw std::invalid_argument("synth-samples must be >= synth-classes");
    }
    if (!(s.noise >= 0.0 && s.noise <= 1.0)) {
      throw std::invalid_argument("synth-noise must lie in [0, 1]");
    }
    if (s.teacher_hidden < 0) {
      throw std::invalid_argument("synth-teacher-hidden must be >= 0");
    }
    if (data.synthetic_test < 1) throw std::invalid_argument("synth-test must be >= 1");
  } else if (!(data.csv_test_fraction > 0.0 && data.csv_test_fraction < 1.0)) {
    throw std::invalid_argument("test-fraction must lie in (0, 1)");
  }
}

std::vector<std::string_view> ConfigKeys() {
  std::vector<std::string_view> out;
  for (const KeySpec& spec : Keys()) out.push_back(spec.key);
  return out;
}

void ApplyConfigValue(ExperimentConfig& cfg, std::string_view key,
                      std::string_view value) {
  for (const KeySpec& spec : Keys()) {
    if (spec.key == key) {
      spec.set(cfg, value);
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

ExperimentConfig ParseConfigText(std::string_view text) {
  ExperimentConfig cfg;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = TrimView(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    try {
      ApplyConfigValue(cfg, TrimView(line.substr(0, eq)),
                       TrimView(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig LoadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseConfigText(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string SerializeConfig(const ExperimentConfig& cfg) {
  std::string out;
  for (const KeySpec& spec : Keys()) {
    if (const auto value = spec.get(cfg)) {
      out.append(spec.key).append("=").append(*value).append("\n");
    }
  }
  return out;
}

ExperimentConfig BuildConfig(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg = file ? LoadConfigFile(*file) : ExperimentConfig{};
  for (const auto& [key, value] : overrides) ApplyConfigValue(cfg, key, value);
  cfg.Validate();
  return cfg;
}

LoadedData LoadData(const ExperimentConfig& cfg) {
  if (cfg.data.kind == DataSource::Kind::kSynthetic) {
    SyntheticSpec spec = cfg.data.synthetic;
    spec.teacher_seed = cfg.data.synthetic_seed.value_or(cfg.protocol.seed);
    const size_t train_rows = spec.samples;
    spec.samples += cfg.data.synthetic_test;
    const Dataset all = GenSynthetic(spec);
    std::vector<size_t> train_idx(train_rows);
    std::vector<size_t> test_idx(cfg.data.synthetic_test);
    for (size_t i = 0; i < train_rows; ++i) train_idx[i] = i;
    for (size_t i = 0; i < test_idx.size(); ++i) test_idx[i] = train_rows + i;
    return {all.Subset(train_idx), all.Subset(test_idx)};
  }
  const Dataset all = LoadCsv(cfg.data.csv_path);
  const auto test_rows = static_cast<size_t>(std::max(
      1.0, std::floor(cfg.data.csv_test_fraction * all.size() + 0.5)));
  auto [train, test] = SplitHoldout(all, test_rows, cfg.protocol.seed);
  return {std::move(train), std::move(test)};
}

ModelSpec BuildModelSpec(const ExperimentConfig& cfg, const Dataset& train) {
  ModelSpec spec;
  spec.layer_sizes.push_back(static_cast<int>(train.dim));
  spec.layer_sizes.insert(spec.layer_sizes.end(), cfg.hidden.begin(),
                          cfg.hidden.end());
  spec.layer_sizes.push_back(train.class_count);
  spec.seed = cfg.protocol.seed;
  return spec;
}

RunSummary Summarize(const std::vector<RoundMetrics>& metrics, Method method,
                     std::optional<double> target_accuracy) {
  RunSummary s;
  s.method = MethodName(method);
  s.target_accuracy = target_accuracy;
  for (const RoundMetrics& m : metrics) {
    s.rounds = m.round;
    s.samples += m.samples;
    s.total_push_words += m.push_words;
    s.total_pull_words += m.pull_words;
    s.sim_comp_s += m.sim_comp_s;
    s.sim_comm_s += m.sim_comm_s;
    if (m.evaluated) {
      s.final_accuracy = m.test_accuracy;
      s.final_test_loss = m.test_loss;
      if (target_accuracy && !s.rounds_to_target &&
          m.test_accuracy >= *target_accuracy) {
        s.rounds_to_target = m.round;
      }
    }
  }
  return s;
}

RunOutput RunExperiment(const ExperimentConfig& input) {
  ExperimentConfig cfg = input;
  cfg.Validate();
  const LoadedData data = LoadData(cfg);
  const ModelSpec spec = BuildModelSpec(cfg, data.train);
  SimulationOptions opts;
  opts.rounds = cfg.rounds;
  opts.eval_every = cfg.eval_every;
  opts.cost = cfg.cost;
  opts.threads = cfg.threads;
  RunOutput run;
  run.param_count = ParamCount(spec);
  run.metrics = RunSimulation(cfg.protocol, spec, data.train, data.test, opts);
  run.summary = Summarize(run.metrics, cfg.protocol.method, cfg.target_accuracy);
  return run;
}

std::vector<MetricsRow> ToRows(const std::vector<RoundMetrics>& metrics) {
  std::vector<MetricsRow> rows;
  MetricsRow acc;
  for (const RoundMetrics& m : metrics) {
    acc.samples += m.samples;
    acc.push_words += m.push_words;
    acc.pull_words += m.pull_words;
    acc.sim_comp_s += m.sim_comp_s;
    acc.sim_comm_s += m.sim_comm_s;
    acc.wall_s += m.wall_s;
    if (!m.evaluated) continue;
    MetricsRow row = acc;
    row.round = m.round;
    row.train_loss = m.train_loss;
    row.test_loss = m.test_loss;
    row.test_acc = m.test_accuracy;
    rows.push_back(row);
  }
  return rows;
}

void WriteMetricsCsv(std::ostream& out, const std::vector<RoundMetrics>& metrics) {
  out << kMetricsCsvHeader << '\n';
  for (const MetricsRow& r : ToRows(metrics)) {
    out << r.round << ',' << r.samples << ',' << FormatDouble(r.train_loss) << ','
        << FormatDouble(r.test_loss) << ',' << FormatDouble(r.test_acc) << ','
        << r.push_words << ',' << r.pull_words << ',' << FormatDouble(r.sim_comp_s)
        << ',' << FormatDouble(r.sim_comm_s) << ',' << FormatDouble(r.wall_s)
        << '\n';
  }
}

namespace {

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string SummaryJson(const RunSummary& s) {
  nlohmann::json j;
  j["method"] = s.method;
  j["final_accuracy"] = s.final_accuracy;
  j["final_test_loss"] = s.final_test_loss;
  j["rounds"] = s.rounds;
  j["samples"] = s.samples;
  j["total_push_words"] = s.total_push_words;
  j["total_pull_words"] = s.total_pull_words;
  j["sim_comp_s"] = s.sim_comp_s;
  j["sim_comm_s"] = s.sim_comm_s;
  j["sim_total_s"] = s.sim_comp_s + s.sim_comm_s;
  j["target_accuracy"] = OptionalJson(s.target_accuracy);
  j["rounds_to_target"] = s.rounds_to_target ? nlohmann::json(*s.rounds_to_target)
                                             : nlohmann::json(nullptr);
  j["speed_d"] = OptionalJson(s.speed_d);
  j["speed_a"] = OptionalJson(s.speed_a);
  return j.dump(2);
}

void WriteRunOutputs(const std::string& out_prefix, const RunOutput& run) {
  const std::filesystem::path csv_path = out_prefix + ".csv";
  const std::filesystem::path json_path = out_prefix + ".json";
  if (csv_path.has_parent_path()) {
    std::filesystem::create_directories(csv_path.parent_path());
  }
  {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    WriteMetricsCsv(csv, run.metrics);
    if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
  }
  std::ofstream json(json_path);
  if (!json) throw std::runtime_error("cannot write " + json_path.string());
  json << SummaryJson(run.summary) << '\n';
  if (!json) throw std::runtime_error("write failed: " + json_path.string());
}

std::vector<MetricsRow> ReadMetricsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("metrics csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsCsvHeader) {
    throw std::runtime_error("metrics csv schema mismatch: header '" + line + "'");
  }
  std::vector<MetricsRow> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const size_t comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 10) {
      throw std::runtime_error("metrics csv schema mismatch at line " +
                               std::to_string(line_no));
    }
    const std::string where = "metrics csv line " + std::to_string(line_no);
    try {
      MetricsRow r;
      r.round = ToInt<uint32_t>("round", cells[0]);
      r.samples = ToInt<uint64_t>("samples", cells[1]);
      r.train_loss = ToDouble("train_loss", cells[2]);
      r.test_loss = ToDouble("test_loss", cells[3]);
      r.test_acc = ToDouble("test_acc", cells[4]);
      r.push_words = ToInt<uint64_t>("push_words", cells[5]);
      r.pull_words = ToInt<uint64_t>("pull_words", cells[6]);
      r.sim_comp_s = ToDouble("sim_comp_s", cells[7]);
      r.sim_comm_s = ToDouble("sim_comm_s", cells[8]);
      r.wall_s = ToDouble("wall_s", cells[9]);
      rows.push_back(r);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  if (rows.empty()) throw std::runtime_error("metrics csv has no rows");
  return rows;
}

std::vector<MetricsRow> ReadMetricsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return ReadMetricsCsv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace {

std::optional<double> TimeToAccuracy(const std::vector<MetricsRow>& rows,
                                     double target) {
  for (const MetricsRow& r : rows) {
    if (r.test_acc >= target) return r.sim_total_s();
  }
  return std::nullopt;
}

}  // namespace

Comparison CompareRuns(const std::vector<MetricsRow>& baseline,
                       const std::vector<MetricsRow>& candidate,
                       std::string name) {
  if (baseline.empty() || candidate.empty()) {
    throw std::invalid_argument("cannot compare empty runs");
  }
  const MetricsRow& base = baseline.back();
  const MetricsRow& cand = candidate.back();
  if (base.samples == 0 || cand.samples == 0 || cand.sim_total_s() <= 0.0) {
    throw std::invalid_argument("runs must process samples in positive time");
  }
  Comparison c;
  c.name = std::move(name);
  c.final_accuracy = cand.test_acc;
  const double base_rate = base.sim_total_s() / static_cast<double>(base.samples);
  const double cand_rate = cand.sim_total_s() / static_cast<double>(cand.samples);
  c.speed_d = base_rate / cand_rate;
  const double target = base.test_acc;
  const auto base_time = TimeToAccuracy(baseline, target);
  const auto cand_time = TimeToAccuracy(candidate, target);
  if (base_time && cand_time && *cand_time > 0.0) {
    c.speed_a = *base_time / *cand_time;
  }
  c.comm_time_saving =
      base.sim_comm_s > 0.0 ? 1.0 - cand.sim_comm_s / base.sim_comm_s : 0.0;
  const double base_words = static_cast<double>(base.push_words + base.pull_words);
  const double cand_words = static_cast<double>(cand.push_words + cand.pull_words);
  c.word_saving = base_words > 0.0 ? 1.0 - cand_words / base_words : 0.0;
  return c;
}

std::string FormatComparisonTable(const std::vector<Comparison>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "run" << std::right << std::setw(10)
      << "final_acc" << std::setw(10) << "speed_d" << std::setw(10) << "speed_a"
      << std::setw(12) << "comm_save" << std::setw(12) << "word_save" << '\n';
  out << std::fixed;
  for (const Comparison& c : rows) {
    out << std::left << std::setw(28) << c.name << std::right << std::setprecision(4)
        << std::setw(10) << c.final_accuracy << std::setw(10) << c.speed_d;
    if (c.speed_a) {
      out << std::setw(10) << *c.speed_a;
    } else {
      out << std::setw(10) << "-";
    }
    out << std::setprecision(2) << std::setw(11) << 100.0 * c.comm_time_saving
        << '%' << std::setw(11) << 100.0 * c.word_saving << "%\n";
  }
  return out.str();
}

std::string ComparisonJson(const std::vector<Comparison>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const Comparison& c : rows) {
    j.push_back({{"run", c.name},
                 {"final_accuracy", c.final_accuracy},
                 {"speed_d", c.speed_d},
                 {"speed_a", OptionalJson(c.speed_a)},
                 {"comm_time_saving", c.comm_time_saving},
                 {"word_saving", c.word_saving}});
  }
  return j.dump(2);
}

}  // namespace slimdp
