// Copyright 2026 The weakiqa Authors
//
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

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "common.hpp"
#include "iqa/csv.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"

namespace iqa::pipeline {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>("iqa", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::info);
    return l;
  }();
  return *logger;
}

void set_verbosity(int level) {
  log().set_level(level <= 0 ? spdlog::level::err : (level == 1 ? spdlog::level::info : spdlog::level::debug));
}

int default_workers() {
  if (const char* env = std::getenv("IQA_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    log().warn("ignoring IQA_WORKERS='{}' (expected an integer in 1..1024)", env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Config::Config(std::string command, const Json& raw, std::set<std::string> allowed)
    : command_(std::move(command)), raw_(raw.is_null() ? Json::object() : raw) {
  if (!raw_.is_object()) fail(ErrorCode::kValidation, command_ + ": config must be a JSON object");
  allowed.insert({"dry_run", "workers"});
  for (const auto& [key, value] : raw_.items())
    if (!allowed.contains(key)) {
      std::string names;
      for (const auto& a : allowed) names += (names.empty() ? "" : ", ") + a;
      fail(ErrorCode::kValidation, command_ + ": unknown config key '" + key + "' (accepted: " + names + ")");
    }
  resolved_ = raw_;
}

const Json* Config::find(const std::string& key) const {
  const auto it = raw_.find(key);
  return (it == raw_.end() || it->is_null()) ? nullptr : &*it;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

void Config::type_error(const std::string& key, const char* expected) const {
  fail(ErrorCode::kValidation, command_ + ": config key '" + key + "' must be " + expected);
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const Json* v = find(key);
  if (!v) {
    resolved_[key] = fallback;
    return fallback;
  }
  if (!v->is_string()) type_error(key, "a string");
  return v->get<std::string>();
}

std::string Config::required_str(const std::string& key) const {
  const Json* v = find(key);
  if (!v) fail(ErrorCode::kValidation, command_ + ": missing required setting '" + key + "'");
  if (!v->is_string() || v->get<std::string>().empty()) type_error(key, "a non-empty string");
  return v->get<std::string>();
}

fs::path Config::required_path(const std::string& key) const { return fs::path(required_str(key)); }

fs::path Config::input_path(const std::string& key) const {
  const fs::path p = required_path(key);
  if (!fs::exists(p)) fail(ErrorCode::kValidation, command_ + ": input '" + key + "' not found: " + p.string());
  return p;
}

double Config::num(const std::string& key, double fallback) const {
  const Json* v = find(key);
  if (!v) {
    resolved_[key] = fallback;
    return fallback;
  }
  if (!v->is_number()) type_error(key, "a number");
  return v->get<double>();
}

int Config::integer(const std::string& key, int fallback) const {
  const Json* v = find(key);
  if (!v) {
    resolved_[key] = fallback;
    return fallback;
  }
  if (!v->is_number_integer()) type_error(key, "an integer");
  return v->get<int>();
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t fallback) const {
  const Json* v = find(key);
  if (!v) {
    resolved_[key] = fallback;
    return fallback;
  }
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
  type_error(key, "a non-negative integer");
}

bool Config::flag(const std::string& key, bool fallback) const {
  const Json* v = find(key);
  if (!v) {
    resolved_[key] = fallback;
    return fallback;
  }
  if (!v->is_boolean()) type_error(key, "true or false");
  return v->get<bool>();
}

std::vector<std::string> Config::strings(const std::string& key, const std::vector<std::string>& fallback) const {
  const Json* v = find(key);
  if (!v) {
    resolved_[key] = fallback;
    return fallback;
  }
  if (v->is_string()) {
    // comma separated list
    std::vector<std::string> out;
    std::string s = v->get<std::string>(), cur;
    for (char c : s) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    resolved_[key] = out;
    return out;
  }
  if (!v->is_array()) type_error(key, "a list of strings");
  std::vector<std::string> out;
  for (const auto& e : *v) {
    if (e.is_number()) {
      out.push_back(e.dump());
      continue;
    }
    if (!e.is_string()) type_error(key, "a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

int Config::workers() const {
  const Json* v = find("workers");
  // the effective count never changes results, so it is not recorded
  if (!v) return default_workers();
  if (!v->is_number_integer() || v->get<int>() < 1) type_error("workers", "a positive integer");
  resolved_.erase("workers");
  return v->get<int>();
}

std::string fingerprint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_json(const fs::path& path, const Json& doc) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kValidation, path.string() + ": " + e.what());
  }
}

void write_provenance(const fs::path& artifact, const Config& cfg, const std::map<std::string, fs::path>& inputs,
                      const Json& extra) {
  Json meta;
  meta["artifact"] = artifact.filename().string();
  meta["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  meta["command"] = cfg.command();
  meta["seed"] = cfg.resolved().contains("seed") ? cfg.resolved()["seed"] : Json(nullptr);
  meta["config"] = cfg.resolved();
  Json in = Json::object();
  for (const auto& [name, path] : inputs)
    in[name] = {{"path", path.string()}, {"fnv1a64", fs::is_regular_file(path) ? fingerprint(path) : "directory"}};
  meta["inputs"] = in;
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  write_json(fs::path(artifact.string() + ".meta.json"), meta);
}

std::map<std::string, std::string> reference_map(const DatasetManifest& manifest) {
  std::map<std::string, std::string> out;
  for (const auto& r : manifest.records) out[r.image_id] = fs::path(r.ref_path).stem().string();
  return out;
}

eval::SplitRatios ratios_from(const Config& cfg) {
  eval::SplitRatios r;
  const auto parts = cfg.strings("ratios", {"0.6", "0.2", "0.2"});
  if (parts.size() != 3) fail(ErrorCode::kValidation, cfg.command() + ": 'ratios' must be three numbers (train, val, test)");
  r.train = csv::parse_double(parts[0], cfg.command() + ": 'ratios'");
  r.val = csv::parse_double(parts[1], cfg.command() + ": 'ratios'");
  r.test = csv::parse_double(parts[2], cfg.command() + ": 'ratios'");
  cfg.resolved()["ratios"] = {r.train, r.val, r.test};
  return r;
}

void write_splits_csv(const eval::SplitAssignment& splits, const fs::path& path) {
  csv::Table t;
  t.header = {"reference_id", "split"};
  for (const auto& [ref, s] : splits) t.rows.push_back({ref, std::string(eval::to_string(s))});
  ensure_parent(path);
  csv::write(t, path);
}

eval::SplitAssignment read_splits_csv(const fs::path& path) {
  const csv::Table t = csv::read(path);
  const auto rc = t.column("reference_id"), sc = t.column("split");
  eval::SplitAssignment out;
  for (const auto& row : t.rows) {
    eval::Split s;
    if (row[sc] == "train")
      s = eval::Split::kTrain;
    else if (row[sc] == "val")
      s = eval::Split::kVal;
    else if (row[sc] == "test")
      s = eval::Split::kTest;
    else
      fail(ErrorCode::kValidation, path.string() + ": unknown split '" + row[sc] + "' for reference '" + row[rc] + "'");
    if (!out.emplace(row[rc], s).second)
      fail(ErrorCode::kValidation, path.string() + ": reference '" + row[rc] + "' listed twice");
  }
  return out;
}

eval::SplitAssignment load_or_make_splits(const Config& cfg, const DatasetManifest& manifest) {
  if (cfg.has("splits")) return read_splits_csv(cfg.input_path("splits"));
  std::vector<std::string> refs;
  for (const auto& [id, ref] : reference_map(manifest)) refs.push_back(ref);
  return eval::split_by_content(refs, ratios_from(cfg), cfg.seed());
}

LabelledSet join_labels(const FeatureStore& store, const ScoreTable& labels, const std::vector<std::string>& tasks,
                        const std::map<std::string, std::string>& ref_of, const eval::SplitAssignment& splits) {
  LabelledSet set;
  set.tasks = tasks;
  std::vector<std::size_t> cols;
  for (const auto& t : tasks) cols.push_back(labels.metric_index(t));
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    const auto& id = labels.image_ids()[r];
    const auto frow = store.find(id);
    if (!frow) fail(ErrorCode::kValidation, "label id '" + id + "' has no feature vector in the store");
    const auto ref = ref_of.find(id);
    if (ref == ref_of.end()) fail(ErrorCode::kValidation, "label id '" + id + "' is not in the manifest");
    const auto split = splits.find(ref->second);
    if (split == splits.end())
      fail(ErrorCode::kValidation, "reference '" + ref->second + "' of '" + id + "' has no split assignment");
    std::vector<double> y;
    for (auto c : cols) {
      const double v = labels.value(r, c);
      if (!std::isfinite(v))
        fail(ErrorCode::kValidation, "label '" + labels.metrics()[c] + "' of '" + id +
                                         "' is not finite; normalize the scores first");
      y.push_back(v);
    }
    set.ids.push_back(id);
    set.feature_rows.push_back(*frow);
    set.labels.push_back(std::move(y));
    set.split.push_back(split->second);
  }
  return set;
}

std::vector<std::size_t> rows_in(const LabelledSet& set, eval::Split split) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.ids.size(); ++i)
    if (set.split[i] == split) out.push_back(i);
  return out;
}

nn::TrainData make_train_data(const LabelledSet& set, const FeatureStore& store, const FeatureScaler& scaler,
                              std::span<const std::size_t> rows) {
  nn::TrainData d;
  d.x.resize(static_cast<Eigen::Index>(rows.size()), store.dim());
  d.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(set.tasks.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto x = scaler.apply(store.row(set.feature_rows[rows[i]]));
    for (std::size_t j = 0; j < x.size(); ++j) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[j];
    for (std::size_t k = 0; k < set.tasks.size(); ++k)
      d.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = set.labels[rows[i]][k];
  }
  return d;
}

nn::TrainConfig train_config_from(const Config& cfg, nn::LossKind default_loss, double default_lr) {
  nn::TrainConfig c;
  c.loss = nn::loss_from_string(cfg.str("loss", std::string(nn::to_string(default_loss))));
  c.lr = cfg.num("lr", default_lr);
  c.batch_size = cfg.integer("batch_size", 64);
  c.epochs = cfg.integer("epochs", 30);
  c.seed = cfg.seed();
  c.dropout = cfg.flag("dropout", true);
  if (cfg.has("task_weights")) {
    const Json& w = cfg.resolved()["task_weights"];
    if (!w.is_array()) fail(ErrorCode::kValidation, cfg.command() + ": 'task_weights' must be a list of numbers");
    for (const auto& v : w) {
      if (!v.is_number()) fail(ErrorCode::kValidation, cfg.command() + ": 'task_weights' must be a list of numbers");
      c.task_weights.push_back(v.get<double>());
    }
  }
  return c;
}

Json to_json(const nn::TrainConfig& c) {
  Json j;
  j["loss"] = std::string(nn::to_string(c.loss));
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["dropout"] = c.dropout;
  j["task_weights"] = c.task_weights;
  return j;
}

}  // namespace iqa::pipeline
