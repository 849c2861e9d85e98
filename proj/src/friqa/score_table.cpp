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

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <thread>
#include <unordered_map>

#include "iqa/csv.hpp"
#include "iqa/error.hpp"
#include "iqa/friqa.hpp"
#include "json.hpp"

namespace iqa {

namespace fs = std::filesystem;

ScoreTable::ScoreTable(std::vector<std::string> image_ids, std::vector<std::string> metrics,
                       std::vector<Polarity> polarity)
    : ids_(std::move(image_ids)), metrics_(std::move(metrics)), polarity_(std::move(polarity)) {
  require(polarity_.size() == metrics_.size(), "one polarity per metric column is required");
  std::set<std::string> names(metrics_.begin(), metrics_.end());
  if (names.size() != metrics_.size()) fail(ErrorCode::kValidation, "metric names must be unique");
  values_.assign(ids_.size() * metrics_.size(), 0.0);
}

std::size_t ScoreTable::metric_index(const std::string& name) const {
  for (std::size_t i = 0; i < metrics_.size(); ++i)
    if (metrics_[i] == name) return i;
  fail(ErrorCode::kValidation, "score table has no metric column '" + name + "'");
}

std::optional<std::size_t> ScoreTable::row_index(const std::string& image_id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == image_id) return i;
  return std::nullopt;
}

std::vector<double> ScoreTable::column(std::size_t col) const {
  require(col < cols(), "metric column out of range");
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = value(r, col);
  return out;
}

void ScoreTable::add_column(const std::string& name, std::span<const double> values, Polarity polarity) {
  require(values.size() == rows(), "new column length must match the row count");
  for (const auto& m : metrics_)
    if (m == name) fail(ErrorCode::kValidation, "metric column '" + name + "' already exists");
  std::vector<double> next;
  next.reserve(rows() * (cols() + 1));
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) next.push_back(value(r, c));
    next.push_back(values[r]);
  }
  metrics_.push_back(name);
  polarity_.push_back(polarity);
  values_ = std::move(next);
}

ScoreTable ScoreTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  for (auto r : rows) ids.push_back(ids_.at(r));
  ScoreTable out(std::move(ids), metrics_, polarity_);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < cols(); ++c) out.set(i, c, value(rows[i], c));
  return out;
}

ScoreTable ScoreTable::select_metrics(std::span<const std::string> names) const {
  std::vector<std::size_t> cols_idx;
  std::vector<Polarity> pol;
  for (const auto& n : names) {
    cols_idx.push_back(metric_index(n));
    pol.push_back(polarity_[cols_idx.back()]);
  }
  ScoreTable out(ids_, std::vector<std::string>(names.begin(), names.end()), pol);
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t c = 0; c < cols_idx.size(); ++c) out.set(r, c, value(r, cols_idx[c]));
  return out;
}

void write_score_csv(const ScoreTable& table, const fs::path& path) {
  csv::Table t;
  t.header.push_back("image_id");
  for (const auto& m : table.metrics()) t.header.push_back(m);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::vector<std::string> row{table.image_ids()[r]};
    for (std::size_t c = 0; c < table.cols(); ++c) row.push_back(csv::format_double(table.value(r, c)));
    t.rows.push_back(std::move(row));
  }
  csv::write(t, path);
}

namespace {

struct ParsedScores {
  std::vector<std::string> ids;
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> rows;
};

ParsedScores parse_scores(const fs::path& path) {
  const csv::Table t = csv::read(path);
  if (t.header.empty() || t.rows.empty()) fail(ErrorCode::kValidation, path.string() + ": no data rows");
  const std::size_t id_col = t.column("image_id");
  ParsedScores out;
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (c != id_col) out.metrics.push_back(t.header[c]);
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (!seen.insert(row[id_col]).second)
      fail(ErrorCode::kValidation, path.string() + ": duplicate image_id '" + row[id_col] + "'");
    out.ids.push_back(row[id_col]);
    std::vector<double> vals;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (c == id_col) continue;
      const double v = csv::parse_double(row[c], path.string() + " id '" + row[id_col] + "' column '" + t.header[c] + "'");
      if (std::isnan(v))
        fail(ErrorCode::kValidation, path.string() + ": NaN for id '" + row[id_col] + "' column '" + t.header[c] + "'");
      vals.push_back(v);
    }
    out.rows.push_back(std::move(vals));
  }
  return out;
}

Polarity lookup_polarity(const std::map<std::string, Polarity>& polarity, const std::string& name) {
  if (const auto it = polarity.find(name); it != polarity.end()) return it->second;
  return is_builtin_metric(name) ? builtin_polarity(name) : Polarity::kHigherBetter;
}

}  // namespace

ScoreTable read_score_csv(const fs::path& path, const std::map<std::string, Polarity>& polarity) {
  ParsedScores p = parse_scores(path);
  std::vector<Polarity> pol;
  for (const auto& m : p.metrics) pol.push_back(lookup_polarity(polarity, m));
  ScoreTable table(std::move(p.ids), p.metrics, std::move(pol));
  for (std::size_t r = 0; r < p.rows.size(); ++r)
    for (std::size_t c = 0; c < p.metrics.size(); ++c) table.set(r, c, p.rows[r][c]);
  return table;
}

void write_polarity_json(const ScoreTable& table, const fs::path& path) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < table.cols(); ++c) doc[table.metrics()[c]] = to_string(table.polarity()[c]);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::map<std::string, Polarity> read_polarity_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kValidation, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kValidation, path.string() + ": polarity sidecar must be an object");
  std::map<std::string, Polarity> out;
  for (const auto& [k, v] : doc.items()) {
    if (!v.is_string()) fail(ErrorCode::kValidation, path.string() + ": polarity of '" + k + "' must be a string");
    out[k] = polarity_from_string(v.get<std::string>());
  }
  return out;
}

ScoreReport score_dataset(const DatasetManifest& manifest, std::span<const std::string> metrics,
                          const ScoreOptions& options) {
  if (metrics.empty()) fail(ErrorCode::kInvalidArgument, "score_dataset needs at least one metric");
  for (const auto& m : metrics)
    if (!is_builtin_metric(m))
      fail(ErrorCode::kInvalidArgument, "unknown built-in metric '" + m + "'; external metrics are ingested from CSV");
  auto resolve = [](const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_relative() && !base.empty()) ? base / path : path;
  };

  struct Row {
    bool ok = false;
    std::string error;
    std::vector<double> values;
  };
  std::vector<Row> rows(manifest.records.size());
  // records sharing a reference are scored together so it is decoded once
  std::vector<std::vector<std::size_t>> groups;
  {
    std::map<std::string, std::size_t> group_of;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      const auto [it, fresh] = group_of.emplace(manifest.records[i].ref_path, groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  }
  auto process = [&](const std::vector<std::size_t>& group) {
    std::optional<ImageBuffer> ref;
    std::string ref_error;
    try {
      ref = read_image(resolve(options.ref_dir, manifest.records[group.front()].ref_path));
    } catch (const std::exception& e) {
      ref_error = e.what();
    }
    for (std::size_t i : group) {
      Row& row = rows[i];
      if (!ref) {
        row.error = ref_error;
        continue;
      }
      try {
        const ImageBuffer dist = read_image(resolve(options.dist_dir, manifest.records[i].dist_path));
        for (const auto& m : metrics) row.values.push_back(compute_metric(m, *ref, dist));
        row.ok = true;
      } catch (const std::exception& e) {
        row.values.clear();
        row.error = e.what();
      }
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (const auto& g : groups) process(g);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < groups.size(); i = next++) process(groups[i]);
      });
  }

  ScoreReport report;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].ok)
      ids.push_back(manifest.records[i].image_id);
    else
      report.excluded.push_back({manifest.records[i].image_id, rows[i].error});
  }
  std::vector<Polarity> pol;
  for (const auto& m : metrics) pol.push_back(builtin_polarity(m));
  report.table = ScoreTable(std::move(ids), std::vector<std::string>(metrics.begin(), metrics.end()), std::move(pol));
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (!row.ok) continue;
    for (std::size_t c = 0; c < row.values.size(); ++c) report.table.set(r, c, row.values[c]);
    ++r;
  }
  return report;
}

IngestReport ingest_external_scores(const fs::path& csv_path, const ScoreTable& table, bool allow_partial,
                                    const std::map<std::string, Polarity>& polarity) {
  const ParsedScores ext = parse_scores(csv_path);
  if (ext.metrics.empty()) fail(ErrorCode::kValidation, csv_path.string() + ": no metric columns besides image_id");
  for (const auto& m : ext.metrics)
    for (const auto& existing : table.metrics())
      if (m == existing) fail(ErrorCode::kValidation, "metric column '" + m + "' already exists in the score table");

  std::unordered_map<std::string, std::size_t> ext_row;
  for (std::size_t i = 0; i < ext.ids.size(); ++i) ext_row.emplace(ext.ids[i], i);
  IngestReport report;
  std::vector<std::size_t> keep;
  std::set<std::string> table_ids;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto& id = table.image_ids()[r];
    table_ids.insert(id);
    if (ext_row.contains(id))
      keep.push_back(r);
    else
      report.missing_in_csv.push_back(id);
  }
  for (const auto& id : ext.ids)
    if (!table_ids.contains(id)) report.missing_in_table.push_back(id);

  if (!allow_partial && (!report.missing_in_csv.empty() || !report.missing_in_table.empty())) {
    std::string msg = csv_path.string() + ": ids do not join 1:1 with the score table";
    if (!report.missing_in_csv.empty())
      msg += "; missing from CSV: '" + report.missing_in_csv.front() + "'" +
             (report.missing_in_csv.size() > 1 ? " and " + std::to_string(report.missing_in_csv.size() - 1) + " more"
                                                : "");
    if (!report.missing_in_table.empty())
      msg += "; not in table: '" + report.missing_in_table.front() + "'" +
             (report.missing_in_table.size() > 1
                  ? " and " + std::to_string(report.missing_in_table.size() - 1) + " more"
                  : "");
    fail(ErrorCode::kValidation, msg + " (use --allow-partial for an inner join)");
  }

  report.table = table.select_rows(keep);
  for (std::size_t c = 0; c < ext.metrics.size(); ++c) {
    std::vector<double> col;
    for (auto r : keep) col.push_back(ext.rows[ext_row.at(table.image_ids()[r])][c]);
    report.table.add_column(ext.metrics[c], col, lookup_polarity(polarity, ext.metrics[c]));
  }
  return report;
}

}  // namespace iqa
