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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>
#include <unordered_map>

#include "iqa/csv.hpp"
#include "iqa/error.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/rng.hpp"
#include "iqa/stats.hpp"

namespace iqa::eval {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

SplitAssignment split_by_content(std::span<const std::string> reference_ids, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  for (double v : r)
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::kValidation, "split ratios must be finite and >= 0");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) fail(ErrorCode::kValidation, "split ratios must sum to 1");
  const std::set<std::string> unique(reference_ids.begin(), reference_ids.end());
  if (unique.size() < 3)
    fail(ErrorCode::kValidation, "content split needs at least 3 distinct references, got " +
                                     std::to_string(unique.size()));
  std::vector<std::string> ids(unique.begin(), unique.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));

  const std::size_t n = ids.size();
  std::size_t count[3];
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    count[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r[i] + 1e-9));
    used += count[i];
  }
  for (int i = 0; used < n; i = (i + 1) % 3)
    if (r[i] > 0.0) {
      ++count[i];
      ++used;
    }

  SplitAssignment out;
  std::size_t pos = 0;
  const Split kinds[3] = {Split::kTrain, Split::kVal, Split::kTest};
  for (int i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < count[i]; ++k) out[ids[pos++]] = kinds[i];
  return out;
}

RepeatReport repeat_eval(const std::function<RunResult(std::uint64_t seed)>& run, int repetitions,
                         std::uint64_t base_seed, int workers) {
  if (repetitions < 1) fail(ErrorCode::kValidation, "repetitions must be >= 1");
  RepeatReport report;
  report.runs.resize(static_cast<std::size_t>(repetitions));
  for (int i = 0; i < repetitions; ++i) report.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  std::vector<std::exception_ptr> errors(report.runs.size());
  auto one = [&](std::size_t i) {
    try {
      report.runs[i] = run(report.seeds[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < report.runs.size(); ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < report.runs.size(); i = next++) one(i);
      });
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      fail(e.code(), "run " + std::to_string(i) + " (seed " + std::to_string(report.seeds[i]) + "): " + e.what());
    } catch (const std::exception& e) {
      fail(ErrorCode::kRuntime, "run " + std::to_string(i) + " (seed " + std::to_string(report.seeds[i]) + "): " +
                                    e.what());
    }
  }
  std::vector<double> s, p;
  for (const auto& r : report.runs) {
    s.push_back(r.srocc);
    p.push_back(r.plcc);
  }
  report.median_srocc = stats::median(s);
  report.median_plcc = stats::median(p);
  return report;
}

IccResult icc(const std::vector<std::vector<double>>& ratings) {
  IccResult out;
  double grand = 0.0;
  std::size_t multi = 0;
  for (const auto& item : ratings) {
    if (item.empty()) continue;
    out.items += 1;
    out.ratings += item.size();
    if (item.size() >= 2) ++multi;
    for (double v : item) {
      if (!std::isfinite(v)) fail(ErrorCode::kValidation, "icc: non-finite rating");
      grand += v;
    }
  }
  if (out.items < 2) fail(ErrorCode::kValidation, "icc needs at least two rated items");
  if (multi == 0) fail(ErrorCode::kValidation, "icc needs at least one item with two or more ratings");
  const double n = static_cast<double>(out.items);
  const double total = static_cast<double>(out.ratings);
  grand /= total;
  double ssb = 0.0, ssw = 0.0, sum_k2 = 0.0;
  for (const auto& item : ratings) {
    if (item.empty()) continue;
    const double k = static_cast<double>(item.size());
    const double m = stats::mean(item);
    ssb += k * (m - grand) * (m - grand);
    for (double v : item) ssw += (v - m) * (v - m);
    sum_k2 += k * k;
  }
  out.bms = ssb / (n - 1.0);
  out.wms = ssw / (total - n);
  out.k0 = (total - sum_k2 / total) / (n - 1.0);
  const double denom = out.bms + (out.k0 - 1.0) * out.wms;
  if (!(denom > 0.0)) fail(ErrorCode::kDegenerate, "icc: all ratings are identical");
  out.icc = (out.bms - out.wms) / denom;
  return out;
}

RatingsTable read_ratings_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  if (t.rows.empty()) fail(ErrorCode::kValidation, path.string() + ": no data rows");
  const std::size_t id_col = t.column("image_id");
  const std::size_t r_col = t.column("rating");
  RatingsTable out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const long long v = csv::parse_int(row[r_col], path.string() + " row " + std::to_string(i + 2));
    if (v < 1 || v > 5)
      fail(ErrorCode::kValidation, path.string() + " row " + std::to_string(i + 2) + ": rating " +
                                       std::to_string(v) + " for '" + row[id_col] + "' outside 1..5");
    const auto [it, fresh] = index.emplace(row[id_col], out.image_ids.size());
    if (fresh) {
      out.image_ids.push_back(row[id_col]);
      out.ratings.emplace_back();
    }
    out.ratings[it->second].push_back(static_cast<double>(v));
  }
  return out;
}

BootstrapResult intergroup_bootstrap(const RatingsTable& table, int resamples, std::uint64_t seed) {
  if (resamples < 1) fail(ErrorCode::kValidation, "bootstrap needs at least one resample");
  if (table.ratings.size() != table.image_ids.size())
    fail(ErrorCode::kInvalidArgument, "ratings table: ids and rating lists differ in length");
  if (table.ratings.size() < 2) fail(ErrorCode::kValidation, "bootstrap needs at least two images");
  for (std::size_t i = 0; i < table.ratings.size(); ++i)
    if (table.ratings[i].size() < 2)
      fail(ErrorCode::kValidation, "image '" + table.image_ids[i] + "' has fewer than 2 ratings");

  BootstrapResult out;
  out.resamples = resamples;
  const std::size_t n = table.ratings.size();
  std::vector<double> a(n), b(n);
  for (int r = 0; r < resamples; ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v = table.ratings[i];
      rng.shuffle(std::span<double>(v));
      const std::size_t h = v.size() / 2;
      a[i] = stats::mean(std::span<const double>(v).first(h));
      b[i] = stats::mean(std::span<const double>(v).subspan(h));
    }
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      abs_sum += std::abs(a[i] - b[i]);
      sq_sum += (a[i] - b[i]) * (a[i] - b[i]);
    }
    out.srocc += srocc(a, b);
    out.mae += abs_sum / static_cast<double>(n);
    out.rmse += std::sqrt(sq_sum / static_cast<double>(n));
  }
  out.srocc /= resamples;
  out.mae /= resamples;
  out.rmse /= resamples;
  return out;
}

}  // namespace iqa::eval
