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
#include <fstream>
#include <iterator>
#include <set>
#include <cmath>
#include <thread>

#include "common.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"
#include "iqa/scorepipe.hpp"
#include "iqa/stats.hpp"
#include "stages.hpp"

namespace iqa::pipeline {

namespace {

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kValidation, "reference directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path sidecar(const fs::path& p, const std::string& suffix) {
  fs::path s = p;
  s.replace_extension(suffix);
  return s;
}

std::string rel(const fs::path& target, const fs::path& base) {
  const fs::path r = fs::absolute(target).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal());
  return r.empty() ? target.string() : r.generic_string();
}

fs::path base_of(const fs::path& manifest_path) {
  return manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
}

std::map<std::string, Polarity> polarity_for(const fs::path& scores) {
  const fs::path p = sidecar(scores, ".polarity.json");
  return fs::exists(p) ? read_polarity_json(p) : std::map<std::string, Polarity>{};
}

Json param_table_json(const DistortionParamTable& table) { return Json::parse(table.to_json().dump()); }

}  // namespace

ScoreTable load_scores(const fs::path& path) { return read_score_csv(path, polarity_for(path)); }

void save_scores(const ScoreTable& table, const fs::path& path) {
  ensure_parent(path);
  write_score_csv(table, path);
  write_polarity_json(table, sidecar(path, ".polarity.json"));
}

CommandResult cmd_synth(const Json& raw) {
  Config cfg("synth", raw, {"out", "count", "width", "height", "seed", "prefix"});
  const fs::path out = cfg.required_path("out");
  const int count = cfg.integer("count", 10);
  const int width = cfg.integer("width", kTargetWidth);
  const int height = cfg.integer("height", kTargetHeight);
  const std::uint64_t seed = cfg.seed();
  const std::string prefix = cfg.str("prefix", "ref");
  if (count < 1 || count > 9999) fail(ErrorCode::kValidation, "synth: 'count' must be in 1..9999");
  std::vector<std::string> ids;
  for (int i = 1; i <= count; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", i);
    ids.push_back(prefix + buf);
  }
  CommandResult res;
  res.body["out"] = out.string();
  res.body["ids"] = ids;
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    return res;
  }
  fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    const ImageBuffer img = synthetic_reference(width, height, mix_seed(seed, static_cast<std::uint64_t>(i)));
    write_png(img, out / (ids[static_cast<std::size_t>(i)] + ".png"));
  }
  write_provenance(out / "references", cfg, {}, {{"ids", ids}});
  log().info("synth: wrote {} references to {}", count, out.string());
  res.body["written"] = count;
  return res;
}

CommandResult cmd_distort(const Json& raw) {
  Config cfg("distort", raw, {"refs", "out", "plan", "seed", "manifest", "params", "skip_existing", "preprocess"});
  const fs::path refs = cfg.input_path("refs");
  const fs::path out = cfg.required_path("out");
  const std::string plan = cfg.str("plan", "kadid");
  const std::uint64_t seed = cfg.seed();
  const fs::path manifest_path = cfg.str("manifest", (out / "manifest.csv").string());
  const bool skip_existing = cfg.flag("skip_existing", false);
  const bool preprocess = cfg.flag("preprocess", true);
  const int workers = cfg.workers();
  DistortionParamTable table = DistortionParamTable::defaults();
  std::map<std::string, fs::path> inputs{{"refs", refs}};
  if (cfg.has("params")) {
    const fs::path p = cfg.input_path("params");
    std::ifstream in(p);
    table = DistortionParamTable::from_json(std::string(std::istreambuf_iterator<char>(in), {}));
    inputs["params"] = p;
  }
  table.validate();

  const auto files = list_images(refs);
  if (files.empty()) fail(ErrorCode::kValidation, "distort: no PNG or JPEG references in " + refs.string());
  std::vector<std::string> ids;
  std::map<std::string, fs::path> file_of;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    if (!file_of.emplace(id, f).second)
      fail(ErrorCode::kValidation, "distort: two reference files share the id '" + id + "'");
    ids.push_back(id);
  }
  DatasetManifest manifest;
  if (plan == "kadid")
    manifest = generate_kadid_plan(ids, {}, table);
  else if (plan == "kadis")
    manifest = generate_kadis_plan(ids, seed, {}, table);
  else
    fail(ErrorCode::kValidation, "distort: unknown plan '" + plan + "' (expected kadid or kadis)");
  const fs::path base = base_of(manifest_path);
  for (auto& r : manifest.records) {
    r.ref_path = rel(file_of.at(fs::path(r.ref_path).stem().string()), base);
    r.dist_path = rel(out / fs::path(r.dist_path).filename(), base);
  }
  manifest.validate();

  CommandResult res;
  res.body["plan"] = plan;
  res.body["references"] = ids.size();
  res.body["records"] = manifest.size();
  res.body["manifest"] = manifest_path.string();
  res.body["out"] = out.string();
  if (cfg.dry_run()) {
    Json first = Json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, manifest.size()); ++i)
      first.push_back(manifest.records[i].image_id);
    res.body["dry_run"] = true;
    res.body["first_ids"] = first;
    return res;
  }
  fs::create_directories(out);
  ensure_parent(manifest_path);
  RunOptions opt;
  opt.ref_dir = base;
  opt.out_dir = base;
  opt.workers = workers;
  opt.skip_existing = skip_existing;
  opt.preprocess = preprocess;
  opt.table = table;
  log().info("distort: {} records from {} references ({} workers)", manifest.size(), ids.size(), workers);
  const CompletionReport report = run_manifest(manifest, opt);
  write_manifest_csv(manifest, manifest_path);
  Json failures = Json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"image_id", f.image_id}, {"message", f.message}});
    log().error("distort: {}: {}", f.image_id, f.message);
  }
  for (const auto& w : report.warnings) log().warn("distort: {}", w);
  write_provenance(manifest_path, cfg, inputs,
                   {{"distortion_params", param_table_json(table)},
                    {"records", manifest.size()},
                    {"warnings", report.warnings},
                    {"failures", failures}});
  res.body["written"] = report.written;
  res.body["skipped"] = report.skipped;
  res.body["warnings"] = report.warnings;
  res.body["failures"] = failures;
  if (!report.ok()) {
    res.failure = ErrorCode::kRuntime;
    res.message = std::to_string(report.failures.size()) + " records could not be produced";
  }
  return res;
}

CommandResult cmd_score(const Json& raw) {
  Config cfg("score", raw, {"manifest", "out", "metrics", "external", "allow_partial"});
  const fs::path manifest_path = cfg.input_path("manifest");
  const fs::path out = cfg.required_path("out");
  std::vector<std::string> metrics =
      cfg.strings("metrics", std::vector<std::string>(kBuiltinMetrics.begin(), kBuiltinMetrics.end()));
  const std::vector<std::string> external = cfg.strings("external", {});
  const bool allow_partial = cfg.flag("allow_partial", false);
  const int workers = cfg.workers();
  for (const auto& m : metrics)
    if (!is_builtin_metric(m))
      fail(ErrorCode::kValidation, "score: unknown built-in metric '" + m + "' (built-ins: PSNR, SSIM, MSSSIM, GMSD; "
                                   "other metrics are added with 'external')");
  for (const auto& e : external)
    if (!fs::exists(e)) fail(ErrorCode::kValidation, "score: external score file not found: " + e);
  const DatasetManifest manifest = read_manifest_csv(manifest_path);
  manifest.validate();

  CommandResult res;
  res.body["records"] = manifest.size();
  res.body["metrics"] = metrics;
  res.body["out"] = out.string();
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    res.body["external"] = external;
    return res;
  }
  ScoreOptions opt;
  opt.ref_dir = base_of(manifest_path);
  opt.dist_dir = opt.ref_dir;
  opt.workers = workers;
  log().info("score: {} records x {} metrics ({} workers)", manifest.size(), metrics.size(), workers);
  ScoreReport report = score_dataset(manifest, metrics, opt);
  Json excluded = Json::array();
  for (const auto& e : report.excluded) {
    log().warn("score: excluded '{}': {}", e.image_id, e.message);
    excluded.push_back({{"image_id", e.image_id}, {"message", e.message}});
  }
  ScoreTable table = std::move(report.table);
  std::map<std::string, fs::path> inputs{{"manifest", manifest_path}};
  Json unmatched = Json::object();
  for (std::size_t i = 0; i < external.size(); ++i) {
    const fs::path p = external[i];
    IngestReport ing = ingest_external_scores(p, table, allow_partial, polarity_for(p));
    if (!ing.missing_in_csv.empty() || !ing.missing_in_table.empty()) {
      log().warn("score: {}: {} table ids missing from the CSV, {} CSV ids not in the table", p.string(),
                 ing.missing_in_csv.size(), ing.missing_in_table.size());
      unmatched[p.string()] = {{"missing_in_csv", ing.missing_in_csv}, {"missing_in_table", ing.missing_in_table}};
    }
    table = std::move(ing.table);
    inputs["external_" + std::to_string(i)] = p;
  }
  save_scores(table, out);
  write_provenance(out, cfg, inputs, {{"excluded", excluded}, {"unmatched", unmatched}});
  res.body["rows"] = table.rows();
  res.body["columns"] = table.metrics();
  res.body["excluded"] = excluded;
  return res;
}

CommandResult cmd_normalize(const Json& raw) {
  Config cfg("normalize", raw,
             {"scores", "manifest", "splits", "seed", "ratios", "method", "bins", "fit_split", "out", "transforms",
              "splits_out"});
  const fs::path scores_path = cfg.input_path("scores");
  const fs::path manifest_path = cfg.input_path("manifest");
  const fs::path out = cfg.required_path("out");
  const std::string method = cfg.str("method", "he");
  const int bins = cfg.integer("bins", 256);
  const std::string fit_split = cfg.str("fit_split", "train");
  const fs::path transforms_path = cfg.str("transforms", sidecar(out, ".transforms.json").string());
  const fs::path splits_out = cfg.str("splits_out", (base_of(out) / "splits.csv").string());
  if (method != "he" && method != "zscore")
    fail(ErrorCode::kValidation, "normalize: unknown method '" + method + "' (expected he or zscore)");
  eval::Split fit;
  if (fit_split == "train")
    fit = eval::Split::kTrain;
  else if (fit_split == "val")
    fit = eval::Split::kVal;
  else if (fit_split == "test")
    fit = eval::Split::kTest;
  else
    fail(ErrorCode::kValidation, "normalize: 'fit_split' must be train, val or test");

  const ScoreTable table = load_scores(scores_path);
  const DatasetManifest manifest = read_manifest_csv(manifest_path);
  const auto ref_of = reference_map(manifest);
  const eval::SplitAssignment splits = load_or_make_splits(cfg, manifest);
  std::vector<std::size_t> fit_rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto& id = table.image_ids()[r];
    const auto ref = ref_of.find(id);
    if (ref == ref_of.end()) fail(ErrorCode::kValidation, "normalize: score id '" + id + "' is not in the manifest");
    const auto s = splits.find(ref->second);
    if (s == splits.end())
      fail(ErrorCode::kValidation, "normalize: reference '" + ref->second + "' has no split assignment");
    if (s->second == fit) fit_rows.push_back(r);
  }

  CommandResult res;
  res.body["method"] = method;
  res.body["rows"] = table.rows();
  res.body["fit_rows"] = fit_rows.size();
  res.body["out"] = out.string();
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    return res;
  }
  if (fit_rows.size() < 2) fail(ErrorCode::kValidation, "normalize: the fit split has fewer than 2 rows");

  ScoreTable normalized = table;
  Json transforms = Json::object();
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const auto col = table.column(c);
    std::vector<double> fit_values;
    for (auto r : fit_rows) fit_values.push_back(col[r]);
    std::vector<double> mapped;
    if (method == "he") {
      HETransform t;
      try {
        t = fit_he(fit_values, bins);
      } catch (const Error& e) {
        fail(e.code(), "normalize: metric '" + table.metrics()[c] + "': " + e.what());
      }
      mapped = apply_he(t, col);
      transforms[table.metrics()[c]] = Json::parse(t.to_json());
    } else {
      for (double v : col)
        if (!std::isfinite(v))
          fail(ErrorCode::kValidation, "normalize: metric '" + table.metrics()[c] +
                                           "' has non-finite values; use method he");
      const double m = stats::mean(fit_values);
      const double sd = std::sqrt(stats::sample_variance(fit_values));
      if (!(sd > 0.0))
        fail(ErrorCode::kDegenerate, "normalize: metric '" + table.metrics()[c] + "' is constant on the fit split");
      for (double v : col) mapped.push_back((v - m) / sd);
      transforms[table.metrics()[c]] = {{"type", "zscore"}, {"mean", m}, {"std", sd}};
    }
    for (std::size_t r = 0; r < table.rows(); ++r) normalized.set(r, c, mapped[r]);
  }
  save_scores(normalized, out);
  write_json(transforms_path, transforms);
  std::map<std::string, fs::path> inputs{{"scores", scores_path}, {"manifest", manifest_path}};
  if (cfg.has("splits")) {
    inputs["splits"] = cfg.input_path("splits");
  } else {
    write_splits_csv(splits, splits_out);
    write_provenance(splits_out, cfg, {{"manifest", manifest_path}});
    res.body["splits"] = splits_out.string();
  }
  write_provenance(out, cfg, inputs, {{"transforms", transforms_path.filename().string()}});
  write_provenance(transforms_path, cfg, inputs);
  res.body["transforms"] = transforms_path.string();
  return res;
}

CommandResult cmd_features(const Json& raw) {
  Config cfg("features", raw, {"mode", "manifest", "activations", "out", "include_references"});
  const std::string mode = cfg.str("mode", "extract");
  const fs::path out = cfg.required_path("out");
  CommandResult res;
  res.body["mode"] = mode;
  res.body["out"] = out.string();
  if (mode == "gap") {
    const fs::path dir = cfg.input_path("activations");
    if (cfg.dry_run()) {
      res.body["dry_run"] = true;
      return res;
    }
    const FeatureStore store = ingest_activation_dir(dir);
    ensure_parent(out);
    write_store(store, out);
    write_provenance(out, cfg, {{"activations", dir}}, {{"records", store.size()}, {"dim", store.dim()}});
    res.body["records"] = store.size();
    res.body["dim"] = store.dim();
    return res;
  }
  if (mode != "extract") fail(ErrorCode::kValidation, "features: unknown mode '" + mode + "' (expected extract or gap)");

  const fs::path manifest_path = cfg.input_path("manifest");
  const bool include_refs = cfg.flag("include_references", false);
  const int workers = cfg.workers();
  const DatasetManifest manifest = read_manifest_csv(manifest_path);
  const fs::path base = base_of(manifest_path);
  std::vector<std::pair<std::string, fs::path>> jobs;
  std::set<std::string> seen_refs;
  for (const auto& r : manifest.records) {
    if (include_refs) {
      const std::string ref = fs::path(r.ref_path).stem().string();
      if (seen_refs.insert(ref).second) jobs.emplace_back(ref, base / r.ref_path);
    }
    jobs.emplace_back(r.image_id, base / r.dist_path);
  }
  const int dim = kFilterbankScales * kFilterbankChannels;
  res.body["records"] = jobs.size();
  res.body["dim"] = dim;
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    return res;
  }
  log().info("features: extracting {} images ({} workers)", jobs.size(), workers);
  std::vector<std::vector<float>> feats(jobs.size());
  std::vector<std::string> errors(jobs.size());
  auto one = [&](std::size_t i) {
    try {
      ImageBuffer img = read_image(jobs[i].second);
      if (img.width() != kTargetWidth || img.height() != kTargetHeight)
        img = quantize_u8(resize_and_crop(img, kTargetWidth, kTargetHeight));
      feats[i] = mlsp_concat(filterbank_activations(img));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) one(i);
      });
  }
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!errors[i].empty()) fail(ErrorCode::kRuntime, "features: '" + jobs[i].first + "': " + errors[i]);
  FeatureStore store(dim);
  for (std::size_t i = 0; i < jobs.size(); ++i) store.add(jobs[i].first, feats[i]);
  ensure_parent(out);
  write_store(store, out);
  write_provenance(out, cfg, {{"manifest", manifest_path}},
                   {{"extractor", {{"name", "filterbank-v1"},
                                   {"scales", kFilterbankScales},
                                   {"channels_per_scale", kFilterbankChannels},
                                   {"input", std::to_string(kTargetWidth) + "x" + std::to_string(kTargetHeight)}}},
                    {"records", store.size()},
                    {"dim", store.dim()}});
  return res;
}

}  // namespace iqa::pipeline
