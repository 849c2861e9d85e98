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
#include <cmath>

#include "common.hpp"
#include "iqa/csv.hpp"
#include "iqa/error.hpp"
#include "iqa/stats.hpp"
#include "stages.hpp"

namespace iqa::pipeline {

namespace {

Json splits_json(const eval::SplitAssignment& splits) {
  Json j = {{"train", Json::array()}, {"val", Json::array()}, {"test", Json::array()}};
  for (const auto& [ref, s] : splits) j[std::string(eval::to_string(s))].push_back(ref);
  return j;
}

eval::SplitAssignment splits_from_json(const Json& j) {
  eval::SplitAssignment out;
  const std::pair<const char*, eval::Split> names[] = {
      {"train", eval::Split::kTrain}, {"val", eval::Split::kVal}, {"test", eval::Split::kTest}};
  for (const auto& [name, s] : names)
    for (const auto& ref : j.at(name)) out[ref.get<std::string>()] = s;
  return out;
}

struct TaskScores {
  std::string task;
  double srocc = std::nan("");
  double plcc = std::nan("");
  double plcc_raw = std::nan("");
};

// Test-set agreement per task; statistics that are undefined on this data
// stay NaN and are reported as such.
std::vector<TaskScores> score_predictions(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& y,
                                          const std::vector<std::string>& tasks) {
  std::vector<TaskScores> out;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    TaskScores t;
    t.task = tasks[k];
    std::vector<double> p(static_cast<std::size_t>(pred.rows())), s(p.size());
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      p[static_cast<std::size_t>(i)] = pred(i, static_cast<Eigen::Index>(k));
      s[static_cast<std::size_t>(i)] = y(i, static_cast<Eigen::Index>(k));
    }
    try {
      t.srocc = eval::srocc(p, s);
      t.plcc_raw = stats::pearson(p, s);
      t.plcc = eval::plcc_mapped(p, s);
    } catch (const Error& e) {
      log().warn("task '{}': {}", tasks[k], e.what());
    }
    out.push_back(t);
  }
  return out;
}

Json tasks_json(const std::vector<TaskScores>& scores) {
  Json j = Json::array();
  for (const auto& s : scores)
    j.push_back({{"task", s.task},
                 {"srocc", std::isfinite(s.srocc) ? Json(s.srocc) : Json(nullptr)},
                 {"plcc", std::isfinite(s.plcc) ? Json(s.plcc) : Json(nullptr)},
                 {"plcc_raw", std::isfinite(s.plcc_raw) ? Json(s.plcc_raw) : Json(nullptr)}});
  return j;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path s = p;
  s.replace_extension(suffix);
  return s;
}

// image id -> reference id from the manifest, or from the id prefix before
// the first '_' (e.g. I01_05_03 -> I01) when no manifest is given.
std::map<std::string, std::string> reference_of(const Config& cfg, const ScoreTable& labels,
                                                std::map<std::string, fs::path>& inputs) {
  if (cfg.has("manifest")) {
    const fs::path p = cfg.input_path("manifest");
    inputs["manifest"] = p;
    return reference_map(read_manifest_csv(p));
  }
  std::map<std::string, std::string> out;
  for (const auto& id : labels.image_ids()) {
    const auto cut = id.find('_');
    if (cut == std::string::npos || cut == 0)
      fail(ErrorCode::kValidation, cfg.command() + ": image id '" + id +
                                       "' has no '<reference>_' prefix; pass a manifest to map ids to references");
    out[id] = id.substr(0, cut);
  }
  return out;
}

eval::SplitAssignment splits_for(const Config& cfg, const std::map<std::string, std::string>& ref_of) {
  if (cfg.has("splits")) return read_splits_csv(cfg.input_path("splits"));
  std::vector<std::string> refs;
  for (const auto& [id, ref] : ref_of) refs.push_back(ref);
  return eval::split_by_content(refs, ratios_from(cfg), cfg.seed());
}

Eigen::MatrixXd predict(const nn::NetworkModel& model, const Eigen::MatrixXd& x) {
  return nn::forward(model, x, nn::Mode::kEval);
}

enum class Arch { kMtlHead, kRegressor };

nn::NetworkModel build(Arch arch, int dim, const std::vector<std::string>& tasks, std::uint64_t seed) {
  if (arch == Arch::kRegressor) {
    if (tasks.size() != 1)
      fail(ErrorCode::kValidation, "the regressor predicts one label column, got " + std::to_string(tasks.size()));
    nn::NetworkModel m = nn::build_regressor(dim, seed);
    m.heads[0].name = tasks[0];
    return m;
  }
  return nn::build_mtl_head(dim, static_cast<int>(tasks.size()), seed, tasks);
}

CommandResult train_stage(const Json& raw, Arch arch) {
  const char* name = arch == Arch::kMtlHead ? "train-mtl" : "train-regressor";
  Config cfg(name, raw,
             {"features", "labels", "manifest", "splits", "seed", "ratios", "columns", "loss", "lr", "batch_size",
              "epochs", "dropout", "task_weights", "sweep_lr", "lr_grid", "out", "history"});
  const fs::path features_path = cfg.input_path("features");
  const fs::path labels_path = cfg.input_path("labels");
  const fs::path out = cfg.required_path("out");
  const fs::path history_path = cfg.str("history", with_suffix(out, ".history.csv").string());
  const nn::TrainConfig tc = arch == Arch::kMtlHead ? train_config_from(cfg, nn::LossKind::kPLCC, 1e-4)
                                                    : train_config_from(cfg, nn::LossKind::kMSE, 1e-2);
  const bool sweep = cfg.flag("sweep_lr", false);
  std::vector<double> grid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  if (cfg.has("lr_grid")) {
    grid.clear();
    for (const auto& v : cfg.strings("lr_grid", {}))
      grid.push_back(csv::parse_double(v, std::string(name) + ": 'lr_grid'"));
    cfg.resolved()["lr_grid"] = grid;
  } else {
    cfg.resolved()["lr_grid"] = grid;
  }

  const FeatureStore store = read_store(features_path);
  const ScoreTable labels = load_scores(labels_path);
  const std::vector<std::string> tasks = cfg.strings("columns", labels.metrics());
  std::map<std::string, fs::path> inputs{{"features", features_path}, {"labels", labels_path}};
  const auto ref_of = reference_of(cfg, labels, inputs);
  const eval::SplitAssignment splits = splits_for(cfg, ref_of);
  const LabelledSet set = join_labels(store, labels, tasks, ref_of, splits);
  const auto train_rows = rows_in(set, eval::Split::kTrain);
  const auto val_rows = rows_in(set, eval::Split::kVal);
  const auto test_rows = rows_in(set, eval::Split::kTest);
  tc.validate(tasks.size());

  CommandResult res;
  res.body["tasks"] = tasks;
  res.body["rows"] = {{"train", train_rows.size()}, {"val", val_rows.size()}, {"test", test_rows.size()}};
  res.body["out"] = out.string();
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    return res;
  }
  if (train_rows.size() < 2) fail(ErrorCode::kValidation, std::string(name) + ": fewer than 2 training rows");

  std::vector<std::size_t> train_feature_rows;
  for (auto r : train_rows) train_feature_rows.push_back(set.feature_rows[r]);
  const FeatureScaler scaler = FeatureScaler::fit(store, train_feature_rows);
  const nn::TrainData train_data = make_train_data(set, store, scaler, train_rows);
  const nn::TrainData val_data = make_train_data(set, store, scaler, val_rows);
  const nn::NetworkModel init = build(arch, store.dim(), tasks, tc.seed);
  log().info("{}: {} train / {} val / {} test rows, {} tasks, {} parameters", name, train_rows.size(),
             val_rows.size(), test_rows.size(), tasks.size(), init.parameter_count());

  nn::TrainResult result;
  Json sweep_json = nullptr;
  nn::TrainConfig used = tc;
  if (sweep) {
    nn::LrSweepResult s = nn::sweep_learning_rate(init, train_data, val_data, tc, grid);
    sweep_json = Json::array();
    for (const auto& [lr, loss] : s.val_loss_by_lr) sweep_json.push_back({{"lr", lr}, {"val_loss", loss}});
    used.lr = s.best_lr;
    result = std::move(s.best);
  } else {
    result = nn::train(init, train_data, val_data, tc);
  }

  Json test_json = nullptr;
  if (test_rows.size() >= 2) {
    const nn::TrainData test_data = make_train_data(set, store, scaler, test_rows);
    test_json = tasks_json(score_predictions(predict(result.model, test_data.x), test_data.y, tasks));
  }

  ensure_parent(out);
  nn::save_checkpoint(result.model, out);
  nn::write_history_csv(result.history, history_path);
  write_provenance(out, cfg, inputs,
                   {{"architecture", arch == Arch::kMtlHead ? "mtl-head" : "regressor"},
                    {"tasks", tasks},
                    {"input_dim", store.dim()},
                    {"parameters", result.model.parameter_count()},
                    {"train_config", to_json(used)},
                    {"lr_sweep", sweep_json},
                    {"best_epoch", result.best_epoch},
                    {"best_val_loss", result.best_val_loss},
                    {"reshuffles", result.reshuffles},
                    {"scaler", Json::parse(scaler.to_json())},
                    {"splits", splits_json(splits)},
                    {"test", test_json}});
  write_provenance(history_path, cfg, inputs);

  res.body["best_epoch"] = result.best_epoch;
  res.body["best_val_loss"] = result.best_val_loss;
  res.body["lr"] = used.lr;
  res.body["history"] = history_path.string();
  res.body["test"] = test_json;
  return res;
}

void write_runs_csv(const fs::path& path, const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::vector<TaskScores>>& runs) {
  csv::Table t;
  t.header = {"run", "seed", "task", "srocc", "plcc", "plcc_raw"};
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (const auto& s : runs[i])
      t.rows.push_back({std::to_string(i), std::to_string(seeds[i]), s.task, csv::format_double(s.srocc),
                        csv::format_double(s.plcc), csv::format_double(s.plcc_raw)});
  ensure_parent(path);
  csv::write(t, path);
}

double mean_of(const std::vector<TaskScores>& s, double TaskScores::*field) {
  double acc = 0.0;
  for (const auto& t : s) acc += t.*field;
  return acc / static_cast<double>(s.size());
}

}  // namespace

CommandResult cmd_train_mtl(const Json& raw) { return train_stage(raw, Arch::kMtlHead); }
CommandResult cmd_train_regressor(const Json& raw) { return train_stage(raw, Arch::kRegressor); }

CommandResult cmd_evaluate(const Json& raw) {
  Config cfg("evaluate", raw,
             {"features", "labels", "manifest", "splits", "seed", "ratios", "columns", "model", "reps", "arch",
              "loss", "lr", "batch_size", "epochs", "dropout", "task_weights", "out", "runs"});
  const fs::path features_path = cfg.input_path("features");
  const fs::path labels_path = cfg.input_path("labels");
  const fs::path out = cfg.required_path("out");
  const fs::path runs_path = cfg.str("runs", with_suffix(out, ".runs.csv").string());
  const FeatureStore store = read_store(features_path);
  const ScoreTable labels = load_scores(labels_path);
  std::map<std::string, fs::path> inputs{{"features", features_path}, {"labels", labels_path}};
  const auto ref_of = reference_of(cfg, labels, inputs);

  Json report;
  report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  CommandResult res;

  if (cfg.has("model")) {
    // score a trained model on its test split
    const fs::path model_path = cfg.input_path("model");
    const Json meta = read_json(fs::path(model_path.string() + ".meta.json"));
    const nn::NetworkModel model = nn::load_checkpoint(model_path);
    const std::vector<std::string> tasks = cfg.strings("columns", model.head_names());
    if (tasks.size() != model.num_heads())
      fail(ErrorCode::kValidation, "evaluate: 'columns' lists " + std::to_string(tasks.size()) +
                                       " labels for a model with " + std::to_string(model.num_heads()) + " heads");
    const eval::SplitAssignment splits =
        cfg.has("splits") ? read_splits_csv(cfg.input_path("splits")) : splits_from_json(meta.at("splits"));
    const FeatureScaler scaler = FeatureScaler::from_json(meta.at("scaler").dump());
    const LabelledSet set = join_labels(store, labels, tasks, ref_of, splits);
    const auto test_rows = rows_in(set, eval::Split::kTest);
    inputs["model"] = model_path;
    res.body["mode"] = "model";
    res.body["test_rows"] = test_rows.size();
    res.body["out"] = out.string();
    if (cfg.dry_run()) {
      res.body["dry_run"] = true;
      return res;
    }
    if (test_rows.size() < 5) fail(ErrorCode::kValidation, "evaluate: the test split has fewer than 5 rows");
    const nn::TrainData test = make_train_data(set, store, scaler, test_rows);
    const auto scores = score_predictions(predict(model, test.x), test.y, tasks);
    write_runs_csv(runs_path, {cfg.seed()}, {scores});
    report["mode"] = "model";
    report["config"] = cfg.resolved();
    report["test_rows"] = test_rows.size();
    report["tasks"] = tasks_json(scores);
    report["mean_srocc"] = mean_of(scores, &TaskScores::srocc);
    report["mean_plcc"] = mean_of(scores, &TaskScores::plcc);
    report["runs_csv"] = runs_path.filename().string();
    write_json(out, report);
    write_provenance(out, cfg, inputs);
    write_provenance(runs_path, cfg, inputs);
    res.body["tasks"] = report["tasks"];
    return res;
  }

  // repeated split / train / test protocol
  const int reps = cfg.integer("reps", 1);
  const std::uint64_t base_seed = cfg.seed();
  const eval::SplitRatios ratios = ratios_from(cfg);
  const std::vector<std::string> tasks = cfg.strings("columns", labels.metrics());
  const std::string arch_name = cfg.str("arch", tasks.size() == 1 ? "regressor" : "mtl-head");
  if (arch_name != "regressor" && arch_name != "mtl-head")
    fail(ErrorCode::kValidation, "evaluate: 'arch' must be regressor or mtl-head");
  const Arch arch = arch_name == "regressor" ? Arch::kRegressor : Arch::kMtlHead;
  nn::TrainConfig tc = arch == Arch::kMtlHead ? train_config_from(cfg, nn::LossKind::kPLCC, 1e-4)
                                              : train_config_from(cfg, nn::LossKind::kMSE, 1e-2);
  tc.validate(tasks.size());
  if (reps < 1) fail(ErrorCode::kValidation, "evaluate: 'reps' must be >= 1");
  std::vector<std::string> refs;
  for (const auto& [id, ref] : ref_of) refs.push_back(ref);
  res.body["mode"] = "protocol";
  res.body["reps"] = reps;
  res.body["tasks"] = tasks;
  res.body["out"] = out.string();
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    return res;
  }

  std::vector<std::vector<TaskScores>> per_run(static_cast<std::size_t>(reps));
  auto run = [&](std::uint64_t seed) {
    const auto splits = eval::split_by_content(refs, ratios, seed);
    const LabelledSet set = join_labels(store, labels, tasks, ref_of, splits);
    const auto tr = rows_in(set, eval::Split::kTrain);
    const auto va = rows_in(set, eval::Split::kVal);
    const auto te = rows_in(set, eval::Split::kTest);
    if (tr.size() < 2 || te.size() < 5)
      fail(ErrorCode::kValidation, "split has too few rows (train " + std::to_string(tr.size()) + ", test " +
                                       std::to_string(te.size()) + ")");
    std::vector<std::size_t> fr;
    for (auto r : tr) fr.push_back(set.feature_rows[r]);
    const FeatureScaler scaler = FeatureScaler::fit(store, fr);
    nn::TrainConfig c = tc;
    c.seed = seed;
    const auto result = nn::train(build(arch, store.dim(), tasks, seed), make_train_data(set, store, scaler, tr),
                                  make_train_data(set, store, scaler, va), c);
    const nn::TrainData test = make_train_data(set, store, scaler, te);
    auto scores = score_predictions(predict(result.model, test.x), test.y, tasks);
    per_run[static_cast<std::size_t>(seed - base_seed)] = scores;
    log().info("evaluate: run seed {} SROCC {:.4f} PLCC {:.4f}", seed, mean_of(scores, &TaskScores::srocc),
               mean_of(scores, &TaskScores::plcc));
    return eval::RunResult{mean_of(scores, &TaskScores::srocc), mean_of(scores, &TaskScores::plcc)};
  };
  const eval::RepeatReport rep = eval::repeat_eval(run, reps, base_seed, 1);

  write_runs_csv(runs_path, rep.seeds, per_run);
  Json task_medians = Json::array();
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    std::vector<double> s, p;
    for (const auto& r : per_run) {
      s.push_back(r[k].srocc);
      p.push_back(r[k].plcc);
    }
    task_medians.push_back({{"task", tasks[k]}, {"median_srocc", stats::median(s)}, {"median_plcc", stats::median(p)}});
  }
  Json runs = Json::array();
  for (std::size_t i = 0; i < rep.runs.size(); ++i)
    runs.push_back({{"run", i}, {"seed", rep.seeds[i]}, {"srocc", rep.runs[i].srocc}, {"plcc", rep.runs[i].plcc}});
  report["mode"] = "protocol";
  report["config"] = cfg.resolved();
  report["architecture"] = arch_name;
  report["train_config"] = to_json(tc);
  report["plcc_mapping"] = "5-parameter logistic fitted per test split";
  report["median_srocc"] = rep.median_srocc;
  report["median_plcc"] = rep.median_plcc;
  report["tasks"] = task_medians;
  report["runs"] = runs;
  report["runs_csv"] = runs_path.filename().string();
  write_json(out, report);
  write_provenance(out, cfg, inputs);
  write_provenance(runs_path, cfg, inputs);
  res.body["median_srocc"] = rep.median_srocc;
  res.body["median_plcc"] = rep.median_plcc;
  res.body["runs"] = runs;
  return res;
}

CommandResult cmd_reliability(const Json& raw) {
  Config cfg("reliability", raw, {"ratings", "resamples", "seed", "out", "dmos_out"});
  const fs::path ratings_path = cfg.input_path("ratings");
  const fs::path out = cfg.required_path("out");
  const int resamples = cfg.integer("resamples", 100);
  const std::uint64_t seed = cfg.seed();
  const std::string dmos_out = cfg.str("dmos_out", "");
  const eval::RatingsTable table = eval::read_ratings_csv(ratings_path);
  CommandResult res;
  res.body["images"] = table.image_ids.size();
  res.body["out"] = out.string();
  if (cfg.dry_run()) {
    res.body["dry_run"] = true;
    return res;
  }
  const eval::IccResult icc = eval::icc(table.ratings);
  const eval::BootstrapResult boot = eval::intergroup_bootstrap(table, resamples, seed);
  Json report;
  report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  report["config"] = cfg.resolved();
  report["icc"] = {{"value", icc.icc},
                   {"variant", "ICC(1,1) one-way random effects, k0 group size for unbalanced data"},
                   {"bms", icc.bms},
                   {"wms", icc.wms},
                   {"k0", icc.k0},
                   {"items", icc.items},
                   {"ratings", icc.ratings}};
  report["intergroup_bootstrap"] = {
      {"srocc", boot.srocc}, {"mae", boot.mae}, {"rmse", boot.rmse}, {"resamples", boot.resamples}};
  write_json(out, report);
  write_provenance(out, cfg, {{"ratings", ratings_path}});
  if (!dmos_out.empty()) {
    ScoreTable dm(table.image_ids, {"dmos"}, {Polarity::kHigherBetter});
    for (std::size_t i = 0; i < table.ratings.size(); ++i) dm.set(i, 0, stats::mean(table.ratings[i]));
    save_scores(dm, dmos_out);
    write_provenance(dmos_out, cfg, {{"ratings", ratings_path}});
  }
  res.body["icc"] = icc.icc;
  res.body["intergroup_bootstrap"] = report["intergroup_bootstrap"];
  return res;
}

}  // namespace iqa::pipeline
