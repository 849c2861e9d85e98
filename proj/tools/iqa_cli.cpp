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

#include <malloc.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iqa/iqa.h"
#include "json.hpp"

using Json = nlohmann::ordered_json;

namespace {

enum class Kind { kStr, kInt, kNum, kFlag, kList };

struct Opt {
  const char* key;
  Kind kind;
  const char* help;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<Opt> opts;
};

const Opt kSeed{"seed", Kind::kInt, "random seed"};
const Opt kRatios{"ratios", Kind::kList, "train,val,test split fractions"};
const Opt kSplits{"splits", Kind::kStr, "reference split CSV (reference_id,split)"};

const std::vector<Opt> kTrainOpts = {
    {"loss", Kind::kStr, "mse, mae or plcc"},
    {"lr", Kind::kNum, "Adam learning rate"},
    {"batch_size", Kind::kInt, "minibatch size"},
    {"epochs", Kind::kInt, "training epochs"},
    {"dropout", Kind::kFlag, "dropout during training (--no-dropout to disable)"},
    {"task_weights", Kind::kList, "per-task loss weights"},
};

std::vector<Command> commands() {
  std::vector<Command> c = {
      {"synth",
       "write synthetic reference images",
       {{"out", Kind::kStr, "output directory"},
        {"count", Kind::kInt, "number of references"},
        {"width", Kind::kInt, "image width"},
        {"height", Kind::kInt, "image height"},
        kSeed,
        {"prefix", Kind::kStr, "image id prefix"}}},
      {"distort",
       "generate a distorted dataset from reference images",
       {{"refs", Kind::kStr, "directory of reference images"},
        {"out", Kind::kStr, "output directory"},
        {"plan", Kind::kStr, "kadid or kadis"},
        kSeed,
        {"manifest", Kind::kStr, "manifest CSV path (default <out>/manifest.csv)"},
        {"params", Kind::kStr, "JSON parameter table overrides"},
        {"skip_existing", Kind::kFlag, "keep images that already exist"},
        {"preprocess", Kind::kFlag, "resize and crop references to 512x384"}}},
      {"score",
       "compute full-reference metric scores for a manifest",
       {{"manifest", Kind::kStr, "dataset manifest CSV"},
        {"out", Kind::kStr, "score CSV"},
        {"metrics", Kind::kList, "metric names"},
        {"external", Kind::kStr, "CSV of externally computed scores to join"},
        {"allow_partial", Kind::kFlag, "keep the intersection when external ids are missing"}}},
      {"normalize",
       "histogram-equalize or z-score metric scores",
       {{"scores", Kind::kStr, "score CSV"},
        {"manifest", Kind::kStr, "dataset manifest CSV"},
        kSplits,
        kSeed,
        kRatios,
        {"method", Kind::kStr, "he or zscore"},
        {"bins", Kind::kInt, "histogram bins"},
        {"fit_split", Kind::kStr, "split the transforms are fitted on (train or all)"},
        {"out", Kind::kStr, "normalized score CSV"},
        {"transforms", Kind::kStr, "fitted transforms JSON"},
        {"splits_out", Kind::kStr, "split assignment CSV"}}},
      {"features",
       "extract or ingest feature vectors",
       {{"mode", Kind::kStr, "extract or gap"},
        {"manifest", Kind::kStr, "dataset manifest CSV (extract)"},
        {"activations", Kind::kStr, "activation directory (gap)"},
        {"out", Kind::kStr, "feature store (.mlsp)"},
        {"include_references", Kind::kFlag, "also extract reference images"}}},
  };
  std::vector<Opt> train = {{"features", Kind::kStr, "feature store"},
                            {"labels", Kind::kStr, "label CSV"},
                            {"manifest", Kind::kStr, "dataset manifest CSV"},
                            kSplits,
                            kSeed,
                            kRatios,
                            {"columns", Kind::kList, "label columns to train on"}};
  train.insert(train.end(), kTrainOpts.begin(), kTrainOpts.end());
  train.push_back({"sweep_lr", Kind::kFlag, "select the learning rate on the validation split"});
  train.push_back({"lr_grid", Kind::kList, "learning rates to sweep"});
  train.push_back({"out", Kind::kStr, "model checkpoint (.iqnn)"});
  train.push_back({"history", Kind::kStr, "per-epoch history CSV"});
  c.push_back({"train-mtl", "train the multi-task head on weak labels", train});
  c.push_back({"train-regressor", "train the single-output regressor", train});

  std::vector<Opt> ev = {{"features", Kind::kStr, "feature store"},
                         {"labels", Kind::kStr, "label CSV"},
                         {"manifest", Kind::kStr, "dataset manifest CSV"},
                         kSplits,
                         kSeed,
                         kRatios,
                         {"columns", Kind::kList, "label columns"},
                         {"model", Kind::kStr, "trained checkpoint to score on its test split"},
                         {"reps", Kind::kInt, "repetitions of split / train / test"},
                         {"arch", Kind::kStr, "regressor or mtl-head"}};
  ev.insert(ev.end(), kTrainOpts.begin(), kTrainOpts.end());
  ev.push_back({"out", Kind::kStr, "report JSON"});
  ev.push_back({"runs", Kind::kStr, "per-run CSV"});
  c.push_back({"evaluate", "evaluate on held-out content", ev});

  c.push_back({"reliability",
               "rater agreement statistics",
               {{"ratings", Kind::kStr, "ratings CSV (image_id,rating)"},
                {"resamples", Kind::kInt, "bootstrap resamples"},
                kSeed,
                {"out", Kind::kStr, "report JSON"},
                {"dmos_out", Kind::kStr, "optional DMOS CSV"}}});
  c.push_back({"selftest", "run the built-in property checks", {kSeed, {"out", Kind::kStr, "report JSON"}}});
  return c;
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& ch : s)
    if (ch == '_') ch = '-';
  return s;
}

// Values given on the command line; only set options override the config.
struct Given {
  std::map<std::string, std::string> str;
  std::map<std::string, std::int64_t> integer;
  std::map<std::string, double> num;
  std::map<std::string, bool> flag;
  std::map<std::string, std::vector<std::string>> list;
};

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  try {
    Json j = Json::parse(in);
    if (!j.is_object()) throw std::runtime_error("config " + path + " must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("config " + path + " is not valid JSON: " + e.what());
  }
}

int exit_code(iqa_status s) {
  switch (s) {
    case IQA_OK: return 0;
    case IQA_ERR_IO:
    case IQA_ERR_RUNTIME: return 2;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  // Image buffers are a few MB each; keep freed pages in the heap instead of
  // returning them to the kernel after every image.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
  CLI::App app{"weakiqa: weakly supervised image quality toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(iqa_version()));

  std::string config_path;
  bool quiet = false;
  int verbose = 0;
  bool dry_run = false;
  std::optional<int> workers;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON config file; command-line flags override it")->check(CLI::ExistingFile);
  app.add_flag("-q,--quiet", quiet, "errors only");
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("--dry-run", dry_run, "describe the work without writing anything");
  app.add_option("--workers", workers, "worker threads (default: IQA_WORKERS or all cores)")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "extra key=value config entries (value parsed as JSON when possible)");

  const auto table = commands();
  std::map<std::string, Given> given;
  for (const auto& cmd : table) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    Given& g = given[cmd.name];
    for (const auto& o : cmd.opts) {
      const std::string name = "--" + flag_name(o.key);
      switch (o.kind) {
        case Kind::kStr: sub->add_option_function<std::string>(name, [&g, k = o.key](const std::string& v) { g.str[k] = v; }, o.help); break;
        case Kind::kInt: sub->add_option_function<std::int64_t>(name, [&g, k = o.key](std::int64_t v) { g.integer[k] = v; }, o.help); break;
        case Kind::kNum: sub->add_option_function<double>(name, [&g, k = o.key](double v) { g.num[k] = v; }, o.help); break;
        case Kind::kList:
          sub->add_option_function<std::vector<std::string>>(
                 name, [&g, k = o.key](const std::vector<std::string>& v) { g.list[k] = v; }, o.help)
              ->delimiter(',');
          break;
        case Kind::kFlag:
          sub->add_flag_function(name + ",!--no-" + flag_name(o.key),
                                 [&g, k = o.key](std::int64_t n) { g.flag[k] = n > 0; }, o.help);
          break;
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  iqa_set_verbosity(quiet ? 0 : (verbose > 0 ? 2 : 1));
  const std::string command = app.get_subcommands().front()->get_name();

  Json config = Json::object();
  try {
    if (!config_path.empty()) config = read_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const Given& g = given[command];
  for (const auto& [k, v] : g.str) config[k] = v;
  for (const auto& [k, v] : g.integer) config[k] = v;
  for (const auto& [k, v] : g.num) config[k] = v;
  for (const auto& [k, v] : g.flag) config[k] = v;
  for (const auto& [k, v] : g.list) config[k] = v;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects key=value, got '" << s << "'\n";
      return 1;
    }
    const std::string key = s.substr(0, eq), value = s.substr(eq + 1);
    config[key] = Json::accept(value) ? Json::parse(value) : Json(value);
  }
  if (dry_run) config["dry_run"] = true;
  if (workers) config["workers"] = *workers;

  char* result = nullptr;
  const iqa_status status = iqa_run(command.c_str(), config.dump().c_str(), &result);
  if (result) {
    std::cout << result << "\n";
    iqa_string_free(result);
  }
  if (status != IQA_OK) std::cerr << "error (" << iqa_status_name(status) << "): " << iqa_last_error() << "\n";
  return exit_code(status);
}
