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
#include <cstdio>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "iqa/csv.hpp"
#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace fs = std::filesystem;

namespace {

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

std::string join_path(const fs::path& dir, const std::string& name) {
  return dir.empty() ? name : (dir / name).generic_string();
}

void require_refs(std::span<const std::string> ref_ids) {
  if (ref_ids.empty()) fail(ErrorCode::kInvalidArgument, "plan needs at least one reference");
  std::set<std::string> seen;
  for (const auto& id : ref_ids) {
    if (id.empty()) fail(ErrorCode::kInvalidArgument, "empty reference id");
    if (!seen.insert(id).second) fail(ErrorCode::kInvalidArgument, "duplicate reference id '" + id + "'");
  }
}

}  // namespace

std::uint64_t record_seed(std::string_view ref_id, DistortionKind kind, int level) {
  return mix_seed(mix_seed(fnv1a64(ref_id), static_cast<std::uint64_t>(ordinal(kind))),
                  static_cast<std::uint64_t>(level));
}

void DatasetManifest::validate() const {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.image_id).second) fail(ErrorCode::kValidation, "duplicate image_id '" + r.image_id + "'");
    iqa::validate(DistortionSpec{r.kind, r.level, r.seed});
  }
}

DatasetManifest generate_kadid_plan(std::span<const std::string> ref_ids, const PlanLayout& layout,
                                    const DistortionParamTable& table) {
  require_refs(ref_ids);
  const auto kinds = table.enabled_kinds();
  DatasetManifest m;
  m.records.reserve(ref_ids.size() * kinds.size() * kNumLevels);
  for (const auto& ref : ref_ids) {
    for (DistortionKind kind : kinds) {
      for (int level = 1; level <= kNumLevels; ++level) {
        ManifestRecord r;
        r.image_id = ref + "_" + two_digits(ordinal(kind)) + "_" + two_digits(level);
        r.ref_path = join_path(layout.ref_dir, ref + ".png");
        r.dist_path = join_path(layout.out_dir, r.image_id + ".png");
        r.kind = kind;
        r.level = level;
        r.seed = record_seed(ref, kind, level);
        m.records.push_back(std::move(r));
      }
    }
  }
  return m;
}

DatasetManifest generate_kadis_plan(std::span<const std::string> ref_ids, std::uint64_t rng_seed,
                                    const PlanLayout& layout, const DistortionParamTable& table) {
  require_refs(ref_ids);
  const auto kinds = table.enabled_kinds();
  Rng rng(rng_seed);
  DatasetManifest m;
  m.records.reserve(ref_ids.size() * kKadisVersionsPerReference);
  for (const auto& ref : ref_ids) {
    for (int v = 0; v < kKadisVersionsPerReference; ++v) {
      ManifestRecord r;
      r.kind = kinds[rng.below(kinds.size())];
      r.level = 1 + static_cast<int>(rng.below(kNumLevels));
      r.image_id = ref + "_v" + std::to_string(v + 1) + "_" + two_digits(ordinal(r.kind)) + "_" + two_digits(r.level);
      r.ref_path = join_path(layout.ref_dir, ref + ".png");
      r.dist_path = join_path(layout.out_dir, r.image_id + ".png");
      r.seed = mix_seed(record_seed(ref, r.kind, r.level), rng_seed + static_cast<std::uint64_t>(v));
      m.records.push_back(std::move(r));
    }
  }
  return m;
}

void write_manifest_csv(const DatasetManifest& manifest, const fs::path& path) {
  csv::Table t;
  t.header = {"image_id", "ref_path", "dist_path", "kind", "level", "seed"};
  for (const auto& r : manifest.records)
    t.rows.push_back({r.image_id, r.ref_path, r.dist_path, std::to_string(ordinal(r.kind)), std::to_string(r.level),
                      std::to_string(r.seed)});
  csv::write(t, path);
}

DatasetManifest read_manifest_csv(const fs::path& path) {
  const csv::Table t = csv::read(path);
  if (t.header.empty()) fail(ErrorCode::kValidation, path.string() + ": empty manifest file");
  const auto ci = t.column("image_id"), cr = t.column("ref_path"), cd = t.column("dist_path"),
             ck = t.column("kind"), cl = t.column("level"), cs = t.column("seed");
  DatasetManifest m;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string ctx = path.string() + " row " + std::to_string(i + 2);
    ManifestRecord r;
    r.image_id = row[ci];
    r.ref_path = row[cr];
    r.dist_path = row[cd];
    r.kind = kind_from_ordinal(static_cast<int>(csv::parse_int(row[ck], ctx + " kind")));
    r.level = static_cast<int>(csv::parse_int(row[cl], ctx + " level"));
    const std::string& seed = row[cs];
    std::size_t used = 0;
    try {
      r.seed = std::stoull(seed, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != seed.size() || seed.empty()) fail(ErrorCode::kValidation, ctx + ": bad seed '" + seed + "'");
    m.records.push_back(std::move(r));
  }
  m.validate();
  return m;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_relative() && !base.empty()) ? base / path : path;
}

struct RefCache {
  struct Entry {
    std::shared_ptr<const ImageBuffer> image;
    std::string error;
    std::size_t remaining = 0;
    bool loaded = false;
    std::mutex load_mutex;
  };
  std::mutex mutex;
  std::unordered_map<std::string, std::shared_ptr<Entry>> entries;
};

}  // namespace

CompletionReport run_manifest(const DatasetManifest& manifest, const RunOptions& options) {
  CompletionReport report;
  if (manifest.records.empty()) return report;
  manifest.validate();

  RefCache cache;
  for (const auto& r : manifest.records) {
    auto& e = cache.entries[resolve(options.ref_dir, r.ref_path).string()];
    if (!e) e = std::make_shared<RefCache::Entry>();
    ++e->remaining;
  }

  enum class Outcome { kWritten, kSkipped, kFailed };
  struct Result {
    Outcome outcome = Outcome::kFailed;
    std::string message;
    std::vector<std::string> warnings;
  };
  std::vector<Result> results(manifest.records.size());

  auto process = [&](std::size_t index) {
    const ManifestRecord& rec = manifest.records[index];
    Result& res = results[index];
    const fs::path dist = resolve(options.out_dir, rec.dist_path);
    const std::string ref_key = resolve(options.ref_dir, rec.ref_path).string();
    std::shared_ptr<RefCache::Entry> entry;
    {
      std::lock_guard lock(cache.mutex);
      entry = cache.entries.at(ref_key);
    }
    auto release = [&] {
      std::lock_guard lock(cache.mutex);
      if (--entry->remaining == 0) entry->image.reset();
    };
    if (options.skip_existing && fs::exists(dist)) {
      res.outcome = Outcome::kSkipped;
      release();
      return;
    }
    try {
      std::shared_ptr<const ImageBuffer> ref;
      {
        std::lock_guard lock(entry->load_mutex);
        if (!entry->loaded) {
          entry->loaded = true;
          try {
            ImageBuffer img = read_image(ref_key);
            if (options.preprocess) img = resize_and_crop(img, kTargetWidth, kTargetHeight, Interp::kBicubic);
            entry->image = std::make_shared<const ImageBuffer>(quantize_u8(img));
          } catch (const std::exception& e) {
            entry->error = e.what();
          }
        }
        if (!entry->error.empty()) throw Error(ErrorCode::kIo, "reference unreadable: " + entry->error);
        ref = entry->image;
      }
      const ImageBuffer out =
          apply_distortion(*ref, DistortionSpec{rec.kind, rec.level, rec.seed}, options.table, &res.warnings);
      if (dist.has_parent_path()) fs::create_directories(dist.parent_path());
      const fs::path tmp = dist.string() + ".tmp";
      write_png(out, tmp);
      fs::rename(tmp, dist);
      res.outcome = Outcome::kWritten;
    } catch (const std::exception& e) {
      res.outcome = Outcome::kFailed;
      res.message = e.what();
    }
    release();
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < manifest.records.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < manifest.records.size(); i = next++) process(i);
      });
  }

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& id = manifest.records[i].image_id;
    switch (results[i].outcome) {
      case Outcome::kWritten: ++report.written; break;
      case Outcome::kSkipped: ++report.skipped; break;
      case Outcome::kFailed: report.failures.push_back({id, results[i].message}); break;
    }
    for (const auto& w : results[i].warnings) report.warnings.push_back(id + ": " + w);
  }
  return report;
}

}  // namespace iqa
