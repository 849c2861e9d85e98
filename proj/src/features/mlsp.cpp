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
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "iqa/error.hpp"
#include "iqa/features.hpp"
#include "json.hpp"

namespace iqa {

namespace fs = std::filesystem;

void ActivationBlock::validate() const {
  require(height > 0 && width > 0 && channels > 0, "activation block dims must be positive");
  require(data.size() == static_cast<std::size_t>(height) * width * channels,
          "activation block holds " + std::to_string(data.size()) + " values, expected " +
              std::to_string(static_cast<std::size_t>(height) * width * channels));
}

std::vector<float> gap_pool(const ActivationBlock& block) {
  block.validate();
  std::vector<double> acc(static_cast<std::size_t>(block.channels), 0.0);
  const std::size_t pixels = static_cast<std::size_t>(block.height) * block.width;
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* px = block.data.data() + p * block.channels;
    for (int c = 0; c < block.channels; ++c) acc[c] += px[c];
  }
  std::vector<float> out(acc.size());
  for (std::size_t c = 0; c < acc.size(); ++c) out[c] = static_cast<float>(acc[c] / static_cast<double>(pixels));
  return out;
}

std::vector<float> mlsp_concat(std::span<const ActivationBlock> blocks) {
  require(!blocks.empty(), "mlsp_concat needs at least one block");
  std::vector<float> out;
  for (const auto& b : blocks) {
    const auto g = gap_pool(b);
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

std::span<const int> canonical_mlsp_schedule() {
  static const std::array<int, 43> schedule = [] {
    std::array<int, 43> s{};
    std::size_t i = 0;
    s[i++] = 320;
    for (int k = 0; k < 10; ++k) s[i++] = 128;
    s[i++] = 1088;
    for (int k = 0; k < 20; ++k) s[i++] = 384;
    s[i++] = 2080;
    for (int k = 0; k < 10; ++k) s[i++] = 448;
    return s;
  }();
  return schedule;
}

FeatureStore::FeatureStore(int dim) : dim_(dim) { require(dim > 0, "feature dimension must be positive"); }

std::span<const float> FeatureStore::row(std::size_t i) const {
  require(i < ids_.size(), "feature row out of range");
  return {values_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::optional<std::size_t> FeatureStore::find(const std::string& id) const {
  if (const auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

void FeatureStore::add(std::string id, std::span<const float> values) {
  if (values.size() != static_cast<std::size_t>(dim_))
    fail(ErrorCode::kValidation, "feature vector for '" + id + "' has length " + std::to_string(values.size()) +
                                     ", store dimension is " + std::to_string(dim_));
  if (id.size() > 0xFFFF) fail(ErrorCode::kValidation, "image id longer than 65535 bytes");
  if (index_.contains(id)) fail(ErrorCode::kValidation, "duplicate feature id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), values.begin(), values.end());
}

bool FeatureStore::operator==(const FeatureStore& other) const {
  if (dim_ != other.dim_ || ids_ != other.ids_ || values_.size() != other.values_.size()) return false;
  // bitwise, so NaN payloads compare as stored
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (std::bit_cast<std::uint32_t>(values_[i]) != std::bit_cast<std::uint32_t>(other.values_[i])) return false;
  return true;
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'S', 'P'};
constexpr std::uint32_t kStoreVersion = 1;

void put(std::vector<char>& buf, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get(const std::vector<char>& buf, std::size_t& pos, int bytes, const fs::path& path, const char* what) {
  if (pos + static_cast<std::size_t>(bytes) > buf.size())
    fail(ErrorCode::kValidation, path.string() + ": truncated feature store while reading " + what + " at offset " +
                                     std::to_string(pos) + " (file size " + std::to_string(buf.size()) + ")");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
  return v;
}

std::vector<char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

void write_store(const FeatureStore& store, const fs::path& path) {
  std::vector<char> buf(kMagic, kMagic + 4);
  put(buf, kStoreVersion, 4);
  put(buf, store.size(), 4);
  put(buf, static_cast<std::uint32_t>(store.dim()), 4);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& id = store.ids()[i];
    put(buf, id.size(), 2);
    buf.insert(buf.end(), id.begin(), id.end());
    for (float v : store.row(i)) put(buf, std::bit_cast<std::uint32_t>(v), 4);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

FeatureStore read_store(const fs::path& path) {
  const auto buf = slurp(path);
  if (buf.size() < 4 || !std::equal(kMagic, kMagic + 4, buf.begin()))
    fail(ErrorCode::kValidation, path.string() + ": bad magic at offset 0 (expected \"MLSP\")");
  std::size_t pos = 4;
  const auto version = get(buf, pos, 4, path, "version");
  if (version != kStoreVersion)
    fail(ErrorCode::kValidation, path.string() + ": unsupported store version " + std::to_string(version) +
                                     " at offset 4");
  const auto count = get(buf, pos, 4, path, "record count");
  const auto dim = get(buf, pos, 4, path, "dimension");
  if (dim == 0 || dim > 0x7FFFFFFF)
    fail(ErrorCode::kValidation, path.string() + ": invalid dimension " + std::to_string(dim) + " at offset 12");
  FeatureStore store(static_cast<int>(dim));
  std::vector<float> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto len = get(buf, pos, 2, path, "id length");
    if (pos + len > buf.size())
      fail(ErrorCode::kValidation, path.string() + ": truncated feature store while reading id of record " +
                                       std::to_string(r) + " at offset " + std::to_string(pos));
    std::string id(buf.data() + pos, len);
    pos += len;
    for (auto& v : values) v = std::bit_cast<float>(static_cast<std::uint32_t>(get(buf, pos, 4, path, "values")));
    store.add(std::move(id), values);
  }
  if (pos != buf.size())
    fail(ErrorCode::kValidation, path.string() + ": " + std::to_string(buf.size() - pos) +
                                     " trailing bytes at offset " + std::to_string(pos));
  return store;
}

FeatureStore ingest_activation_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "activation directory not found: " + dir.string());
  std::vector<fs::path> sidecars;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") sidecars.push_back(e.path());
  std::sort(sidecars.begin(), sidecars.end());
  if (sidecars.empty()) fail(ErrorCode::kValidation, dir.string() + ": no .json shape sidecars found");

  std::optional<FeatureStore> store;
  for (const auto& side : sidecars) {
    nlohmann::json doc;
    try {
      std::ifstream in(side);
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kValidation, side.string() + ": " + e.what());
    }
    const std::string stem = side.stem().string();
    std::string id, file, layout;
    std::vector<std::array<int, 3>> shapes;
    try {
      id = doc.value("image_id", stem);
      file = doc.value("file", stem + ".f32");
      layout = doc.value("layout", "hwc");
      for (const auto& b : doc.at("blocks")) {
        const auto s = b.at("shape").get<std::vector<int>>();
        if (s.size() != 3) fail(ErrorCode::kValidation, side.string() + ": block shape must be [h, w, c]");
        shapes.push_back({s[0], s[1], s[2]});
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kValidation, side.string() + ": " + e.what());
    }
    if (layout != "hwc" && layout != "chw")
      fail(ErrorCode::kValidation, side.string() + ": layout must be \"hwc\" or \"chw\"");
    if (shapes.empty()) fail(ErrorCode::kValidation, side.string() + ": no blocks listed");

    const auto raw = slurp(dir / file);
    std::size_t expected = 0;
    for (const auto& s : shapes) {
      if (s[0] <= 0 || s[1] <= 0 || s[2] <= 0)
        fail(ErrorCode::kValidation, side.string() + ": block dims must be positive");
      expected += static_cast<std::size_t>(s[0]) * s[1] * s[2];
    }
    if (raw.size() != expected * 4)
      fail(ErrorCode::kValidation, (dir / file).string() + ": holds " + std::to_string(raw.size()) +
                                       " bytes, shapes in " + side.filename().string() + " need " +
                                       std::to_string(expected * 4));
    std::vector<ActivationBlock> blocks;
    std::size_t pos = 0;
    for (const auto& s : shapes) {
      ActivationBlock b{s[0], s[1], s[2], {}};
      const std::size_t n = static_cast<std::size_t>(s[0]) * s[1] * s[2];
      b.data.resize(n);
      std::vector<float> flat(n);
      for (auto& v : flat) v = std::bit_cast<float>(static_cast<std::uint32_t>(get(raw, pos, 4, dir / file, "tensor")));
      if (layout == "hwc") {
        b.data = std::move(flat);
      } else {
        const std::size_t hw = static_cast<std::size_t>(s[0]) * s[1];
        for (int c = 0; c < s[2]; ++c)
          for (std::size_t p = 0; p < hw; ++p) b.data[p * s[2] + c] = flat[c * hw + p];
      }
      blocks.push_back(std::move(b));
    }
    const auto feat = mlsp_concat(blocks);
    if (!store) store.emplace(static_cast<int>(feat.size()));
    if (static_cast<int>(feat.size()) != store->dim())
      fail(ErrorCode::kValidation, side.string() + ": pooled dimension " + std::to_string(feat.size()) +
                                       " differs from earlier records (" + std::to_string(store->dim()) + ")");
    store->add(id, feat);
  }
  return std::move(*store);
}

FeatureScaler FeatureScaler::fit(const FeatureStore& store, std::span<const std::size_t> rows) {
  require(rows.size() >= 2, "feature standardization needs at least two rows");
  const auto d = static_cast<std::size_t>(store.dim());
  FeatureScaler s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (auto r : rows) {
    const auto x = store.row(r);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(rows.size());
  for (auto r : rows) {
    const auto x = store.row(r);
    for (std::size_t j = 0; j < d; ++j) s.scale[j] += (x[j] - s.mean[j]) * (x[j] - s.mean[j]);
  }
  // constant dimensions pass through centred
  for (auto& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(rows.size() - 1));
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

std::vector<double> FeatureScaler::apply(std::span<const float> x) const {
  require(x.size() == mean.size(), "feature standardization: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

std::string FeatureScaler::to_json() const {
  nlohmann::ordered_json doc;
  doc["mean"] = mean;
  doc["scale"] = scale;
  return doc.dump();
}

FeatureScaler FeatureScaler::from_json(const std::string& text) {
  FeatureScaler s;
  try {
    const auto doc = nlohmann::json::parse(text);
    s.mean = doc.at("mean").get<std::vector<double>>();
    s.scale = doc.at("scale").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed feature scaler: ") + e.what());
  }
  if (s.mean.size() != s.scale.size() || s.mean.empty())
    fail(ErrorCode::kValidation, "malformed feature scaler: mean/scale length mismatch");
  return s;
}

}  // namespace iqa
