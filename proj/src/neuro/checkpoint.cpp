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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "iqa/csv.hpp"
#include "iqa/error.hpp"
#include "iqa/neuro.hpp"

namespace iqa::nn {

namespace {

constexpr char kMagic[4] = {'I', 'Q', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string name) : buf_(std::move(data)), name_(std::move(name)) {}

  void need(std::size_t n, const char* what) {
    if (pos_ + n > buf_.size())
      fail(ErrorCode::kValidation, name_ + ": truncated checkpoint while reading " + what + " at offset " +
                                       std::to_string(pos_));
  }
  std::uint64_t uint(int bytes, const char* what) {
    need(static_cast<std::size_t>(bytes), what);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint(8, what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == buf_.size(); }
  const std::string& name() const { return name_; }

 private:
  std::vector<char> buf_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const NetworkModel& model, const std::filesystem::path& path) {
  model.validate();
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.input_dim));
  w.u32(static_cast<std::uint32_t>(model.heads.size()));
  for (const auto& h : model.heads) {
    require(h.name.size() <= 0xFFFF, "head name too long");
    w.u16(static_cast<std::uint16_t>(h.name.size()));
    w.bytes(h.name.data(), h.name.size());
    w.u32(static_cast<std::uint32_t>(h.layers.size()));
    for (const auto& l : h.layers) {
      w.u32(static_cast<std::uint32_t>(l.in_dim()));
      w.u32(static_cast<std::uint32_t>(l.out_dim()));
      w.u8(static_cast<std::uint8_t>(l.activation));
      w.f64(l.dropout);
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias(r));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

NetworkModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());
  if (r.str(4, "magic") != std::string(kMagic, 4))
    fail(ErrorCode::kValidation, path.string() + ": not an IQNN checkpoint (bad magic at offset 0)");
  const auto version = r.uint(4, "version");
  if (version != kVersion)
    fail(ErrorCode::kValidation, path.string() + ": unsupported checkpoint version " + std::to_string(version));
  NetworkModel model;
  model.input_dim = static_cast<int>(r.uint(4, "input dimension"));
  const auto heads = r.uint(4, "head count");
  for (std::uint64_t k = 0; k < heads; ++k) {
    Head h;
    h.name = r.str(r.uint(2, "head name length"), "head name");
    const auto layers = r.uint(4, "layer count");
    for (std::uint64_t li = 0; li < layers; ++li) {
      DenseLayer l;
      const auto in_dim = static_cast<Eigen::Index>(r.uint(4, "layer input"));
      const auto out_dim = static_cast<Eigen::Index>(r.uint(4, "layer output"));
      const auto act = r.uint(1, "activation");
      if (act > 1) fail(ErrorCode::kValidation, path.string() + ": unknown activation code at offset " + std::to_string(r.pos() - 1));
      l.activation = static_cast<Activation>(act);
      l.dropout = r.f64("dropout");
      r.need(static_cast<std::size_t>((in_dim * out_dim + out_dim) * 8), "layer parameters");
      l.weight.resize(out_dim, in_dim);
      l.bias.resize(out_dim);
      for (Eigen::Index row = 0; row < out_dim; ++row)
        for (Eigen::Index c = 0; c < in_dim; ++c) l.weight(row, c) = r.f64("weight");
      for (Eigen::Index row = 0; row < out_dim; ++row) l.bias(row) = r.f64("bias");
      h.layers.push_back(std::move(l));
    }
    model.heads.push_back(std::move(h));
  }
  if (!r.done()) fail(ErrorCode::kValidation, path.string() + ": trailing bytes after offset " + std::to_string(r.pos()));
  try {
    model.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kValidation, path.string() + ": " + e.what());
  }
  return model;
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"epoch", "train_loss", "val_loss", "val_srocc"};
  for (const auto& h : history)
    t.rows.push_back({std::to_string(h.epoch), csv::format_double(h.train_loss), csv::format_double(h.val_loss),
                      csv::format_double(h.val_srocc)});
  csv::write(t, path);
}

}  // namespace iqa::nn
