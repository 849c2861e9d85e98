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

#include "iqa/iqa.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/friqa.hpp"
#include "iqa/imgcore.hpp"
#include "iqa/neuro.hpp"
#include "iqa/pipeline.hpp"

struct iqa_image {
  iqa::ImageBuffer buffer;
};

namespace {

thread_local std::string g_last_error;

iqa_status to_status(iqa::ErrorCode code) {
  switch (code) {
    case iqa::ErrorCode::kInvalidArgument: return IQA_ERR_INVALID_ARGUMENT;
    case iqa::ErrorCode::kValidation: return IQA_ERR_VALIDATION;
    case iqa::ErrorCode::kDegenerate: return IQA_ERR_DEGENERATE;
    case iqa::ErrorCode::kIo: return IQA_ERR_IO;
    case iqa::ErrorCode::kUnsupported: return IQA_ERR_UNSUPPORTED;
    case iqa::ErrorCode::kRuntime: return IQA_ERR_RUNTIME;
  }
  return IQA_ERR_RUNTIME;
}

template <typename F>
iqa_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    fn();
    return IQA_OK;
  } catch (const iqa::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IQA_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IQA_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return IQA_ERR_RUNTIME;
  }
}

void need(const void* p, const char* what) {
  if (!p) iqa::fail(iqa::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* iqa_last_error(void) { return g_last_error.c_str(); }

const char* iqa_status_name(iqa_status status) {
  switch (status) {
    case IQA_OK: return "ok";
    case IQA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case IQA_ERR_VALIDATION: return "validation";
    case IQA_ERR_DEGENERATE: return "degenerate";
    case IQA_ERR_IO: return "io";
    case IQA_ERR_UNSUPPORTED: return "unsupported";
    case IQA_ERR_RUNTIME: return "runtime";
  }
  return "unknown";
}

const char* iqa_version(void) { return "0.1.0"; }

void iqa_set_verbosity(int level) { iqa::pipeline::set_verbosity(level); }

iqa_status iqa_image_create(int width, int height, int channels, const double* planar, iqa_image** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(planar, "planar");
    iqa::require(width > 0 && height > 0 && (channels == 1 || channels == 3), "bad image dimensions");
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    *out = new iqa_image{iqa::ImageBuffer(width, height, channels, std::vector<double>(planar, planar + n))};
  });
}

iqa_status iqa_image_read(const char* path, iqa_image** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(path, "path");
    *out = new iqa_image{iqa::read_image(path)};
  });
}

iqa_status iqa_image_write_png(const iqa_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    iqa::write_png(image->buffer, path);
  });
}

void iqa_image_free(iqa_image* image) { delete image; }

int iqa_image_width(const iqa_image* image) { return image ? image->buffer.width() : 0; }
int iqa_image_height(const iqa_image* image) { return image ? image->buffer.height() : 0; }
int iqa_image_channels(const iqa_image* image) { return image ? image->buffer.channels() : 0; }
const double* iqa_image_data(const iqa_image* image) { return image ? image->buffer.samples().data() : nullptr; }

iqa_status iqa_distort(const iqa_image* ref, const char* kind, int level, uint64_t seed, iqa_image** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(ref, "ref");
    need(kind, "kind");
    const iqa::DistortionSpec spec{iqa::kind_from_name(kind), level, seed};
    *out = new iqa_image{iqa::apply_distortion(ref->buffer, spec)};
  });
}

iqa_status iqa_synthetic_reference(int width, int height, uint64_t seed, iqa_image** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new iqa_image{iqa::synthetic_reference(width, height, seed)};
  });
}

iqa_status iqa_metric(const char* metric, const iqa_image* ref, const iqa_image* dist, double* out) {
  return guarded([&] {
    need(metric, "metric");
    need(ref, "ref");
    need(dist, "dist");
    need(out, "out");
    *out = iqa::compute_metric(metric, ref->buffer, dist->buffer);
  });
}

iqa_status iqa_plcc(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    *out = iqa::nn::plcc({x, n}, {y, n});
  });
}

iqa_status iqa_srocc(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    *out = iqa::eval::srocc({x, n}, {y, n});
  });
}

iqa_status iqa_run(const char* command, const char* config_json, char** result_json) {
  if (result_json) *result_json = nullptr;
  iqa_status status = IQA_OK;
  const iqa_status call = guarded([&] {
    need(command, "command");
    iqa::pipeline::Json config = iqa::pipeline::Json::object();
    if (config_json && *config_json) {
      try {
        config = iqa::pipeline::Json::parse(config_json);
      } catch (const iqa::pipeline::Json::parse_error& e) {
        iqa::fail(iqa::ErrorCode::kValidation, std::string("config is not valid JSON: ") + e.what());
      }
    }
    iqa::pipeline::CommandResult r = iqa::pipeline::run_command(command, config);
    if (r.failure) {
      status = to_status(*r.failure);
      r.body["error"] = r.message;
    }
    if (result_json) *result_json = dup_string(r.body.dump(2));
    if (r.failure) g_last_error = r.message;
  });
  if (call != IQA_OK) return call;
  return status;
}

void iqa_string_free(char* s) { std::free(s); }

size_t iqa_command_count(void) { return iqa::pipeline::command_names().size(); }

const char* iqa_command_name(size_t index) {
  static const std::vector<std::string> names = iqa::pipeline::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

}  // extern "C"
