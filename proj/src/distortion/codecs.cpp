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

#include <openjpeg.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"

namespace iqa {

ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) {
  return decode_jpeg(encode_jpeg(img, std::clamp(quality, 1, 100)));
}

namespace {

struct MemoryStream {
  std::vector<std::uint8_t> bytes;
  std::size_t pos = 0;
};

OPJ_SIZE_T stream_write(void* buffer, OPJ_SIZE_T n, void* user) {
  auto* s = static_cast<MemoryStream*>(user);
  const auto* src = static_cast<const std::uint8_t*>(buffer);
  if (s->pos + n > s->bytes.size()) s->bytes.resize(s->pos + n);
  std::memcpy(s->bytes.data() + s->pos, src, n);
  s->pos += n;
  return n;
}

OPJ_SIZE_T stream_read(void* buffer, OPJ_SIZE_T n, void* user) {
  auto* s = static_cast<MemoryStream*>(user);
  if (s->pos >= s->bytes.size()) return static_cast<OPJ_SIZE_T>(-1);
  const std::size_t count = std::min<std::size_t>(n, s->bytes.size() - s->pos);
  std::memcpy(buffer, s->bytes.data() + s->pos, count);
  s->pos += count;
  return count;
}

OPJ_OFF_T stream_skip(OPJ_OFF_T n, void* user) {
  auto* s = static_cast<MemoryStream*>(user);
  const auto target = static_cast<OPJ_OFF_T>(s->pos) + n;
  if (target < 0) return -1;
  s->pos = static_cast<std::size_t>(target);
  return n;
}

OPJ_BOOL stream_seek(OPJ_OFF_T n, void* user) {
  auto* s = static_cast<MemoryStream*>(user);
  if (n < 0) return OPJ_FALSE;
  s->pos = static_cast<std::size_t>(n);
  return OPJ_TRUE;
}

struct CodecDeleter {
  void operator()(opj_codec_t* c) const { opj_destroy_codec(c); }
};
struct StreamDeleter {
  void operator()(opj_stream_t* s) const { opj_stream_destroy(s); }
};
struct ImageDeleter {
  void operator()(opj_image_t* i) const { opj_image_destroy(i); }
};

opj_stream_t* make_stream(MemoryStream& mem, bool input) {
  opj_stream_t* stream = opj_stream_default_create(input ? OPJ_TRUE : OPJ_FALSE);
  if (!stream) fail(ErrorCode::kRuntime, "openjpeg: cannot create stream");
  opj_stream_set_user_data(stream, &mem, nullptr);
  opj_stream_set_write_function(stream, stream_write);
  opj_stream_set_read_function(stream, stream_read);
  opj_stream_set_skip_function(stream, stream_skip);
  opj_stream_set_seek_function(stream, stream_seek);
  if (input) opj_stream_set_user_data_length(stream, mem.bytes.size());
  return stream;
}

std::vector<std::uint8_t> encode_j2k(const ImageBuffer& img, double ratio) {
  const int w = img.width();
  const int h = img.height();
  std::array<opj_image_cmptparm_t, 3> cmpt{};
  for (auto& c : cmpt) {
    c.dx = 1;
    c.dy = 1;
    c.w = static_cast<OPJ_UINT32>(w);
    c.h = static_cast<OPJ_UINT32>(h);
    c.prec = 8;
    c.sgnd = 0;
  }
  std::unique_ptr<opj_image_t, ImageDeleter> image(opj_image_create(3, cmpt.data(), OPJ_CLRSPC_SRGB));
  if (!image) fail(ErrorCode::kRuntime, "openjpeg: cannot allocate image");
  image->x0 = 0;
  image->y0 = 0;
  image->x1 = static_cast<OPJ_UINT32>(w);
  image->y1 = static_cast<OPJ_UINT32>(h);
  for (int c = 0; c < 3; ++c) {
    const auto plane = img.plane(c);
    for (std::size_t i = 0; i < plane.size(); ++i) image->comps[c].data[i] = to_u8(plane[i]);
  }

  opj_cparameters_t params;
  opj_set_default_encoder_parameters(&params);
  params.tcp_numlayers = 1;
  params.tcp_rates[0] = static_cast<float>(ratio);
  params.cp_disto_alloc = 1;
  params.irreversible = 1;
  params.tcp_mct = 1;
  int resolutions = 1;
  while (resolutions < 6 && (std::min(w, h) >> resolutions) >= 1) ++resolutions;
  params.numresolution = resolutions;

  std::unique_ptr<opj_codec_t, CodecDeleter> codec(opj_create_compress(OPJ_CODEC_J2K));
  if (!codec || !opj_setup_encoder(codec.get(), &params, image.get()))
    fail(ErrorCode::kRuntime, "openjpeg: encoder setup failed");
  MemoryStream mem;
  std::unique_ptr<opj_stream_t, StreamDeleter> stream(make_stream(mem, false));
  if (!opj_start_compress(codec.get(), image.get(), stream.get()) || !opj_encode(codec.get(), stream.get()) ||
      !opj_end_compress(codec.get(), stream.get()))
    fail(ErrorCode::kRuntime, "openjpeg: encoding failed");
  stream.reset();
  return std::move(mem.bytes);
}

ImageBuffer decode_j2k(std::vector<std::uint8_t> bytes, int width, int height) {
  opj_dparameters_t params;
  opj_set_default_decoder_parameters(&params);
  std::unique_ptr<opj_codec_t, CodecDeleter> codec(opj_create_decompress(OPJ_CODEC_J2K));
  if (!codec || !opj_setup_decoder(codec.get(), &params)) fail(ErrorCode::kRuntime, "openjpeg: decoder setup failed");
  MemoryStream mem{std::move(bytes), 0};
  std::unique_ptr<opj_stream_t, StreamDeleter> stream(make_stream(mem, true));
  opj_image_t* raw = nullptr;
  if (!opj_read_header(stream.get(), codec.get(), &raw)) fail(ErrorCode::kRuntime, "openjpeg: bad header");
  std::unique_ptr<opj_image_t, ImageDeleter> image(raw);
  if (!opj_decode(codec.get(), stream.get(), image.get()) || !opj_end_decompress(codec.get(), stream.get()))
    fail(ErrorCode::kRuntime, "openjpeg: decoding failed");
  if (image->numcomps < 3 || static_cast<int>(image->comps[0].w) != width ||
      static_cast<int>(image->comps[0].h) != height)
    fail(ErrorCode::kRuntime, "openjpeg: decoded image has unexpected layout");
  ImageBuffer out(width, height, 3);
  for (int c = 0; c < 3; ++c) {
    auto plane = out.plane(c);
    for (std::size_t i = 0; i < plane.size(); ++i)
      plane[i] = from_u8(static_cast<std::uint8_t>(std::clamp(image->comps[c].data[i], 0, 255)));
  }
  return out;
}

}  // namespace

ImageBuffer jpeg2000_roundtrip(const ImageBuffer& img, double compression_ratio) {
  require(img.channels() == 3, "jpeg2000 round-trip needs an RGB image");
  require(compression_ratio >= 1.0, "jpeg2000 compression ratio must be >= 1");
  return decode_j2k(encode_j2k(img, compression_ratio), img.width(), img.height());
}

}  // namespace iqa
