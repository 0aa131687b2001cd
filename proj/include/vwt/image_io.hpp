// Copyright 2026 The VWT Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Image file formats. The raw "VWTI" container is always available:
//
//   "VWTI" | u32 version=1 | u32 H | u32 W | u32 C | H*W*C f32
//
// all little-endian. Binary PNM (P5/P6) is always available; PNG and JPEG
// require building with VWT_WITH_PNG / VWT_WITH_JPEG.

#ifndef VWT_IMAGE_IO_HPP_
#define VWT_IMAGE_IO_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vwt/detail/binary_io.hpp"
#include "vwt/error.hpp"
#include "vwt/image.hpp"

#ifdef VWT_WITH_PNG
#include <png.h>
#endif
#ifdef VWT_WITH_JPEG
#include <jpeglib.h>
#endif

namespace vwt {

inline constexpr std::uint32_t kImageFormatVersion = 1;

enum class ImageFormat { kRaw, kPnm, kPng, kJpeg };

inline bool PngSupported() {
#ifdef VWT_WITH_PNG
  return true;
#else
  return false;
#endif
}

inline bool JpegSupported() {
#ifdef VWT_WITH_JPEG
  return true;
#else
  return false;
#endif
}

inline std::uint8_t QuantizeToByte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

namespace detail {

inline void CheckNonEmpty(std::size_t h, std::size_t w, std::size_t c) {
  Require(h > 0 && w > 0, ErrorCode::kCorruptFile, "zero-dimension image");
  Require(c == 1 || c == 3, ErrorCode::kUnsupportedFormat,
          "unsupported channel count " + std::to_string(c));
}

inline Image FromBytes(std::size_t h, std::size_t w, std::size_t c,
                       std::span<const std::uint8_t> bytes, double max_value) {
  std::vector<float> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    data[i] = static_cast<float>(bytes[i] / max_value);
  }
  return Image(h, w, c, std::move(data));
}

// Binary PNM (P5 gray, P6 rgb), 8 or 16 bit.
inline Image DecodePnm(std::span<const std::uint8_t> buf) {
  std::size_t pos = 2;
  const std::size_t channels = buf[1] == '6' ? 3 : 1;
  auto skip = [&] {
    while (pos < buf.size()) {
      if (std::isspace(buf[pos])) {
        ++pos;
      } else if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n' && buf[pos] != '\r') ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    skip();
    Require(pos < buf.size() && std::isdigit(buf[pos]), ErrorCode::kCorruptFile,
            std::string("PNM header: missing ") + what);
    std::size_t n = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      n = n * 10 + (buf[pos++] - '0');
      Require(n < (1u << 30), ErrorCode::kCorruptFile, "PNM header value too large");
    }
    return n;
  };
  const std::size_t w = number("width");
  const std::size_t h = number("height");
  const std::size_t max_value = number("max value");
  CheckNonEmpty(h, w, channels);
  Require(max_value > 0 && max_value < 65536, ErrorCode::kCorruptFile,
          "PNM max value out of range");
  Require(pos < buf.size() && std::isspace(buf[pos]), ErrorCode::kCorruptFile,
          "PNM header not terminated");
  ++pos;
  const std::size_t count = h * w * channels;
  const std::size_t bytes_per = max_value > 255 ? 2 : 1;
  Require(buf.size() - pos >= count * bytes_per, ErrorCode::kTruncated, "PNM pixel data truncated");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t v = buf[pos + i * bytes_per];
    if (bytes_per == 2) v = (v << 8) | buf[pos + 2 * i + 1];
    Require(v <= max_value, ErrorCode::kCorruptFile, "PNM sample exceeds max value");
    data[i] = static_cast<float>(static_cast<double>(v) / static_cast<double>(max_value));
  }
  return Image(h, w, channels, std::move(data));
}

inline Image DecodeRaw(std::span<const std::uint8_t> buf) {
  ByteReader r(buf);
  Require(r.MagicIs("VWTI"), ErrorCode::kBadMagic, "not a VWTI image");
  const std::uint32_t version = r.U32();
  Require(version == kImageFormatVersion, ErrorCode::kVersionMismatch,
          "unsupported VWTI version " + std::to_string(version));
  const std::size_t h = r.U32();
  const std::size_t w = r.U32();
  const std::size_t c = r.U32();
  CheckNonEmpty(h, w, c);
  std::vector<float> data(h * w * c);
  r.F32s(data);
  for (float v : data) {
    Require(v >= 0.0f && v <= 1.0f, ErrorCode::kCorruptFile, "VWTI value outside [0,1]");
  }
  return Image(h, w, c, std::move(data));
}

#ifdef VWT_WITH_PNG
inline Image DecodePng(std::span<const std::uint8_t> buf) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, buf.data(), buf.size())) {
    throw Error(ErrorCode::kCorruptFile, std::string("PNG: ") + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    CheckNonEmpty(0, 0, 1);
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kCorruptFile, "PNG: " + msg);
  }
  return FromBytes(png.height, png.width, color ? 3 : 1, pixels, 255.0);
}
#endif

#ifdef VWT_WITH_JPEG
struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void JpegErrorExit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Only trivially destructible state lives between setjmp and longjmp.
inline bool DecodeJpegInto(std::span<const std::uint8_t> buf, std::vector<std::uint8_t>& pixels,
                           std::size_t& h, std::size_t& w, std::size_t& c, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = JpegErrorExit;
  if (setjmp(err.jump)) {
    std::copy(err.message, err.message + JMSG_LENGTH_MAX, message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, buf.data(), static_cast<unsigned long>(buf.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  h = cinfo.output_height;
  w = cinfo.output_width;
  c = static_cast<std::size_t>(cinfo.output_components);
  pixels.resize(h * w * c);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + cinfo.output_scanline * w * c;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline Image DecodeJpeg(std::span<const std::uint8_t> buf) {
  std::vector<std::uint8_t> pixels;
  std::size_t h = 0, w = 0, c = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!DecodeJpegInto(buf, pixels, h, w, c, message)) {
    throw Error(ErrorCode::kCorruptFile, std::string("JPEG: ") + message);
  }
  CheckNonEmpty(h, w, c);
  return FromBytes(h, w, c, pixels, 255.0);
}
#endif

}  // namespace detail

inline Image DecodeImage(std::span<const std::uint8_t> buf) {
  auto starts_with = [&](std::initializer_list<std::uint8_t> sig) {
    return buf.size() >= sig.size() && std::equal(sig.begin(), sig.end(), buf.begin());
  };
  if (starts_with({'V', 'W', 'T', 'I'})) return detail::DecodeRaw(buf);
  if (starts_with({'P', '5'}) || starts_with({'P', '6'})) return detail::DecodePnm(buf);
  if (starts_with({0x89, 'P', 'N', 'G'})) {
#ifdef VWT_WITH_PNG
    return detail::DecodePng(buf);
#else
    throw Error(ErrorCode::kUnsupportedFormat, "PNG support not compiled in");
#endif
  }
  if (starts_with({0xFF, 0xD8, 0xFF})) {
#ifdef VWT_WITH_JPEG
    return detail::DecodeJpeg(buf);
#else
    throw Error(ErrorCode::kUnsupportedFormat, "JPEG support not compiled in");
#endif
  }
  throw Error(ErrorCode::kUnsupportedFormat, "unrecognized image format");
}

// Format is detected from content, not the file extension.
inline Image LoadImage(const std::filesystem::path& path) {
  const auto bytes = detail::ReadFileBytes(path);
  try {
    return DecodeImage(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

inline std::vector<std::uint8_t> EncodeRaw(const Image& img) {
  detail::ByteWriter w;
  w.Magic("VWTI");
  w.U32(kImageFormatVersion);
  w.U32(static_cast<std::uint32_t>(img.height()));
  w.U32(static_cast<std::uint32_t>(img.width()));
  w.U32(static_cast<std::uint32_t>(img.channels()));
  w.F32s(img.data());
  return w.bytes();
}

inline void SaveImageRaw(const Image& img, const std::filesystem::path& path) {
  detail::WriteFileBytes(path, EncodeRaw(img));
}

// Always P6; grayscale is replicated into three channels.
inline std::vector<std::uint8_t> EncodePpm(const Image& img) {
  const Image rgb = ToRgb(img);
  const std::string header =
      "P6\n" + std::to_string(rgb.width()) + " " + std::to_string(rgb.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + rgb.size());
  for (float v : rgb.data()) out.push_back(QuantizeToByte(v));
  return out;
}

inline void SavePpm(const Image& img, const std::filesystem::path& path) {
  detail::WriteFileBytes(path, EncodePpm(img));
}

inline void SavePng(const Image& img, const std::filesystem::path& path) {
#ifdef VWT_WITH_PNG
  std::vector<std::uint8_t> pixels(img.size());
  std::transform(img.data().begin(), img.data().end(), pixels.begin(), QuantizeToByte);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, "PNG write failed for " + path.string() + ": " + png.message);
  }
#else
  (void)img;
  throw Error(ErrorCode::kUnsupportedFormat,
              "PNG support not compiled in; cannot write " + path.string());
#endif
}

// Picks the encoder from the extension: .png, .ppm, or .vwti (raw).
inline void SaveImage(const Image& img, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") {
    SavePng(img, path);
  } else if (ext == ".ppm") {
    SavePpm(img, path);
  } else if (ext == ".vwti" || ext == ".raw") {
    SaveImageRaw(img, path);
  } else {
    throw Error(ErrorCode::kUnsupportedFormat, "cannot infer output format from " + path.string());
  }
}

}  // namespace vwt

#endif  // VWT_IMAGE_IO_HPP_
