// Copyright 2026 The cuatrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CUATRACE_IMAGE_HPP
#define CUATRACE_IMAGE_HPP

// 8-bit RGB images, PNG/JPEG decoding via libpng and libjpeg.

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "cuatrace/bytes.hpp"
#include "cuatrace/error.hpp"

namespace cuatrace {

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

  std::uint8_t* pixel(std::size_t x, std::size_t y) { return &rgb[(y * width + x) * 3]; }
  const std::uint8_t* pixel(std::size_t x, std::size_t y) const { return &rgb[(y * width + x) * 3]; }

  void fill_rect(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h, std::uint8_t r,
                 std::uint8_t g, std::uint8_t b) {
    for (std::size_t y = y0; y < std::min(height, y0 + h); ++y)
      for (std::size_t x = x0; x < std::min(width, x0 + w); ++x) {
        auto* p = pixel(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
      }
  }

  friend bool operator==(const Image&, const Image&) = default;
};

namespace detail {

inline bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

inline bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

inline Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    fail(ErrorKind::kIngestion, std::string("png decode: ") + img.message);
  img.format = PNG_FORMAT_RGB;
  Image out(img.width, img.height);
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorKind::kIngestion, "png decode: " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Kept free of C++ objects with destructors between setjmp and longjmp.
inline bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& rgb,
                            std::size_t& width, std::size_t& height, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    error = jerr.message;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  rgb.resize(width * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace detail

inline Image decode_image(std::span<const std::uint8_t> bytes) {
  if (detail::is_png(bytes)) return detail::decode_png(bytes);
  if (detail::is_jpeg(bytes)) {
    Image out;
    std::string error;
    if (!detail::decode_jpeg_raw(bytes, out.rgb, out.width, out.height, error))
      fail(ErrorKind::kIngestion, "jpeg decode: " + error);
    return out;
  }
  fail(ErrorKind::kIngestion, "unrecognized image format (expected PNG or JPEG)");
}

inline Image load_image(const std::filesystem::path& path) {
  Bytes bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::kIngestion, e.message());
  }
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    fail(ErrorKind::kIngestion, path.string() + ": " + e.message());
  }
}

/// PNG encoding of 8-bit RGB (channels = 3) or grayscale (channels = 1) pixels.
inline Bytes encode_png(std::span<const std::uint8_t> pixels, std::size_t width,
                        std::size_t height, int channels) {
  require(channels == 1 || channels == 3, "encode_png: channels must be 1 or 3");
  require(pixels.size() == width * height * static_cast<std::size_t>(channels),
          "encode_png: pixel buffer size mismatch");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr))
    fail(ErrorKind::kIo, std::string("png encode: ") + img.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr))
    fail(ErrorKind::kIo, std::string("png encode: ") + img.message);
  out.resize(size);
  return out;
}

inline Bytes encode_png(const Image& image) {
  return encode_png(image.rgb, image.width, image.height, 3);
}

inline void save_png(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_png(image));
}

/// Extends the image to multiples of `multiple` by replicating the last row
/// and column.
inline Image pad_to_multiple(const Image& image, std::size_t multiple) {
  require(multiple >= 1, "pad_to_multiple: multiple must be >= 1");
  const std::size_t w = (image.width + multiple - 1) / multiple * multiple;
  const std::size_t h = (image.height + multiple - 1) / multiple * multiple;
  if (w == image.width && h == image.height) return image;
  Image out(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const auto* src = image.pixel(std::min(x, image.width - 1), std::min(y, image.height - 1));
      std::copy(src, src + 3, out.pixel(x, y));
    }
  return out;
}

/// Bilinear resample with pixel-center alignment.
inline Image resize_bilinear(const Image& image, std::size_t width, std::size_t height) {
  require(width >= 1 && height >= 1 && image.width >= 1 && image.height >= 1,
          "resize_bilinear: empty image");
  Image out(width, height);
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (int c = 0; c < 3; ++c) {
        const double top = image.pixel(x0, y0)[c] * (1 - wx) + image.pixel(x1, y0)[c] * wx;
        const double bottom = image.pixel(x0, y1)[c] * (1 - wx) + image.pixel(x1, y1)[c] * wx;
        out.pixel(x, y)[c] = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bottom * wy));
      }
    }
  }
  return out;
}

/// Rescales to 720 rows, preserving aspect ratio.
inline Image resize_to_720p(const Image& image) {
  constexpr std::size_t kRows = 720;
  if (image.height == kRows) return image;
  const auto width = static_cast<std::size_t>(std::max<long>(
      1, std::lround(static_cast<double>(image.width) * kRows / static_cast<double>(image.height))));
  return resize_bilinear(image, width, kRows);
}

}  // namespace cuatrace

#endif  // CUATRACE_IMAGE_HPP
