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

#ifndef CUATRACE_MASK_IO_HPP
#define CUATRACE_MASK_IO_HPP

// Mask file layout (little-endian):
//   T u32 | H' u32 | W' u32 | T*H' rows of ceil(W'/8) bytes
// Bit j of a row lives in byte j/8 at position j%8 (LSB first). Token masks
// are written as T x 1 x N.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "cuatrace/bytes.hpp"
#include "cuatrace/image.hpp"
#include "cuatrace/mask.hpp"

namespace cuatrace {

namespace detail {

inline Bytes pack_mask_bits(std::size_t frames, std::size_t height, std::size_t width,
                            const std::vector<std::uint8_t>& bits) {
  Bytes out;
  put_u32(out, to_u32(frames, "mask frames"));
  put_u32(out, to_u32(height, "mask height"));
  put_u32(out, to_u32(width, "mask width"));
  const std::size_t row_bytes = (width + 7) / 8;
  for (std::size_t row = 0; row < frames * height; ++row) {
    const std::size_t base = out.size();
    out.resize(base + row_bytes, 0);
    for (std::size_t j = 0; j < width; ++j)
      if (bits[row * width + j]) out[base + j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
  }
  return out;
}

inline SpatialMask unpack_mask_bits(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  SpatialMask m{in.u32(), in.u32(), in.u32(), {}};
  const std::size_t row_bytes = (m.width + 7) / 8;
  m.bits.resize(m.frames * m.height * m.width);
  for (std::size_t row = 0; row < m.frames * m.height; ++row) {
    std::uint8_t cur = 0;
    for (std::size_t k = 0; k < row_bytes; ++k) {
      cur = in.u8();
      for (std::size_t b = 0; b < 8 && k * 8 + b < m.width; ++b)
        m.bits[row * m.width + k * 8 + b] = (cur >> b) & 1u;
    }
  }
  if (!in.at_end()) fail(ErrorKind::kIo, "mask: trailing bytes");
  return m;
}

}  // namespace detail

inline Bytes encode_mask(const SpatialMask& mask) {
  return detail::pack_mask_bits(mask.frames, mask.height, mask.width, mask.bits);
}

template <class Tag>
Bytes encode_mask(const TokenMask<Tag>& mask) {
  return detail::pack_mask_bits(mask.frames, 1, mask.tokens, mask.bits);
}

inline SpatialMask decode_spatial_mask(std::span<const std::uint8_t> bytes) {
  return detail::unpack_mask_bits(bytes);
}

template <class Tag>
TokenMask<Tag> decode_token_mask(std::span<const std::uint8_t> bytes) {
  SpatialMask m = detail::unpack_mask_bits(bytes);
  return {m.frames, m.height * m.width, std::move(m.bits)};
}

/// Grayscale strip of all frames side by side: white keeps, black prunes,
/// frames separated by a one-pixel mid-gray column. Each patch is drawn as a
/// `cell` x `cell` square.
struct MaskRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> gray;
};

inline MaskRaster render_mask(const SpatialMask& mask, std::size_t cell = 8) {
  require(cell >= 1, "render_mask: cell must be >= 1");
  const std::size_t frame_w = mask.width * cell;
  MaskRaster r;
  r.width = mask.frames == 0 ? 0 : mask.frames * frame_w + (mask.frames - 1);
  r.height = mask.height * cell;
  r.gray.assign(r.width * r.height, 128);
  for (std::size_t t = 0; t < mask.frames; ++t) {
    const std::size_t x0 = t * (frame_w + 1);
    for (std::size_t y = 0; y < r.height; ++y)
      for (std::size_t x = 0; x < frame_w; ++x)
        r.gray[y * r.width + x0 + x] = mask.keep(t, y / cell, x / cell) ? 255 : 0;
  }
  return r;
}

/// Token masks need the grid shape to be drawn; tokens must equal height * width.
template <class Tag>
MaskRaster render_mask(const TokenMask<Tag>& mask, std::size_t height, std::size_t width,
                       std::size_t cell = 8) {
  require(height * width == mask.tokens, "render_mask: shape does not match token count");
  return render_mask(SpatialMask{mask.frames, height, width, mask.bits}, cell);
}

inline Bytes encode_pgm(const MaskRaster& r) {
  const std::string header =
      "P5\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), r.gray.begin(), r.gray.end());
  return out;
}

inline Bytes encode_png(const MaskRaster& r) { return encode_png(r.gray, r.width, r.height, 1); }

/// Writes PGM for a ".pgm" path, PNG otherwise.
inline void save_mask_image(const std::filesystem::path& path, const MaskRaster& r) {
  write_file(path, path.extension() == ".pgm" ? encode_pgm(r) : encode_png(r));
}

}  // namespace cuatrace

#endif  // CUATRACE_MASK_IO_HPP
