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

#ifndef CUATRACE_MASK_HPP
#define CUATRACE_MASK_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cuatrace/error.hpp"

namespace cuatrace {

// Masks store one byte per token: 1 = keep, 0 = prune.

/// Per-frame keep mask over the H' x W' patch grid.
struct SpatialMask {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits;

  static SpatialMask filled(std::size_t frames, std::size_t height, std::size_t width,
                            bool keep) {
    return {frames, height, width,
            std::vector<std::uint8_t>(frames * height * width, keep ? 1 : 0)};
  }

  std::size_t tokens_per_frame() const noexcept { return height * width; }

  bool keep(std::size_t t, std::size_t row, std::size_t col) const {
    return bits[(t * height + row) * width + col] != 0;
  }
  bool keep(std::size_t t, std::size_t index) const {
    return bits[t * tokens_per_frame() + index] != 0;
  }
  void set(std::size_t t, std::size_t row, std::size_t col, bool value) {
    bits[(t * height + row) * width + col] = value ? 1 : 0;
  }

  std::size_t popcount() const {
    return static_cast<std::size_t>(std::ranges::count(bits, std::uint8_t{1}));
  }
  std::size_t frame_popcount(std::size_t t) const {
    const auto begin = bits.begin() + static_cast<std::ptrdiff_t>(t * tokens_per_frame());
    return static_cast<std::size_t>(
        std::count(begin, begin + static_cast<std::ptrdiff_t>(tokens_per_frame()), 1));
  }

  friend bool operator==(const SpatialMask&, const SpatialMask&) = default;
};

/// Keep mask indexed by (frame, flattened token). The tag keeps temporal and
/// combined masks from being mixed up at call sites.
template <class Tag>
struct TokenMask {
  std::size_t frames = 0;
  std::size_t tokens = 0;
  std::vector<std::uint8_t> bits;

  static TokenMask filled(std::size_t frames, std::size_t tokens, bool keep) {
    return {frames, tokens, std::vector<std::uint8_t>(frames * tokens, keep ? 1 : 0)};
  }

  bool keep(std::size_t t, std::size_t i) const { return bits[t * tokens + i] != 0; }
  void set(std::size_t t, std::size_t i, bool value) { bits[t * tokens + i] = value ? 1 : 0; }

  std::size_t popcount() const {
    return static_cast<std::size_t>(std::ranges::count(bits, std::uint8_t{1}));
  }
  std::size_t frame_popcount(std::size_t t) const {
    const auto begin = bits.begin() + static_cast<std::ptrdiff_t>(t * tokens);
    return static_cast<std::size_t>(
        std::count(begin, begin + static_cast<std::ptrdiff_t>(tokens), 1));
  }

  friend bool operator==(const TokenMask&, const TokenMask&) = default;
};

struct TemporalTag {};
struct CombinedTag {};
using TemporalMask = TokenMask<TemporalTag>;
using CombinedMask = TokenMask<CombinedTag>;

/// View of a spatial mask in token space (row-major flatten).
template <class Tag>
TokenMask<Tag> as_token_mask(const SpatialMask& spatial) {
  return {spatial.frames, spatial.tokens_per_frame(), spatial.bits};
}

}  // namespace cuatrace

#endif  // CUATRACE_MASK_HPP
