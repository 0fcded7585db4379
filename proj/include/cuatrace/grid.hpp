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

#ifndef CUATRACE_GRID_HPP
#define CUATRACE_GRID_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <ranges>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cuatrace/error.hpp"

namespace cuatrace {

template <class R>
concept NumericRange = std::ranges::contiguous_range<R> &&
                       std::is_arithmetic_v<std::ranges::range_value_t<R>>;

/// Euclidean distance, accumulated in double whatever the storage type.
template <NumericRange A, NumericRange B>
double l2_distance(const A& a, const B& b) {
  const auto n = std::ranges::size(a);
  require(n == std::ranges::size(b), "l2_distance: dimension mismatch");
  const auto* pa = std::ranges::data(a);
  const auto* pb = std::ranges::data(b);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = static_cast<double>(pa[k]) - static_cast<double>(pb[k]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Cosine similarity in double precision, clamped to [-1, 1].
///
/// Zero vectors: two zero vectors compare as identical (1.0), a zero vector
/// against a nonzero one compares as unrelated (0.0).
template <NumericRange A, NumericRange B>
double cosine_similarity(const A& a, const B& b) {
  const auto n = std::ranges::size(a);
  require(n == std::ranges::size(b), "cosine_similarity: dimension mismatch");
  const auto* pa = std::ranges::data(a);
  const auto* pb = std::ranges::data(b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(pa[k]);
    const double y = static_cast<double>(pb[k]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

struct GridCoord {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Row-major token index of patch (row, col).
inline std::size_t flatten_index(std::size_t row, std::size_t col, std::size_t height,
                                 std::size_t width) {
  require(row < height && col < width, "flatten_index: coordinate out of range");
  return row * width + col;
}

inline GridCoord unflatten_index(std::size_t index, std::size_t height, std::size_t width) {
  require(width > 0 && index < height * width, "unflatten_index: index out of range");
  return {index / width, index % width};
}

/// Read-only T x N x D token tensor.
struct TokenTensorView {
  std::size_t frames = 0;
  std::size_t tokens = 0;
  std::size_t dim = 0;
  std::span<const float> data;

  std::span<const float> token(std::size_t t, std::size_t i) const {
    return data.subspan((t * tokens + i) * dim, dim);
  }
};

/// One frame of a FeatureGrid, H' x W' x D.
struct FrameView {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;
  std::span<const float> data;

  std::span<const float> feature(std::size_t row, std::size_t col) const {
    return data.subspan((row * width + col) * dim, dim);
  }
};

/// Dense patch features of a keyframe video, laid out (t, row, col, d).
class FeatureGrid {
 public:
  FeatureGrid() = default;

  FeatureGrid(std::size_t frames, std::size_t height, std::size_t width, std::size_t dim)
      : FeatureGrid(frames, height, width, dim,
                    std::vector<float>(checked_size(frames, height, width, dim), 0.0f)) {}

  FeatureGrid(std::size_t frames, std::size_t height, std::size_t width, std::size_t dim,
              std::vector<float> data)
      : frames_(frames), height_(height), width_(width), dim_(dim), data_(std::move(data)) {
    require(data_.size() == checked_size(frames, height, width, dim),
            "FeatureGrid: data length does not match T*H*W*D");
    require(std::ranges::all_of(data_, [](float v) { return std::isfinite(v); }),
            "FeatureGrid: non-finite feature value");
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t tokens_per_frame() const noexcept { return height_ * width_; }
  std::size_t total_tokens() const noexcept { return frames_ * height_ * width_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> token(std::size_t t, std::size_t index) const {
    return std::span<const float>(data_).subspan((t * tokens_per_frame() + index) * dim_, dim_);
  }
  std::span<const float> token(std::size_t t, std::size_t row, std::size_t col) const {
    return token(t, row * width_ + col);
  }

  void set_token(std::size_t t, std::size_t index, std::span<const float> value) {
    require(t < frames_ && index < tokens_per_frame(), "FeatureGrid: token out of range");
    require(value.size() == dim_, "FeatureGrid: feature dimension mismatch");
    require(std::ranges::all_of(value, [](float v) { return std::isfinite(v); }),
            "FeatureGrid: non-finite feature value");
    std::ranges::copy(value, data_.begin() + static_cast<std::ptrdiff_t>(
                                                 (t * tokens_per_frame() + index) * dim_));
  }

  FrameView frame(std::size_t t) const {
    require(t < frames_, "FeatureGrid: frame out of range");
    const std::size_t stride = tokens_per_frame() * dim_;
    return {height_, width_, dim_, std::span<const float>(data_).subspan(t * stride, stride)};
  }

  TokenTensorView tokens() const { return {frames_, tokens_per_frame(), dim_, data_}; }

  /// Frames [first, first + count) as a standalone grid.
  FeatureGrid slice(std::size_t first, std::size_t count) const {
    require(count >= 1 && first + count <= frames_, "FeatureGrid: slice out of range");
    const std::size_t stride = tokens_per_frame() * dim_;
    const auto begin = data_.begin() + static_cast<std::ptrdiff_t>(first * stride);
    return FeatureGrid(count, height_, width_, dim_,
                       std::vector<float>(begin, begin + static_cast<std::ptrdiff_t>(count * stride)));
  }

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;

 private:
  static std::size_t checked_size(std::size_t t, std::size_t h, std::size_t w, std::size_t d) {
    require(t >= 1 && h >= 1 && w >= 1 && d >= 1, "FeatureGrid: every extent must be >= 1");
    return t * h * w * d;
  }

  std::size_t frames_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

}  // namespace cuatrace

#endif  // CUATRACE_GRID_HPP
