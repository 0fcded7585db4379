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

#ifndef CUATRACE_EXTRACT_HPP
#define CUATRACE_EXTRACT_HPP

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "cuatrace/error.hpp"
#include "cuatrace/grid.hpp"
#include "cuatrace/image.hpp"
#include "cuatrace/trajectory.hpp"

namespace cuatrace {

/// A feature extractor fills `out` (H' x W' x dim(), row-major) for an image
/// whose sides are exact multiples of `patch_size`.
template <class E>
concept FeatureExtractor =
    requires(const E& e, const Image& image, std::size_t patch_size, std::span<float> out) {
      { e.dim() } -> std::convertible_to<std::size_t>;
      e.extract(image, patch_size, out);
    };

/// Mean RGB per patch, scaled to [0, 1].
struct MeanRgbExtractor {
  std::size_t dim() const { return 3; }

  void extract(const Image& image, std::size_t patch_size, std::span<float> out) const {
    const std::size_t rows = image.height / patch_size, cols = image.width / patch_size;
    require(out.size() == rows * cols * 3, "MeanRgbExtractor: output size mismatch");
    const double scale = 1.0 / (255.0 * static_cast<double>(patch_size * patch_size));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        double sum[3] = {0, 0, 0};
        for (std::size_t y = i * patch_size; y < (i + 1) * patch_size; ++y)
          for (std::size_t x = j * patch_size; x < (j + 1) * patch_size; ++x) {
            const auto* p = image.pixel(x, y);
            sum[0] += p[0];
            sum[1] += p[1];
            sum[2] += p[2];
          }
        for (int c = 0; c < 3; ++c)
          out[(i * cols + j) * 3 + c] = static_cast<float>(sum[c] * scale);
      }
  }
};

struct ExtractOptions {
  std::size_t patch_size = 16;
  bool resize_to_720p = false;
};

/// Stacks per-frame extractions into a grid. Frames must share one
/// resolution; sides that are not patch multiples are padded by edge
/// replication.
template <FeatureExtractor E>
FeatureGrid extract_frames(const std::vector<Image>& frames, const E& extractor,
                           const ExtractOptions& opts = {}) {
  require(!frames.empty(), "extract: no frames");
  require(opts.patch_size >= 1, "extract: patch_size must be >= 1");
  const std::size_t dim = extractor.dim();
  require(dim >= 1, "extract: extractor dim must be >= 1");
  for (const Image& f : frames)
    require(f.width == frames[0].width && f.height == frames[0].height,
            "extract: keyframes have mixed resolutions");

  std::vector<float> data;
  std::size_t rows = 0, cols = 0;
  for (const Image& f : frames) {
    const Image padded = pad_to_multiple(opts.resize_to_720p ? resize_to_720p(f) : f, opts.patch_size);
    rows = padded.height / opts.patch_size;
    cols = padded.width / opts.patch_size;
    const std::size_t base = data.size();
    data.resize(base + rows * cols * dim);
    extractor.extract(padded, opts.patch_size, std::span<float>(data).subspan(base));
  }
  return FeatureGrid(frames.size(), rows, cols, dim, std::move(data));
}

template <FeatureExtractor E>
FeatureGrid extract_grid(const TrajectoryRecord& record, const E& extractor,
                         const ExtractOptions& opts = {}) {
  std::vector<Image> frames;
  frames.reserve(record.steps.size());
  for (const StepRecord& s : record.steps) {
    try {
      frames.push_back(s.keyframe.decode());
    } catch (const Error& e) {
      fail(ErrorKind::kIngestion, "step " + std::to_string(s.step_index) + ": " + e.message());
    }
  }
  return extract_frames(frames, extractor, opts);
}

inline FeatureGrid extract_grid(const TrajectoryRecord& record, const ExtractOptions& opts = {}) {
  return extract_grid(record, MeanRgbExtractor{}, opts);
}

}  // namespace cuatrace

#endif  // CUATRACE_EXTRACT_HPP
