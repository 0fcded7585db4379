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

#ifndef CUATRACE_STP_HPP
#define CUATRACE_STP_HPP

// Spatial token pruning: per frame, patches are joined to their 4-neighbours
// when their feature distance is strictly below tau_s, and every patch in a
// connected component larger than tau_large is pruned.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "cuatrace/error.hpp"
#include "cuatrace/grid.hpp"
#include "cuatrace/mask.hpp"

namespace cuatrace {

struct StpConfig {
  double tau_s = 0.3;
  std::size_t tau_large = 40;

  void validate() const {
    require(std::isfinite(tau_s) && tau_s >= 0.0, "StpConfig: tau_s must be finite and >= 0");
    require(tau_large >= 1, "StpConfig: tau_large must be >= 1");
  }
};

struct NeighborDistances {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> horizontal;  // height x (width - 1)
  std::vector<double> vertical;    // (height - 1) x width

  double right_of(std::size_t row, std::size_t col) const {
    return horizontal[row * (width - 1) + col];
  }
  double below(std::size_t row, std::size_t col) const { return vertical[row * width + col]; }
};

inline NeighborDistances neighbor_distances(const FrameView& frame) {
  require(frame.height >= 1 && frame.width >= 1 && frame.dim >= 1 &&
              frame.data.size() == frame.height * frame.width * frame.dim,
          "neighbor_distances: malformed frame");
  NeighborDistances out{frame.height, frame.width, {}, {}};
  out.horizontal.reserve(frame.height * (frame.width - 1));
  out.vertical.reserve((frame.height - 1) * frame.width);
  for (std::size_t i = 0; i < frame.height; ++i)
    for (std::size_t j = 0; j + 1 < frame.width; ++j)
      out.horizontal.push_back(l2_distance(frame.feature(i, j), frame.feature(i, j + 1)));
  for (std::size_t i = 0; i + 1 < frame.height; ++i)
    for (std::size_t j = 0; j < frame.width; ++j)
      out.vertical.push_back(l2_distance(frame.feature(i, j), frame.feature(i + 1, j)));
  return out;
}

/// Disjoint-set forest with path compression and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) x = std::exchange(parent_[x], root);
    return root;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Connected components of one frame. Each component is labelled by the
/// smallest flattened index among its members.
struct ComponentLabeling {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::size_t> labels;  // per patch
  std::vector<std::size_t> sizes;   // indexed by label; 0 for non-label indices

  std::size_t label(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
  std::size_t component_size(std::size_t index) const { return sizes[labels[index]]; }
  std::size_t component_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) n += labels[k] == k ? 1 : 0;
    return n;
  }
};

inline ComponentLabeling build_components(const FrameView& frame, double tau_s) {
  require(std::isfinite(tau_s), "build_components: tau_s must be finite");
  const NeighborDistances dist = neighbor_distances(frame);
  const std::size_t h = frame.height, w = frame.width, n = h * w;

  UnionFind uf(n);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (j + 1 < w && dist.right_of(i, j) < tau_s) uf.unite(i * w + j, i * w + j + 1);
      if (i + 1 < h && dist.below(i, j) < tau_s) uf.unite(i * w + j, (i + 1) * w + j);
    }
  }

  ComponentLabeling out{h, w, std::vector<std::size_t>(n), std::vector<std::size_t>(n, 0)};
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> root_label(n, kUnset);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t root = uf.find(k);
    if (root_label[root] == kUnset) root_label[root] = k;  // first visit is the minimum
    out.labels[k] = root_label[root];
    ++out.sizes[out.labels[k]];
  }
  return out;
}

/// Keep bits for one frame: 0 where the patch's component is larger than tau_large.
inline std::vector<std::uint8_t> frame_spatial_mask(const FrameView& frame, const StpConfig& cfg) {
  const ComponentLabeling comps = build_components(frame, cfg.tau_s);
  std::vector<std::uint8_t> bits(comps.labels.size());
  for (std::size_t k = 0; k < bits.size(); ++k)
    bits[k] = comps.component_size(k) > cfg.tau_large ? 0 : 1;
  return bits;
}

inline SpatialMask spatial_mask(const FeatureGrid& grid, const StpConfig& cfg) {
  cfg.validate();
  SpatialMask mask{grid.frames(), grid.height(), grid.width(), {}};
  mask.bits.reserve(grid.total_tokens());
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    const auto bits = frame_spatial_mask(grid.frame(t), cfg);
    mask.bits.insert(mask.bits.end(), bits.begin(), bits.end());
  }
  return mask;
}

}  // namespace cuatrace

#endif  // CUATRACE_STP_HPP
