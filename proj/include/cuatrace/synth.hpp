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

#ifndef CUATRACE_SYNTH_HPP
#define CUATRACE_SYNTH_HPP

// Synthetic GUI-like feature videos: a flat background, static chrome
// regions, and dynamic regions that change features and/or move per frame.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/error.hpp"
#include "cuatrace/grid.hpp"
#include "cuatrace/image.hpp"

namespace cuatrace {

struct Rect {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t height = 1;
  std::size_t width = 1;
};

struct StaticRegion {
  Rect rect;
  std::vector<float> feature;
};

struct DynamicRegion {
  Rect rect;  // position at frame 0
  std::vector<std::vector<float>> schedule;  // feature at frame t is schedule[t % size]
  long row_step = 0;  // movement per frame, wrapping inside the grid
  long col_step = 0;
  bool random_features = false;  // seeded random feature every frame instead of schedule
};

struct SceneSpec {
  std::size_t height = 16;  // grid rows (patches)
  std::size_t width = 16;
  std::size_t dim = 3;
  std::size_t frames = 10;
  std::uint64_t seed = 0;
  std::size_t patch_size = 16;  // pixels per patch when rendering
  std::vector<float> background = {0.9f, 0.9f, 0.9f};
  float static_noise = 0.0f;  // per-location offset in [-a, a], identical in every frame
  std::vector<StaticRegion> static_regions;
  std::vector<DynamicRegion> dynamic_regions;

  void validate() const {
    require(height >= 1 && width >= 1 && dim >= 1 && frames >= 1 && patch_size >= 1,
            "SceneSpec: extents must be >= 1");
    require(background.size() == dim, "SceneSpec: background dimension mismatch");
    require(std::isfinite(static_noise) && static_noise >= 0.0f, "SceneSpec: bad static_noise");
    auto in_bounds = [&](const Rect& r) {
      return r.height >= 1 && r.width >= 1 && r.row + r.height <= height && r.col + r.width <= width;
    };
    for (const auto& s : static_regions) {
      require(in_bounds(s.rect), "SceneSpec: static region out of bounds");
      require(s.feature.size() == dim, "SceneSpec: static region dimension mismatch");
    }
    for (const auto& d : dynamic_regions) {
      require(in_bounds(d.rect), "SceneSpec: dynamic region out of bounds");
      require(d.random_features || !d.schedule.empty(), "SceneSpec: dynamic region needs a schedule");
      for (const auto& f : d.schedule)
        require(f.size() == dim, "SceneSpec: dynamic schedule dimension mismatch");
    }
  }
};

namespace detail {

inline std::size_t wrap_offset(std::size_t origin, long step, std::size_t t, std::size_t room) {
  const long long pos = static_cast<long long>(origin) + static_cast<long long>(step) * static_cast<long long>(t);
  const long long m = static_cast<long long>(room);
  return static_cast<std::size_t>(((pos % m) + m) % m);
}

}  // namespace detail

/// Top-left corner of a dynamic region at frame t.
inline GridCoord region_position(const SceneSpec& spec, const DynamicRegion& d, std::size_t t) {
  return {detail::wrap_offset(d.rect.row, d.row_step, t, spec.height - d.rect.height + 1),
          detail::wrap_offset(d.rect.col, d.col_step, t, spec.width - d.rect.width + 1)};
}

inline FeatureGrid generate(const SceneSpec& spec) {
  spec.validate();
  const std::size_t n = spec.height * spec.width;
  std::mt19937_64 rng(spec.seed);

  std::vector<float> base(n * spec.dim);
  for (std::size_t k = 0; k < n; ++k)
    std::copy(spec.background.begin(), spec.background.end(), base.begin() + static_cast<std::ptrdiff_t>(k * spec.dim));
  for (const auto& s : spec.static_regions)
    for (std::size_t i = s.rect.row; i < s.rect.row + s.rect.height; ++i)
      for (std::size_t j = s.rect.col; j < s.rect.col + s.rect.width; ++j)
        std::copy(s.feature.begin(), s.feature.end(),
                  base.begin() + static_cast<std::ptrdiff_t>((i * spec.width + j) * spec.dim));
  if (spec.static_noise > 0.0f) {
    std::uniform_real_distribution<float> noise(-spec.static_noise, spec.static_noise);
    for (float& v : base) v += noise(rng);
  }

  std::vector<float> data;
  data.reserve(spec.frames * base.size());
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> feature(spec.dim);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const std::size_t offset = data.size();
    data.insert(data.end(), base.begin(), base.end());
    for (const auto& d : spec.dynamic_regions) {
      if (d.random_features)
        for (float& v : feature) v = unit(rng);
      else
        feature = d.schedule[t % d.schedule.size()];
      const GridCoord at = region_position(spec, d, t);
      for (std::size_t i = at.row; i < at.row + d.rect.height; ++i)
        for (std::size_t j = at.col; j < at.col + d.rect.width; ++j)
          std::copy(feature.begin(), feature.end(),
                    data.begin() + static_cast<std::ptrdiff_t>(offset + (i * spec.width + j) * spec.dim));
    }
  }
  return FeatureGrid(spec.frames, spec.height, spec.width, spec.dim, std::move(data));
}

/// Renders each frame as an RGB image, one flat patch_size square per patch.
/// Needs dim == 3 with features in [0, 1].
inline std::vector<Image> render_frames(const SceneSpec& spec, const FeatureGrid& grid) {
  require(grid.dim() == 3, "render_frames: needs 3-dimensional (RGB) features");
  std::vector<Image> out;
  const std::size_t p = spec.patch_size;
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    Image img(grid.width() * p, grid.height() * p);
    for (std::size_t i = 0; i < grid.height(); ++i)
      for (std::size_t j = 0; j < grid.width(); ++j) {
        const auto f = grid.token(t, i, j);
        auto channel = [&](int c) {
          require(f[c] >= 0.0f && f[c] <= 1.0f, "render_frames: feature outside [0, 1]");
          return static_cast<std::uint8_t>(std::lround(f[c] * 255.0f));
        };
        img.fill_rect(j * p, i * p, p, p, channel(0), channel(1), channel(2));
      }
    out.push_back(std::move(img));
  }
  return out;
}

/// Desktop-like scene: flat wallpaper, a static title bar along the top row,
/// a 2x2 block sliding one column per frame along rows 8-9 and a 2x3 region
/// whose features change every frame. About 85% of locations never change.
inline SceneSpec static_background_scene(std::size_t frames, std::uint64_t seed = 0) {
  SceneSpec s;
  s.height = 16;
  s.width = 16;
  s.dim = 3;
  s.frames = frames;
  s.seed = seed;
  s.background = {0.85f, 0.85f, 0.88f};
  s.static_regions.push_back({{0, 0, 1, 16}, {0.20f, 0.20f, 0.25f}});
  s.dynamic_regions.push_back({{8, 0, 2, 2}, {{0.9f, 0.2f, 0.1f}}, 0, 1, false});
  s.dynamic_regions.push_back({{12, 10, 2, 3}, {}, 0, 0, true});
  return s;
}

/// Fraction of grid locations that hold the same feature in every frame.
inline double static_fraction(const FeatureGrid& grid) {
  std::size_t constant = 0;
  for (std::size_t i = 0; i < grid.tokens_per_frame(); ++i) {
    bool same = true;
    for (std::size_t t = 1; t < grid.frames() && same; ++t)
      same = std::ranges::equal(grid.token(t, i), grid.token(0, i));
    constant += same ? 1 : 0;
  }
  return static_cast<double>(constant) / static_cast<double>(grid.tokens_per_frame());
}

// ---- JSON ---------------------------------------------------------------

namespace detail {

inline Rect rect_from_json(const nlohmann::json& j) {
  require(j.is_array() && j.size() == 4, "SceneSpec: rect must be [row, col, height, width]");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>(),
          j[3].get<std::size_t>()};
}

}  // namespace detail

inline SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  try {
    s.height = j.at("height").get<std::size_t>();
    s.width = j.at("width").get<std::size_t>();
    s.dim = j.value("dim", std::size_t{3});
    s.frames = j.at("frames").get<std::size_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.patch_size = j.value("patch_size", std::size_t{16});
    s.background = j.at("background").get<std::vector<float>>();
    s.static_noise = j.value("static_noise", 0.0f);
    for (const auto& r : j.value("static_regions", nlohmann::json::array()))
      s.static_regions.push_back(
          {detail::rect_from_json(r.at("rect")), r.at("feature").get<std::vector<float>>()});
    for (const auto& r : j.value("dynamic_regions", nlohmann::json::array())) {
      DynamicRegion d;
      d.rect = detail::rect_from_json(r.at("rect"));
      d.schedule = r.value("schedule", std::vector<std::vector<float>>{});
      const auto v = r.value("velocity", std::vector<long>{0, 0});
      require(v.size() == 2, "SceneSpec: velocity must be [row_step, col_step]");
      d.row_step = v[0];
      d.col_step = v[1];
      d.random_features = r.value("random", false);
      s.dynamic_regions.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("SceneSpec: ") + e.what(), j.dump());
  }
  s.validate();
  return s;
}

inline nlohmann::ordered_json to_json(const SceneSpec& s) {
  nlohmann::ordered_json j;
  j["height"] = s.height;
  j["width"] = s.width;
  j["dim"] = s.dim;
  j["frames"] = s.frames;
  j["seed"] = s.seed;
  j["patch_size"] = s.patch_size;
  j["background"] = s.background;
  j["static_noise"] = s.static_noise;
  j["static_regions"] = nlohmann::ordered_json::array();
  for (const auto& r : s.static_regions)
    j["static_regions"].push_back(
        {{"rect", {r.rect.row, r.rect.col, r.rect.height, r.rect.width}}, {"feature", r.feature}});
  j["dynamic_regions"] = nlohmann::ordered_json::array();
  for (const auto& d : s.dynamic_regions)
    j["dynamic_regions"].push_back({{"rect", {d.rect.row, d.rect.col, d.rect.height, d.rect.width}},
                                    {"schedule", d.schedule},
                                    {"velocity", {d.row_step, d.col_step}},
                                    {"random", d.random_features}});
  return j;
}

}  // namespace cuatrace

#endif  // CUATRACE_SYNTH_HPP
