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

#ifndef CUATRACE_GRID_IO_HPP
#define CUATRACE_GRID_IO_HPP

// Binary grid format (all little-endian):
//   "EVGR" | version u32 | T u32 | H' u32 | W' u32 | D u32 | T*H'*W'*D float32
// The manifest variant stores the same header fields as JSON next to a raw
// float32 payload file.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/bytes.hpp"
#include "cuatrace/grid.hpp"

namespace cuatrace {

inline constexpr std::uint32_t kGridFormatVersion = 1;

inline Bytes encode_grid(const FeatureGrid& grid) {
  Bytes out;
  out.reserve(24 + grid.data().size() * 4);
  for (char c : {'E', 'V', 'G', 'R'}) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(out, kGridFormatVersion);
  detail::put_u32(out, detail::to_u32(grid.frames(), "frames"));
  detail::put_u32(out, detail::to_u32(grid.height(), "height"));
  detail::put_u32(out, detail::to_u32(grid.width(), "width"));
  detail::put_u32(out, detail::to_u32(grid.dim(), "dim"));
  for (float v : grid.data()) detail::put_f32(out, v);
  return out;
}

namespace detail {

inline std::vector<float> read_floats(Reader& in, std::size_t count) {
  std::vector<float> data(count);
  for (auto& v : data) v = in.f32();
  return data;
}

}  // namespace detail

inline FeatureGrid decode_grid(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes);
  if (in.tag(4) != "EVGR") fail(ErrorKind::kIo, "grid: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kGridFormatVersion)
    fail(ErrorKind::kIo, "grid: unsupported version " + std::to_string(version));
  const std::size_t t = in.u32(), h = in.u32(), w = in.u32(), d = in.u32();
  require(t >= 1 && h >= 1 && w >= 1 && d >= 1, "grid: zero extent in header");
  auto data = detail::read_floats(in, t * h * w * d);
  if (!in.at_end()) fail(ErrorKind::kIo, "grid: trailing bytes after payload");
  return FeatureGrid(t, h, w, d, std::move(data));
}

inline void write_grid(const std::filesystem::path& path, const FeatureGrid& grid) {
  write_file(path, encode_grid(grid));
}

inline FeatureGrid read_grid(const std::filesystem::path& path) {
  return decode_grid(read_file(path));
}

/// Writes `json_path` plus a raw payload file beside it (same stem, ".raw").
inline void write_grid_manifest(const std::filesystem::path& json_path, const FeatureGrid& grid) {
  std::filesystem::path raw_path = json_path;
  raw_path.replace_extension(".raw");
  Bytes raw;
  raw.reserve(grid.data().size() * 4);
  for (float v : grid.data()) detail::put_f32(raw, v);
  write_file(raw_path, raw);

  nlohmann::ordered_json j;
  j["format"] = "EVGR";
  j["version"] = kGridFormatVersion;
  j["frames"] = grid.frames();
  j["height"] = grid.height();
  j["width"] = grid.width();
  j["dim"] = grid.dim();
  j["dtype"] = "float32-le";
  j["data"] = raw_path.filename().string();
  write_text(json_path, j.dump(2) + "\n");
}

inline FeatureGrid read_grid_manifest(const std::filesystem::path& json_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(json_path));
    if (j.at("format") != "EVGR" || j.at("dtype") != "float32-le")
      fail(ErrorKind::kIo, "grid manifest: unsupported format or dtype");
    if (j.at("version").get<std::uint32_t>() != kGridFormatVersion)
      fail(ErrorKind::kIo, "grid manifest: unsupported version");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, std::string("grid manifest: ") + e.what());
  }
  const auto t = j["frames"].get<std::size_t>(), h = j["height"].get<std::size_t>(),
             w = j["width"].get<std::size_t>(), d = j["dim"].get<std::size_t>();
  require(t >= 1 && h >= 1 && w >= 1 && d >= 1, "grid manifest: zero extent");
  const Bytes raw = read_file(json_path.parent_path() / j["data"].get<std::string>());
  detail::Reader in(raw);
  auto data = detail::read_floats(in, t * h * w * d);
  if (!in.at_end()) fail(ErrorKind::kIo, "grid manifest: payload size mismatch");
  return FeatureGrid(t, h, w, d, std::move(data));
}

/// Dispatches on extension: ".json" is the manifest variant, anything else binary.
inline FeatureGrid load_grid(const std::filesystem::path& path) {
  return path.extension() == ".json" ? read_grid_manifest(path) : read_grid(path);
}

}  // namespace cuatrace

#endif  // CUATRACE_GRID_IO_HPP
