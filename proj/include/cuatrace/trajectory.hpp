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

#ifndef CUATRACE_TRAJECTORY_HPP
#define CUATRACE_TRAJECTORY_HPP

// Step-level keyframe videos: one post-action screenshot per interaction
// step, played back at 1 FPS so step k sits at k seconds.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/bytes.hpp"
#include "cuatrace/error.hpp"
#include "cuatrace/image.hpp"
#include "cuatrace/interval.hpp"

namespace cuatrace {

enum class Platform { kUbuntuAgent, kUbuntuHuman, kMacWin, kAndroid, kOther };

inline constexpr Platform kAllPlatforms[] = {Platform::kUbuntuAgent, Platform::kUbuntuHuman,
                                             Platform::kMacWin, Platform::kAndroid,
                                             Platform::kOther};

inline const char* to_string(Platform p) {
  switch (p) {
    case Platform::kUbuntuAgent: return "ubuntu-agent";
    case Platform::kUbuntuHuman: return "ubuntu-human";
    case Platform::kMacWin: return "mac-win";
    case Platform::kAndroid: return "android";
    case Platform::kOther: return "other";
  }
  return "other";
}

inline Platform parse_platform(const std::string& s) {
  for (Platform p : kAllPlatforms)
    if (s == to_string(p)) return p;
  fail(ErrorKind::kInvalidInput, "unknown platform tag '" + s + "'");
}

namespace detail {

inline constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(std::span<const std::uint8_t> in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  for (std::size_t k = 0; k < in.size(); k += 3) {
    std::uint32_t v = static_cast<std::uint32_t>(in[k]) << 16;
    if (k + 1 < in.size()) v |= static_cast<std::uint32_t>(in[k + 1]) << 8;
    if (k + 2 < in.size()) v |= in[k + 2];
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += k + 1 < in.size() ? kBase64Alphabet[(v >> 6) & 63] : '=';
    out += k + 2 < in.size() ? kBase64Alphabet[v & 63] : '=';
  }
  return out;
}

inline Bytes base64_decode(const std::string& in) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (in.size() % 4 != 0) fail(ErrorKind::kSchema, "base64: length not a multiple of 4");
  Bytes out;
  for (std::size_t k = 0; k < in.size(); k += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t m = 0; m < 4; ++m) {
      const char c = in[k + m];
      if (c == '=' && k + 4 == in.size() && m >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = value(c);
      if (d < 0 || pad > 0) fail(ErrorKind::kSchema, "base64: invalid character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace detail

/// A keyframe image, referenced by file path or embedded as encoded bytes.
struct Keyframe {
  std::string path;
  Bytes data;

  bool embedded() const { return !data.empty(); }
  bool missing() const { return path.empty() && data.empty(); }

  Bytes bytes() const { return embedded() ? data : read_file(path); }
  Image decode() const { return embedded() ? decode_image(data) : load_image(path); }

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

struct StepRecord {
  std::size_t step_index = 0;
  Keyframe keyframe;
  std::optional<std::string> action_summary;
  double timestamp = 0.0;  // seconds from start

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct JudgmentLabel {
  bool success = false;
  std::optional<Interval> error_interval;
  std::optional<std::string> justification;

  friend bool operator==(const JudgmentLabel&, const JudgmentLabel&) = default;
};

struct TrajectoryRecord {
  std::string instruction;
  std::vector<StepRecord> steps;
  Platform platform = Platform::kOther;
  std::optional<JudgmentLabel> label;

  /// Each keyframe is shown for one second.
  double duration() const { return steps.empty() ? 0.0 : steps.back().timestamp + 1.0; }

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Checks the record invariants. With `decode_keyframes`, every keyframe is
/// also decoded. Failures are ingestion errors naming the offending step.
inline void validate_record(const TrajectoryRecord& record, bool decode_keyframes = true) {
  if (record.steps.empty()) fail(ErrorKind::kIngestion, "trajectory has no steps");
  for (std::size_t k = 0; k < record.steps.size(); ++k) {
    const StepRecord& s = record.steps[k];
    const std::string where = "step " + std::to_string(s.step_index);
    if (k > 0 && s.step_index <= record.steps[k - 1].step_index)
      fail(ErrorKind::kIngestion, where + ": step_index not strictly increasing");
    if (!std::isfinite(s.timestamp) || s.timestamp < 0.0 ||
        (k > 0 && s.timestamp < record.steps[k - 1].timestamp))
      fail(ErrorKind::kIngestion, where + ": timestamp must be finite, >= 0 and non-decreasing");
    if (s.keyframe.missing()) fail(ErrorKind::kIngestion, where + ": missing screenshot");
    if (decode_keyframes) {
      try {
        (void)s.keyframe.decode();
      } catch (const Error& e) {
        fail(ErrorKind::kIngestion, where + ": " + e.message());
      }
    }
  }
  if (record.label && record.label->error_interval) {
    const Interval& iv = *record.label->error_interval;
    if (!iv.valid() || iv.end > record.duration())
      fail(ErrorKind::kIngestion, "error_interval outside [0, " +
                                      std::to_string(record.duration()) + "]");
  }
}

struct RawStep {
  Keyframe screenshot;  // post-action screenshot
  std::optional<std::string> action;
};

struct RawTrajectory {
  std::string instruction;
  Platform platform = Platform::kOther;
  std::optional<JudgmentLabel> label;
  std::vector<RawStep> steps;
};

/// One keyframe per step in order, step k at k seconds.
inline TrajectoryRecord build_keyframe_video(const RawTrajectory& raw) {
  if (raw.steps.empty()) fail(ErrorKind::kIngestion, "trajectory has no steps");
  TrajectoryRecord out{raw.instruction, {}, raw.platform, raw.label};
  out.steps.reserve(raw.steps.size());
  for (std::size_t k = 0; k < raw.steps.size(); ++k) {
    if (raw.steps[k].screenshot.missing())
      fail(ErrorKind::kIngestion, "step " + std::to_string(k) + ": missing screenshot");
    out.steps.push_back({k, raw.steps[k].screenshot, raw.steps[k].action, static_cast<double>(k)});
  }
  return out;
}

/// Endpoint-inclusive uniform indices round(k * (L - 1) / (max - 1)); identity
/// when L <= max_frames.
inline std::vector<std::size_t> uniform_sample_indices(std::size_t length, std::size_t max_frames) {
  require(max_frames >= 2, "uniform_sample: max_frames must be >= 2");
  std::vector<std::size_t> idx;
  if (length <= max_frames) {
    for (std::size_t k = 0; k < length; ++k) idx.push_back(k);
    return idx;
  }
  const std::size_t span = length - 1, steps = max_frames - 1;
  for (std::size_t k = 0; k < max_frames; ++k)
    idx.push_back((2 * k * span + steps) / (2 * steps));  // round half up
  return idx;
}

inline TrajectoryRecord uniform_sample(const TrajectoryRecord& record, std::size_t max_frames = 100) {
  const auto idx = uniform_sample_indices(record.steps.size(), max_frames);
  if (idx.size() == record.steps.size()) return record;
  TrajectoryRecord out{record.instruction, {}, record.platform, record.label};
  for (std::size_t k : idx) out.steps.push_back(record.steps[k]);
  return out;
}

// ---- manifest JSON ------------------------------------------------------

inline nlohmann::ordered_json to_json(const JudgmentLabel& label) {
  nlohmann::ordered_json j;
  j["success"] = label.success;
  if (label.error_interval) j["error_interval"] = to_json(*label.error_interval);
  if (label.justification) j["justification"] = *label.justification;
  return j;
}

inline nlohmann::ordered_json to_json(const TrajectoryRecord& record) {
  nlohmann::ordered_json j;
  j["instruction"] = record.instruction;
  j["platform"] = to_string(record.platform);
  j["steps"] = nlohmann::ordered_json::array();
  for (const StepRecord& s : record.steps) {
    nlohmann::ordered_json step;
    step["index"] = s.step_index;
    if (s.keyframe.embedded())
      step["image_base64"] = detail::base64_encode(s.keyframe.data);
    else
      step["image"] = s.keyframe.path;
    if (s.action_summary) step["action"] = *s.action_summary;
    step["t"] = s.timestamp;
    j["steps"].push_back(std::move(step));
  }
  if (record.label) j["label"] = to_json(*record.label);
  return j;
}

inline JudgmentLabel label_from_json(const nlohmann::json& j) {
  JudgmentLabel label;
  label.success = j.at("success").get<bool>();
  if (j.contains("error_interval") && !j["error_interval"].is_null())
    label.error_interval = interval_from_json(j["error_interval"]);
  if (j.contains("justification") && !j["justification"].is_null())
    label.justification = j["justification"].get<std::string>();
  return label;
}

/// Parses one trajectory object. Relative image paths resolve against
/// `base_dir` and are stored absolute.
inline TrajectoryRecord record_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {}) {
  TrajectoryRecord r;
  try {
    r.instruction = j.at("instruction").get<std::string>();
    r.platform = parse_platform(j.at("platform").get<std::string>());
    const auto& steps = j.at("steps");
    if (!steps.is_array()) fail(ErrorKind::kSchema, "steps must be an array", j.dump());
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& s = steps[k];
      StepRecord step;
      step.step_index = s.contains("index") ? s["index"].get<std::size_t>() : k;
      if (s.contains("image_base64")) {
        step.keyframe.data = detail::base64_decode(s["image_base64"].get<std::string>());
      } else if (s.contains("image") && !s["image"].is_null()) {
        std::filesystem::path p = s["image"].get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        if (!p.empty()) p = std::filesystem::absolute(p).lexically_normal();
        step.keyframe.path = p.string();
      }
      if (s.contains("action") && !s["action"].is_null())
        step.action_summary = s["action"].get<std::string>();
      step.timestamp = s.contains("t") ? s["t"].get<double>() : static_cast<double>(k);
      r.steps.push_back(std::move(step));
    }
    if (j.contains("label") && !j["label"].is_null()) r.label = label_from_json(j["label"]);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("trajectory manifest: ") + e.what(), j.dump());
  }
  return r;
}

/// A manifest is a single trajectory object, an array of them, or JSON lines.
inline std::vector<TrajectoryRecord> parse_manifest(const std::string& text,
                                                    const std::filesystem::path& base_dir = {}) {
  std::vector<TrajectoryRecord> out;
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_discarded()) {
    if (doc.is_array()) {
      for (const auto& item : doc) out.push_back(record_from_json(item, base_dir));
    } else {
      out.push_back(record_from_json(doc, base_dir));
    }
    return out;
  }
  std::size_t line_no = 0, begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find('\n', begin), text.size());
    const std::string line = text.substr(begin, end - begin);
    ++line_no;
    begin = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      fail(ErrorKind::kSchema, "manifest line " + std::to_string(line_no) + ": malformed JSON",
           line);
    out.push_back(record_from_json(j, base_dir));
  }
  return out;
}

inline std::vector<TrajectoryRecord> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path), path.parent_path());
}

/// JSON-lines store, one canonical record per line.
inline std::string serialize_store(const std::vector<TrajectoryRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace cuatrace

#endif  // CUATRACE_TRAJECTORY_HPP
