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

#ifndef CUATRACE_INTERVAL_HPP
#define CUATRACE_INTERVAL_HPP

#include <cmath>

#include <nlohmann/json.hpp>

#include "cuatrace/error.hpp"

namespace cuatrace {

/// Closed time interval in seconds.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  bool valid() const {
    return std::isfinite(start) && std::isfinite(end) && start >= 0.0 && start <= end;
  }
  void validate() const {
    require(valid(), "interval must satisfy 0 <= start <= end with finite bounds");
  }
  double length() const { return end - start; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline nlohmann::ordered_json to_json(const Interval& iv) {
  return nlohmann::ordered_json::array({iv.start, iv.end});
}

/// Accepts [start, end] or {"start": s, "end": e}.
inline Interval interval_from_json(const nlohmann::json& j) {
  Interval iv;
  if (j.is_array() && j.size() == 2) {
    iv = {j[0].get<double>(), j[1].get<double>()};
  } else if (j.is_object()) {
    iv = {j.at("start").get<double>(), j.at("end").get<double>()};
  } else {
    fail(ErrorKind::kSchema, "interval must be [start, end] or {start, end}", j.dump());
  }
  if (!iv.valid()) fail(ErrorKind::kInvalidInput, "invalid interval " + j.dump());
  return iv;
}

}  // namespace cuatrace

#endif  // CUATRACE_INTERVAL_HPP
