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

#ifndef CUATRACE_TTP_HPP
#define CUATRACE_TTP_HPP

#include <cmath>
#include <cstddef>

#include "cuatrace/error.hpp"
#include "cuatrace/grid.hpp"
#include "cuatrace/mask.hpp"

namespace cuatrace {

struct TtpConfig {
  double tau_t = 0.9999;

  void validate() const { require(std::isfinite(tau_t), "TtpConfig: tau_t must be finite"); }
};

/// Temporal token pruning.
///
/// Each location keeps a reference token, initialised from frame 0. A later
/// token is pruned when its cosine similarity to the reference is strictly
/// greater than tau_t; otherwise it is kept and becomes the new reference.
/// Frame 0 is always kept.
inline TemporalMask temporal_mask(const TokenTensorView& tokens, const TtpConfig& cfg) {
  cfg.validate();
  require(tokens.frames >= 1 && tokens.tokens >= 1 && tokens.dim >= 1 &&
              tokens.data.size() == tokens.frames * tokens.tokens * tokens.dim,
          "temporal_mask: malformed token tensor");
  TemporalMask mask = TemporalMask::filled(tokens.frames, tokens.tokens, true);
  for (std::size_t i = 0; i < tokens.tokens; ++i) {
    std::size_t ref = 0;  // frame holding the current reference token
    for (std::size_t t = 1; t < tokens.frames; ++t) {
      if (cosine_similarity(tokens.token(ref, i), tokens.token(t, i)) > cfg.tau_t) {
        mask.set(t, i, false);
      } else {
        ref = t;
      }
    }
  }
  return mask;
}

inline TemporalMask temporal_mask(const FeatureGrid& grid, const TtpConfig& cfg) {
  return temporal_mask(grid.tokens(), cfg);
}

}  // namespace cuatrace

#endif  // CUATRACE_TTP_HPP
