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

#ifndef CUATRACE_PRUNER_HPP
#define CUATRACE_PRUNER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/bytes.hpp"
#include "cuatrace/error.hpp"
#include "cuatrace/grid.hpp"
#include "cuatrace/mask.hpp"
#include "cuatrace/stp.hpp"
#include "cuatrace/ttp.hpp"

namespace cuatrace {

/// Owning T x N x D token tensor.
struct TokenTensor {
  std::size_t frames = 0;
  std::size_t tokens = 0;
  std::size_t dim = 0;
  std::vector<float> data;

  TokenTensorView view() const { return {frames, tokens, dim, data}; }
};

inline CombinedMask combine(const SpatialMask& spatial, const TemporalMask& temporal) {
  require(spatial.frames == temporal.frames && spatial.tokens_per_frame() == temporal.tokens &&
              spatial.bits.size() == temporal.bits.size(),
          "combine: spatial and temporal mask shapes differ");
  CombinedMask out{temporal.frames, temporal.tokens, std::vector<std::uint8_t>(temporal.bits.size())};
  for (std::size_t k = 0; k < out.bits.size(); ++k)
    out.bits[k] = (spatial.bits[k] && temporal.bits[k]) ? 1 : 0;
  return out;
}

/// Pairs frames (2k, 2k+1) into one merged frame whose patch is kept only if
/// it is kept in both. With odd T the last frame passes through unchanged.
inline SpatialMask merge_adjacent_frame_masks(const SpatialMask& spatial) {
  const std::size_t n = spatial.tokens_per_frame();
  SpatialMask out{(spatial.frames + 1) / 2, spatial.height, spatial.width, {}};
  out.bits.resize(out.frames * n);
  for (std::size_t k = 0; k < out.frames; ++k) {
    const std::size_t a = 2 * k, b = std::min(2 * k + 1, spatial.frames - 1);
    for (std::size_t i = 0; i < n; ++i)
      out.bits[k * n + i] = (spatial.keep(a, i) && spatial.keep(b, i)) ? 1 : 0;
  }
  return out;
}

/// Temporal patch merging: merged frame k carries, per location, the
/// concatenation of frames 2k and 2k+1 (D -> 2D). An odd trailing frame is
/// paired with itself.
inline TokenTensor merge_adjacent_tokens(const TokenTensorView& tokens) {
  TokenTensor out{(tokens.frames + 1) / 2, tokens.tokens, 2 * tokens.dim, {}};
  out.data.reserve(out.frames * out.tokens * out.dim);
  for (std::size_t k = 0; k < out.frames; ++k) {
    const std::size_t a = 2 * k, b = std::min(2 * k + 1, tokens.frames - 1);
    for (std::size_t i = 0; i < tokens.tokens; ++i) {
      const auto first = tokens.token(a, i), second = tokens.token(b, i);
      out.data.insert(out.data.end(), first.begin(), first.end());
      out.data.insert(out.data.end(), second.begin(), second.end());
    }
  }
  return out;
}

struct TokenOrigin {
  std::uint32_t frame = 0;
  std::uint32_t token = 0;
  friend auto operator<=>(const TokenOrigin&, const TokenOrigin&) = default;
};

/// Surviving tokens in (frame, token) order, each with its origin.
struct PrunedTokenSequence {
  std::size_t dim = 0;
  std::vector<float> tokens;  // size() * dim floats
  std::vector<TokenOrigin> provenance;

  std::size_t size() const noexcept { return provenance.size(); }
  std::span<const float> token(std::size_t k) const {
    return std::span<const float>(tokens).subspan(k * dim, dim);
  }
  friend bool operator==(const PrunedTokenSequence&, const PrunedTokenSequence&) = default;
};

inline PrunedTokenSequence pack(const TokenTensorView& tokens, const CombinedMask& mask) {
  require(tokens.frames == mask.frames && tokens.tokens == mask.tokens,
          "pack: mask shape does not match token tensor");
  PrunedTokenSequence out{tokens.dim, {}, {}};
  const std::size_t kept = mask.popcount();
  out.tokens.reserve(kept * tokens.dim);
  out.provenance.reserve(kept);
  for (std::size_t t = 0; t < tokens.frames; ++t)
    for (std::size_t i = 0; i < tokens.tokens; ++i) {
      if (!mask.keep(t, i)) continue;
      const auto v = tokens.token(t, i);
      out.tokens.insert(out.tokens.end(), v.begin(), v.end());
      out.provenance.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(i)});
    }
  return out;
}

inline PrunedTokenSequence pack(const FeatureGrid& grid, const CombinedMask& mask) {
  return pack(grid.tokens(), mask);
}

/// Inverse of pack: kept tokens return to their origin, pruned slots are zero.
inline TokenTensor scatter_back(const PrunedTokenSequence& seq, std::size_t frames,
                                std::size_t tokens) {
  TokenTensor out{frames, tokens, seq.dim, std::vector<float>(frames * tokens * seq.dim, 0.0f)};
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto [t, i] = seq.provenance[k];
    require(t < frames && i < tokens, "scatter_back: provenance out of range");
    const auto v = seq.token(k);
    std::copy(v.begin(), v.end(), out.data.begin() + static_cast<std::ptrdiff_t>((t * tokens + i) * seq.dim));
  }
  return out;
}

enum class Variant { kStpOnly, kTtpOnly, kBoth };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::kStpOnly: return "stp-only";
    case Variant::kTtpOnly: return "ttp-only";
    case Variant::kBoth: return "both";
  }
  return "unknown";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "stp" || s == "stp-only") return Variant::kStpOnly;
  if (s == "ttp" || s == "ttp-only") return Variant::kTtpOnly;
  if (s == "both") return Variant::kBoth;
  fail(ErrorKind::kInvalidInput, "unknown variant '" + s + "' (expected stp, ttp or both)");
}

struct PruningReport {
  std::size_t frames = 0;  // after optional adjacent-frame merging
  std::size_t tokens_per_frame = 0;
  std::size_t total_tokens = 0;
  std::size_t kept_tokens = 0;
  std::vector<std::size_t> kept_per_frame;
  double reduction_ratio = 1.0;  // kept / total
  Variant variant = Variant::kBoth;
  std::optional<StpConfig> stp;
  std::optional<TtpConfig> ttp;
  bool merge_adjacent = false;
};

inline nlohmann::ordered_json to_json(const PruningReport& r) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(r.variant);
  j["merge_adjacent"] = r.merge_adjacent;
  j["frames"] = r.frames;
  j["tokens_per_frame"] = r.tokens_per_frame;
  j["total_tokens"] = r.total_tokens;
  j["kept_tokens"] = r.kept_tokens;
  j["reduction_ratio"] = r.reduction_ratio;
  j["kept_per_frame"] = r.kept_per_frame;
  nlohmann::ordered_json th;
  th["tau_s"] = r.stp ? nlohmann::ordered_json(r.stp->tau_s) : nlohmann::ordered_json(nullptr);
  th["tau_large"] = r.stp ? nlohmann::ordered_json(r.stp->tau_large) : nlohmann::ordered_json(nullptr);
  th["tau_t"] = r.ttp ? nlohmann::ordered_json(r.ttp->tau_t) : nlohmann::ordered_json(nullptr);
  j["thresholds"] = th;
  return j;
}

struct PruneResult {
  PrunedTokenSequence sequence;
  PruningReport report;
  SpatialMask spatial;  // merged when merge_adjacent is set
  TemporalMask temporal;
  CombinedMask combined;
};

/// Spatial and/or temporal pruning followed by packing. A disabled variant
/// contributes an all-keep mask. With `merge_adjacent`, the spatial mask is
/// merged pairwise over frames and temporal pruning runs on the merged tokens.
inline PruneResult prune_pipeline(const FeatureGrid& grid, const std::optional<StpConfig>& stp,
                                  const std::optional<TtpConfig>& ttp, bool merge_adjacent) {
  require(stp.has_value() || ttp.has_value(),
          "prune_pipeline: at least one of the spatial or temporal configs is required");
  if (stp) stp->validate();
  if (ttp) ttp->validate();

  SpatialMask spatial = stp ? spatial_mask(grid, *stp)
                            : SpatialMask::filled(grid.frames(), grid.height(), grid.width(), true);
  TokenTensor merged;
  TokenTensorView tokens = grid.tokens();
  if (merge_adjacent) {
    spatial = merge_adjacent_frame_masks(spatial);
    merged = merge_adjacent_tokens(tokens);
    tokens = merged.view();
  }
  TemporalMask temporal = ttp ? temporal_mask(tokens, *ttp)
                              : TemporalMask::filled(tokens.frames, tokens.tokens, true);
  CombinedMask combined = combine(spatial, temporal);

  PruneResult out{pack(tokens, combined), {}, std::move(spatial), std::move(temporal),
                  std::move(combined)};
  PruningReport& r = out.report;
  r.frames = tokens.frames;
  r.tokens_per_frame = tokens.tokens;
  r.total_tokens = tokens.frames * tokens.tokens;
  r.kept_tokens = out.sequence.size();
  for (std::size_t t = 0; t < tokens.frames; ++t)
    r.kept_per_frame.push_back(out.combined.frame_popcount(t));
  r.reduction_ratio =
      static_cast<double>(r.kept_tokens) / static_cast<double>(r.total_tokens);
  r.variant = stp && ttp ? Variant::kBoth : (stp ? Variant::kStpOnly : Variant::kTtpOnly);
  r.stp = stp;
  r.ttp = ttp;
  r.merge_adjacent = merge_adjacent;
  return out;
}

inline PruneResult prune_pipeline(const FeatureGrid& grid, Variant variant, const StpConfig& stp,
                                  const TtpConfig& ttp, bool merge_adjacent) {
  const bool use_stp = variant != Variant::kTtpOnly;
  const bool use_ttp = variant != Variant::kStpOnly;
  return prune_pipeline(grid, use_stp ? std::optional(stp) : std::nullopt,
                        use_ttp ? std::optional(ttp) : std::nullopt, merge_adjacent);
}

// Packed-sequence file (little-endian):
//   count u32 | D u32 | count x (frame u32, token u32) | count*D float32
inline Bytes encode_packed(const PrunedTokenSequence& seq) {
  Bytes out;
  detail::put_u32(out, detail::to_u32(seq.size(), "token count"));
  detail::put_u32(out, detail::to_u32(seq.dim, "dim"));
  for (const auto& p : seq.provenance) {
    detail::put_u32(out, p.frame);
    detail::put_u32(out, p.token);
  }
  for (float v : seq.tokens) detail::put_f32(out, v);
  return out;
}

inline PrunedTokenSequence decode_packed(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes);
  const std::size_t count = in.u32();
  PrunedTokenSequence seq{in.u32(), {}, {}};
  seq.provenance.resize(count);
  for (auto& p : seq.provenance) {
    p.frame = in.u32();
    p.token = in.u32();
  }
  seq.tokens.resize(count * seq.dim);
  for (auto& v : seq.tokens) v = in.f32();
  if (!in.at_end()) fail(ErrorKind::kIo, "packed sequence: trailing bytes");
  return seq;
}

}  // namespace cuatrace

#endif  // CUATRACE_PRUNER_HPP
