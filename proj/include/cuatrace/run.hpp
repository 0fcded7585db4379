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

#ifndef CUATRACE_RUN_HPP
#define CUATRACE_RUN_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/error.hpp"
#include "cuatrace/extract.hpp"
#include "cuatrace/pruner.hpp"
#include "cuatrace/synth.hpp"
#include "cuatrace/trajectory.hpp"

namespace cuatrace {

struct RunConfig {
  StpConfig stp;
  TtpConfig ttp;
  std::size_t patch_size = 16;
  std::size_t max_frames = 100;
  bool merge_adjacent = false;
  bool resize_to_720p = false;
  Variant variant = Variant::kBoth;
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  void validate() const {
    stp.validate();
    ttp.validate();
    require(patch_size >= 1, "RunConfig: patch_size must be >= 1");
    require(max_frames >= 2, "RunConfig: max_frames must be >= 2");
    require(workers >= 1, "RunConfig: workers must be >= 1");
  }
};

inline PruneResult prune_grid(const FeatureGrid& grid, const RunConfig& cfg) {
  return prune_pipeline(grid, cfg.variant, cfg.stp, cfg.ttp, cfg.merge_adjacent);
}

/// Samples to the frame budget, extracts mean-RGB features, prunes.
inline PruneResult prune_trajectory(const TrajectoryRecord& record, const RunConfig& cfg) {
  const TrajectoryRecord sampled = uniform_sample(record, cfg.max_frames);
  const FeatureGrid grid = extract_grid(sampled, ExtractOptions{cfg.patch_size, cfg.resize_to_720p});
  return prune_grid(grid, cfg);
}

/// Calls fn(k) for k in [0, count) on up to `workers` threads. The first
/// exception (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const std::size_t n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    for (std::size_t k = 0; k + 1 < n; ++k) threads.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct BenchRow {
  std::size_t frames = 0;
  Variant variant = Variant::kBoth;
  std::size_t total_tokens = 0;
  std::size_t kept_tokens = 0;
  double reduction_ratio = 1.0;
  double runtime_ms = 0.0;
  std::size_t packed_bytes = 0;  // payload + provenance of the packed sequence
};

/// Token counts for every variant on the static-background scene at each
/// frame count.
inline std::vector<BenchRow> run_benchmark(const std::vector<std::size_t>& frame_counts,
                                           const RunConfig& cfg) {
  require(!frame_counts.empty(), "bench: frame count list is empty");
  for (std::size_t f : frame_counts) require(f >= 1, "bench: frame counts must be >= 1");
  cfg.validate();
  std::vector<BenchRow> rows;
  for (std::size_t frames : frame_counts) {
    const FeatureGrid grid = generate(static_background_scene(frames, cfg.seed));
    for (Variant v : {Variant::kStpOnly, Variant::kTtpOnly, Variant::kBoth}) {
      const auto start = std::chrono::steady_clock::now();
      const PruneResult r = prune_pipeline(grid, v, cfg.stp, cfg.ttp, cfg.merge_adjacent);
      const auto stop = std::chrono::steady_clock::now();
      rows.push_back({frames, v, r.report.total_tokens, r.report.kept_tokens,
                      r.report.reduction_ratio,
                      std::chrono::duration<double, std::milli>(stop - start).count(),
                      r.sequence.tokens.size() * sizeof(float) +
                          r.sequence.provenance.size() * sizeof(TokenOrigin)});
    }
  }
  return rows;
}

inline nlohmann::ordered_json to_json(const std::vector<BenchRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    j.push_back({{"frames", r.frames},
                 {"variant", to_string(r.variant)},
                 {"total_tokens", r.total_tokens},
                 {"kept_tokens", r.kept_tokens},
                 {"reduction_ratio", r.reduction_ratio},
                 {"runtime_ms", r.runtime_ms},
                 {"packed_bytes", r.packed_bytes}});
  return j;
}

inline std::string to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "frames,variant,total_tokens,kept_tokens,reduction_ratio,runtime_ms,packed_bytes\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%zu,%zu,%.6f,%.3f,%zu\n", r.frames, to_string(r.variant),
                  r.total_tokens, r.kept_tokens, r.reduction_ratio, r.runtime_ms, r.packed_bytes);
    out += buf;
  }
  return out;
}

}  // namespace cuatrace

#endif  // CUATRACE_RUN_HPP
