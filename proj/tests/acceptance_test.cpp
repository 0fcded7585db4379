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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cuatrace.hpp"
#include "oracles.hpp"

namespace {

using namespace cuatrace;
namespace fs = std::filesystem;

struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 = no runtime gate
  std::function<void()> body;
};

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n) {
  std::bernoulli_distribution coin(0.6);
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  return bits;
}

void stp_oracle_equivalence() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> tau(0.1, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const FeatureGrid g = oracle::fuzz_grid(rng, 4, 16, 8);
    const StpConfig cfg{tau(rng), std::uniform_int_distribution<std::size_t>(1, g.tokens_per_frame())(rng)};
    check(spatial_mask(g, cfg).bits == oracle::spatial_bits(g, cfg.tau_s, cfg.tau_large),
          "mask differs from flood-fill oracle at trial " + std::to_string(trial));
  }
}

void ttp_oracle_equivalence() {
  std::mt19937_64 rng(1002);
  const double taus[] = {0.5, 0.9, 0.9999};
  for (int trial = 0; trial < 200; ++trial) {
    const FeatureGrid g = oracle::fuzz_tokens(rng, 64, 64, 8);
    const double tau = taus[trial % 3];
    check(temporal_mask(g, TtpConfig{tau}).bits == oracle::temporal_bits(g.tokens(), tau),
          "mask differs from recursive oracle at trial " + std::to_string(trial));
  }
}

void boundary_suite() {
  std::mt19937_64 rng(1003);
  for (int trial = 0; trial < 100; ++trial) {
    const FeatureGrid g = oracle::fuzz_grid(rng, 4, 16, 8);
    const std::size_t all = g.frames() * g.tokens_per_frame();
    check(spatial_mask(g, {0.3, g.tokens_per_frame()}).popcount() == all, "tau_large >= H*W pruned something");
    check(spatial_mask(g, {0.0, 1}).popcount() == all, "tau_s = 0 pruned something");
    const auto negative = frame_spatial_mask(g.frame(0), StpConfig{-1.0, 1});
    check(std::ranges::all_of(negative, [](auto b) { return b != 0; }), "tau_s < 0 pruned something");
    const FeatureGrid tok = oracle::fuzz_tokens(rng, 32, 32, 8);
    check(temporal_mask(tok, TtpConfig{1.0}).popcount() == tok.total_tokens(), "tau_t = 1 pruned something");
    check(temporal_mask(tok, TtpConfig{1.5}).popcount() == tok.total_tokens(), "tau_t > 1 pruned something");
  }
  for (std::size_t frames : {1, 2, 10, 64}) {
    SceneSpec s;
    s.height = 9;
    s.width = 11;
    s.frames = frames;
    s.static_noise = 0.1f;
    s.seed = frames;
    const FeatureGrid g = generate(s);
    for (double tau : {-1.0, 0.0, 0.5, 0.9999})
      check(temporal_mask(g, TtpConfig{tau}).popcount() == g.tokens_per_frame(),
            "static video did not keep exactly N tokens");
  }
}

void combination() {
  std::mt19937_64 rng(1004);
  for (int trial = 0; trial < 300; ++trial) {
    const FeatureGrid g = oracle::fuzz_grid(rng, 6, 12, 6);
    const std::size_t n = g.total_tokens();
    const SpatialMask ms{g.frames(), g.height(), g.width(), random_bits(rng, n)};
    const TemporalMask mt{g.frames(), g.tokens_per_frame(), random_bits(rng, n)};
    std::size_t expected = 0;
    for (std::size_t k = 0; k < n; ++k) expected += (ms.bits[k] & mt.bits[k]);
    const CombinedMask m = combine(ms, mt);
    check(m.popcount() == expected, "popcount(M) != popcount(Ms & Mt)");
    const PrunedTokenSequence seq = pack(g, m);
    check(seq.size() == expected, "pack length != popcount");
    const TokenTensor back = scatter_back(seq, g.frames(), g.tokens_per_frame());
    for (std::size_t t = 0; t < g.frames(); ++t)
      for (std::size_t i = 0; i < g.tokens_per_frame(); ++i)
        for (std::size_t d = 0; d < g.dim(); ++d) {
          const float want = m.keep(t, i) ? g.token(t, i)[d] : 0.0f;
          check(back.data[(t * g.tokens_per_frame() + i) * g.dim() + d] == want,
                "scatter-back differs from masked grid");
        }
    const PruneResult r = prune_pipeline(g, StpConfig{}, TtpConfig{}, false);
    std::size_t both = 0;
    for (std::size_t k = 0; k < n; ++k) both += (r.spatial.bits[k] & r.temporal.bits[k]);
    check(r.report.kept_tokens == both && r.sequence.size() == both, "pipeline kept count != AND count");
  }
}

void stp_monotonicity() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> tau(0.0, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const FeatureGrid g = oracle::fuzz_grid(rng, 1, 16, 8);
    const std::size_t tl = std::uniform_int_distribution<std::size_t>(1, g.tokens_per_frame())(rng);
    double a = tau(rng), b = tau(rng);
    if (a > b) std::swap(a, b);
    const auto lo = frame_spatial_mask(g.frame(0), StpConfig{a, tl}),
               hi = frame_spatial_mask(g.frame(0), StpConfig{b, tl});
    for (std::size_t k = 0; k < lo.size(); ++k)
      check(lo[k] || !hi[k], "patch pruned at smaller tau_s but kept at larger tau_s");
  }
}

void tiou_fixtures() {
  check(tiou({3, 7}, {3, 7}) == 1.0, "identical != 1");
  check(tiou({0, 2}, {5, 9}) == 0.0, "disjoint != 0");
  check(std::abs(tiou({0, 10}, {5, 15}) - 1.0 / 3.0) <= 1e-12, "([0,10],[5,15]) != 1/3");
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> u(0, 100), shift(0, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Interval p{std::min(a, b), std::max(a, b)}, g{std::min(c, d), std::max(c, d)};
    const double v = tiou(p, g);
    check(std::abs(v - tiou(g, p)) <= 1e-12, "asymmetric");
    const double s = shift(rng);
    check(std::abs(tiou({p.start + s, p.end + s}, {g.start + s, g.end + s}) - v) <= 1e-12,
          "not translation invariant");
  }
}

void metrics_fixture() {
  const auto m = binary_metrics(std::vector<bool>{true, true, false, false},
                                std::vector<bool>{true, false, false, true});
  check(m.accuracy == 0.5 && m.precision == 0.5 && m.recall == 0.5, "4-record example != (0.5, 0.5, 0.5)");
  std::mt19937_64 rng(1007);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> len(1, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<bool> p(len(rng)), l(p.size());
    std::size_t tp = 0, fp = 0, fn = 0, eq = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = coin(rng);
      l[k] = coin(rng);
      tp += p[k] && l[k];
      fp += p[k] && !l[k];
      fn += !p[k] && l[k];
      eq += p[k] == l[k];
    }
    const auto r = binary_metrics(p, l);
    check(r.accuracy == double(eq) / double(p.size()), "accuracy differs from counting oracle");
    check(tp + fp == 0 ? !r.precision : r.precision == double(tp) / double(tp + fp),
          "precision differs from counting oracle");
    check(tp + fn == 0 ? !r.recall : r.recall == double(tp) / double(tp + fn),
          "recall differs from counting oracle");
  }
}

void redundancy_reduction() {
  const std::vector<std::size_t> frames = {5, 10, 20, 50};
  for (std::size_t t : frames)
    if (t >= 10) {
      const double f = static_fraction(generate(static_background_scene(t)));
      check(f >= 0.8, "background fraction " + std::to_string(f) + " < 0.8 at T=" + std::to_string(t));
    }
  const auto rows = run_benchmark(frames, RunConfig{});
  for (std::size_t k = 0; k + 2 < rows.size(); k += 3) {
    const auto &stp = rows[k], &ttp = rows[k + 1], &both = rows[k + 2];
    check(stp.variant == Variant::kStpOnly && ttp.variant == Variant::kTtpOnly && both.variant == Variant::kBoth,
          "unexpected benchmark row order");
    check(both.kept_tokens <= std::min(stp.kept_tokens, ttp.kept_tokens),
          "kept(both) > min(kept(stp), kept(ttp)) at T=" + std::to_string(both.frames));
    if (both.frames >= 10)
      check(both.reduction_ratio < 0.5,
            "reduction ratio " + std::to_string(both.reduction_ratio) + " >= 0.5 at T=" + std::to_string(both.frames));
  }
}

void sampling_contract() {
  for (std::size_t len = 1; len <= 100; ++len) {
    const auto idx = uniform_sample_indices(len, 100);
    check(idx.size() == len, "L <= 100 not identity");
    for (std::size_t k = 0; k < len; ++k) check(idx[k] == k, "L <= 100 not identity");
  }
  const auto idx = uniform_sample_indices(199, 100);
  check(idx.size() == 100 && idx.front() == 0 && idx.back() == 198, "L=199 endpoints or count wrong");
  for (std::size_t k = 1; k < idx.size(); ++k) check(idx[k] > idx[k - 1], "L=199 not strictly increasing");
}

std::vector<TrajectoryRecord> negatives_round(const std::vector<TrajectoryRecord>& positives,
                                              const fs::path& log) {
  fs::remove(log);
  MockTranslationService::Options opts;
  opts.seed = 42;
  MockTranslationService svc(opts);
  TranslationClient client(svc);
  std::vector<TranslationRequest> reqs;
  for (const auto& p : positives) reqs.push_back(build_request(p));
  const auto outcomes = translate_batch(client, reqs, 3);
  auto queue = VerificationQueue::open(log);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    check(outcomes[k].response.has_value(), "mock translation failed");
    queue.enqueue("pos-" + std::to_string(k), positives[k], *outcomes[k].response);
  }
  check(queue.count(VerificationStatus::kPending) == positives.size(), "not all entries pending");
  for (std::size_t k = 0; k < positives.size(); ++k)
    queue.review("pos-" + std::to_string(k), VerificationStatus::kApproved);
  return VerificationQueue::open(log).emit_approved();
}

void negative_synthesis_round_trip() {
  const fs::path dir = fs::temp_directory_path() / "cuatrace_acceptance_neg";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<TrajectoryRecord> positives;
  for (std::size_t p = 0; p < 5; ++p) {
    RawTrajectory raw{"Open document " + std::to_string(p), Platform::kUbuntuAgent, JudgmentLabel{true, {}, {}}, {}};
    for (std::size_t s = 0; s < 3 + p; ++s) {
      Image img(48, 32);
      img.fill_rect(0, 0, 48, 32, std::uint8_t(40 * p), std::uint8_t(20 * s), 200);
      const fs::path path = dir / ("p" + std::to_string(p) + "_s" + std::to_string(s) + ".png");
      save_png(path, img);
      raw.steps.push_back({Keyframe{path.string(), {}}, "step " + std::to_string(s)});
    }
    positives.push_back(build_keyframe_video(raw));
  }
  const auto first = negatives_round(positives, dir / "queue.jsonl");
  const auto second = negatives_round(positives, dir / "queue.jsonl");
  check(first.size() == 5, "expected 5 negatives, got " + std::to_string(first.size()));
  check(first == second, "negatives are not deterministic");
  for (std::size_t k = 0; k < first.size(); ++k) {
    const auto& neg = first[k];
    check(neg.label && !neg.label->success && neg.label->error_interval, "negative label malformed");
    check(neg.instruction != positives[k].instruction, "negative reuses the source instruction");
    check(neg.steps.size() == positives[k].steps.size(), "keyframe count differs");
    for (std::size_t s = 0; s < neg.steps.size(); ++s)
      check(neg.steps[s].keyframe.bytes() == positives[k].steps[s].keyframe.bytes(),
            "keyframe bytes differ from source");
  }
  write_text(dir / "negatives.jsonl", serialize_store(first));
  const auto reloaded = load_manifest(dir / "negatives.jsonl");
  check(reloaded == first, "re-ingested negatives differ");
  for (const auto& r : reloaded) validate_record(r);
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "STP oracle equivalence", 10.0, stp_oracle_equivalence},
      {2, "TTP oracle equivalence", 10.0, ttp_oracle_equivalence},
      {3, "boundary suite", 0.0, boundary_suite},
      {4, "mask combination, packing and scatter-back", 0.0, combination},
      {5, "STP monotonicity in tau_s", 0.0, stp_monotonicity},
      {6, "tIoU fixtures", 0.0, tiou_fixtures},
      {7, "classification metrics fixture", 0.0, metrics_fixture},
      {8, "redundancy reduction on static-background scenes", 60.0, redundancy_reduction},
      {9, "uniform sampling contract", 0.0, sampling_contract},
      {10, "negative synthesis round trip", 0.0, negative_synthesis_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::string reason;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body();
    } catch (const Failure& f) {
      reason = f.what;
    } catch (const std::exception& e) {
      reason = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (reason.empty() && c.budget_s > 0 && secs >= c.budget_s)
      reason = "runtime " + std::to_string(secs) + " s exceeds " + std::to_string(c.budget_s) + " s";
    if (reason.empty()) {
      std::printf("PASS criterion %d: %s (%.3f s)\n", c.id, c.name.c_str(), secs);
    } else {
      ++failures;
      std::printf("FAIL criterion %d: %s (%.3f s): %s\n", c.id, c.name.c_str(), secs, reason.c_str());
    }
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
