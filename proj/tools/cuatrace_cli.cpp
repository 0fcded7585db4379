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

// Batch command-line driver: ingest, prune, eval, bench, synth-neg.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cuatrace.hpp"
#include "cuatrace/negsynth_http.hpp"

namespace fs = std::filesystem;
using namespace cuatrace;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kIngestion:
    case ErrorKind::kSchema:
      return 1;
    case ErrorKind::kTransport:
      return 3;
    default:
      return 2;
  }
}

void require_input(const fs::path& p) {
  if (!fs::exists(p)) fail(ErrorKind::kInvalidInput, "no such file: " + p.string());
}

std::vector<std::size_t> parse_frame_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" ") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (v < 1 || item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      fail(ErrorKind::kInvalidInput, "bad frame count '" + item + "'");
    }
  }
  return out;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> manifests;
  std::string out;
  bool skip_decode = false;
};

int cmd_ingest(const IngestArgs& a) {
  std::vector<TrajectoryRecord> records;
  for (const auto& m : a.manifests) {
    require_input(m);
    auto part = load_manifest(m);
    for (std::size_t k = 0; k < part.size(); ++k) {
      try {
        validate_record(part[k], !a.skip_decode);
      } catch (const Error& e) {
        throw Error(e.kind(), m + ": record " + std::to_string(k) + ": " + e.message(), e.payload());
      }
    }
    records.insert(records.end(), part.begin(), part.end());
  }
  std::size_t steps = 0;
  std::map<std::string, std::size_t> platforms;
  for (const auto& r : records) {
    steps += r.steps.size();
    ++platforms[to_string(r.platform)];
  }
  std::cout << records.size() << " trajectories, " << steps << " steps\n";
  for (const auto& [name, n] : platforms) std::cout << "  " << name << ": " << n << "\n";
  if (!a.out.empty()) write_text(a.out, serialize_store(records));
  return 0;
}

// ---- prune ----------------------------------------------------------------

struct PruneArgs {
  std::vector<std::string> inputs;
  std::string out = "pruned";
  bool visualize = false;
  std::string image_format = "png";
};

struct PruneItem {
  std::string name;
  std::optional<fs::path> grid_path;
  std::optional<TrajectoryRecord> record;
};

bool is_grid_file(const fs::path& p) {
  if (p.extension() == ".json") {
    const auto j = nlohmann::json::parse(read_text(p), nullptr, false);
    return j.is_object() && j.value("format", "") == "EVGR";
  }
  const Bytes head = read_file(p);
  return head.size() >= 4 && std::equal(head.begin(), head.begin() + 4, "EVGR");
}

std::vector<PruneItem> collect_prune_items(const std::vector<std::string>& inputs) {
  std::vector<PruneItem> items;
  for (const auto& in : inputs) {
    const fs::path p(in);
    require_input(p);
    if (is_grid_file(p)) {
      items.push_back({p.stem().string(), p, std::nullopt});
      continue;
    }
    const auto records = load_manifest(p);
    for (std::size_t k = 0; k < records.size(); ++k)
      items.push_back({p.stem().string() + "_" + std::to_string(k), std::nullopt, records[k]});
  }
  return items;
}

int cmd_prune(const PruneArgs& a, const RunConfig& cfg) {
  cfg.validate();
  require(a.image_format == "png" || a.image_format == "pgm", "--image-format must be png or pgm");
  const auto items = collect_prune_items(a.inputs);
  require(!items.empty(), "prune: no inputs");
  const fs::path out(a.out);
  fs::create_directories(out);

  std::vector<std::string> summaries(items.size());
  parallel_for(items.size(), cfg.workers, [&](std::size_t k) {
    const PruneItem& item = items[k];
    const PruneResult r = item.grid_path ? prune_grid(load_grid(*item.grid_path), cfg)
                                         : prune_trajectory(*item.record, cfg);
    const fs::path base = out / item.name;
    write_file(base.string() + ".packed", encode_packed(r.sequence));
    write_text(base.string() + ".report.json", to_json(r.report).dump(2) + "\n");
    if (a.visualize) {
      const std::size_t h = r.spatial.height, w = r.spatial.width;
      const std::string ext = "." + a.image_format;
      save_mask_image(base.string() + ".spatial" + ext, render_mask(r.spatial));
      save_mask_image(base.string() + ".temporal" + ext, render_mask(r.temporal, h, w));
      save_mask_image(base.string() + ".combined" + ext, render_mask(r.combined, h, w));
    }
    char line[256];
    std::snprintf(line, sizeof line, "%s: kept %zu / %zu tokens (ratio %.4f)", item.name.c_str(),
                  r.report.kept_tokens, r.report.total_tokens, r.report.reduction_ratio);
    summaries[k] = line;
  });
  for (const auto& s : summaries) std::cout << s << "\n";
  return 0;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const std::string& predictions, const std::string& out) {
  require_input(predictions);
  const auto records = parse_eval_records(read_text(predictions));
  const EvalReport report = aggregate(records);
  if (!out.empty()) write_text(out, to_json(report).dump(2) + "\n");
  std::cout << format_table(report);
  return 0;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const std::string& frames, const std::string& out, const RunConfig& cfg) {
  const auto rows = run_benchmark(parse_frame_list(frames), cfg);
  if (!out.empty()) {
    write_text(out + ".json", to_json(rows).dump(2) + "\n");
    write_text(out + ".csv", to_csv(rows));
  }
  std::cout << to_csv(rows);
  return 0;
}

// ---- synth-neg ------------------------------------------------------------

struct NegArgs {
  std::string records;
  std::string endpoint = "mock";
  std::string queue = "verification_queue.jsonl";
  std::string template_id = kDefaultTemplateId;
  std::vector<std::string> params;
  std::size_t in_flight = 4;
  std::string id;
  bool approve = false;
  bool reject = false;
  std::string note;
  std::string out;
};

std::unique_ptr<Transport> make_transport(const std::string& endpoint, std::uint64_t seed) {
  const char* env = std::getenv("CUATRACE_SERVICE_URL");
  if (endpoint == "mock" && !(env && *env)) {
    MockTranslationService::Options opts;
    opts.seed = seed;
    return std::make_unique<MockTranslationService>(opts);
  }
  return std::make_unique<HttpTransport>(HttpTransport::from_environment(endpoint));
}

int cmd_neg_request(const NegArgs& a, const RunConfig& cfg) {
  require_input(a.records);
  std::map<std::string, std::string> params;
  for (const auto& p : a.params) {
    const auto eq = p.find('=');
    require(eq != std::string::npos && eq > 0, "--param must be key=value");
    params[p.substr(0, eq)] = p.substr(eq + 1);
  }
  const auto records = load_manifest(a.records);
  std::vector<TranslationRequest> requests;
  for (std::size_t k = 0; k < records.size(); ++k) {
    try {
      requests.push_back(build_request(records[k], a.template_id, params));
    } catch (const Error& e) {
      throw Error(e.kind(), "record " + std::to_string(k) + ": " + e.message());
    }
  }
  auto transport = make_transport(a.endpoint, cfg.seed);
  TranslationClient client(*transport);
  const auto outcomes = translate_batch(client, requests, a.in_flight);

  auto queue = VerificationQueue::open(a.queue);
  const std::string stem = fs::path(a.records).stem().string();
  int status = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const std::string id = stem + "-" + std::to_string(k);
    if (outcomes[k].response) {
      queue.enqueue(id, records[k], *outcomes[k].response);
      std::cout << id << ": pending\n";
    } else {
      const Error& e = *outcomes[k].error;
      std::cout << id << ": error (" << to_string(e.kind()) << ") " << e.what() << "\n";
      status = std::max(status, e.kind() == ErrorKind::kTransport ? 3 : 2);
    }
  }
  if (status == 2) status = 3;  // any unusable service reply is an external-service failure
  return status;
}

int cmd_neg_review(const NegArgs& a) {
  require(a.approve != a.reject, "review needs exactly one of --approve or --reject");
  require(!a.id.empty(), "review needs --id");
  require_input(a.queue);
  auto queue = VerificationQueue::open(a.queue);
  queue.review(a.id, a.approve ? VerificationStatus::kApproved : VerificationStatus::kRejected,
               a.note.empty() ? std::nullopt : std::optional<std::string>(a.note));
  std::cout << a.id << ": " << (a.approve ? "approved" : "rejected") << "\n";
  return 0;
}

int cmd_neg_list(const NegArgs& a) {
  require_input(a.queue);
  const auto queue = VerificationQueue::open(a.queue);
  for (const auto& e : queue.entries())
    std::cout << e.id << "\t" << to_string(e.state.status) << "\t" << e.response.unpaired_instruction << "\n";
  return 0;
}

int cmd_neg_emit(const NegArgs& a) {
  require_input(a.queue);
  require(!a.out.empty(), "emit needs --out");
  const auto negatives = VerificationQueue::open(a.queue).emit_approved();
  write_text(a.out, serialize_store(negatives));
  std::cout << negatives.size() << " negatives\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cuatrace: execution-video token pruning and evaluation tools"};
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string variant = "both";
  app.add_option("--tau-s", cfg.stp.tau_s, "Spatial L2 threshold")->capture_default_str();
  app.add_option("--tau-large", cfg.stp.tau_large, "Minimum component size pruned (exclusive)")
      ->capture_default_str();
  app.add_option("--tau-t", cfg.ttp.tau_t, "Temporal cosine threshold")->capture_default_str();
  app.add_option("--patch-size", cfg.patch_size, "Patch size in pixels")->capture_default_str();
  app.add_option("--max-frames", cfg.max_frames, "Uniform sampling budget")->capture_default_str();
  app.add_option("--variant", variant, "stp, ttp or both")
      ->check(CLI::IsMember({"stp", "ttp", "both", "stp-only", "ttp-only"}))
      ->capture_default_str();
  app.add_flag("--merge-adjacent", cfg.merge_adjacent, "Merge adjacent frame pairs after masking");
  app.add_flag("--resize-720p", cfg.resize_to_720p, "Resize keyframes to 720p before extraction");
  app.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for synthetic data and the mock service")->capture_default_str();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate trajectory manifests and write a record store");
  ingest_cmd->add_option("manifests", ingest.manifests, "Manifest files")->required();
  ingest_cmd->add_option("--out", ingest.out, "Output store (JSON lines)");
  ingest_cmd->add_flag("--skip-decode", ingest.skip_decode, "Do not decode keyframe images");

  PruneArgs prune;
  auto* prune_cmd = app.add_subcommand("prune", "Prune grids or trajectories and pack surviving tokens");
  prune_cmd->add_option("inputs", prune.inputs, "Grid files or trajectory manifests")->required();
  prune_cmd->add_option("--out", prune.out, "Output directory")->capture_default_str();
  prune_cmd->add_flag("--visualize", prune.visualize, "Write mask images");
  prune_cmd->add_option("--image-format", prune.image_format, "png or pgm")->capture_default_str();

  std::string predictions, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions (JSON lines)");
  eval_cmd->add_option("predictions", predictions, "Predictions file")->required();
  eval_cmd->add_option("--out", eval_out, "Report JSON path");

  std::string bench_frames = "5,10,20,50", bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Token-count scaling on the synthetic static-background scene");
  bench_cmd->add_option("--frames", bench_frames, "Comma-separated frame counts")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Output prefix (writes .json and .csv)");

  NegArgs neg;
  auto* neg_cmd = app.add_subcommand("synth-neg", "Hard-negative synthesis via instruction translation");
  neg_cmd->require_subcommand(1);
  auto add_queue = [&](CLI::App* c) {
    c->add_option("--queue", neg.queue, "Verification queue log")->capture_default_str();
  };
  auto* req_cmd = neg_cmd->add_subcommand("request", "Translate successful trajectories and enqueue results");
  req_cmd->add_option("records", neg.records, "Positive trajectory manifest")->required();
  req_cmd->add_option("--endpoint", neg.endpoint, "'mock' or http://host:port/path")->capture_default_str();
  req_cmd->add_option("--template", neg.template_id, "Prompt template id")->capture_default_str();
  req_cmd->add_option("--param", neg.params, "Template parameter key=value (repeatable)");
  req_cmd->add_option("--in-flight", neg.in_flight, "Concurrent requests")->capture_default_str();
  add_queue(req_cmd);
  auto* review_cmd = neg_cmd->add_subcommand("review", "Approve or reject a queued translation");
  review_cmd->add_option("--id", neg.id, "Queue entry id")->required();
  review_cmd->add_flag("--approve", neg.approve);
  review_cmd->add_flag("--reject", neg.reject);
  review_cmd->add_option("--note", neg.note);
  add_queue(review_cmd);
  auto* list_cmd = neg_cmd->add_subcommand("list", "Show queue entries");
  add_queue(list_cmd);
  auto* emit_cmd = neg_cmd->add_subcommand("emit", "Write approved negatives as a record store");
  emit_cmd->add_option("--out", neg.out, "Output store (JSON lines)")->required();
  add_queue(emit_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    cfg.variant = parse_variant(variant);
    cfg.validate();
    if (*ingest_cmd) return cmd_ingest(ingest);
    if (*prune_cmd) return cmd_prune(prune, cfg);
    if (*eval_cmd) return cmd_eval(predictions, eval_out);
    if (*bench_cmd) return cmd_bench(bench_frames, bench_out, cfg);
    if (*req_cmd) return cmd_neg_request(neg, cfg);
    if (*review_cmd) return cmd_neg_review(neg);
    if (*list_cmd) return cmd_neg_list(neg);
    if (*emit_cmd) return cmd_neg_emit(neg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
