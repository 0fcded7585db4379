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

#ifndef CUATRACE_NEGSYNTH_HPP
#define CUATRACE_NEGSYNTH_HPP

// Hard-negative synthesis by instruction translation. A successful trajectory
// is sent to an external vision-language service, which answers with an
// instruction the trajectory does not satisfy, a justification, and the step
// where the mismatch becomes visible. Responses wait in a verification queue;
// only approved ones become negative records.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/bytes.hpp"
#include "cuatrace/error.hpp"
#include "cuatrace/trajectory.hpp"

namespace cuatrace {

inline constexpr char kDefaultTemplateId[] = "instruction-translation-v1";

/// Prompt text for a template id.
inline std::string prompt_for_template(const std::string& template_id) {
  if (template_id == kDefaultTemplateId) {
    return "The frames show, in order, the screen after each step of a computer task that "
           "was completed successfully. Write a different task instruction that a user could "
           "plausibly give in this same application, but that these steps do NOT accomplish. "
           "Reply with a JSON object with exactly these keys: \"instruction\" (the new "
           "instruction), \"justification\" (one or two sentences on why the steps fail it), "
           "\"reference_step\" (0-based index of the first frame where the mismatch is "
           "visible).";
  }
  fail(ErrorKind::kInvalidInput, "unknown prompt template '" + template_id + "'");
}

struct TranslationRequest {
  std::string template_id;
  std::vector<std::string> frames;  // keyframe references, in order
  std::vector<std::optional<std::string>> actions;
  std::map<std::string, std::string> params;

  std::size_t step_count() const { return frames.size(); }
  friend bool operator==(const TranslationRequest&, const TranslationRequest&) = default;
};

inline nlohmann::ordered_json to_json(const TranslationRequest& req) {
  nlohmann::ordered_json j;
  j["template"] = req.template_id;
  j["prompt"] = prompt_for_template(req.template_id);
  j["frames"] = req.frames;
  j["actions"] = nlohmann::ordered_json::array();
  for (const auto& a : req.actions)
    j["actions"].push_back(a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr));
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : req.params) j["params"][k] = v;
  return j;
}

inline std::string serialize_request(const TranslationRequest& req) { return to_json(req).dump(); }

/// Keyframe reference: the file path, or a data URI for embedded images.
inline std::string keyframe_ref(const Keyframe& k) {
  if (!k.embedded()) return k.path;
  const bool png = k.data.size() >= 8 && k.data[0] == 0x89 && k.data[1] == 'P';
  return std::string("data:image/") + (png ? "png" : "jpeg") + ";base64," +
         detail::base64_encode(k.data);
}

/// Only successful trajectories are valid sources.
inline TranslationRequest build_request(const TrajectoryRecord& record,
                                        const std::string& template_id = kDefaultTemplateId,
                                        std::map<std::string, std::string> params = {}) {
  if (!record.label || !record.label->success)
    fail(ErrorKind::kInvalidInput,
         "build_request: source trajectory must carry a success=true label");
  require(!record.steps.empty(), "build_request: trajectory has no keyframes");
  (void)prompt_for_template(template_id);
  TranslationRequest req{template_id, {}, {}, std::move(params)};
  for (const StepRecord& s : record.steps) {
    req.frames.push_back(keyframe_ref(s.keyframe));
    req.actions.push_back(s.action_summary);
  }
  return req;
}

struct TranslationResponse {
  std::string unpaired_instruction;
  std::string justification;
  std::size_t reference_step = 0;

  friend bool operator==(const TranslationResponse&, const TranslationResponse&) = default;
};

inline nlohmann::ordered_json to_json(const TranslationResponse& r) {
  return {{"instruction", r.unpaired_instruction},
          {"justification", r.justification},
          {"reference_step", r.reference_step}};
}

/// Strict parse of a service reply: a JSON object with exactly the keys
/// instruction, justification (non-empty strings) and reference_step (an
/// integer in [0, step_count)). Errors carry the raw reply.
inline TranslationResponse parse_response(const std::string& raw, std::size_t step_count) {
  const nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(ErrorKind::kSchema, "response is not a JSON object", raw);
  for (const auto& [key, _] : j.items())
    if (key != "instruction" && key != "justification" && key != "reference_step")
      fail(ErrorKind::kSchema, "unexpected field '" + key + "'", raw);
  for (const char* key : {"instruction", "justification"}) {
    if (!j.contains(key)) fail(ErrorKind::kSchema, std::string("missing field '") + key + "'", raw);
    if (!j[key].is_string() || j[key].get<std::string>().empty())
      fail(ErrorKind::kSchema, std::string("field '") + key + "' must be a non-empty string", raw);
  }
  if (!j.contains("reference_step")) fail(ErrorKind::kSchema, "missing field 'reference_step'", raw);
  const auto& step = j["reference_step"];
  if (!step.is_number_integer())
    fail(ErrorKind::kSchema, "field 'reference_step' must be an integer", raw);
  const auto value = step.get<std::int64_t>();
  if (value < 0 || static_cast<std::uint64_t>(value) >= step_count)
    fail(ErrorKind::kValidation,
         "reference_step " + std::to_string(value) + " outside segment of " +
             std::to_string(step_count) + " steps",
         raw);
  return {j["instruction"].get<std::string>(), j["justification"].get<std::string>(),
          static_cast<std::size_t>(value)};
}

enum class VerificationStatus { kPending, kApproved, kRejected };

inline const char* to_string(VerificationStatus s) {
  switch (s) {
    case VerificationStatus::kPending: return "pending";
    case VerificationStatus::kApproved: return "approved";
    case VerificationStatus::kRejected: return "rejected";
  }
  return "pending";
}

inline VerificationStatus parse_verification_status(const std::string& s) {
  if (s == "pending") return VerificationStatus::kPending;
  if (s == "approved") return VerificationStatus::kApproved;
  if (s == "rejected") return VerificationStatus::kRejected;
  fail(ErrorKind::kInvalidInput, "unknown verification status '" + s + "'");
}

struct VerificationState {
  VerificationStatus status = VerificationStatus::kPending;
  std::optional<std::string> note;
};

/// The negative keeps the source keyframes, takes the translated instruction,
/// and is labelled as a failure whose error interval is the reference step.
inline TrajectoryRecord emit_negative(const TrajectoryRecord& source, const TranslationResponse& resp,
                                      const VerificationState& verification) {
  if (verification.status != VerificationStatus::kApproved)
    fail(ErrorKind::kState, std::string("emit_negative: verification is ") +
                                to_string(verification.status) + ", not approved");
  if (resp.reference_step >= source.steps.size())
    fail(ErrorKind::kValidation, "emit_negative: reference_step outside source trajectory");
  if (resp.unpaired_instruction == source.instruction)
    fail(ErrorKind::kValidation, "emit_negative: translated instruction equals the source");
  const double at = source.steps[resp.reference_step].timestamp;
  TrajectoryRecord out{resp.unpaired_instruction, source.steps, source.platform,
                       JudgmentLabel{false, Interval{at, at}, resp.justification}};
  return out;
}

// ---- transport ----------------------------------------------------------

/// Request/response exchange with the translation service. Implementations
/// throw Error(kTransport) on delivery failure and must be thread-safe.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string exchange(const std::string& request_body) = 0;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

/// Deterministic in-process stand-in for the translation service. The reply
/// depends only on the seed and the request body.
class MockTranslationService : public Transport {
 public:
  struct Options {
    std::uint64_t seed = 0;
    std::size_t fail_first = 0;  // transport failures before the first success
    bool omit_justification = false;
    std::optional<std::int64_t> force_reference_step;
  };

  MockTranslationService() = default;
  explicit MockTranslationService(Options opts) : opts_(opts) {}

  std::string exchange(const std::string& request_body) override {
    {
      std::lock_guard lock(mu_);
      ++calls_;
      if (failures_ < opts_.fail_first) {
        ++failures_;
        fail(ErrorKind::kTransport, "mock service: simulated connection failure");
      }
    }
    const nlohmann::json req = nlohmann::json::parse(request_body, nullptr, false);
    if (req.is_discarded() || !req.contains("frames") || !req["frames"].is_array() ||
        req["frames"].empty())
      fail(ErrorKind::kTransport, "mock service: 400 bad request", request_body);

    static constexpr const char* kVerbs[] = {"Delete", "Rename", "Duplicate", "Archive",
                                             "Hide", "Export", "Sort", "Pin"};
    static constexpr const char* kObjects[] = {
        "the most recently opened file", "the second browser tab", "the selected paragraph",
        "the unread messages", "the desktop shortcut", "the last spreadsheet row",
        "the downloads folder", "the current playlist"};
    static constexpr const char* kSuffixes[] = {"before closing the window", "into a new folder",
                                                "using the context menu", "and then undo it",
                                                "as a PDF", "in reverse order"};
    std::mt19937_64 rng(opts_.seed ^ detail::fnv1a(request_body));
    auto pick = [&](auto& arr) {
      return arr[std::uniform_int_distribution<std::size_t>(0, std::size(arr) - 1)(rng)];
    };
    const std::string verb = pick(kVerbs), object = pick(kObjects), suffix = pick(kSuffixes);
    const auto frames = req["frames"].size();
    const auto step = std::uniform_int_distribution<std::size_t>(0, frames - 1)(rng);

    nlohmann::ordered_json reply;
    reply["instruction"] = verb + " " + object + " " + suffix + ".";
    if (!opts_.omit_justification)
      reply["justification"] = "The steps never " + lowercase(verb) + " " + object +
                               "; from step " + std::to_string(step) +
                               " the screen shows unrelated changes.";
    reply["reference_step"] = opts_.force_reference_step
                                  ? nlohmann::ordered_json(*opts_.force_reference_step)
                                  : nlohmann::ordered_json(step);
    return reply.dump();
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  static std::string lowercase(std::string s) {
    std::ranges::transform(s, s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  }

  Options opts_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
  std::size_t failures_ = 0;
};

/// Exponential backoff: the n-th retry waits initial * multiplier^(n-1), capped.
struct RetryPolicy {
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{5000};

  std::chrono::milliseconds backoff(std::size_t retry) const {
    double ms = static_cast<double>(initial_backoff.count());
    for (std::size_t k = 1; k < retry; ++k) ms *= multiplier;
    return std::chrono::milliseconds(
        static_cast<std::int64_t>(std::min(ms, static_cast<double>(max_backoff.count()))));
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Sends requests with retries on transport failure. Schema and validation
/// errors in the reply are returned to the caller immediately.
class TranslationClient {
 public:
  TranslationClient(Transport& transport, RetryPolicy policy = {}, Sleeper sleeper = sleep_for)
      : transport_(transport), policy_(policy), sleeper_(std::move(sleeper)) {}

  TranslationResponse translate(const TranslationRequest& request) const {
    const std::string body = serialize_request(request);
    for (std::size_t attempt = 0;; ++attempt) {
      std::string raw;
      try {
        raw = transport_.exchange(body);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kTransport || attempt >= policy_.max_retries) throw;
        sleeper_(policy_.backoff(attempt + 1));
        continue;
      }
      return parse_response(raw, request.step_count());
    }
  }

 private:
  Transport& transport_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

struct TranslationOutcome {
  std::optional<TranslationResponse> response;
  std::optional<Error> error;
};

/// Translates each request with at most `max_in_flight` concurrent exchanges.
/// Outcomes are returned in request order.
inline std::vector<TranslationOutcome> translate_batch(const TranslationClient& client,
                                                       const std::vector<TranslationRequest>& requests,
                                                       std::size_t max_in_flight = 4) {
  std::vector<TranslationOutcome> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < requests.size(); k = next++) {
      try {
        out[k].response = client.translate(requests[k]);
      } catch (const Error& e) {
        out[k].error = e;
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(requests.size(), 1));
  {
    std::vector<std::jthread> threads;
    for (std::size_t k = 0; k + 1 < n; ++k) threads.emplace_back(worker);
    worker();
  }
  return out;
}

// ---- verification queue -------------------------------------------------

struct QueueEntry {
  std::string id;
  TrajectoryRecord source;
  TranslationResponse response;
  VerificationState state;
};

/// Pending translations awaiting human review. Every mutation is appended to
/// a JSON-lines log when one is attached; replaying the log restores the queue.
class VerificationQueue {
 public:
  VerificationQueue() = default;

  /// Opens (or creates) a log and replays it.
  static VerificationQueue open(const std::filesystem::path& log_path) {
    VerificationQueue q;
    if (std::filesystem::exists(log_path)) {
      std::ifstream in(log_path);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          q.apply(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
          fail(ErrorKind::kSchema,
               "queue log line " + std::to_string(line_no) + ": " + e.what(), line);
        }
      }
    }
    q.log_path_ = log_path;
    return q;
  }

  VerificationQueue(VerificationQueue&& other) noexcept
      : entries_(std::move(other.entries_)), log_path_(std::move(other.log_path_)) {}

  void enqueue(const std::string& id, const TrajectoryRecord& source,
               const TranslationResponse& response) {
    nlohmann::ordered_json ev;
    ev["event"] = "enqueue";
    ev["id"] = id;
    ev["source"] = to_json(source);
    ev["response"] = to_json(response);
    std::lock_guard lock(mu_);
    apply(ev);
    append(ev);
  }

  /// Moves a pending entry to approved or rejected.
  void review(const std::string& id, VerificationStatus status,
              std::optional<std::string> note = std::nullopt) {
    nlohmann::ordered_json ev;
    ev["event"] = "review";
    ev["id"] = id;
    ev["status"] = to_string(status);
    if (note) ev["note"] = *note;
    std::lock_guard lock(mu_);
    apply(ev);
    append(ev);
  }

  const std::vector<QueueEntry>& entries() const { return entries_; }

  const QueueEntry* find(const std::string& id) const {
    auto it = std::ranges::find(entries_, id, &QueueEntry::id);
    return it == entries_.end() ? nullptr : &*it;
  }

  std::size_t count(VerificationStatus status) const {
    return static_cast<std::size_t>(std::ranges::count_if(
        entries_, [&](const QueueEntry& e) { return e.state.status == status; }));
  }

  /// Negatives for every approved entry, in queue order.
  std::vector<TrajectoryRecord> emit_approved() const {
    std::vector<TrajectoryRecord> out;
    for (const QueueEntry& e : entries_)
      if (e.state.status == VerificationStatus::kApproved)
        out.push_back(emit_negative(e.source, e.response, e.state));
    return out;
  }

 private:
  void apply(const nlohmann::json& ev) {
    const std::string kind = ev.at("event").get<std::string>();
    const std::string id = ev.at("id").get<std::string>();
    auto it = std::ranges::find(entries_, id, &QueueEntry::id);
    if (kind == "enqueue") {
      if (it != entries_.end()) fail(ErrorKind::kState, "queue: duplicate id '" + id + "'");
      const auto& r = ev.at("response");
      TranslationResponse resp{r.at("instruction").get<std::string>(),
                               r.at("justification").get<std::string>(),
                               r.at("reference_step").get<std::size_t>()};
      entries_.push_back({id, record_from_json(ev.at("source")), std::move(resp), {}});
    } else if (kind == "review") {
      if (it == entries_.end()) fail(ErrorKind::kState, "queue: unknown id '" + id + "'");
      if (it->state.status != VerificationStatus::kPending)
        fail(ErrorKind::kState, "queue: entry '" + id + "' was already reviewed");
      const auto status = parse_verification_status(ev.at("status").get<std::string>());
      if (status == VerificationStatus::kPending)
        fail(ErrorKind::kState, "queue: review must approve or reject");
      it->state.status = status;
      if (ev.contains("note")) it->state.note = ev["note"].get<std::string>();
    } else {
      fail(ErrorKind::kSchema, "queue: unknown event '" + kind + "'");
    }
  }

  void append(const nlohmann::ordered_json& ev) {
    if (log_path_.empty()) return;
    std::ofstream out(log_path_, std::ios::app);
    out << ev.dump() << "\n";
    if (!out) fail(ErrorKind::kIo, "queue: cannot append to " + log_path_.string());
  }

  std::vector<QueueEntry> entries_;
  std::filesystem::path log_path_;
  mutable std::mutex mu_;
};

}  // namespace cuatrace

#endif  // CUATRACE_NEGSYNTH_HPP
