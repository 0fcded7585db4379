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

#ifndef CUATRACE_METRICS_HPP
#define CUATRACE_METRICS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuatrace/error.hpp"
#include "cuatrace/interval.hpp"
#include "cuatrace/trajectory.hpp"

namespace cuatrace {

/// Temporal IoU. Two identical zero-length intervals score 1.
inline double tiou(const Interval& pred, const Interval& gt) {
  pred.validate();
  gt.validate();
  const double hull = std::max(pred.end, gt.end) - std::min(pred.start, gt.start);
  if (hull == 0.0) return pred == gt ? 1.0 : 0.0;
  const double inter = std::max(0.0, std::min(pred.end, gt.end) - std::max(pred.start, gt.start));
  return inter / hull;
}

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void add(bool pred, bool label) {
    if (pred && label) ++tp;
    else if (pred) ++fp;
    else if (label) ++fn;
    else ++tn;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Success is the positive class. Precision and recall are empty when their
/// denominator is zero.
struct ClassificationMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;

  static ClassificationMetrics from(const ConfusionCounts& c) {
    ClassificationMetrics m;
    m.accuracy = c.total() == 0 ? 0.0
                                : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return m;
  }
  friend bool operator==(const ClassificationMetrics&, const ClassificationMetrics&) = default;
};

inline ClassificationMetrics binary_metrics(std::span<const bool> preds, std::span<const bool> labels) {
  require(!preds.empty(), "binary_metrics: empty input");
  require(preds.size() == labels.size(), "binary_metrics: length mismatch");
  ConfusionCounts c;
  for (std::size_t k = 0; k < preds.size(); ++k) c.add(preds[k], labels[k]);
  return ClassificationMetrics::from(c);
}

// std::vector<bool> has no contiguous storage.
inline ClassificationMetrics binary_metrics(const std::vector<bool>& preds,
                                            const std::vector<bool>& labels) {
  require(!preds.empty(), "binary_metrics: empty input");
  require(preds.size() == labels.size(), "binary_metrics: length mismatch");
  ConfusionCounts c;
  for (std::size_t k = 0; k < preds.size(); ++k) c.add(preds[k], labels[k]);
  return ClassificationMetrics::from(c);
}

struct EvalRecord {
  std::string id;
  Platform platform = Platform::kOther;
  bool pred_success = false;
  bool gt_success = false;
  std::optional<Interval> pred_interval;
  std::optional<Interval> gt_interval;
};

struct GroupMetrics {
  ConfusionCounts counts;
  ClassificationMetrics metrics;
  std::optional<double> mean_tiou;
  std::size_t tiou_count = 0;
};

struct EvalReport {
  std::map<Platform, GroupMetrics> platforms;
  GroupMetrics overall;
};

namespace detail {

struct GroupAccumulator {
  ConfusionCounts counts;
  double tiou_sum = 0.0;
  std::size_t tiou_count = 0;

  void add(const EvalRecord& r) {
    counts.add(r.pred_success, r.gt_success);
    if (r.pred_interval && r.gt_interval) {
      tiou_sum += tiou(*r.pred_interval, *r.gt_interval);
      ++tiou_count;
    }
  }
  GroupMetrics finish() const {
    GroupMetrics g{counts, ClassificationMetrics::from(counts), std::nullopt, tiou_count};
    if (tiou_count > 0) g.mean_tiou = tiou_sum / static_cast<double>(tiou_count);
    return g;
  }
};

}  // namespace detail

/// Per-platform metrics plus an overall group pooled over every record.
inline EvalReport aggregate(std::span<const EvalRecord> records) {
  require(!records.empty(), "aggregate: no records");
  std::map<Platform, detail::GroupAccumulator> groups;
  detail::GroupAccumulator all;
  for (const EvalRecord& r : records) {
    groups[r.platform].add(r);
    all.add(r);
  }
  EvalReport report;
  for (const auto& [platform, acc] : groups) report.platforms[platform] = acc.finish();
  report.overall = all.finish();
  return report;
}

inline EvalRecord eval_record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump()) : "";
  r.platform = parse_platform(j.at("platform").get<std::string>());
  r.pred_success = j.at("pred_success").get<bool>();
  r.gt_success = j.at("gt_success").get<bool>();
  if (j.contains("pred_interval") && !j["pred_interval"].is_null())
    r.pred_interval = interval_from_json(j["pred_interval"]);
  if (j.contains("gt_interval") && !j["gt_interval"].is_null())
    r.gt_interval = interval_from_json(j["gt_interval"]);
  return r;
}

/// JSON-lines prediction file; errors name the 1-based line.
inline std::vector<EvalRecord> parse_eval_records(const std::string& text) {
  std::vector<EvalRecord> out;
  std::size_t line_no = 0, begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find('\n', begin), text.size());
    const std::string line = text.substr(begin, end - begin);
    ++line_no;
    begin = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      out.push_back(eval_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kSchema, where + e.what(), line);
    } catch (const Error& e) {
      fail(e.kind(), where + e.message(), line);
    }
  }
  return out;
}

namespace detail {

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const GroupMetrics& g) {
  nlohmann::ordered_json j;
  j["n"] = g.counts.total();
  j["accuracy"] = g.metrics.accuracy;
  j["precision"] = optional_json(g.metrics.precision);
  j["recall"] = optional_json(g.metrics.recall);
  j["counts"] = {{"tp", g.counts.tp}, {"fp", g.counts.fp}, {"tn", g.counts.tn}, {"fn", g.counts.fn}};
  j["mean_tiou"] = optional_json(g.mean_tiou);
  j["tiou_n"] = g.tiou_count;
  return j;
}

}  // namespace detail

/// Columns are platforms followed by "overall".
inline nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["columns"] = nlohmann::ordered_json::array();
  j["platforms"] = nlohmann::ordered_json::object();
  for (const auto& [p, g] : report.platforms) {
    j["columns"].push_back(to_string(p));
    j["platforms"][to_string(p)] = detail::to_json(g);
  }
  j["columns"].push_back("overall");
  j["overall"] = detail::to_json(report.overall);
  return j;
}

/// Fixed-width table: one row per metric, one column per platform plus Overall,
/// values in percent.
inline std::string format_table(const EvalReport& report) {
  std::vector<std::pair<std::string, const GroupMetrics*>> cols;
  for (const auto& [p, g] : report.platforms) cols.emplace_back(to_string(p), &g);
  cols.emplace_back("overall", &report.overall);

  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
    return std::string(buf);
  };
  auto row = [&](const std::string& name, auto get) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-10s", name.c_str());
    std::string line = buf;
    for (const auto& [_, g] : cols) {
      std::snprintf(buf, sizeof buf, " %14s", cell(get(*g)).c_str());
      line += buf;
    }
    return line + "\n";
  };

  std::string out;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%-10s", "metric");
  out += buf;
  for (const auto& [name, _] : cols) {
    std::snprintf(buf, sizeof buf, " %14s", name.c_str());
    out += buf;
  }
  out += "\n";
  out += row("accuracy", [](const GroupMetrics& g) { return std::optional(g.metrics.accuracy); });
  out += row("precision", [](const GroupMetrics& g) { return g.metrics.precision; });
  out += row("recall", [](const GroupMetrics& g) { return g.metrics.recall; });
  out += row("tIoU", [](const GroupMetrics& g) { return g.mean_tiou; });
  return out;
}

}  // namespace cuatrace

#endif  // CUATRACE_METRICS_HPP
