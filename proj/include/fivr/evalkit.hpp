#pragma once

// Retrieval evaluation: precision/recall along a ranking, average precision,
// mean AP over queries for a task's positive label set, interpolated PR
// curves, and the publication-time train/test split.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/ingest.hpp"
#include "fivr/labels.hpp"

namespace fivr::evalkit {

enum class Task : std::uint8_t { DSVR, CSVR, ISVR };

struct TaskSpec {
  Task task = Task::DSVR;
  std::string name;
  std::set<Label> positives;

  bool is_positive(Label l) const { return positives.contains(l); }
};

inline TaskSpec task_spec(Task t) {
  switch (t) {
    case Task::DSVR: return {t, "DSVR", {Label::ND, Label::DS}};
    case Task::CSVR: return {t, "CSVR", {Label::ND, Label::DS, Label::CS}};
    case Task::ISVR: return {t, "ISVR", {Label::ND, Label::DS, Label::CS, Label::IS}};
  }
  return {};
}

inline std::optional<TaskSpec> parse_task(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "dsvr") return task_spec(Task::DSVR);
  if (lower == "csvr") return task_spec(Task::CSVR);
  if (lower == "isvr") return task_spec(Task::ISVR);
  return std::nullopt;
}

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;

  bool operator==(const PrPoint&) const = default;
};

// One point per rank k: (TP_k / k, TP_k / |relevant|).
inline std::vector<PrPoint> precision_recall(const std::vector<VideoId>& ranking, const std::set<VideoId>& relevant) {
  if (relevant.empty()) throw std::invalid_argument("precision/recall: empty relevant set (recall undefined)");
  std::vector<PrPoint> out;
  out.reserve(ranking.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    if (relevant.contains(ranking[k])) ++tp;
    out.push_back({static_cast<double>(tp) / static_cast<double>(k + 1),
                   static_cast<double>(tp) / static_cast<double>(relevant.size())});
  }
  return out;
}

// (1/n) * sum over retrieved relevant videos of i / r_i, where r_i is the
// rank of the i-th one. Relevant videos missing from the ranking add 0.
inline double average_precision(const std::vector<VideoId>& ranking, const std::set<VideoId>& relevant) {
  if (relevant.empty()) throw std::invalid_argument("average precision: empty relevant set");
  // Extended accumulator, one rounding at the end.
  long double sum = 0.0L;
  std::size_t i = 0;
  std::set<VideoId> counted;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (relevant.contains(ranking[r]) && counted.insert(ranking[r]).second) {
      ++i;
      sum += static_cast<long double>(i) / static_cast<long double>(r + 1);
    }
  }
  return static_cast<double>(sum / static_cast<long double>(relevant.size()));
}

inline constexpr std::size_t kRecallBins = 21;

// Per query, the best precision at recall >= r (0 if recall never reaches
// r) at r = 0, 1/(bins-1), ..., 1; then the mean over queries per bin.
inline std::vector<PrPoint> interpolated_pr(const std::vector<std::vector<PrPoint>>& per_query,
                                            std::size_t bins = kRecallBins) {
  if (bins < 2) throw std::invalid_argument("interpolated PR needs at least 2 bins");
  std::vector<PrPoint> curve(bins);
  for (std::size_t b = 0; b < bins; ++b) curve[b].recall = static_cast<double>(b) / static_cast<double>(bins - 1);
  if (per_query.empty()) return curve;
  for (const auto& points : per_query) {
    // Recall is non-decreasing along the ranking, so the best precision at
    // recall >= r is a suffix maximum starting at the first rank reaching r.
    std::vector<double> suffix_max(points.size() + 1, 0.0);
    for (std::size_t k = points.size(); k-- > 0;) suffix_max[k] = std::max(suffix_max[k + 1], points[k].precision);
    std::size_t k = 0;
    for (std::size_t i = 0; i < bins; ++i) {
      while (k < points.size() && points[k].recall < curve[i].recall - 1e-12) ++k;
      curve[i].precision += suffix_max[k];
    }
  }
  for (auto& p : curve) p.precision /= static_cast<double>(per_query.size());
  return curve;
}

// query -> (video -> label)
using GroundTruth = std::map<VideoId, std::map<VideoId, Label>>;

template <typename Rows>
GroundTruth ground_truth_from(const Rows& rows) {
  GroundTruth gt;
  for (const auto& r : rows) gt[r.query_id][r.video_id] = r.label;
  return gt;
}

inline std::set<VideoId> relevant_set(const std::map<VideoId, Label>& labels, const TaskSpec& task) {
  std::set<VideoId> out;
  for (const auto& [id, l] : labels)
    if (task.is_positive(l)) out.insert(id);
  return out;
}

struct EvalResult {
  std::string task;
  std::map<VideoId, double> ap;
  double map = 0.0;
  std::vector<PrPoint> curve;
  std::vector<std::string> warnings;
};

// Queries come from the ground truth; one with no ranking is scored on an
// empty ranking. Queries without positives under the task are skipped with
// a warning, as are rankings for queries absent from the ground truth.
inline EvalResult mean_average_precision(const std::map<VideoId, std::vector<VideoId>>& rankings,
                                         const GroundTruth& gt, const TaskSpec& task,
                                         std::size_t bins = kRecallBins) {
  EvalResult res;
  res.task = task.name;
  std::vector<std::vector<PrPoint>> curves;
  static const std::vector<VideoId> kEmpty;
  for (const auto& [query, labels] : gt) {
    auto relevant = relevant_set(labels, task);
    relevant.erase(query);
    if (relevant.empty()) {
      res.warnings.push_back("query '" + query + "' has no " + task.name + " positives; excluded");
      continue;
    }
    auto it = rankings.find(query);
    const auto& ranking = it == rankings.end() ? kEmpty : it->second;
    if (it == rankings.end()) res.warnings.push_back("query '" + query + "' has no ranking; scored as empty");
    res.ap[query] = average_precision(ranking, relevant);
    curves.push_back(precision_recall(ranking, relevant));
  }
  for (const auto& [query, ranking] : rankings)
    if (!gt.contains(query)) res.warnings.push_back("ranking for '" + query + "' has no ground truth; ignored");
  double sum = 0.0;
  for (const auto& [q, ap] : res.ap) sum += ap;
  res.map = res.ap.empty() ? 0.0 : sum / static_cast<double>(res.ap.size());
  res.curve = interpolated_pr(curves, bins);
  return res;
}

struct Split {
  std::vector<VideoId> train;
  std::vector<VideoId> test;
};

// Ascending publication time, ties by id; the first floor(n/2) train.
inline Split temporal_split(const ingest::Catalog& catalog) {
  std::vector<const ingest::VideoRecord*> order;
  for (const auto& r : catalog.records()) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->published_at != b->published_at) return a->published_at < b->published_at;
    return a->video_id < b->video_id;
  });
  Split s;
  const std::size_t half = order.size() / 2;
  for (std::size_t i = 0; i < order.size(); ++i) (i < half ? s.train : s.test).push_back(order[i]->video_id);
  return s;
}

// Per-query AP rows, the mAP line, then the curve as recall/precision rows.
inline std::string format_results(const EvalResult& r, std::string_view method) {
  std::string out = "# task " + r.task + " method " + std::string(method) + "\n";
  out += "query_id\tap\n";
  for (const auto& [q, ap] : r.ap) out += q + '\t' + format_real(ap) + '\n';
  out += "mAP\t" + format_real(r.map) + '\n';
  out += "recall\tprecision\n";
  for (const auto& p : r.curve) out += format_real(p.recall) + '\t' + format_real(p.precision) + '\n';
  for (const auto& w : r.warnings) out += "# warning: " + w + '\n';
  return out;
}

}  // namespace fivr::evalkit
