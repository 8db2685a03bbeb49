#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks.

#include <algorithm>
#include <functional>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fivr/annotate.hpp"
#include "fivr/index.hpp"
#include "fivr/synth.hpp"

namespace oracle {

using fivr::VideoId;

// ---------------------------------------------------------------------------
// Relations, clause by clause. Coverage of a scene span by the union of the
// query's scene spans is checked on the elementary intervals cut by every
// query endpoint: each piece inside the scene must have its midpoint inside
// some query scene.

inline bool covered(const fivr::synth::Span& s, const std::vector<fivr::synth::SceneAttrib>& query_scenes) {
  std::vector<double> cuts{s.start, s.end};
  for (const auto& q : query_scenes)
    for (double x : {q.span.start, q.span.end})
      if (x > s.start && x < s.end) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    const double mid = cuts[i] + (cuts[i + 1] - cuts[i]) / 2.0;
    bool in = false;
    for (const auto& q : query_scenes) in = in || (q.span.start <= mid && mid < q.span.end);
    if (!in) return false;
  }
  return true;
}

struct Clauses {
  bool ds = false, cs = false, is = false, nd = false;
};

inline Clauses relations(const fivr::synth::SynthVideo& q, const fivr::synth::SynthVideo& p) {
  Clauses c;
  bool any_contained = false, any_incident = false, all_ds = !p.scenes.empty();
  for (const auto& s : p.scenes) {
    const bool contained = covered(s.span, q.scenes);
    bool same_view = false, same_incident = false;
    for (const auto& qs : q.scenes) {
      same_view = same_view || qs.viewpoint == s.viewpoint;
      same_incident = same_incident || qs.incident == s.incident;
    }
    c.ds = c.ds || (contained && same_view);
    c.cs = c.cs || (contained && !same_view);
    any_contained = any_contained || contained;
    any_incident = any_incident || same_incident;
    all_ds = all_ds && contained && same_view;
  }
  c.is = any_incident && !any_contained;
  c.nd = all_ds;
  return c;
}

inline fivr::Label label(const fivr::synth::SynthVideo& q, const fivr::synth::SynthVideo& p) {
  const auto c = relations(q, p);
  if (c.nd) return fivr::Label::ND;
  if (c.ds) return fivr::Label::DS;
  if (c.cs) return fivr::Label::CS;
  if (c.is) return fivr::Label::IS;
  return fivr::Label::DI;
}

// ---------------------------------------------------------------------------
// Metrics, straight from the definitions with O(n^2) recounting.

inline std::size_t relevant_in_prefix(const std::vector<VideoId>& ranking, const std::set<VideoId>& relevant,
                                      std::size_t k) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < k; ++i) n += relevant.count(ranking[i]);
  return n;
}

inline std::vector<std::pair<double, double>> pr(const std::vector<VideoId>& ranking,
                                                 const std::set<VideoId>& relevant) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 1; k <= ranking.size(); ++k) {
    const double tp = static_cast<double>(relevant_in_prefix(ranking, relevant, k));
    out.emplace_back(tp / static_cast<double>(k), tp / static_cast<double>(relevant.size()));
  }
  return out;
}

// Mean over all relevant videos of precision at that video's rank (0 when
// it is never retrieved).
inline double ap(const std::vector<VideoId>& ranking, const std::set<VideoId>& relevant) {
  double sum = 0.0;
  for (const auto& r : relevant) {
    auto it = std::find(ranking.begin(), ranking.end(), r);
    if (it == ranking.end()) continue;
    const auto k = static_cast<std::size_t>(it - ranking.begin()) + 1;
    sum += static_cast<double>(relevant_in_prefix(ranking, relevant, k)) / static_cast<double>(k);
  }
  return sum / static_cast<double>(relevant.size());
}

inline std::vector<double> interpolated(const std::vector<std::vector<std::pair<double, double>>>& per_query,
                                        std::size_t bins) {
  std::vector<double> out(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    const double r = static_cast<double>(b) / static_cast<double>(bins - 1);
    double sum = 0.0;
    for (const auto& points : per_query) {
      double best = 0.0;
      for (const auto& [p, rec] : points)
        if (rec >= r - 1e-12) best = std::max(best, p);
      sum += best;
    }
    out[b] = sum / static_cast<double>(per_query.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Retrieval by exhaustive scan. Products are summed in ascending term order,
// the order the index accumulates in, so scores match to the bit.

inline double dot_scan(const fivr::SparseVector& q, const fivr::SparseVector& d) {
  double s = 0.0;
  for (const auto& [t, w] : q.entries()) {
    const auto& e = d.entries();
    auto it = std::lower_bound(e.begin(), e.end(), t, [](const auto& x, fivr::TermId v) { return x.first < v; });
    if (it != e.end() && it->first == t) s += w * it->second;
  }
  return s;
}

inline bool shares_term(const fivr::SparseVector& a, const fivr::SparseVector& b) {
  std::set<fivr::TermId> ta;
  for (const auto& e : a.entries()) ta.insert(e.first);
  for (const auto& e : b.entries())
    if (ta.contains(e.first)) return true;
  return false;
}

inline std::vector<fivr::index::ScoredVideo> top_k(const std::vector<std::pair<VideoId, fivr::SparseVector>>& docs,
                                                   const fivr::SparseVector& q, std::size_t k,
                                                   const VideoId& exclude = {}) {
  std::vector<fivr::index::ScoredVideo> all;
  for (const auto& [id, v] : docs)
    if (id != exclude && shares_term(q, v)) all.push_back({id, dot_scan(q, v)});
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.video_id < b.video_id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

struct PairEdge {
  VideoId a, b;
  double score;
};

// Every unordered pair; a video missing from one side scores 0 there.
inline std::vector<PairEdge> pairs(const std::vector<std::pair<VideoId, fivr::SparseVector>>& visual,
                                   const std::vector<std::pair<VideoId, fivr::SparseVector>>& textual,
                                   double threshold) {
  std::map<VideoId, const fivr::SparseVector*> vis, txt;
  std::set<VideoId> ids;
  for (const auto& [id, v] : visual) vis[id] = &v, ids.insert(id);
  for (const auto& [id, v] : textual) txt[id] = &v, ids.insert(id);
  const double sides = (visual.empty() ? 0.0 : 1.0) + (textual.empty() ? 0.0 : 1.0);
  std::vector<VideoId> order(ids.begin(), ids.end());
  std::vector<PairEdge> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      auto side = [&](auto& m) {
        auto a = m.find(order[i]), b = m.find(order[j]);
        return a == m.end() || b == m.end() ? 0.0 : dot_scan(*a->second, *b->second);
      };
      const double score = (side(vis) + side(txt)) / sides;
      if (score > threshold) out.push_back({order[i], order[j], score});
    }
  return out;
}

// Random unit-norm sparse vectors over `vocab` terms, about `nnz` each.
template <typename Rng>
std::vector<std::pair<VideoId, fivr::SparseVector>> random_corpus(Rng& rng, std::size_t n, std::size_t vocab,
                                                                  std::size_t nnz, const std::string& prefix = "d") {
  std::vector<std::pair<VideoId, fivr::SparseVector>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<fivr::SparseVector::Entry> e;
    const auto count = 1 + rng.below(nnz);
    for (std::size_t j = 0; j < count; ++j)
      e.emplace_back(static_cast<fivr::TermId>(rng.below(vocab)), 0.05 + rng.uniform());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%05zu", prefix.c_str(), i);
    out.emplace_back(buf, fivr::SparseVector(std::move(e)).normalized());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotation protocol as three plain loops. Returns (video, phase) in label
// order.

struct SimStep {
  VideoId video_id;
  fivr::annotate::Phase phase;
  bool operator==(const SimStep&) const = default;
};

inline std::vector<SimStep> simulate_annotation(const std::vector<fivr::index::ScoredVideo>& visual,
                                                const std::vector<fivr::index::ScoredVideo>& textual,
                                                const std::map<VideoId, fivr::Timestamp>& published,
                                                fivr::Timestamp query_time, const fivr::annotate::StoppingRules& rules,
                                                const std::function<fivr::Label(const VideoId&)>& label_of) {
  using fivr::annotate::Phase;
  auto by_score = [](std::vector<fivr::index::ScoredVideo> v) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.score > b.score || (a.score == b.score && a.video_id < b.video_id);
    });
    return v;
  };
  std::set<VideoId> done;
  std::vector<SimStep> out;
  auto run = [&](const std::vector<fivr::index::ScoredVideo>& queue, Phase phase, bool capped) {
    std::size_t count = 0, dry = 0;
    for (const auto& sv : queue) {
      if (done.contains(sv.video_id)) continue;
      if (dry >= rules.irrelevant_run || (capped && count >= rules.phase_cap)) break;
      const auto l = label_of(sv.video_id);
      done.insert(sv.video_id);
      out.push_back({sv.video_id, phase});
      ++count;
      dry = fivr::is_relevant(l) ? 0 : dry + 1;
    }
  };
  run(by_score(visual), Phase::Visual, true);
  run(by_score(textual), Phase::Textual, true);
  std::map<VideoId, double> sum;
  for (const auto& sv : visual) sum[sv.video_id] += sv.score;
  for (const auto& sv : textual) sum[sv.video_id] += sv.score;
  std::vector<fivr::index::ScoredVideo> merged;
  for (const auto& [id, score] : sum) {
    const auto t = published.at(id);
    if (std::abs(t - query_time) <= rules.merged_window && !done.contains(id)) merged.push_back({id, score / 2.0});
  }
  run(by_score(merged), Phase::Merged, false);
  return out;
}

}  // namespace oracle
