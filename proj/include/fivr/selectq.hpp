#pragma once

// Automatic query selection: similarity graph -> connected components ->
// uploader-ratio and publication-span filters -> one query per component ->
// ranking by component size.

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/index.hpp"
#include "fivr/ingest.hpp"

namespace fivr::selectq {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const auto next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t component_size(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct SimilarityGraph {
  std::vector<VideoId> nodes;
  std::vector<std::pair<VideoId, VideoId>> edges;

  // Edges are canonicalised (smaller id first), self-loops and duplicates
  // dropped; endpoints missing from `nodes` are added.
  static SimilarityGraph from_edges(std::vector<VideoId> nodes, const std::vector<index::Edge>& edges) {
    std::vector<std::pair<VideoId, VideoId>> plain;
    plain.reserve(edges.size());
    for (const auto& e : edges) plain.emplace_back(e.a, e.b);
    return make(std::move(nodes), std::move(plain));
  }

  static SimilarityGraph make(std::vector<VideoId> nodes, std::vector<std::pair<VideoId, VideoId>> edges) {
    SimilarityGraph g;
    std::set<VideoId> node_set(nodes.begin(), nodes.end());
    std::set<std::pair<VideoId, VideoId>> edge_set;
    for (auto& [a, b] : edges) {
      node_set.insert(a);
      node_set.insert(b);
      if (a == b) continue;
      edge_set.insert(a < b ? std::pair{a, b} : std::pair{b, a});
    }
    g.nodes.assign(node_set.begin(), node_set.end());
    g.edges.assign(edge_set.begin(), edge_set.end());
    return g;
  }
};

struct Component {
  std::vector<VideoId> members;  // ascending
  double uploader_ratio = 0.0;
  Timestamp earliest = 0;
  Timestamp latest = 0;

  std::size_t size() const noexcept { return members.size(); }
  Timestamp span() const noexcept { return latest - earliest; }

  bool operator==(const Component&) const = default;
};

inline constexpr std::size_t kMinComponentSize = 3;

// Union-find over the edge list in order; components with fewer than three
// members are dropped. Output ordered by smallest member id.
inline std::vector<Component> connected_components(const SimilarityGraph& graph) {
  std::unordered_map<VideoId, std::size_t> pos;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) pos.emplace(graph.nodes[i], i);
  UnionFind uf(graph.nodes.size());
  for (const auto& [a, b] : graph.edges) uf.unite(pos.at(a), pos.at(b));
  std::unordered_map<std::size_t, std::vector<VideoId>> groups;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) groups[uf.find(i)].push_back(graph.nodes[i]);
  std::vector<Component> out;
  for (auto& [root, members] : groups) {
    if (members.size() < kMinComponentSize) continue;
    std::sort(members.begin(), members.end());
    out.push_back(Component{std::move(members)});
  }
  std::sort(out.begin(), out.end(), [](const Component& x, const Component& y) { return x.members < y.members; });
  return out;
}

// Unique uploaders / component size.
inline double uploader_ratio(const Component& c, const ingest::Catalog& catalog) {
  if (c.members.empty()) throw std::invalid_argument("uploader ratio of empty component");
  std::set<std::string> uploaders;
  for (const auto& id : c.members) {
    const auto* rec = catalog.find(id);
    if (!rec) throw DataError("component member '" + id + "' has no metadata");
    uploaders.insert(rec->uploader_id);
  }
  return static_cast<double>(uploaders.size()) / static_cast<double>(c.members.size());
}

// Fills uploader ratio and publication span from the catalog.
inline void describe(Component& c, const ingest::Catalog& catalog) {
  c.uploader_ratio = uploader_ratio(c, catalog);
  c.earliest = std::numeric_limits<Timestamp>::max();
  c.latest = std::numeric_limits<Timestamp>::min();
  for (const auto& id : c.members) {
    const auto t = catalog.at(id).published_at;
    c.earliest = std::min(c.earliest, t);
    c.latest = std::max(c.latest, t);
  }
}

inline constexpr Timestamp kDefaultMaxSpan = 14 * kSecondsPerDay;

// Keeps components with ratio >= min_ratio and span <= max_span.
inline std::vector<Component> filter_components(const std::vector<Component>& components, double min_ratio,
                                                Timestamp max_span = kDefaultMaxSpan) {
  std::vector<Component> out;
  for (const auto& c : components)
    if (c.uploader_ratio >= min_ratio && c.span() <= max_span) out.push_back(c);
  return out;
}

// Earliest-published member shorter than max_duration seconds (strict), ties
// by id; nullopt when no member qualifies.
inline std::optional<VideoId> pick_query(const Component& c, const ingest::Catalog& catalog,
                                         std::int64_t max_duration) {
  const ingest::VideoRecord* best = nullptr;
  for (const auto& id : c.members) {
    const auto& rec = catalog.at(id);
    if (rec.duration_s >= max_duration) continue;
    if (!best || rec.published_at < best->published_at ||
        (rec.published_at == best->published_at && rec.video_id < best->video_id))
      best = &rec;
  }
  if (!best) return std::nullopt;
  return best->video_id;
}

struct SelectedQuery {
  VideoId query_id;
  Component component;

  bool operator==(const SelectedQuery&) const = default;
};

// Size descending, then earliest publication, then query id; first n kept.
inline std::vector<SelectedQuery> rank_and_take(std::vector<SelectedQuery> picked, std::size_t n) {
  std::sort(picked.begin(), picked.end(), [](const SelectedQuery& x, const SelectedQuery& y) {
    if (x.component.size() != y.component.size()) return x.component.size() > y.component.size();
    if (x.component.earliest != y.component.earliest) return x.component.earliest < y.component.earliest;
    return x.query_id < y.query_id;
  });
  if (picked.size() > n) picked.resize(n);
  return picked;
}

struct SelectionParams {
  double similarity_threshold = 0.7;  // t_s
  double min_uploader_ratio = 0.75;   // t_r
  std::int64_t max_query_duration = 90;  // t_d, seconds
  std::size_t top = 100;
  Timestamp max_span = kDefaultMaxSpan;

  void validate() const {
    if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0))
      throw std::invalid_argument("similarity threshold must be in [0, 1]");
    if (!(min_uploader_ratio >= 0.0 && min_uploader_ratio <= 1.0))
      throw std::invalid_argument("uploader ratio threshold must be in [0, 1]");
    if (max_query_duration <= 0) throw std::invalid_argument("query duration threshold must be positive");
    if (max_span < 0) throw std::invalid_argument("publication span must be non-negative");
  }
};

struct SelectionReport {
  std::size_t candidate_pairs = 0;
  std::size_t edges = 0;
  std::size_t components = 0;
  std::size_t components_kept = 0;
  std::size_t components_without_query = 0;
  std::vector<SelectedQuery> queries;
};

// The whole selection pipeline over a catalog and its visual/textual indexes
// (either may be null).
inline SelectionReport select_queries(const ingest::Catalog& catalog, const index::InvertedIndex* visual,
                                      const index::InvertedIndex* textual, const SelectionParams& params) {
  params.validate();
  SelectionReport report;
  const auto pairs = index::all_pairs_edges(visual, textual, params.similarity_threshold);
  report.candidate_pairs = pairs.candidate_pairs;
  report.edges = pairs.edges.size();
  std::vector<VideoId> nodes;
  for (const auto& r : catalog.records()) nodes.push_back(r.video_id);
  auto components = connected_components(SimilarityGraph::from_edges(std::move(nodes), pairs.edges));
  report.components = components.size();
  for (auto& c : components) describe(c, catalog);
  const auto kept = filter_components(components, params.min_uploader_ratio, params.max_span);
  report.components_kept = kept.size();
  std::vector<SelectedQuery> picked;
  for (const auto& c : kept) {
    if (auto q = pick_query(c, catalog, params.max_query_duration))
      picked.push_back({*q, c});
    else
      ++report.components_without_query;
  }
  report.queries = rank_and_take(std::move(picked), params.top);
  return report;
}

// One line per query: rank, component size, video id, uploader ratio, span (s).
inline std::string format_manifest(const std::vector<SelectedQuery>& queries) {
  std::string out = "rank\tsize\tvideo_id\tuploader_ratio\tspan_s\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    out += std::to_string(i + 1) + '\t' + std::to_string(q.component.size()) + '\t' + q.query_id + '\t' +
           format_real(q.component.uploader_ratio) + '\t' + std::to_string(q.component.span()) + '\n';
  }
  return out;
}

}  // namespace fivr::selectq
