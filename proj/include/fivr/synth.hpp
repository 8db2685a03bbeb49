#pragma once

// Synthetic incident world: videos as sequences of scenes carrying
// (incident, time span, viewpoint), the DS / CS / IS relations and pair
// labelling over those attributes, a generator that plants labelled pairs
// around designated queries, and a renderer of correlated frame descriptors.
//
// Spans are half-open intervals on one global timeline. The span of a whole
// video is the union of its scene spans, and "span contained in the video
// span" is interval-union coverage.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/features.hpp"
#include "fivr/ingest.hpp"
#include "fivr/labels.hpp"

namespace fivr::synth {

enum class Transform : std::uint8_t { None, Brightness, Crop, Noise, Recompress };

inline std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::None: return "none";
    case Transform::Brightness: return "brightness";
    case Transform::Crop: return "crop";
    case Transform::Noise: return "noise";
    case Transform::Recompress: return "recompress";
  }
  return "none";
}

inline std::optional<Transform> parse_transform(std::string_view s) {
  for (auto t : {Transform::None, Transform::Brightness, Transform::Crop, Transform::Noise, Transform::Recompress})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

struct Span {
  double start = 0.0;
  double end = 0.0;  // exclusive

  bool operator==(const Span&) const = default;
};

struct SceneAttrib {
  std::uint32_t incident = 0;
  Span span;
  std::uint32_t viewpoint = 0;

  bool operator==(const SceneAttrib&) const = default;
};

struct SynthVideo {
  VideoId video_id;
  std::vector<SceneAttrib> scenes;
  Transform transform = Transform::None;

  bool operator==(const SynthVideo&) const = default;
};

// ---------------------------------------------------------------------------
// Relations

// Sorted, disjoint, non-touching cover of the video's scene spans.
inline std::vector<Span> video_span(const SynthVideo& v) {
  std::vector<Span> spans;
  for (const auto& s : v.scenes) spans.push_back(s.span);
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  std::vector<Span> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end)
      merged.back().end = std::max(merged.back().end, s.end);
    else
      merged.push_back(s);
  }
  return merged;
}

inline bool span_within(const Span& s, const std::vector<Span>& cover) {
  for (const auto& c : cover)
    if (c.start <= s.start && s.end <= c.end) return true;
  return false;
}

inline std::set<std::uint32_t> viewpoints(const SynthVideo& v) {
  std::set<std::uint32_t> out;
  for (const auto& s : v.scenes) out.insert(s.viewpoint);
  return out;
}

inline std::set<std::uint32_t> incidents(const SynthVideo& v) {
  std::set<std::uint32_t> out;
  for (const auto& s : v.scenes) out.insert(s.incident);
  return out;
}

// Per-scene clause values of the candidate against the query.
struct SceneClauses {
  bool contained = false;
  bool same_viewpoint = false;
  bool shared_incident = false;
};

inline std::vector<SceneClauses> scene_clauses(const SynthVideo& q, const SynthVideo& p) {
  const auto cover = video_span(q);
  const auto vq = viewpoints(q);
  const auto hq = incidents(q);
  std::vector<SceneClauses> out;
  out.reserve(p.scenes.size());
  for (const auto& s : p.scenes)
    out.push_back({span_within(s.span, cover), vq.contains(s.viewpoint), hq.contains(s.incident)});
  return out;
}

// Some scene of p lies inside q's span and was shot from one of q's viewpoints.
inline bool relation_ds(const SynthVideo& q, const SynthVideo& p) {
  for (const auto& c : scene_clauses(q, p))
    if (c.contained && c.same_viewpoint) return true;
  return false;
}

// Some scene of p lies inside q's span and was shot from a viewpoint q lacks.
inline bool relation_cs(const SynthVideo& q, const SynthVideo& p) {
  for (const auto& c : scene_clauses(q, p))
    if (c.contained && !c.same_viewpoint) return true;
  return false;
}

// Some scene of p shares an incident with q and no scene of p lies inside q's span.
inline bool relation_is(const SynthVideo& q, const SynthVideo& p) {
  const auto clauses = scene_clauses(q, p);
  const bool any_incident = std::any_of(clauses.begin(), clauses.end(), [](auto& c) { return c.shared_incident; });
  const bool any_contained = std::any_of(clauses.begin(), clauses.end(), [](auto& c) { return c.contained; });
  return any_incident && !any_contained;
}

// Every scene of p satisfies the duplicate-scene clause.
inline bool relation_nd(const SynthVideo& q, const SynthVideo& p) {
  const auto clauses = scene_clauses(q, p);
  return !clauses.empty() &&
         std::all_of(clauses.begin(), clauses.end(), [](auto& c) { return c.contained && c.same_viewpoint; });
}

// Precedence ND > DS > CS > IS > DI. Directional: q is the query.
inline Label label_pair(const SynthVideo& q, const SynthVideo& p) {
  if (relation_nd(q, p)) return Label::ND;
  if (relation_ds(q, p)) return Label::DS;
  if (relation_cs(q, p)) return Label::CS;
  if (relation_is(q, p)) return Label::IS;
  return Label::DI;
}

// ---------------------------------------------------------------------------
// Worlds

struct PlannedPair {
  VideoId query_id;
  VideoId video_id;
  Label label = Label::DI;

  bool operator==(const PlannedPair&) const = default;
};

struct SynthWorld {
  std::map<std::uint32_t, Span> incidents;  // incident -> global span
  std::vector<SynthVideo> videos;
  std::vector<VideoId> queries;
  std::vector<PlannedPair> planned;
  std::uint64_t seed = 0;
  double cell_seconds = 10.0;

  const SynthVideo& video(std::string_view id) const {
    for (const auto& v : videos)
      if (v.video_id == id) return v;
    throw std::invalid_argument("no synthetic video '" + std::string(id) + "'");
  }

  bool operator==(const SynthWorld&) const = default;
};

struct LabelQuota {
  std::size_t nd = 2;
  std::size_t ds = 3;
  std::size_t cs = 1;
  std::size_t is = 2;

  std::size_t total() const { return nd + ds + cs + is; }
};

struct WorldConfig {
  std::size_t incidents = 10;
  std::size_t viewpoints = 3;
  std::size_t videos = 0;  // total; 0 means queries + planned pairs only
  LabelQuota quota;
  std::size_t cells_per_incident = 6;
  double cell_seconds = 10.0;
  double incident_spacing = 1000.0;
  std::uint64_t seed = 1;
};

inline std::size_t planned_video_count(const WorldConfig& c) { return c.incidents * (1 + c.quota.total()); }

namespace detail {

inline constexpr std::size_t kQueryCells = 2;

struct CellRange {
  std::size_t first = 0;
  std::size_t count = 1;
};

}  // namespace detail

// Plants, for each incident, one query spanning two consecutive cells from a
// single viewpoint plus the configured number of ND / DS / CS / IS videos,
// then fills the world up to `videos` with single-cell distractor scenes.
// Every scene is cell-aligned and either inside or disjoint from each query's
// span, so visual overlap with a query coincides with the DS clause.
inline SynthWorld generate_world(const WorldConfig& config) {
  using detail::CellRange;
  using detail::kQueryCells;
  if (config.incidents == 0 || config.viewpoints == 0)
    throw std::invalid_argument("world needs at least one incident and one viewpoint");
  if (config.cells_per_incident < kQueryCells || !(config.cell_seconds > 0.0) ||
      config.incident_spacing < config.cells_per_incident * config.cell_seconds)
    throw std::invalid_argument("invalid incident timeline layout");
  if (config.quota.cs > 0 && config.viewpoints < 2)
    throw std::invalid_argument("infeasible quota: complementary scenes need a second viewpoint");
  if (config.quota.is > 0 && config.cells_per_incident <= kQueryCells)
    throw std::invalid_argument("infeasible quota: incident scenes need time outside the query span");
  if (config.quota.ds > 0 && config.incidents < 2 && config.cells_per_incident <= kQueryCells)
    throw std::invalid_argument("infeasible quota: duplicate scenes need a foreign scene");
  const std::size_t planned = planned_video_count(config);
  if (config.videos != 0 && config.videos < planned)
    throw std::invalid_argument("infeasible quota: " + std::to_string(planned) + " planned videos exceed total " +
                                std::to_string(config.videos));

  Rng rng(config.seed);
  SynthWorld world;
  world.seed = config.seed;
  world.cell_seconds = config.cell_seconds;
  const auto cells = config.cells_per_incident;
  for (std::uint32_t h = 0; h < config.incidents; ++h) {
    const double start = h * config.incident_spacing;
    world.incidents[h] = {start, start + cells * config.cell_seconds};
  }
  auto scene = [&](std::uint32_t h, CellRange r, std::uint32_t v) {
    const double base = world.incidents.at(h).start;
    return SceneAttrib{h, {base + r.first * config.cell_seconds, base + (r.first + r.count) * config.cell_seconds}, v};
  };
  auto random_transform = [&] { return static_cast<Transform>(rng.below(5)); };
  auto other_viewpoint = [&](std::uint32_t v) {
    auto o = static_cast<std::uint32_t>(rng.below(config.viewpoints - 1));
    return o >= v ? o + 1 : o;
  };
  // A sub-range of the query's cells.
  auto inside = [&](std::size_t c0) {
    const auto len = 1 + rng.below(kQueryCells);
    return CellRange{c0 + rng.below(kQueryCells - len + 1), len};
  };
  // A range of one or two cells entirely before or after the query's cells.
  auto outside = [&](std::size_t c0) {
    const std::size_t before = c0, after = cells - c0 - kQueryCells;
    const bool use_before = after == 0 || (before > 0 && rng.below(2) == 0);
    const std::size_t room = use_before ? before : after;
    const std::size_t len = std::min<std::size_t>(room, 1 + rng.below(2));
    const std::size_t offset = rng.below(room - len + 1);
    return CellRange{use_before ? offset : c0 + kQueryCells + offset, len};
  };

  std::vector<SynthVideo> videos;
  std::vector<std::size_t> query_slots;
  struct Plan {
    std::size_t query_slot;
    std::size_t video_slot;
    Label label;
  };
  std::vector<Plan> plans;
  for (std::uint32_t h = 0; h < config.incidents; ++h) {
    const std::size_t c0 = rng.below(cells - kQueryCells + 1);
    const auto vq = static_cast<std::uint32_t>(rng.below(config.viewpoints));
    SynthVideo q;
    for (std::size_t c = 0; c < kQueryCells; ++c) q.scenes.push_back(scene(h, {c0 + c, 1}, vq));
    const auto qslot = videos.size();
    query_slots.push_back(qslot);
    videos.push_back(std::move(q));
    auto add = [&](SynthVideo v, Label l) {
      plans.push_back({qslot, videos.size(), l});
      videos.push_back(std::move(v));
    };
    for (std::size_t i = 0; i < config.quota.nd; ++i) {
      SynthVideo v;
      v.scenes.push_back(scene(h, inside(c0), vq));
      v.transform = random_transform();
      add(std::move(v), Label::ND);
    }
    for (std::size_t i = 0; i < config.quota.ds; ++i) {
      SynthVideo v;
      v.scenes.push_back(scene(h, inside(c0), vq));
      SceneAttrib foreign;
      if (config.incidents > 1) {
        auto h2 = static_cast<std::uint32_t>(rng.below(config.incidents - 1));
        if (h2 >= h) ++h2;
        foreign = scene(h2, {rng.below(cells), 1}, static_cast<std::uint32_t>(rng.below(config.viewpoints)));
      } else {
        auto r = outside(c0);
        foreign = scene(h, {r.first, 1}, static_cast<std::uint32_t>(rng.below(config.viewpoints)));
      }
      if (rng.below(2)) v.scenes.insert(v.scenes.begin(), foreign);
      else v.scenes.push_back(foreign);
      v.transform = random_transform();
      add(std::move(v), Label::DS);
    }
    for (std::size_t i = 0; i < config.quota.cs; ++i) {
      SynthVideo v;
      v.scenes.push_back(scene(h, inside(c0), other_viewpoint(vq)));
      if (cells > kQueryCells && rng.below(2))
        v.scenes.push_back(scene(h, outside(c0), static_cast<std::uint32_t>(rng.below(config.viewpoints))));
      v.transform = random_transform();
      add(std::move(v), Label::CS);
    }
    for (std::size_t i = 0; i < config.quota.is; ++i) {
      SynthVideo v;
      const auto n = 1 + rng.below(2);
      for (std::size_t s = 0; s < n; ++s)
        v.scenes.push_back(scene(h, outside(c0), static_cast<std::uint32_t>(rng.below(config.viewpoints))));
      v.transform = random_transform();
      add(std::move(v), Label::IS);
    }
  }
  const std::size_t total = config.videos == 0 ? planned : config.videos;
  while (videos.size() < total) {
    SynthVideo v;
    const auto n = 1 + rng.below(3);
    for (std::size_t s = 0; s < n; ++s)
      v.scenes.push_back(scene(static_cast<std::uint32_t>(rng.below(config.incidents)), {rng.below(cells), 1},
                               static_cast<std::uint32_t>(rng.below(config.viewpoints))));
    v.transform = random_transform();
    videos.push_back(std::move(v));
  }

  // Ids come from a shuffled numbering so id order carries no label signal.
  std::vector<std::size_t> numbering(videos.size());
  for (std::size_t i = 0; i < numbering.size(); ++i) numbering[i] = i + 1;
  rng.shuffle(numbering);
  for (std::size_t i = 0; i < videos.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "v%05zu", numbering[i]);
    videos[i].video_id = buf;
  }
  for (auto slot : query_slots) world.queries.push_back(videos[slot].video_id);
  for (const auto& p : plans)
    world.planned.push_back({videos[p.query_slot].video_id, videos[p.video_slot].video_id, p.label});
  std::sort(videos.begin(), videos.end(), [](const SynthVideo& a, const SynthVideo& b) { return a.video_id < b.video_id; });
  world.videos = std::move(videos);
  return world;
}

// Unstructured world for exercising the relations: arbitrary real spans
// (overlapping, nested, straddling), several scenes per video, every video a
// query candidate.
inline SynthWorld random_world(std::uint64_t seed, std::size_t n_videos, std::size_t n_incidents = 4,
                               std::size_t n_viewpoints = 3) {
  Rng rng(seed);
  SynthWorld world;
  world.seed = seed;
  for (std::uint32_t h = 0; h < n_incidents; ++h) world.incidents[h] = {h * 100.0, h * 100.0 + 60.0};
  for (std::size_t i = 0; i < n_videos; ++i) {
    SynthVideo v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%04zu", i);
    v.video_id = buf;
    const auto n = 1 + rng.below(4);
    for (std::size_t s = 0; s < n; ++s) {
      const auto h = static_cast<std::uint32_t>(rng.below(n_incidents));
      const auto& f = world.incidents.at(h);
      // Coarse grid so containment and touching boundaries actually occur.
      double a = f.start + 5.0 * static_cast<double>(rng.below(12));
      double b = a + 5.0 * static_cast<double>(1 + rng.below(4));
      v.scenes.push_back({h, {a, std::min(b, f.end + 10.0)}, static_cast<std::uint32_t>(rng.below(n_viewpoints))});
    }
    v.transform = static_cast<Transform>(rng.below(5));
    world.videos.push_back(std::move(v));
  }
  for (const auto& v : world.videos) world.queries.push_back(v.video_id);
  return world;
}

struct LabelRow {
  VideoId query_id;
  VideoId video_id;
  Label label = Label::DI;

  bool operator==(const LabelRow&) const = default;
};

// Ground truth for every (query, other video) pair, queries in world order
// and videos in id order.
inline std::vector<LabelRow> ground_truth(const SynthWorld& world) {
  std::vector<LabelRow> rows;
  for (const auto& qid : world.queries) {
    const auto& q = world.video(qid);
    for (const auto& p : world.videos)
      if (p.video_id != qid) rows.push_back({qid, p.video_id, label_pair(q, p)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Text formats

inline std::string format_world(const SynthWorld& w) {
  std::string out = "# synthetic incident world\n";
  out += "seed\t" + std::to_string(w.seed) + "\n";
  out += "cell_seconds\t" + format_real(w.cell_seconds) + "\n";
  for (const auto& [h, s] : w.incidents)
    out += "incident\t" + std::to_string(h) + '\t' + format_real(s.start) + '\t' + format_real(s.end) + '\n';
  for (const auto& v : w.videos) {
    out += "video\t" + v.video_id + '\t' + std::string(to_string(v.transform));
    for (const auto& s : v.scenes)
      out += '\t' + std::to_string(s.incident) + ':' + format_real(s.span.start) + ':' + format_real(s.span.end) +
             ':' + std::to_string(s.viewpoint);
    out += '\n';
  }
  for (const auto& q : w.queries) out += "query\t" + q + '\n';
  for (const auto& p : w.planned)
    out += "plan\t" + p.query_id + '\t' + p.video_id + '\t' + std::string(to_string(p.label)) + '\n';
  return out;
}

inline SynthWorld parse_world(std::string_view text) {
  SynthWorld w;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (trim(line).empty() || line.front() == '#') continue;
    const auto f = split(line, '\t');
    auto fail = [&](const std::string& msg) { throw ParseError(i + 1, msg); };
    if (f[0] == "seed" && f.size() == 2) {
      auto v = parse_int(f[1]);
      if (!v) fail("bad seed");
      w.seed = static_cast<std::uint64_t>(*v);
    } else if (f[0] == "cell_seconds" && f.size() == 2) {
      auto v = parse_real(f[1]);
      if (!v) fail("bad cell_seconds");
      w.cell_seconds = *v;
    } else if (f[0] == "incident" && f.size() == 4) {
      auto h = parse_int(f[1]);
      auto a = parse_real(f[2]);
      auto b = parse_real(f[3]);
      if (!h || !a || !b || *h < 0 || !(*a < *b)) fail("bad incident record");
      w.incidents[static_cast<std::uint32_t>(*h)] = {*a, *b};
    } else if (f[0] == "video" && f.size() >= 4) {
      SynthVideo v;
      v.video_id = std::string(f[1]);
      auto t = parse_transform(f[2]);
      if (!t) fail("unknown transform '" + std::string(f[2]) + "'");
      v.transform = *t;
      for (std::size_t k = 3; k < f.size(); ++k) {
        const auto parts = split(f[k], ':');
        if (parts.size() != 4) fail("scene must be incident:start:end:viewpoint");
        auto h = parse_int(parts[0]);
        auto a = parse_real(parts[1]);
        auto b = parse_real(parts[2]);
        auto vp = parse_int(parts[3]);
        if (!h || !a || !b || !vp || *h < 0 || *vp < 0 || !(*a < *b)) fail("bad scene '" + std::string(f[k]) + "'");
        v.scenes.push_back({static_cast<std::uint32_t>(*h), {*a, *b}, static_cast<std::uint32_t>(*vp)});
      }
      w.videos.push_back(std::move(v));
    } else if (f[0] == "query" && f.size() == 2) {
      w.queries.emplace_back(f[1]);
    } else if (f[0] == "plan" && f.size() == 4) {
      auto l = parse_label(f[3]);
      if (!l) fail("unknown label");
      w.planned.push_back({std::string(f[1]), std::string(f[2]), *l});
    } else {
      fail("unrecognised world record");
    }
  }
  return w;
}

inline std::string format_labels(const std::vector<LabelRow>& rows) {
  std::string out = "query_id\tvideo_id\tlabel\n";
  for (const auto& r : rows) out += r.query_id + '\t' + r.video_id + '\t' + std::string(to_string(r.label)) + '\n';
  return out;
}

inline std::vector<LabelRow> parse_labels(std::string_view text) {
  std::vector<LabelRow> rows;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || (i == 0 && lines[i].starts_with("query_id"))) continue;
    const auto f = split(lines[i], '\t');
    if (f.size() < 3) throw ParseError(i + 1, "expected query_id, video_id, label");
    auto l = parse_label(trim(f[2]));
    if (!l) throw ParseError(i + 1, "unknown label '" + std::string(f[2]) + "'");
    rows.push_back({std::string(f[0]), std::string(f[1]), *l});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Descriptor rendering

struct RenderOptions {
  double sigma = 0.0;  // per-component Gaussian noise
  std::size_t dim = 256;
  std::size_t channels = 1;  // named layer1, layer2, ...
  double incident_weight = 0.15;
  std::uint64_t seed = 0;  // combined with the world seed
};

namespace detail {

// Seeded unit vectors; exactly orthonormal when count <= dim.
inline std::vector<std::vector<double>> make_basis(std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> basis;
  basis.reserve(count);
  const bool orthogonalise = count <= dim;
  while (basis.size() < count) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    if (orthogonalise) {
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          double p = 0.0;
          for (std::size_t d = 0; d < dim; ++d) p += v[d] * b[d];
          for (std::size_t d = 0; d < dim; ++d) v[d] -= p * b[d];
        }
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace detail

// Frame t (one per second) of a scene shows the content of its
// (incident, viewpoint, cell) plus a weaker incident-wide component; all
// these directions are orthonormal when dim allows. Gaussian noise is drawn
// from a stream keyed by (seed, video, channel), independent of sigma, so
// larger sigma scales one fixed noise realisation. Transforms: brightness
// scales by 0.8, crop drops each scene's first and last frame, noise adds a
// fixed 0.02-sd perturbation, recompress quantises to steps of 1/32.
inline std::map<VideoId, features::DescriptorSequence> render_descriptors(const SynthWorld& world,
                                                                          const RenderOptions& opts) {
  if (!(opts.sigma >= 0.0)) throw std::invalid_argument("render: sigma must be non-negative");
  if (opts.dim == 0 || opts.channels == 0) throw std::invalid_argument("render: dim and channels must be positive");
  std::uint32_t max_incident = 0, max_view = 0;
  std::size_t max_cell = 0;
  auto cell_of = [&](const SceneAttrib& s, double t) {
    const auto it = world.incidents.find(s.incident);
    const double origin = it == world.incidents.end() ? 0.0 : it->second.start;
    return static_cast<std::size_t>(std::max(0.0, std::floor((t - origin) / world.cell_seconds)));
  };
  for (const auto& v : world.videos)
    for (const auto& s : v.scenes) {
      max_incident = std::max(max_incident, s.incident);
      max_view = std::max(max_view, s.viewpoint);
      max_cell = std::max(max_cell, cell_of(s, s.span.end - 1e-9));
    }
  const std::size_t n_inc = max_incident + 1, n_view = max_view + 1, n_cell = max_cell + 1;
  const std::uint64_t base_seed = mix_seed(world.seed, opts.seed);

  std::map<VideoId, features::DescriptorSequence> out;
  for (const auto& v : world.videos) out[v.video_id].video_id = v.video_id;

  for (std::size_t ch = 0; ch < opts.channels; ++ch) {
    const auto basis = detail::make_basis(n_inc * n_view * n_cell + n_inc, opts.dim, mix_seed(base_seed, 1000 + ch));
    auto content = [&](std::uint32_t h, std::uint32_t vp, std::size_t c) -> const std::vector<double>& {
      return basis[(std::size_t(h) * n_view + vp) * n_cell + c];
    };
    auto incident_dir = [&](std::uint32_t h) -> const std::vector<double>& { return basis[n_inc * n_view * n_cell + h]; };
    const std::string name = "layer" + std::to_string(ch + 1);

    for (const auto& v : world.videos) {
      features::Channel channel{name, static_cast<std::uint32_t>(opts.dim), {}};
      Rng noise(mix_seed(mix_seed(base_seed, hash_string(v.video_id)), ch));
      Rng transform_noise(mix_seed(hash_string(v.video_id), 77 + ch));
      std::vector<float> frame(opts.dim);
      for (const auto& s : v.scenes) {
        const auto n_frames = static_cast<std::size_t>(std::max(1.0, std::ceil(s.span.end - s.span.start - 1e-9)));
        for (std::size_t f = 0; f < n_frames; ++f) {
          if (v.transform == Transform::Crop && n_frames >= 3 && (f == 0 || f + 1 == n_frames)) continue;
          const double t = s.span.start + static_cast<double>(f);
          const auto& c = content(s.incident, s.viewpoint, std::min(cell_of(s, t), n_cell - 1));
          const auto& u = incident_dir(s.incident);
          for (std::size_t d = 0; d < opts.dim; ++d) {
            double x = c[d] + opts.incident_weight * u[d];
            if (v.transform == Transform::Brightness) x *= 0.8;
            if (v.transform == Transform::Noise) x += 0.02 * transform_noise.normal();
            if (v.transform == Transform::Recompress) x = std::round(x * 32.0) / 32.0;
            x += opts.sigma * noise.normal();
            frame[d] = static_cast<float>(x);
          }
          channel.push(frame);
        }
      }
      out[v.video_id].channels.push_back(std::move(channel));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metadata for a synthetic world

struct CatalogOptions {
  std::chrono::sys_days epoch = std::chrono::sys_days{std::chrono::year{2016} / 1 / 1};
  std::size_t uploader_pool = 40;
};

// Titles draw on a per-incident place and event word so that videos of one
// incident share title terms; each video publishes within a few days of its
// first scene's incident, queries first.
inline ingest::Catalog synthesize_catalog(const SynthWorld& world, const CatalogOptions& opts = {}) {
  static constexpr const char* kPlaces[] = {"aleppo", "houston", "paris", "kabul", "manila", "nepal", "mosul",
                                            "brussels", "orlando", "lahore", "quito", "nice", "istanbul",
                                            "sanaa", "taiwan", "chile"};
  static constexpr const char* kKinds[] = {"earthquake", "flood", "explosion", "protest", "shooting",
                                           "hurricane", "wildfire", "crash", "airstrike", "landslide"};
  static constexpr const char* kExtras[] = {"footage", "live", "amateur", "report", "aftermath", "breaking",
                                            "raw", "drone", "scene", "update", "witness", "camera"};
  Rng rng(mix_seed(world.seed, 4242));
  std::set<VideoId> query_set(world.queries.begin(), world.queries.end());
  std::vector<ingest::VideoRecord> records;
  std::size_t next_uploader = 0;
  for (const auto& v : world.videos) {
    const auto h = v.scenes.empty() ? 0u : v.scenes.front().incident;
    ingest::VideoRecord r;
    r.video_id = v.video_id;
    r.title = std::string(kPlaces[h % std::size(kPlaces)]) + ' ' + kKinds[(h / std::size(kPlaces) + h) % std::size(kKinds)] +
              ' ' + kExtras[rng.below(std::size(kExtras))] + ' ' + kExtras[rng.below(std::size(kExtras))];
    const Timestamp incident_day = to_timestamp(opts.epoch) + static_cast<Timestamp>(h) * 3 * kSecondsPerDay;
    r.published_at = incident_day + (query_set.contains(v.video_id)
                                         ? static_cast<Timestamp>(rng.below(3600))
                                         : 3600 + static_cast<Timestamp>(rng.below(4 * kSecondsPerDay)));
    double seconds = 0.0;
    for (const auto& s : v.scenes) seconds += s.span.end - s.span.start;
    r.duration_s = static_cast<std::int64_t>(std::ceil(seconds));
    r.uploader_id = "u" + std::to_string(opts.uploader_pool ? (next_uploader++ % opts.uploader_pool) : next_uploader++);
    r.event_id = "evt-" + std::to_string(h + 1);
    records.push_back(std::move(r));
  }
  return ingest::Catalog(std::move(records));
}

}  // namespace fivr::synth
