#pragma once

// Three-phase annotation of one query: visually ranked candidates, then
// textually ranked ones not yet labelled, then the remainder of both groups
// published within a week of the query, ranked by mean similarity.
//
// Session state is a pure fold over its label events: create_session settles
// the session on its first pending candidate, and every record_label settles
// it on the next one, crossing phase boundaries as the stopping rules fire.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/index.hpp"
#include "fivr/ingest.hpp"
#include "fivr/labels.hpp"

namespace fivr::annotate {

enum class Phase : std::uint8_t { Visual, Textual, Merged, Done };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Visual: return "Visual";
    case Phase::Textual: return "Textual";
    case Phase::Merged: return "Merged";
    case Phase::Done: return "Done";
  }
  return "Done";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  for (auto p : {Phase::Visual, Phase::Textual, Phase::Merged, Phase::Done})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct StoppingRules {
  std::size_t irrelevant_run = 100;  // irrelevant labels since the last relevant one
  std::size_t phase_cap = 1000;      // annotations per visual / textual phase
  Timestamp merged_window = 7 * kSecondsPerDay;

  bool operator==(const StoppingRules&) const = default;
};

// Raised when a label targets anything but the pending candidate.
class NotPendingError : public Error {
 public:
  using Error::Error;
};

struct LabelEvent {
  VideoId video_id;
  Label label = Label::DI;
  Timestamp time = 0;
  Phase phase = Phase::Visual;

  bool operator==(const LabelEvent&) const = default;
};

struct PhaseChange {
  Phase phase = Phase::Visual;  // phase entered
  std::size_t after = 0;        // labels recorded before entering it

  bool operator==(const PhaseChange&) const = default;
};

struct AnnotationSession {
  VideoId query_id;
  Timestamp query_published = 0;
  StoppingRules rules;
  Phase phase = Phase::Visual;

  std::vector<index::ScoredVideo> visual_queue;
  std::vector<index::ScoredVideo> textual_queue;  // full textual ranking
  std::vector<index::ScoredVideo> merged_queue;   // built on entering Merged
  std::map<VideoId, Timestamp> published;         // every candidate

  // Position in the active queue, which for Textual is the textual ranking
  // minus videos labelled during Visual.
  std::vector<index::ScoredVideo> active;
  std::size_t cursor = 0;

  std::map<VideoId, Label> labels;
  std::vector<LabelEvent> history;
  std::vector<PhaseChange> transitions;
  std::size_t irrelevant_since_relevant = 0;
  std::size_t phase_annotated = 0;

  std::optional<VideoId> pending() const {
    if (phase == Phase::Done || cursor >= active.size()) return std::nullopt;
    return active[cursor].video_id;
  }
  std::size_t annotated() const { return history.size(); }
  std::size_t queue_remaining() const { return phase == Phase::Done ? 0 : active.size() - cursor; }

  bool operator==(const AnnotationSession&) const = default;
};

namespace detail {

inline bool phase_exhausted(const AnnotationSession& s) {
  if (s.cursor >= s.active.size()) return true;
  if (s.irrelevant_since_relevant >= s.rules.irrelevant_run) return true;
  if (s.phase != Phase::Merged && s.phase_annotated >= s.rules.phase_cap) return true;
  return false;
}

inline std::optional<double> score_of(const std::vector<index::ScoredVideo>& queue, const VideoId& id) {
  for (const auto& sv : queue)
    if (sv.video_id == id) return sv.score;
  return std::nullopt;
}

// Unlabelled videos of both groups within the publication window, by mean of
// visual and textual similarity (a missing side counts as 0).
inline std::vector<index::ScoredVideo> build_merged(const AnnotationSession& s) {
  std::map<VideoId, std::pair<double, double>> scores;
  for (const auto& sv : s.visual_queue) scores[sv.video_id].first = sv.score;
  for (const auto& sv : s.textual_queue) scores[sv.video_id].second = sv.score;
  std::vector<index::ScoredVideo> out;
  for (const auto& [id, vt] : scores) {
    if (s.labels.contains(id)) continue;
    const auto t = s.published.at(id);
    const auto delta = t > s.query_published ? t - s.query_published : s.query_published - t;
    if (delta > s.rules.merged_window) continue;
    out.push_back({id, (vt.first + vt.second) / 2.0});
  }
  index::sort_ranking(out);
  return out;
}

inline void enter(AnnotationSession& s, Phase next) {
  s.phase = next;
  s.cursor = 0;
  s.irrelevant_since_relevant = 0;
  s.phase_annotated = 0;
  s.active.clear();
  if (next == Phase::Textual) {
    for (const auto& sv : s.textual_queue)
      if (!s.labels.contains(sv.video_id)) s.active.push_back(sv);
  } else if (next == Phase::Merged) {
    s.merged_queue = build_merged(s);
    s.active = s.merged_queue;
  }
  s.transitions.push_back({next, s.history.size()});
}

// Advances through exhausted phases until a candidate is pending or the
// session is Done.
inline void settle(AnnotationSession& s) {
  while (s.phase != Phase::Done && phase_exhausted(s)) {
    enter(s, static_cast<Phase>(static_cast<int>(s.phase) + 1));
  }
}

inline void check_ranking(const std::vector<index::ScoredVideo>& ranking, const VideoId& query, const char* which) {
  std::set<VideoId> seen;
  for (const auto& sv : ranking) {
    if (sv.video_id == query) throw std::invalid_argument(std::string(which) + " ranking contains the query itself");
    if (!seen.insert(sv.video_id).second)
      throw std::invalid_argument(std::string(which) + " ranking lists '" + sv.video_id + "' twice");
  }
}

}  // namespace detail

// Rankings are ordered by score descending (ties by id) regardless of input
// order. The query and every candidate must be in the catalog.
inline AnnotationSession create_session(const VideoId& query_id, std::vector<index::ScoredVideo> visual,
                                        std::vector<index::ScoredVideo> textual, const ingest::Catalog& catalog,
                                        const StoppingRules& rules = {}) {
  const auto* q = catalog.find(query_id);
  if (!q) throw DataError("query '" + query_id + "' is not in the catalog");
  detail::check_ranking(visual, query_id, "visual");
  detail::check_ranking(textual, query_id, "textual");
  AnnotationSession s;
  s.query_id = query_id;
  s.query_published = q->published_at;
  s.rules = rules;
  index::sort_ranking(visual);
  index::sort_ranking(textual);
  s.visual_queue = std::move(visual);
  s.textual_queue = std::move(textual);
  for (const auto* queue : {&s.visual_queue, &s.textual_queue})
    for (const auto& sv : *queue) {
      const auto* rec = catalog.find(sv.video_id);
      if (!rec) throw DataError("candidate '" + sv.video_id + "' is not in the catalog");
      s.published[sv.video_id] = rec->published_at;
    }
  s.active = s.visual_queue;
  s.transitions.push_back({Phase::Visual, 0});
  detail::settle(s);
  return s;
}

struct Candidate {
  VideoId video_id;
  Phase phase = Phase::Visual;
  std::optional<double> visual_score;
  std::optional<double> textual_score;
};

// The pending candidate, or nullopt once the session is Done.
inline std::optional<Candidate> next_candidate(const AnnotationSession& s) {
  auto id = s.pending();
  if (!id) return std::nullopt;
  return Candidate{*id, s.phase, detail::score_of(s.visual_queue, *id), detail::score_of(s.textual_queue, *id)};
}

inline void record_label(AnnotationSession& s, const VideoId& video_id, Label label, Timestamp time = 0) {
  if (s.phase == Phase::Done) throw NotPendingError("session for '" + s.query_id + "' is done");
  if (s.labels.contains(video_id)) throw NotPendingError("'" + video_id + "' is already labelled");
  const auto pending = s.pending();
  if (!pending || *pending != video_id)
    throw NotPendingError("'" + video_id + "' is not the pending candidate" + (pending ? " ('" + *pending + "' is)" : ""));
  s.labels.emplace(video_id, label);
  s.history.push_back({video_id, label, time, s.phase});
  ++s.phase_annotated;
  if (is_relevant(label))
    s.irrelevant_since_relevant = 0;
  else
    ++s.irrelevant_since_relevant;
  ++s.cursor;
  detail::settle(s);
}

// Applies labels in order to a freshly created session.
inline AnnotationSession replay(AnnotationSession fresh, const std::vector<LabelEvent>& events) {
  for (const auto& e : events) record_label(fresh, e.video_id, e.label, e.time);
  return fresh;
}

// ---------------------------------------------------------------------------
// State text: the full session, with reals in round-trip form, so equal
// sessions serialise identically and a snapshot restores exactly.

inline std::string serialize_state(const AnnotationSession& s) {
  std::string out = "session\t" + s.query_id + '\t' + std::to_string(s.query_published) + '\n';
  out += "rules\t" + std::to_string(s.rules.irrelevant_run) + '\t' + std::to_string(s.rules.phase_cap) + '\t' +
         std::to_string(s.rules.merged_window) + '\n';
  out += "phase\t" + std::string(to_string(s.phase)) + '\t' + std::to_string(s.cursor) + '\t' +
         std::to_string(s.irrelevant_since_relevant) + '\t' + std::to_string(s.phase_annotated) + '\n';
  auto queue = [&](const char* tag, const std::vector<index::ScoredVideo>& q) {
    for (const auto& sv : q) out += std::string(tag) + '\t' + sv.video_id + '\t' + format_real(sv.score) + '\n';
  };
  queue("visual", s.visual_queue);
  queue("textual", s.textual_queue);
  queue("merged", s.merged_queue);
  queue("active", s.active);
  for (const auto& [id, t] : s.published) out += "published\t" + id + '\t' + std::to_string(t) + '\n';
  for (const auto& e : s.history)
    out += "label\t" + e.video_id + '\t' + std::string(fivr::to_string(e.label)) + '\t' + std::to_string(e.time) +
           '\t' + std::string(to_string(e.phase)) + '\n';
  for (const auto& t : s.transitions)
    out += "transition\t" + std::string(to_string(t.phase)) + '\t' + std::to_string(t.after) + '\n';
  out += "end\n";
  return out;
}

// Parses one state block; `consumed` receives the number of lines read.
inline AnnotationSession parse_state(const std::vector<std::string_view>& lines, std::size_t first,
                                     std::size_t* consumed = nullptr) {
  AnnotationSession s;
  std::size_t i = first;
  auto fail = [&](const std::string& msg) { throw ParseError(i + 1, "session state: " + msg); };
  auto integer = [&](std::string_view v) {
    auto x = parse_int(v);
    if (!x || *x < 0) fail("bad integer '" + std::string(v) + "'");
    return *x;
  };
  bool header = false;
  for (; i < lines.size(); ++i) {
    const auto f = split(lines[i], '\t');
    const auto tag = f[0];
    if (tag == "end") {
      if (!header) fail("missing session line");
      if (consumed) *consumed = i + 1 - first;
      for (const auto& e : s.history) s.labels[e.video_id] = e.label;
      return s;
    }
    if (tag == "session" && f.size() == 3) {
      s.query_id = std::string(f[1]);
      auto t = parse_int(f[2]);
      if (!t) fail("bad publication time");
      s.query_published = *t;
      header = true;
    } else if (tag == "rules" && f.size() == 4) {
      s.rules = {static_cast<std::size_t>(integer(f[1])), static_cast<std::size_t>(integer(f[2])), integer(f[3])};
    } else if (tag == "phase" && f.size() == 5) {
      auto p = parse_phase(f[1]);
      if (!p) fail("unknown phase");
      s.phase = *p;
      s.cursor = static_cast<std::size_t>(integer(f[2]));
      s.irrelevant_since_relevant = static_cast<std::size_t>(integer(f[3]));
      s.phase_annotated = static_cast<std::size_t>(integer(f[4]));
    } else if ((tag == "visual" || tag == "textual" || tag == "merged" || tag == "active") && f.size() == 3) {
      auto score = parse_real(f[2]);
      if (!score) fail("bad score");
      auto& q = tag == "visual" ? s.visual_queue : tag == "textual" ? s.textual_queue
                                               : tag == "merged"    ? s.merged_queue
                                                                    : s.active;
      q.push_back({std::string(f[1]), *score});
    } else if (tag == "published" && f.size() == 3) {
      auto t = parse_int(f[2]);
      if (!t) fail("bad publication time");
      s.published[std::string(f[1])] = *t;
    } else if (tag == "label" && f.size() == 5) {
      auto l = parse_label(f[2]);
      auto t = parse_int(f[3]);
      auto p = parse_phase(f[4]);
      if (!l || !t || !p) fail("bad label record");
      s.history.push_back({std::string(f[1]), *l, *t, *p});
    } else if (tag == "transition" && f.size() == 3) {
      auto p = parse_phase(f[1]);
      if (!p) fail("unknown phase");
      s.transitions.push_back({*p, static_cast<std::size_t>(integer(f[2]))});
    } else {
      fail("unrecognised record '" + std::string(tag) + "'");
    }
  }
  throw ParseError(i, "session state: missing end line");
}

inline AnnotationSession parse_state(std::string_view text) {
  const auto lines = lines_of(text);
  return parse_state(lines, 0);
}

// ---------------------------------------------------------------------------
// Event log: one label per line (session, video, label, time), with the
// client's request token as an optional fifth field.

struct LogEntry {
  std::string session_id;
  LabelEvent event;
  std::string token;

  bool operator==(const LogEntry&) const = default;
};

inline std::string format_log_entry(const LogEntry& e) {
  std::string out = e.session_id + '\t' + e.event.video_id + '\t' + std::string(fivr::to_string(e.event.label)) +
                    '\t' + std::to_string(e.event.time);
  if (!e.token.empty()) out += '\t' + e.token;
  return out + '\n';
}

inline std::vector<LogEntry> parse_log(std::string_view text) {
  std::vector<LogEntry> out;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto f = split(lines[i], '\t');
    if (f.size() != 4 && f.size() != 5) throw ParseError(i + 1, "event log: expected session, video, label, time");
    auto l = parse_label(f[2]);
    auto t = parse_int(f[3]);
    if (!l || !t) throw ParseError(i + 1, "event log: bad label or time");
    out.push_back({std::string(f[0]), {std::string(f[1]), *l, *t, Phase::Visual}, f.size() == 5 ? std::string(f[4]) : ""});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotation table

struct AnnotationRow {
  VideoId query_id;
  VideoId video_id;
  Label label = Label::DI;
  Timestamp time = 0;

  bool operator==(const AnnotationRow&) const = default;
};

struct ExportOptions {
  bool include_distractors = true;
};

// Rows in session order, then label order within each session.
inline std::vector<AnnotationRow> export_annotations(const std::vector<const AnnotationSession*>& sessions,
                                                     const ExportOptions& opts = {}) {
  std::vector<AnnotationRow> rows;
  for (const auto* s : sessions)
    for (const auto& e : s->history)
      if (opts.include_distractors || is_relevant(e.label)) rows.push_back({s->query_id, e.video_id, e.label, e.time});
  return rows;
}

inline constexpr std::string_view kAnnotationHeader = "query_id\tvideo_id\tlabel\ttimestamp";

inline std::string format_annotations(const std::vector<AnnotationRow>& rows) {
  std::string out(kAnnotationHeader);
  out += '\n';
  for (const auto& r : rows)
    out += r.query_id + '\t' + r.video_id + '\t' + std::string(fivr::to_string(r.label)) + '\t' +
           format_timestamp(r.time) + '\n';
  return out;
}

inline std::vector<AnnotationRow> parse_annotations(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kAnnotationHeader) throw ParseError(1, "annotation table: missing header");
  std::vector<AnnotationRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto f = split(lines[i], '\t');
    if (f.size() != 4) throw ParseError(i + 1, "annotation table: expected 4 fields");
    auto l = parse_label(f[2]);
    auto t = parse_timestamp(f[3]);
    if (!l) throw ParseError(i + 1, "annotation table: unknown label '" + std::string(f[2]) + "'");
    if (!t) throw ParseError(i + 1, "annotation table: bad timestamp '" + std::string(f[3]) + "'");
    rows.push_back({std::string(f[0]), std::string(f[1]), *l, *t});
  }
  return rows;
}

// (query, video) -> label; a later row for the same pair wins.
inline std::map<std::pair<VideoId, VideoId>, Label> label_map(const std::vector<AnnotationRow>& rows) {
  std::map<std::pair<VideoId, VideoId>, Label> out;
  for (const auto& r : rows) out[{r.query_id, r.video_id}] = r.label;
  return out;
}

// ---------------------------------------------------------------------------
// Consistency review: a second pass over the relevant labels of a finished
// session, where each may be confirmed or replaced.

struct ReviewPass {
  VideoId query_id;
  std::vector<std::pair<VideoId, Label>> items;  // label order
  std::size_t cursor = 0;
  std::map<VideoId, Label> revised;

  std::optional<std::pair<VideoId, Label>> pending() const {
    if (cursor >= items.size()) return std::nullopt;
    return items[cursor];
  }
  bool done() const { return cursor >= items.size(); }
};

inline ReviewPass start_review(const AnnotationSession& s) {
  ReviewPass r{s.query_id, {}, 0, {}};
  for (const auto& e : s.history)
    if (is_relevant(e.label)) r.items.emplace_back(e.video_id, e.label);
  return r;
}

inline void review_label(ReviewPass& r, const VideoId& video_id, Label label) {
  const auto p = r.pending();
  if (!p || p->first != video_id) throw NotPendingError("'" + video_id + "' is not pending review");
  if (label != p->second) r.revised[video_id] = label;
  ++r.cursor;
}

// The session's labels with review revisions applied.
inline std::map<VideoId, Label> reviewed_labels(const AnnotationSession& s, const ReviewPass& r) {
  auto out = s.labels;
  for (const auto& [id, l] : r.revised) out[id] = l;
  return out;
}

}  // namespace fivr::annotate
