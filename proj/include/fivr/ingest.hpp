#pragma once

// Event listings and video metadata: parsing, the collection filters and the
// immutable video catalog.

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fivr/core.hpp"

namespace fivr::ingest {

struct EventRecord {
  std::string event_id;
  std::string headline;
  std::chrono::sys_days date{};
  std::string category;
  std::string summary;
  std::string source_url;

  bool operator==(const EventRecord&) const = default;
};

struct VideoRecord {
  VideoId video_id;
  std::string title;
  Timestamp published_at = 0;
  std::int64_t duration_s = 0;
  std::string uploader_id;
  std::optional<std::string> event_id;

  bool operator==(const VideoRecord&) const = default;
};

inline const std::vector<std::string>& retained_categories() {
  static const std::vector<std::string> kCategories{"Armed conflicts and attacks", "Disasters and accidents"};
  return kCategories;
}

inline constexpr Timestamp kEventWindow = 7 * kSecondsPerDay;
inline constexpr std::int64_t kMaxDurationSeconds = 300;

namespace detail {

struct PendingEvent {
  std::size_t first_line = 0;
  std::map<std::string, std::string, std::less<>> fields;
};

inline EventRecord finish_event(PendingEvent& pe, std::size_t ordinal) {
  auto take = [&](std::string_view key, bool required) -> std::string {
    auto it = pe.fields.find(key);
    if (it == pe.fields.end()) {
      if (required) throw ParseError(pe.first_line, "event entry missing field '" + std::string(key) + "'");
      return {};
    }
    return it->second;
  };
  EventRecord ev;
  ev.event_id = take("id", false);
  if (ev.event_id.empty()) ev.event_id = "evt-" + std::to_string(ordinal);
  ev.headline = take("headline", true);
  const std::string date = take("date", true);
  auto parsed = parse_date(date);
  if (!parsed) throw ParseError(pe.first_line, "invalid date '" + date + "'");
  ev.date = *parsed;
  ev.category = take("category", true);
  if (ev.category.empty()) throw ParseError(pe.first_line, "empty category");
  if (ev.headline.empty()) throw ParseError(pe.first_line, "empty headline");
  ev.summary = take("summary", false);
  ev.source_url = take("url", false);
  return ev;
}

inline bool is_event_key(std::string_view k) {
  return k == "id" || k == "headline" || k == "date" || k == "category" || k == "summary" || k == "url";
}

}  // namespace detail

// Parses an event fixture. Records are blocks of "key: value" lines separated
// by "---"; keys are id, headline, date, category, summary, url. A line of the
// form "headline | date | category [| summary [| url]]" (slashes also accepted
// as separators) is a complete one-line entry. Blank lines and '#' comments
// are ignored.
inline std::vector<EventRecord> parse_event_listing(std::string_view document) {
  std::vector<EventRecord> out;
  detail::PendingEvent pending;
  auto flush = [&] {
    if (!pending.fields.empty()) out.push_back(detail::finish_event(pending, out.size() + 1));
    pending = {};
  };
  const auto lines = lines_of(document);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (line == "---") {
      flush();
      continue;
    }
    const auto colon = line.find(':');
    if (colon != std::string_view::npos && detail::is_event_key(trim(line.substr(0, colon)))) {
      const std::string key(trim(line.substr(0, colon)));
      if (pending.fields.empty()) pending.first_line = lineno;
      if (!pending.fields.emplace(key, std::string(trim(line.substr(colon + 1)))).second)
        throw ParseError(lineno, "duplicate field '" + key + "'");
      continue;
    }
    const char sep = line.find('|') != std::string_view::npos ? '|' : '/';
    auto parts = split(line, sep);
    if (parts.size() < 3 || parts.size() > 5)
      throw ParseError(lineno, "malformed event entry: '" + std::string(line) + "'");
    flush();
    pending.first_line = lineno;
    static constexpr const char* kKeys[] = {"headline", "date", "category", "summary", "url"};
    for (std::size_t p = 0; p < parts.size(); ++p) pending.fields.emplace(kKeys[p], std::string(trim(parts[p])));
    flush();
  }
  flush();
  return out;
}

inline std::string serialize_event_listing(const std::vector<EventRecord>& events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i) out += "---\n";
    out += "id: " + e.event_id + "\n";
    out += "headline: " + e.headline + "\n";
    out += "date: " + format_date(e.date) + "\n";
    out += "category: " + e.category + "\n";
    if (!e.summary.empty()) out += "summary: " + e.summary + "\n";
    if (!e.source_url.empty()) out += "url: " + e.source_url + "\n";
  }
  return out;
}

inline bool is_retained_category(std::string_view category) {
  const auto& keep = retained_categories();
  return std::find(keep.begin(), keep.end(), category) != keep.end();
}

inline std::vector<EventRecord> filter_events(const std::vector<EventRecord>& events) {
  std::vector<EventRecord> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [](const EventRecord& e) { return is_retained_category(e.category); });
  return out;
}

// Window is [event day 00:00 UTC, event day + 7 days 23:59:59 UTC].
inline bool video_matches_event(const VideoRecord& v, const EventRecord& event) {
  const Timestamp start = to_timestamp(event.date);
  const Timestamp end = start + kEventWindow + kSecondsPerDay;
  return v.published_at >= start && v.published_at < end && v.duration_s <= kMaxDurationSeconds;
}

inline std::vector<VideoRecord> filter_videos_for_event(const std::vector<VideoRecord>& videos,
                                                        const EventRecord& event) {
  std::vector<VideoRecord> out;
  for (const auto& v : videos)
    if (video_matches_event(v, event)) out.push_back(v);
  return out;
}

// Video metadata indexed by id. Immutable once built.
class Catalog {
 public:
  Catalog() = default;

  explicit Catalog(std::vector<VideoRecord> records) : records_(std::move(records)) {
    by_id_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (!by_id_.emplace(records_[i].video_id, i).second)
        throw DataError("duplicate video_id '" + records_[i].video_id + "'");
    }
  }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<VideoRecord>& records() const noexcept { return records_; }

  const VideoRecord* find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  const VideoRecord& at(std::string_view id) const {
    if (auto* r = find(id)) return *r;
    throw DataError("unknown video_id '" + std::string(id) + "'");
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }

 private:
  std::vector<VideoRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

inline constexpr std::string_view kCatalogHeader = "video_id\ttitle\tpublished_at\tduration_s\tuploader_id\tevent_id";

// Tab-separated metadata with a mandatory header line. event_id may be empty.
inline Catalog parse_catalog(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DataError("metadata file is empty (header line required)");
  const auto header = split(lines[0], '\t');
  static constexpr const char* kColumns[] = {"video_id", "title", "published_at", "duration_s", "uploader_id", "event_id"};
  if (header.size() < 5) throw DataError("metadata header has too few columns");
  for (std::size_t c = 0; c < header.size() && c < 6; ++c)
    if (trim(header[c]) != kColumns[c])
      throw DataError("metadata header column " + std::to_string(c + 1) + " should be '" + kColumns[c] + "'");

  std::vector<VideoRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cols = split(lines[i], '\t');
    const std::string where = "record at line " + std::to_string(i + 1);
    auto field = [&](std::size_t c, const char* name) -> std::string_view {
      if (c >= cols.size() || trim(cols[c]).empty())
        throw DataError(where + ": missing required field '" + name + "'");
      return trim(cols[c]);
    };
    VideoRecord r;
    r.video_id = std::string(field(0, "video_id"));
    const std::string who = where + " (" + r.video_id + ")";
    r.title = cols.size() > 1 ? std::string(trim(cols[1])) : std::string();
    auto ts = parse_timestamp(field(2, "published_at"));
    if (!ts) throw DataError(who + ": unparseable published_at");
    r.published_at = *ts;
    auto dur = parse_int(field(3, "duration_s"));
    if (!dur || *dur < 0) throw DataError(who + ": invalid duration_s");
    r.duration_s = *dur;
    r.uploader_id = std::string(field(4, "uploader_id"));
    if (cols.size() > 5 && !trim(cols[5]).empty()) r.event_id = std::string(trim(cols[5]));
    records.push_back(std::move(r));
  }
  return Catalog(std::move(records));
}

inline Catalog load_catalog(const std::string& path) { return parse_catalog(read_file(path)); }

inline std::string serialize_catalog(const Catalog& catalog) {
  std::string out(kCatalogHeader);
  out += '\n';
  for (const auto& r : catalog.records()) {
    out += r.video_id + '\t' + r.title + '\t' + format_timestamp(r.published_at) + '\t' +
           std::to_string(r.duration_s) + '\t' + r.uploader_id + '\t' + r.event_id.value_or("") + '\n';
  }
  return out;
}

}  // namespace fivr::ingest
