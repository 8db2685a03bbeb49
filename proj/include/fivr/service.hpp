#pragma once

// Annotation service state over a data directory:
//
//   catalog.tsv            required video metadata
//   visual.fvix            optional visual index (candidate ranking)
//   textual.fvix           optional textual index
//   queries.tsv            optional selected-query manifest
//   keyframes/<id>/*.ppm   optional keyframe images
//   sessions/sessions.tsv  append-only session creations
//   sessions/events.log    append-only label events
//   sessions/snapshot.txt  periodic full state, rewritten atomically
//
// Requests and responses use field-named text records ("key: value" lines,
// records separated by "---"). Dispatch is independent of the HTTP layer.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fivr/annotate.hpp"
#include "fivr/core.hpp"
#include "fivr/index.hpp"
#include "fivr/ingest.hpp"

namespace fivr::service {

// ---------------------------------------------------------------------------
// Field records

using Record = std::vector<std::pair<std::string, std::string>>;

inline std::string format_records(const std::vector<Record>& records) {
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i) out += "---\n";
    for (const auto& [k, v] : records[i]) out += k + ": " + v + '\n';
  }
  return out;
}

inline std::vector<Record> parse_records(std::string_view text) {
  std::vector<Record> out(1);
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    if (line == "---") {
      if (!out.back().empty()) out.emplace_back();
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) throw ParseError(i + 1, "expected 'key: value'");
    out.back().emplace_back(std::string(trim(line.substr(0, colon))), std::string(trim(line.substr(colon + 1))));
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

inline std::optional<std::string> field(const Record& r, std::string_view key) {
  for (const auto& [k, v] : r)
    if (k == key) return v;
  return std::nullopt;
}

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "text/plain; charset=utf-8";
};

inline Response records_response(int status, const std::vector<Record>& records) {
  return {status, format_records(records)};
}

inline Response error_response(int status, const std::string& message) {
  return records_response(status, {{{"error", message}}});
}

// ---------------------------------------------------------------------------

struct ServiceConfig {
  std::string data_dir;
  annotate::StoppingRules rules;
  std::size_t snapshot_every = 50;  // label events between snapshots
  std::size_t candidate_depth = 0;  // per-ranking cap; 0 keeps every match
  std::function<Timestamp()> clock = [] {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
  };
};

struct SessionEntry {
  std::string session_id;
  annotate::AnnotationSession state;
  std::mutex writer;  // one labeller at a time
};

struct TokenUse {
  std::string session_id;
  VideoId video_id;  // empty for session creation
  Label label = Label::DI;
};

class Service {
 public:
  explicit Service(ServiceConfig config) : config_(std::move(config)) {
    namespace fs = std::filesystem;
    const fs::path base(config_.data_dir);
    const auto catalog_path = base / "catalog.tsv";
    if (!fs::exists(catalog_path)) throw DataError("data directory has no catalog.tsv: " + config_.data_dir);
    catalog_ = ingest::load_catalog(catalog_path.string());
    if (fs::exists(base / "visual.fvix")) visual_ = index::load_index((base / "visual.fvix").string());
    if (fs::exists(base / "textual.fvix")) textual_ = index::load_index((base / "textual.fvix").string());
    if (fs::exists(base / "queries.tsv")) load_manifest((base / "queries.tsv").string());
    fs::create_directories(base / "sessions");
    recover();
  }

  const ingest::Catalog& catalog() const { return catalog_; }
  std::size_t events_logged() const { return events_logged_; }

  // Path relative to /v1, query or body fields in `params`.
  Response handle(std::string_view method, std::string_view path, const Record& params) {
    try {
      const auto parts = split_path(path);
      if (method == "GET" && parts.size() == 1 && parts[0] == "queries") return get_queries();
      if (method == "GET" && parts.size() == 2 && parts[0] == "videos") return get_video(parts[1]);
      if (method == "GET" && parts.size() == 4 && parts[0] == "videos" && parts[2] == "keyframes")
        return get_keyframe(parts[1], parts[3]);
      if (parts.size() >= 1 && parts[0] == "sessions") {
        if (parts.size() == 1 && method == "GET") return list_sessions();
        if (parts.size() == 1 && method == "POST") return create(params);
        if (parts.size() == 3 && method == "GET" && parts[2] == "next") return next(parts[1]);
        if (parts.size() == 3 && method == "GET" && parts[2] == "progress") return progress(parts[1]);
        if (parts.size() == 3 && method == "GET" && parts[2] == "export") return export_table(parts[1]);
        if (parts.size() == 3 && method == "POST" && parts[2] == "label") return label(parts[1], params);
      }
      return error_response(404, "no route for " + std::string(method) + " /v1/" + std::string(path));
    } catch (const annotate::NotPendingError& e) {
      return error_response(409, e.what());
    } catch (const ParseError& e) {
      return error_response(400, e.what());
    } catch (const DataError& e) {
      return error_response(422, e.what());
    } catch (const std::invalid_argument& e) {
      return error_response(400, e.what());
    }
  }

  // Full state of every session, in id order.
  std::string snapshot_text() const {
    std::shared_lock lock(mutex_);
    return snapshot_locked();
  }

  void write_snapshot() {
    std::unique_lock lock(mutex_);
    write_snapshot_locked();
  }

 private:
  static std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> out;
    for (auto p : split(path, '/'))
      if (!p.empty()) out.emplace_back(p);
    return out;
  }

  std::filesystem::path sessions_dir() const { return std::filesystem::path(config_.data_dir) / "sessions"; }

  void load_manifest(const std::string& path) {
    const auto text = read_file(path);
    const auto lines = lines_of(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      const auto f = split(lines[i], '\t');
      if (f.size() < 3) throw ParseError(i + 1, "queries.tsv: expected rank, size, video_id");
      manifest_.push_back({std::string(f[2]), std::string(f[1])});
    }
  }

  std::vector<index::ScoredVideo> ranking(const std::optional<index::InvertedIndex>& ix, const VideoId& q) const {
    if (!ix) return {};
    const auto ord = ix->ordinal(q);
    if (!ord) return {};
    const auto depth = config_.candidate_depth ? config_.candidate_depth : ix->n_docs();
    auto r = ix->query_top_k(ix->vector(*ord), depth, q);
    std::erase_if(r, [&](const index::ScoredVideo& sv) { return !catalog_.contains(sv.video_id); });
    return r;
  }

  annotate::AnnotationSession fresh_session(const VideoId& q) const {
    return annotate::create_session(q, ranking(visual_, q), ranking(textual_, q), catalog_, config_.rules);
  }

  static std::string session_name(std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%04zu", n);
    return buf;
  }

  SessionEntry* find_session(const std::string& id) {
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second.get();
  }

  // Sessions file, then snapshot, then label events past the snapshot.
  void recover() {
    namespace fs = std::filesystem;
    const auto dir = sessions_dir();
    if (fs::exists(dir / "sessions.tsv")) {
      const auto text = read_file((dir / "sessions.tsv").string());
      const auto lines = lines_of(text);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], '\t');
        if (f.size() != 4) throw DataError("sessions.tsv line " + std::to_string(i + 1) + ": expected 4 fields");
        auto entry = std::make_unique<SessionEntry>();
        entry->session_id = std::string(f[0]);
        entry->state = fresh_session(std::string(f[1]));
        if (!f[2].empty()) tokens_[std::string(f[2])] = {entry->session_id, {}, Label::DI};
        sessions_[entry->session_id] = std::move(entry);
        ++created_;
      }
    }
    std::size_t skip = 0;
    if (fs::exists(dir / "snapshot.txt")) {
      const auto text = read_file((dir / "snapshot.txt").string());
      const auto lines = lines_of(text);
      if (lines.empty() || !lines[0].starts_with("snapshot\t")) throw DataError("snapshot.txt: bad header");
      auto n = parse_int(lines[0].substr(9));
      if (!n || *n < 0) throw DataError("snapshot.txt: bad event count");
      skip = static_cast<std::size_t>(*n);
      try {
        for (std::size_t i = 1; i < lines.size();) {
          if (trim(lines[i]).empty()) {
            ++i;
            continue;
          }
          if (!lines[i].starts_with("ticket\t")) throw DataError("snapshot.txt: expected ticket line");
          const std::string id(lines[i].substr(7));
          std::size_t used = 0;
          auto state = annotate::parse_state(lines, i + 1, &used);
          auto* entry = find_session(id);
          if (!entry) throw DataError("snapshot.txt: unknown session " + id);
          entry->state = std::move(state);
          i += 1 + used;
        }
      } catch (const ParseError& e) {
        throw DataError(std::string("snapshot.txt: ") + e.what());
      }
    }
    if (fs::exists(dir / "events.log")) {
      std::vector<annotate::LogEntry> events;
      try {
        events = annotate::parse_log(read_file((dir / "events.log").string()));
      } catch (const ParseError& e) {
        throw DataError(std::string("events.log: ") + e.what());
      }
      if (skip > events.size()) throw DataError("snapshot covers more events than the log holds");
      for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        auto* entry = find_session(e.session_id);
        if (!entry) throw DataError("events.log: unknown session " + e.session_id);
        if (!e.token.empty()) tokens_[e.token] = {e.session_id, e.event.video_id, e.event.label};
        if (i >= skip) annotate::record_label(entry->state, e.event.video_id, e.event.label, e.event.time);
      }
      events_logged_ = events.size();
    }
  }

  void append(const std::string& file, const std::string& line) {
    std::ofstream out(sessions_dir() / file, std::ios::binary | std::ios::app);
    out << line;
    out.flush();
    if (!out) throw std::runtime_error("cannot append to " + file);
  }

  std::string snapshot_locked() const {
    std::string out = "snapshot\t" + std::to_string(events_logged_) + '\n';
    for (const auto& [id, entry] : sessions_) out += "ticket\t" + id + '\n' + annotate::serialize_state(entry->state);
    return out;
  }

  void write_snapshot_locked() {
    const auto tmp = sessions_dir() / "snapshot.txt.tmp";
    write_file(tmp.string(), snapshot_locked());
    std::filesystem::rename(tmp, sessions_dir() / "snapshot.txt");
  }

  Record ticket(const SessionEntry& e) const {
    const auto& s = e.state;
    return {{"session_id", e.session_id},
            {"query_id", s.query_id},
            {"phase", std::string(annotate::to_string(s.phase))},
            {"annotated", std::to_string(s.annotated())},
            {"queue_remaining", std::to_string(s.queue_remaining())},
            {"irrelevant_counter", std::to_string(s.irrelevant_since_relevant)},
            {"phase_annotated", std::to_string(s.phase_annotated)}};
  }

  Record video_record(const ingest::VideoRecord& r) const {
    Record out{{"video_id", r.video_id},
               {"title", r.title},
               {"published_at", format_timestamp(r.published_at)},
               {"duration_s", std::to_string(r.duration_s)},
               {"uploader_id", r.uploader_id}};
    if (r.event_id) out.emplace_back("event_id", *r.event_id);
    for (std::size_t i = 0; i < keyframe_files(r.video_id).size(); ++i)
      out.emplace_back("keyframe", "/v1/videos/" + r.video_id + "/keyframes/" + std::to_string(i));
    return out;
  }

  std::vector<std::filesystem::path> keyframe_files(const VideoId& id) const {
    namespace fs = std::filesystem;
    std::vector<fs::path> out;
    const auto dir = fs::path(config_.data_dir) / "keyframes" / id;
    if (id.find("..") != std::string::npos || id.find('/') != std::string::npos || !fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".ppm") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
  }

  Response get_queries() const {
    std::vector<Record> out;
    if (!manifest_.empty()) {
      for (std::size_t i = 0; i < manifest_.size(); ++i) {
        const auto* r = catalog_.find(manifest_[i].first);
        Record rec{{"rank", std::to_string(i + 1)}, {"video_id", manifest_[i].first}, {"component_size", manifest_[i].second}};
        if (r) rec.emplace_back("title", r->title);
        out.push_back(std::move(rec));
      }
    }
    return records_response(200, out);
  }

  Response get_video(const std::string& id) const {
    const auto* r = catalog_.find(id);
    if (!r) return error_response(404, "unknown video '" + id + "'");
    return records_response(200, {video_record(*r)});
  }

  Response get_keyframe(const std::string& id, const std::string& n) const {
    const auto files = keyframe_files(id);
    const auto k = parse_int(n);
    if (!k || *k < 0 || static_cast<std::size_t>(*k) >= files.size()) return error_response(404, "no such keyframe");
    return {200, read_file(files[static_cast<std::size_t>(*k)].string()), "image/x-portable-pixmap"};
  }

  Response list_sessions() const {
    std::shared_lock lock(mutex_);
    std::vector<Record> out;
    for (const auto& [id, entry] : sessions_) out.push_back(ticket(*entry));
    return records_response(200, out);
  }

  Response create(const Record& params) {
    const auto query = field(params, "query_id");
    if (!query || query->empty()) return error_response(400, "query_id is required");
    const auto token = field(params, "request_token").value_or("");
    if (token.find_first_of("\t\n") != std::string::npos) return error_response(400, "request_token must be one line");
    std::unique_lock lock(mutex_);
    if (!token.empty()) {
      if (auto it = tokens_.find(token); it != tokens_.end()) {
        auto* entry = find_session(it->second.session_id);
        if (!it->second.video_id.empty() || entry->state.query_id != *query)
          return error_response(409, "request_token already used for a different request");
        auto rec = ticket(*entry);
        rec.emplace_back("replayed", "true");
        return records_response(200, {rec});
      }
    }
    if (!catalog_.contains(*query)) return error_response(404, "query '" + *query + "' is not in the catalog");
    auto entry = std::make_unique<SessionEntry>();
    entry->session_id = session_name(++created_);
    entry->state = fresh_session(*query);
    append("sessions.tsv", entry->session_id + '\t' + *query + '\t' + token + '\t' +
                               std::to_string(config_.clock()) + '\n');
    if (!token.empty()) tokens_[token] = {entry->session_id, {}, Label::DI};
    auto rec = ticket(*entry);
    sessions_[entry->session_id] = std::move(entry);
    return records_response(201, {rec});
  }

  Response next(const std::string& id) {
    std::shared_lock lock(mutex_);
    auto* entry = find_session(id);
    if (!entry) return error_response(404, "unknown session '" + id + "'");
    std::lock_guard writer(entry->writer);
    auto rec = ticket(*entry);
    const auto c = annotate::next_candidate(entry->state);
    if (!c) {
      rec.emplace_back("status", "done");
      return records_response(200, {rec});
    }
    rec.emplace_back("status", "candidate");
    for (auto& kv : video_record(catalog_.at(c->video_id))) rec.push_back(std::move(kv));
    rec.emplace_back("visual_score", c->visual_score ? format_real(*c->visual_score) : "");
    rec.emplace_back("textual_score", c->textual_score ? format_real(*c->textual_score) : "");
    return records_response(200, {rec});
  }

  Response progress(const std::string& id) {
    std::shared_lock lock(mutex_);
    auto* entry = find_session(id);
    if (!entry) return error_response(404, "unknown session '" + id + "'");
    std::lock_guard writer(entry->writer);
    return records_response(200, {ticket(*entry)});
  }

  Response export_table(const std::string& id) {
    std::shared_lock lock(mutex_);
    auto* entry = find_session(id);
    if (!entry) return error_response(404, "unknown session '" + id + "'");
    std::lock_guard writer(entry->writer);
    return {200, annotate::format_annotations(annotate::export_annotations({&entry->state})),
            "text/tab-separated-values; charset=utf-8"};
  }

  Response label(const std::string& id, const Record& params) {
    const auto video = field(params, "video_id");
    const auto label_text = field(params, "label");
    const auto token = field(params, "request_token");
    if (!video || !label_text || !token || token->empty())
      return error_response(400, "video_id, label and request_token are required");
    const auto l = parse_label(*label_text);
    if (!l) return error_response(400, "label must be one of ND, DS, CS, IS, DI");
    if (token->find_first_of("\t\n") != std::string::npos) return error_response(400, "request_token must be one line");
    // Exclusive: the log and the token table are shared by all sessions.
    std::unique_lock lock(mutex_);
    auto* entry = find_session(id);
    if (!entry) return error_response(404, "unknown session '" + id + "'");
    if (!catalog_.contains(*video)) return error_response(422, "video '" + *video + "' is not in the catalog");
    if (auto it = tokens_.find(*token); it != tokens_.end()) {
      const auto& use = it->second;
      if (use.session_id != id || use.video_id != *video || use.label != *l)
        return error_response(409, "request_token already used for a different request");
      auto rec = ticket(*entry);
      rec.emplace_back("replayed", "true");
      return records_response(200, {rec});
    }
    const auto time = config_.clock();
    annotate::record_label(entry->state, *video, *l, time);
    append("events.log", annotate::format_log_entry({id, {*video, *l, time, annotate::Phase::Visual}, *token}));
    tokens_[*token] = {id, *video, *l};
    ++events_logged_;
    if (config_.snapshot_every && events_logged_ % config_.snapshot_every == 0) write_snapshot_locked();
    return records_response(200, {ticket(*entry)});
  }

  ServiceConfig config_;
  ingest::Catalog catalog_;
  std::optional<index::InvertedIndex> visual_;
  std::optional<index::InvertedIndex> textual_;
  std::vector<std::pair<VideoId, std::string>> manifest_;  // query id, component size
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<SessionEntry>> sessions_;
  std::map<std::string, TokenUse> tokens_;
  std::size_t created_ = 0;
  std::size_t events_logged_ = 0;
};

}  // namespace fivr::service
