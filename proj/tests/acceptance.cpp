// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "fivr/fivr.hpp"
#include "oracles.hpp"

using namespace fivr;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome relation_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t pairs = 0, mismatches = 0, positives = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto world = synth::random_world(1000 + seed, 30 + seed % 11);
    if (world.videos.size() < 30) o.fail(fmt("world %llu has %zu videos", (unsigned long long)seed, world.videos.size()));
    for (const auto& q : world.videos)
      for (const auto& p : world.videos) {
        if (&q == &p) continue;
        const auto want = oracle::relations(q, p);
        const bool ds = synth::relation_ds(q, p), cs = synth::relation_cs(q, p), is = synth::relation_is(q, p);
        const bool nd = synth::relation_nd(q, p);
        ++pairs;
        positives += ds || cs || is;
        if (ds != want.ds || cs != want.cs || is != want.is || nd != want.nd ||
            synth::label_pair(q, p) != oracle::label(q, p))
          ++mismatches;
      }
  }
  const double secs = seconds_since(t0);
  if (mismatches) o.fail(fmt("%zu mismatches", mismatches));
  if (secs >= 5.0) o.fail(fmt("took %.2f s", secs));
  if (positives == 0) o.fail("no related pairs generated");
  if (o.pass) o.detail = fmt("50 worlds, %zu ordered pairs, %zu related, 0 mismatches, %.2f s", pairs, positives, secs);
  return o;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  Outcome o;
  Rng rng(2024);
  double worst = 0.0;
  std::vector<std::vector<evalkit::PrPoint>> curves;
  std::vector<std::vector<std::pair<double, double>>> raw;
  double ap_sum = 0.0, oracle_ap_sum = 0.0;
  evalkit::GroundTruth gt;
  std::map<VideoId, std::vector<VideoId>> rankings;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng.below(500);
    std::vector<VideoId> corpus;
    for (std::size_t j = 0; j < n; ++j) corpus.push_back(fmt("v%04zu", j));
    std::set<VideoId> relevant;
    const double p = rng.uniform();
    for (const auto& id : corpus)
      if (rng.uniform() < p) relevant.insert(id);
    if (relevant.empty()) relevant.insert(corpus[rng.below(n)]);
    rng.shuffle(corpus);
    corpus.resize(1 + rng.below(n));
    const VideoId q = fmt("q%03d", i);
    for (const auto& id : relevant) gt[q][id] = Label::ND;
    rankings[q] = corpus;

    const double ap = evalkit::average_precision(corpus, relevant), want = oracle::ap(corpus, relevant);
    worst = std::max(worst, std::abs(ap - want));
    ap_sum += ap;
    oracle_ap_sum += want;
    const auto pts = evalkit::precision_recall(corpus, relevant);
    const auto want_pts = oracle::pr(corpus, relevant);
    if (pts.size() != want_pts.size()) o.fail("precision/recall length differs");
    for (std::size_t k = 0; k < std::min(pts.size(), want_pts.size()); ++k)
      worst = std::max({worst, std::abs(pts[k].precision - want_pts[k].first), std::abs(pts[k].recall - want_pts[k].second)});
    curves.push_back(pts);
    raw.push_back(want_pts);
  }
  const auto curve = evalkit::interpolated_pr(curves);
  const auto want_curve = oracle::interpolated(raw, evalkit::kRecallBins);
  for (std::size_t b = 0; b < curve.size(); ++b) worst = std::max(worst, std::abs(curve[b].precision - want_curve[b]));
  const auto res = evalkit::mean_average_precision(rankings, gt, evalkit::task_spec(evalkit::Task::DSVR));
  worst = std::max({worst, std::abs(res.map - oracle_ap_sum / 200.0), std::abs(ap_sum / 200.0 - oracle_ap_sum / 200.0)});
  if (worst > 1e-12) o.fail(fmt("max deviation %.3g > 1e-12", worst));

  const double toy = evalkit::average_precision({"r1", "n", "r2"}, {"r1", "r2"});
  if (toy != 5.0 / 6.0) o.fail(fmt("AP(ranks 1,3; n=2) = %.17g, want 5/6", toy));
  if (o.pass) o.detail = fmt("200 rankings, max deviation %.3g; AP(ranks 1,3; n=2) = 5/6", worst);
  return o;
}

// ---------------------------------------------------------------------------

Outcome index_exactness() {
  Outcome o;
  Rng rng(77);
  std::size_t queries = 0;
  for (int c = 0; c < 100 && o.pass; ++c) {
    const std::size_t n = 1 + rng.below(1000);
    const auto docs = oracle::random_corpus(rng, n, 20 + rng.below(400), 1 + rng.below(12));
    const auto ix = index::InvertedIndex::build(docs);
    for (int t = 0; t < 5; ++t) {
      const auto& [id, q] = docs[rng.below(n)];
      const std::size_t k = 1 + rng.below(n + 5);
      ++queries;
      if (ix.query_top_k(q, k) != oracle::top_k(docs, q, k)) o.fail(fmt("corpus %d: top-%zu differs", c, k));
      if (ix.query_top_k(q, k, id) != oracle::top_k(docs, q, k, id)) o.fail(fmt("corpus %d: top-%zu (excluding) differs", c, k));
    }
  }
  std::size_t edge_total = 0;
  for (int c = 0; c < 40 && o.pass; ++c) {
    const std::size_t n = 2 + rng.below(199);
    const auto vis = oracle::random_corpus(rng, n, 30 + rng.below(100), 1 + rng.below(6), "d");
    auto txt = oracle::random_corpus(rng, n, 30 + rng.below(100), 1 + rng.below(6), "d");
    txt.resize(rng.below(n + 1));  // some videos have no title vector
    const auto vi = index::InvertedIndex::build(vis), ti = index::InvertedIndex::build(txt);
    const double ts = rng.uniform() * 0.8;
    const auto got = index::all_pairs_edges(&vi, txt.empty() ? nullptr : &ti, ts).edges;
    const auto want = oracle::pairs(vis, txt, ts);
    edge_total += want.size();
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].a == want[i].a && got[i].b == want[i].b && std::abs(got[i].score - want[i].score) <= 1e-12;
    if (!same) o.fail(fmt("all-pairs corpus %d (n=%zu, t=%.3f): %zu edges vs %zu", c, n, ts, got.size(), want.size()));
  }
  std::size_t sparse_candidates = 0, sparse_pairs = 0;
  for (int c = 0; c < 10 && o.pass; ++c) {
    const std::size_t n = 200;
    const auto docs = oracle::random_corpus(rng, n, 5000, 3);
    const auto ix = index::InvertedIndex::build(docs);
    const auto out = index::all_pairs_edges(&ix, nullptr, 0.5);
    sparse_candidates += out.candidate_pairs;
    sparse_pairs += n * (n - 1) / 2;
    if (out.candidate_pairs >= n * (n - 1) / 2) o.fail(fmt("sparse corpus %d: %zu candidates, not < n(n-1)/2", c, out.candidate_pairs));
  }
  if (o.pass)
    o.detail = fmt("%zu top-k queries on 100 corpora; 40 all-pairs corpora (%zu edges); sparse candidates %zu of %zu pairs",
                   queries, edge_total, sparse_candidates, sparse_pairs);
  return o;
}

// ---------------------------------------------------------------------------

Outcome synthetic_end_to_end() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  // Default CLI configuration: gv method, seed 7.
  auto base = pipeline::synthetic_config(7);
  base.render.sigma = 0.0;
  const auto clean = pipeline::run_synthetic(base);
  const double clean_map = clean.results.at(0).map;
  if (clean_map != 1.0) o.fail(fmt("sigma 0: DSVR mAP %.17g != 1", clean_map));

  std::size_t violations = 0;
  std::string first_violation;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::array<std::array<double, 3>, 3> maps{};  // sigma x task
    const double sigmas[] = {0.1, 0.3, 0.6};
    for (int s = 0; s < 3; ++s) {
      auto c = pipeline::synthetic_config(seed);
      c.render.sigma = sigmas[s];
      const auto r = pipeline::run_synthetic(c);
      for (int t = 0; t < 3; ++t) maps[s][t] = r.results.at(t).map;
    }
    for (int t = 0; t < 3; ++t)
      for (int s = 1; s < 3; ++s)
        if (maps[s][t] > maps[s - 1][t]) {
          if (!violations++)
            first_violation = fmt("seed %llu task %d: sigma %.1f -> %.1f raises mAP %.4f -> %.4f",
                                  (unsigned long long)seed, t, sigmas[s - 1], sigmas[s], maps[s - 1][t], maps[s][t]);
        }
  }
  if (violations) o.fail(fmt("%zu monotonicity violations; first: %s", violations, first_violation.c_str()));

  using evalkit::Task;
  const auto ds = evalkit::task_spec(Task::DSVR).positives, cs = evalkit::task_spec(Task::CSVR).positives,
             is = evalkit::task_spec(Task::ISVR).positives;
  auto strict_subset = [](const auto& a, const auto& b) {
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  if (!strict_subset(ds, cs) || !strict_subset(cs, is)) o.fail("task positive sets do not nest");
  const double secs = seconds_since(t0);
  if (secs >= 60.0) o.fail(fmt("took %.1f s", secs));
  if (o.pass) o.detail = fmt("sigma 0 DSVR mAP = 1; 10 seeds x 3 tasks non-increasing over {0.1, 0.3, 0.6}; nesting holds; %.1f s", secs);
  return o;
}

// ---------------------------------------------------------------------------

Outcome query_selection() {
  Outcome o;
  const Timestamp t0 = 1'436'227'200;
  auto rec = [](const VideoId& id, const std::string& up, Timestamp t, std::int64_t dur) {
    ingest::VideoRecord r;
    r.video_id = id;
    r.title = "t";
    r.uploader_id = up;
    r.published_at = t;
    r.duration_s = dur;
    return r;
  };
  {
    const ingest::Catalog cat({rec("a", "x", t0, 10), rec("b", "x", t0, 10), rec("c", "y", t0, 10), rec("d", "z", t0, 10)});
    const double r = selectq::uploader_ratio(selectq::Component{{"a", "b", "c", "d"}, 0, 0, 0}, cat);
    if (r != 0.75) o.fail(fmt("uploader_ratio({a,a,b,c}) = %.17g", r));
  }
  std::size_t planted = 0, kept = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    std::vector<ingest::VideoRecord> recs;
    std::vector<std::pair<VideoId, SparseVector>> vis;
    std::map<VideoId, VideoId> expected;  // planted query -> component tag
    std::set<std::string> small_or_filtered;
    const std::size_t clusters = 3 + rng.below(8);
    for (std::size_t c = 0; c < clusters; ++c) {
      const std::size_t size = 1 + rng.below(7);
      const std::size_t uploaders = 1 + rng.below(size);
      const double ratio = static_cast<double>(uploaders) / static_cast<double>(size);
      const Timestamp span = rng.below(3) == 0 ? static_cast<Timestamp>(14 * kSecondsPerDay + 1 + rng.below(7 * kSecondsPerDay))
                                               : static_cast<Timestamp>(rng.below(14 * kSecondsPerDay + 1));
      const Timestamp base = t0 + static_cast<Timestamp>(c) * 40 * kSecondsPerDay;
      for (std::size_t m = 0; m < size; ++m) {
        const VideoId id = fmt("c%02zu_m%zu", c, m);
        // Member 0 is the planted query: earliest and short. The others are
        // later, or long enough to be ineligible.
        const Timestamp t = m == 0 ? base : (m == 1 ? base + span : base + 1 + static_cast<Timestamp>(rng.below(span ? span : 1)));
        const std::int64_t dur = m == 0 ? 30 + rng.below(60) : 20 + rng.below(200);
        recs.push_back(rec(id, fmt("u%02zu_%zu", c, m % uploaders), size == 1 ? t : t, dur));
        vis.emplace_back(id, SparseVector({{static_cast<TermId>(c), 1.0}}));
      }
      const bool selectable = size >= 3 && ratio >= 0.75 && span <= 14 * kSecondsPerDay;
      if (selectable) expected[fmt("c%02zu_m0", c)] = fmt("c%02zu", c);
      else small_or_filtered.insert(fmt("c%02zu", c));
      planted += selectable;
    }
    const ingest::Catalog cat(recs);
    const auto ix = index::InvertedIndex::build(vis);
    const auto report = selectq::select_queries(cat, &ix, nullptr, selectq::SelectionParams{});
    std::set<VideoId> got;
    for (const auto& q : report.queries) {
      got.insert(q.query_id);
      if (q.component.size() <= 2) o.fail(fmt("seed %llu: component of size %zu selected", (unsigned long long)seed, q.component.size()));
      if (q.component.uploader_ratio < 0.75) o.fail(fmt("seed %llu: ratio %.3f selected", (unsigned long long)seed, q.component.uploader_ratio));
      if (q.component.span() > 14 * kSecondsPerDay) o.fail(fmt("seed %llu: span %lld selected", (unsigned long long)seed, (long long)q.component.span()));
      if (small_or_filtered.contains(q.query_id.substr(0, 3))) o.fail("filtered component selected");
    }
    std::set<VideoId> want;
    for (const auto& [id, _] : expected) want.insert(id);
    if (got != want) o.fail(fmt("seed %llu: %zu queries selected, %zu planted", (unsigned long long)seed, got.size(), want.size()));
    kept += got.size();
    if (selectq::select_queries(cat, &ix, nullptr, selectq::SelectionParams{}).queries != report.queries)
      o.fail("selection is not deterministic");
  }
  if (o.pass) o.detail = fmt("uploader_ratio({a,a,b,c}) = 0.75; 30 catalogs, %zu planted queries recovered exactly", kept);
  (void)planted;
  return o;
}

// ---------------------------------------------------------------------------

Outcome annotation_protocol() {
  Outcome o;
  using namespace annotate;
  const Timestamp qt = 1'500'000'000;
  const StoppingRules rules;  // 100 consecutive irrelevant, 1000 per phase
  std::size_t capped = 0, dried = 0, exhausted = 0, replays = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const std::size_t nv = rng.below(1400), nt = rng.below(300);
    std::vector<ingest::VideoRecord> recs;
    auto add = [&](const VideoId& id) {
      ingest::VideoRecord r;
      r.video_id = id;
      r.uploader_id = "u";
      r.published_at = qt + static_cast<Timestamp>(rng.below(20 * kSecondsPerDay)) - 10 * kSecondsPerDay;
      recs.push_back(r);
    };
    ingest::VideoRecord qr;
    qr.video_id = "q";
    qr.uploader_id = "u";
    qr.published_at = qt;
    recs.push_back(qr);
    std::vector<index::ScoredVideo> visual, textual;
    for (std::size_t i = 0; i < nv; ++i) {
      visual.push_back({fmt("v%05zu", i), rng.uniform()});
      add(visual.back().video_id);
    }
    for (std::size_t i = 0; i < nt; ++i) {
      if (nv && rng.below(3) == 0) {
        const auto& id = visual[rng.below(nv)].video_id;
        bool dup = false;
        for (const auto& t : textual) dup = dup || t.video_id == id;
        if (!dup) textual.push_back({id, rng.uniform()});
      } else {
        textual.push_back({fmt("t%05zu", i), rng.uniform()});
        add(textual.back().video_id);
      }
    }
    const ingest::Catalog cat(recs);
    // Bursty streams: relevance probability switches between regimes.
    const double p_hi = 0.5 + 0.5 * rng.uniform(), p_lo = 0.02 * rng.uniform();
    std::map<VideoId, Label> truth;
    bool hi = rng.below(2) == 0;
    for (const auto& r : cat.records()) {
      if (rng.uniform() < 0.01) hi = !hi;
      truth[r.video_id] = rng.uniform() < (hi ? p_hi : p_lo) ? kAllLabels[rng.below(4)] : Label::DI;
    }
    auto label_of = [&](const VideoId& id) { return truth.at(id); };

    const auto fresh = create_session("q", visual, textual, cat, rules);
    auto s = fresh;
    std::vector<oracle::SimStep> got;
    Timestamp t = qt;
    while (auto c = next_candidate(s)) {
      got.push_back({c->video_id, c->phase});
      record_label(s, c->video_id, label_of(c->video_id), t += 1 + static_cast<Timestamp>(rng.below(30)));
    }

    // Where the visual phase must stop, from the stream alone.
    auto sorted = visual;
    index::sort_ranking(sorted);
    std::size_t expect = 0, dry = 0;
    while (expect < sorted.size() && dry < rules.irrelevant_run && expect < rules.phase_cap)
      dry = is_relevant(truth.at(sorted[expect++].video_id)) ? 0 : dry + 1;
    std::size_t visual_steps = 0;
    for (const auto& g : got) visual_steps += g.phase == Phase::Visual;
    if (visual_steps != expect) {
      o.fail(fmt("stream %llu: visual phase stopped after %zu, expected %zu", (unsigned long long)seed, visual_steps, expect));
      break;
    }
    capped += expect == rules.phase_cap;
    dried += dry == rules.irrelevant_run;
    exhausted += expect == sorted.size() && expect < rules.phase_cap && dry < rules.irrelevant_run;

    std::map<VideoId, Timestamp> published;
    for (const auto& r : cat.records()) published[r.video_id] = r.published_at;
    if (got != oracle::simulate_annotation(visual, textual, published, qt, rules, label_of)) {
      o.fail(fmt("stream %llu: label order differs from the reference protocol", (unsigned long long)seed));
      break;
    }
    if (seed % 10 == 0) {
      const auto again = replay(fresh, s.history);
      ++replays;
      if (!(again == s) || serialize_state(again) != serialize_state(s)) {
        o.fail(fmt("stream %llu: replay differs", (unsigned long long)seed));
        break;
      }
      std::vector<LabelEvent> parsed_events;
      std::string log;
      for (const auto& e : s.history) log += format_log_entry({"s0001", e, {}});
      for (const auto& e : parse_log(log)) parsed_events.push_back(e.event);
      if (serialize_state(replay(fresh, parsed_events)) != serialize_state(s)) {
        o.fail(fmt("stream %llu: replay from the text log differs", (unsigned long long)seed));
        break;
      }
    }
  }
  if (!capped || !dried) o.fail(fmt("streams did not exercise both stops (cap %zu, run %zu)", capped, dried));
  if (o.pass)
    o.detail = fmt("1000 streams (%zu capped at 1000, %zu stopped by 100-run, %zu ran out); %zu replays bit-identical",
                   capped, dried, exhausted, replays);
  return o;
}

// ---------------------------------------------------------------------------

Outcome kmeans() {
  Outcome o;
  std::size_t iterations = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 20 + rng.below(300), dim = 1 + rng.below(16), k = 2 + rng.below(12);
    std::vector<std::vector<float>> sample(n, std::vector<float>(dim));
    for (auto& x : sample)
      for (auto& v : x) v = static_cast<float>(rng.normal() + 4.0 * static_cast<double>(rng.below(4)));
    const auto res = vocab::train_codebook(sample, k, seed);
    iterations += res.iterations;
    for (std::size_t i = 1; i < res.objective.size(); ++i)
      if (res.objective[i] > res.objective[i - 1])
        o.fail(fmt("run %llu: objective rose at iteration %zu (%.17g -> %.17g)", (unsigned long long)seed, i,
                   res.objective[i - 1], res.objective[i]));

    // k = n: every point is its own centroid.
    const auto all = vocab::train_codebook(sample, n, seed);
    std::multiset<std::vector<float>> got, want(sample.begin(), sample.end());
    for (std::size_t c = 0; c < n; ++c) got.insert({all.codebook.centroid(c).begin(), all.codebook.centroid(c).end()});
    if (got != want || all.objective.back() != 0.0) o.fail(fmt("run %llu: k = n is not the sample itself", (unsigned long long)seed));

    // k = 1: the sample mean.
    const auto one = vocab::train_codebook(sample, 1, seed);
    for (std::size_t d = 0; d < dim; ++d) {
      long double sum = 0;
      for (const auto& x : sample) sum += x[d];
      const auto mean = static_cast<float>(sum / static_cast<long double>(n));
      if (one.codebook.centroid(0)[d] != mean)
        o.fail(fmt("run %llu: k = 1 centroid[%zu] = %.9g, mean %.9g", (unsigned long long)seed, d,
                   (double)one.codebook.centroid(0)[d], (double)mean));
    }
  }
  if (o.pass) o.detail = fmt("50 runs, %zu Lloyd iterations, objective never rose; k = n and k = 1 exact", iterations);
  return o;
}

// ---------------------------------------------------------------------------

Outcome format_round_trips() {
  Outcome o;
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "fivr_acceptance_formats";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto twice = [&](const std::string& name, const std::string& first, const std::function<std::string(const std::string&)>& reencode) {
    const auto path = (dir / name).string();
    write_file(path, first);
    const auto second = reencode(read_file(path));
    write_file(path + ".2", second);
    if (read_file(path + ".2") != first) o.fail(name + " differs after write -> read -> write");
  };
  auto cfg = pipeline::synthetic_config(5);
  cfg.world.videos = 60;
  cfg.world.incidents = 5;
  cfg.render.sigma = 0.3;
  cfg.method = pipeline::Method::BoW;
  const auto r = pipeline::run_synthetic(cfg);
  std::size_t files = 0;
  for (const auto& [id, seq] : r.descriptors) {
    twice(id + ".fvds", features::encode_descriptors(seq),
          [&](const std::string& b) { return features::encode_descriptors(features::decode_descriptors(b, id)); });
    ++files;
  }
  for (const auto& cb : r.visual.codebooks) {
    twice(cb.channel_name + ".fvcb", vocab::encode_codebook(cb),
          [](const std::string& b) { return vocab::encode_codebook(vocab::decode_codebook(b)); });
    ++files;
  }
  for (const auto* ix : {&r.visual.index, &r.textual}) {
    twice(fmt("ix%zu.fvix", files), ix->encode(),
          [](const std::string& b) { return index::InvertedIndex::decode(b).encode(); });
    ++files;
  }
  // Annotation table from sessions labelled with the planted relations.
  std::vector<annotate::AnnotationSession> sessions;
  const auto gt = evalkit::ground_truth_from(r.labels);
  for (const auto& q : r.world.queries) {
    std::vector<index::ScoredVideo> textual;
    for (const auto& sv : r.textual.query_top_k(r.textual.vector(*r.textual.ordinal(q)), 200, q)) textual.push_back(sv);
    auto s = annotate::create_session(q, r.rankings.at(q), textual, r.catalog);
    Timestamp t = 1'600'000'000;
    while (auto c = annotate::next_candidate(s)) {
      const auto& row = gt.at(q);
      const auto it = row.find(c->video_id);
      annotate::record_label(s, c->video_id, it == row.end() ? Label::DI : it->second, t += 7);
    }
    sessions.push_back(std::move(s));
  }
  std::vector<const annotate::AnnotationSession*> ptrs;
  for (const auto& s : sessions) ptrs.push_back(&s);
  const auto table = annotate::format_annotations(annotate::export_annotations(ptrs));
  twice("annotations.tsv", table, [](const std::string& b) { return annotate::format_annotations(annotate::parse_annotations(b)); });
  ++files;
  fs::remove_all(dir);
  if (o.pass) o.detail = fmt("%zu files (descriptors, codebooks, indexes, annotation table) byte-identical", files);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"relation-oracle-soundness", relation_oracle},
      {"metric-oracle-equivalence", metric_oracle},
      {"index-exactness", index_exactness},
      {"synthetic-end-to-end", synthetic_end_to_end},
      {"query-selection", query_selection},
      {"annotation-protocol", annotation_protocol},
      {"kmeans", kmeans},
      {"format-round-trips", format_round_trips},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
