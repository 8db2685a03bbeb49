#pragma once

// End-to-end run over a synthetic world: metadata, rendered descriptors,
// visual and textual indexes, query selection, exhaustive per-query rankings
// for one retrieval method, and evaluation against the world's oracle labels
// under all three tasks.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/evalkit.hpp"
#include "fivr/features.hpp"
#include "fivr/index.hpp"
#include "fivr/ingest.hpp"
#include "fivr/selectq.hpp"
#include "fivr/synth.hpp"
#include "fivr/textsim.hpp"
#include "fivr/vocab.hpp"

namespace fivr::pipeline {

enum class Method : std::uint8_t { GV, BoW, LBoW, Emb, Hash };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::GV: return "gv";
    case Method::BoW: return "bow";
    case Method::LBoW: return "lbow";
    case Method::Emb: return "emb";
    case Method::Hash: return "hash";
  }
  return "gv";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::GV, Method::BoW, Method::LBoW, Method::Emb, Method::Hash})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct SyntheticConfig {
  synth::WorldConfig world = [] {
    synth::WorldConfig w;
    w.incidents = 8;
    w.viewpoints = 3;
    w.videos = 120;
    return w;
  }();
  synth::RenderOptions render = [] {
    synth::RenderOptions o;
    o.dim = 128;
    o.channels = 2;
    return o;
  }();
  Method method = Method::GV;
  std::size_t codebook_k = 64;
  std::size_t assignments = 1;  // nearest words per frame
  std::size_t hash_bits = 64;
  vocab::KMeansOptions kmeans{30, 1e-4};
  selectq::SelectionParams selection;
  std::uint64_t seed = 7;
};

// Sets every seeded stage from one seed.
inline SyntheticConfig synthetic_config(std::uint64_t seed) {
  SyntheticConfig c;
  c.seed = seed;
  c.world.seed = seed;
  return c;
}

// Per-video representation for one method.
struct VisualModel {
  Method method = Method::GV;
  std::vector<vocab::Codebook> codebooks;
  std::optional<index::HashFamily> hash_family;
  std::map<VideoId, SparseVector> sparse;  // gv, bow, lbow
  std::map<VideoId, index::DenseVector> dense;  // emb
  std::map<VideoId, index::VideoCode> codes;  // hash
  index::InvertedIndex index;  // over `sparse`; for emb / hash, over global vectors
};

namespace detail {

inline SparseVector dense_to_sparse(const index::DenseVector& v) {
  std::vector<SparseVector::Entry> e;
  for (std::size_t d = 0; d < v.size(); ++d)
    if (v[d] != 0.0) e.emplace_back(static_cast<TermId>(d), v[d]);
  return SparseVector(std::move(e)).normalized();
}

inline std::vector<std::vector<float>> frames_of(const std::map<VideoId, features::DescriptorSequence>& descriptors,
                                                 std::string_view channel) {
  std::vector<std::vector<float>> out;
  for (const auto& [id, seq] : descriptors) {
    const auto& ch = seq.channel(channel);
    for (std::size_t f = 0; f < ch.count(); ++f) out.emplace_back(ch.frame(f).begin(), ch.frame(f).end());
  }
  return out;
}

inline features::DescriptorSequence only_channels(const features::DescriptorSequence& seq,
                                                   const std::vector<std::string>& names) {
  features::DescriptorSequence out{seq.video_id, {}};
  for (const auto& n : names) out.channels.push_back(seq.channel(n));
  return out;
}

inline index::InvertedIndex build_index(const std::map<VideoId, SparseVector>& vectors) {
  std::vector<std::pair<VideoId, SparseVector>> docs(vectors.begin(), vectors.end());
  return index::InvertedIndex::build(docs);
}

}  // namespace detail

inline VisualModel build_visual_model(const std::map<VideoId, features::DescriptorSequence>& descriptors,
                                      const SyntheticConfig& config) {
  VisualModel model;
  model.method = config.method;
  std::map<VideoId, SparseVector> global;
  for (const auto& [id, seq] : descriptors) global[id] = detail::dense_to_sparse(index::global_vector(seq, "layer1"));

  switch (config.method) {
    case Method::GV:
      model.sparse = global;
      break;
    case Method::BoW:
    case Method::LBoW: {
      std::vector<std::string> channels{"layer1"};
      if (config.method == Method::LBoW) channels.push_back("layer2");
      for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto sample = detail::frames_of(descriptors, channels[c]);
        model.codebooks.push_back(
            vocab::train_codebook(sample, config.codebook_k, mix_seed(config.seed, 31 + c), channels[c], config.kmeans)
                .codebook);
      }
      std::map<VideoId, SparseVector> counts;
      for (const auto& [id, seq] : descriptors)
        counts[id] = vocab::aggregate_bow(detail::only_channels(seq, channels), model.codebooks, config.assignments);
      vocab::DocumentFrequencies dfs;
      for (const auto& [id, v] : counts) dfs.add_document(v);
      for (const auto& [id, v] : counts) model.sparse[id] = vocab::tf_idf(v, dfs);
      break;
    }
    case Method::Emb:
      for (const auto& [id, seq] : descriptors) model.dense[id] = index::global_vector(seq, "layer1");
      break;
    case Method::Hash: {
      const auto sample = detail::frames_of(descriptors, "layer1");
      model.hash_family = index::train_hash_family(sample, config.hash_bits, mix_seed(config.seed, 57));
      for (const auto& [id, seq] : descriptors) model.codes[id] = index::encode_video(seq, "layer1", *model.hash_family);
      break;
    }
  }
  model.index = detail::build_index(model.sparse.empty() ? global : model.sparse);
  return model;
}

// Every other video, best first, ties by id.
inline std::vector<index::ScoredVideo> rank_all(const VisualModel& model, const VideoId& query) {
  std::vector<index::ScoredVideo> out;
  switch (model.method) {
    case Method::GV:
    case Method::BoW:
    case Method::LBoW: {
      const auto& q = model.sparse.at(query);
      out = model.index.query_top_k(q, model.index.n_docs(), query);
      std::set<VideoId> seen;
      for (const auto& sv : out) seen.insert(sv.video_id);
      for (const auto& id : model.index.doc_ids())
        if (id != query && !seen.contains(id)) out.push_back({id, 0.0});
      break;
    }
    case Method::Emb: {
      const auto& q = model.dense.at(query);
      for (const auto& [id, v] : model.dense)
        if (id != query) out.push_back({id, index::dense_similarity(q, v, index::DenseMetric::kEuclidean)});
      break;
    }
    case Method::Hash: {
      const auto& q = model.codes.at(query);
      for (const auto& [id, c] : model.codes)
        if (id != query) out.push_back({id, index::hamming_similarity(q, c)});
      break;
    }
  }
  index::sort_ranking(out);
  return out;
}

inline textsim::TextCorpus text_corpus(const ingest::Catalog& catalog, const textsim::Lexicon& verbs = {},
                                       const textsim::Lexicon& stopwords = textsim::default_stopwords()) {
  std::vector<textsim::TokenList> docs;
  for (const auto& r : catalog.records()) docs.push_back(textsim::preprocess_title(r.title, verbs, stopwords, r.video_id));
  return textsim::encode_corpus(docs);
}

struct PipelineReport {
  SyntheticConfig config;
  synth::SynthWorld world;
  ingest::Catalog catalog;
  std::map<VideoId, features::DescriptorSequence> descriptors;
  VisualModel visual;
  index::InvertedIndex textual;
  selectq::SelectionReport selection;
  std::map<VideoId, std::vector<index::ScoredVideo>> rankings;  // planted queries
  std::vector<synth::LabelRow> labels;
  std::vector<evalkit::EvalResult> results;  // DSVR, CSVR, ISVR
};

inline PipelineReport run_synthetic(const SyntheticConfig& config) {
  PipelineReport r;
  r.config = config;
  r.world = synth::generate_world(config.world);
  r.catalog = synth::synthesize_catalog(r.world);
  r.descriptors = synth::render_descriptors(r.world, config.render);
  r.visual = build_visual_model(r.descriptors, config);
  auto corpus = text_corpus(r.catalog);
  r.textual = index::InvertedIndex::build(corpus.vectors);
  r.selection = selectq::select_queries(r.catalog, &r.visual.index, &r.textual, config.selection);
  for (const auto& q : r.world.queries) r.rankings[q] = rank_all(r.visual, q);
  r.labels = synth::ground_truth(r.world);
  const auto gt = evalkit::ground_truth_from(r.labels);
  std::map<VideoId, std::vector<VideoId>> ids;
  for (const auto& [q, ranking] : r.rankings)
    for (const auto& sv : ranking) ids[q].push_back(sv.video_id);
  for (auto t : {evalkit::Task::DSVR, evalkit::Task::CSVR, evalkit::Task::ISVR})
    r.results.push_back(evalkit::mean_average_precision(ids, gt, evalkit::task_spec(t)));
  return r;
}

inline std::string format_rankings(const std::map<VideoId, std::vector<index::ScoredVideo>>& rankings) {
  std::string out = "query_id\tvideo_id\tscore\n";
  for (const auto& [q, ranking] : rankings)
    for (const auto& sv : ranking) out += q + '\t' + sv.video_id + '\t' + format_real(sv.score) + '\n';
  return out;
}

inline std::map<VideoId, std::vector<index::ScoredVideo>> parse_rankings(std::string_view text) {
  std::map<VideoId, std::vector<index::ScoredVideo>> out;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || (i == 0 && lines[i].starts_with("query_id"))) continue;
    const auto f = split(lines[i], '\t');
    std::optional<double> score;
    if (f.size() == 3) score = parse_real(f[2]);
    if (!score) throw ParseError(i + 1, "rankings: expected query_id, video_id, score");
    out[std::string(f[0])].push_back({std::string(f[1]), *score});
  }
  return out;
}

// One-screen summary.
inline std::string format_summary(const PipelineReport& r) {
  std::string out;
  out += "seed\t" + std::to_string(r.config.seed) + '\n';
  out += "method\t" + std::string(to_string(r.config.method)) + '\n';
  out += "sigma\t" + format_real(r.config.render.sigma) + '\n';
  out += "videos\t" + std::to_string(r.world.videos.size()) + '\n';
  out += "planted_queries\t" + std::to_string(r.world.queries.size()) + '\n';
  out += "candidate_pairs\t" + std::to_string(r.selection.candidate_pairs) + '\n';
  out += "edges\t" + std::to_string(r.selection.edges) + '\n';
  out += "components\t" + std::to_string(r.selection.components) + '\n';
  out += "components_kept\t" + std::to_string(r.selection.components_kept) + '\n';
  out += "selected_queries\t" + std::to_string(r.selection.queries.size()) + '\n';
  for (const auto& res : r.results) out += "mAP_" + res.task + '\t' + format_real(res.map) + '\n';
  return out;
}

// Writes the run as a data directory the service can open: catalog,
// indexes, selected queries, world, labels, rankings, descriptors, results.
inline void write_artifacts(const PipelineReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "descriptors");
  const fs::path base(dir);
  write_file((base / "catalog.tsv").string(), ingest::serialize_catalog(r.catalog));
  write_file((base / "world.txt").string(), synth::format_world(r.world));
  write_file((base / "labels.tsv").string(), synth::format_labels(r.labels));
  write_file((base / "visual.fvix").string(), r.visual.index.encode());
  write_file((base / "textual.fvix").string(), r.textual.encode());
  write_file((base / "queries.tsv").string(), selectq::format_manifest(r.selection.queries));
  write_file((base / "rankings.tsv").string(), format_rankings(r.rankings));
  for (const auto& cb : r.visual.codebooks)
    vocab::write_codebook((base / ("codebook_" + cb.channel_name + ".fvcb")).string(), cb);
  for (const auto& [id, seq] : r.descriptors)
    features::write_descriptors((base / "descriptors" / (id + ".fvds")).string(), seq);
  for (const auto& res : r.results) {
    std::string name = res.task;
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    write_file((base / ("results_" + name + ".tsv")).string(), evalkit::format_results(res, to_string(r.config.method)));
  }
  write_file((base / "summary.tsv").string(), format_summary(r));
}

}  // namespace fivr::pipeline
