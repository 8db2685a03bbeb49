// fivr command-line entry point. Exit status: 0 ok, 1 usage, 2 data error.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "fivr/fivr.hpp"
#include "fivr/http.hpp"

namespace {

using namespace fivr;

constexpr int kUsage = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_file(out_path, text);
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::vector<std::pair<VideoId, SparseVector>> load_vectors(const std::string& path) {
  try {
    return parse_sparse_lines(read_file(path));
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string vectors_text(const std::vector<std::pair<VideoId, SparseVector>>& docs) {
  std::string out;
  for (const auto& [id, v] : docs) out += format_sparse_line(id, v) + '\n';
  return out;
}

std::optional<index::InvertedIndex> maybe_index(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return index::load_index(path);
}

std::atomic<httplib::Server*> g_server{nullptr};

void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fine-grained incident video retrieval toolkit"};
  app.require_subcommand(1);
  std::string out;

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Event listings and video metadata");
  ingest_cmd->require_subcommand(1);
  std::string events_file, videos_file, event_id;
  bool retained_only = false;
  auto* ingest_events = ingest_cmd->add_subcommand("events", "Parse an event listing and print it normalised");
  ingest_events->add_option("file", events_file, "Event listing")->required();
  ingest_events->add_flag("--retained", retained_only, "Keep only the retained categories");
  ingest_events->add_option("-o,--out", out, "Output file");
  auto* ingest_videos = ingest_cmd->add_subcommand("videos", "Validate a metadata file and print it normalised");
  ingest_videos->add_option("file", videos_file, "Metadata TSV")->required();
  ingest_videos->add_option("-o,--out", out, "Output file");
  auto* ingest_filter = ingest_cmd->add_subcommand("filter", "Videos matching one event's date and duration window");
  ingest_filter->add_option("--event", event_id, "Event id")->required();
  ingest_filter->add_option("--events", events_file, "Event listing")->required();
  ingest_filter->add_option("--videos", videos_file, "Metadata TSV")->required();
  ingest_filter->add_option("-o,--out", out, "Output file");

  // features
  auto* features_cmd = app.add_subcommand("features", "Frame descriptors");
  features_cmd->require_subcommand(1);
  std::string frames_dir, descriptor_file;
  bool use_hsv = false, use_lbp = false;
  double fps = 0.0;
  auto* features_extract = features_cmd->add_subcommand("extract", "HSV / LBP descriptors from a directory of PPM frames");
  features_extract->add_flag("--hsv", use_hsv, "HSV colour histogram channel");
  features_extract->add_flag("--lbp", use_lbp, "Local binary pattern channel");
  features_extract->add_option("--fps", fps, "Source frame rate; samples one frame per second")->check(CLI::PositiveNumber);
  features_extract->add_option("frames", frames_dir, "Frames directory")->required()->check(CLI::ExistingDirectory);
  features_extract->add_option("-o,--out", out, "Descriptor file (.fvds)")->required();
  auto* features_import = features_cmd->add_subcommand("import", "Validate a descriptor file and summarise it");
  features_import->add_option("file", descriptor_file, "Descriptor file")->required();

  // vocab
  auto* vocab_cmd = app.add_subcommand("vocab", "Visual codebooks and bag-of-words vectors");
  vocab_cmd->require_subcommand(1);
  std::size_t k = 256, m = 1;
  std::uint64_t seed = 1;
  std::string channel = "hsv";
  std::vector<std::string> descriptor_files, codebook_files;
  auto* vocab_train = vocab_cmd->add_subcommand("train", "k-means codebook over every frame of one channel");
  vocab_train->add_option("--k", k, "Codebook size")->check(CLI::PositiveNumber);
  vocab_train->add_option("--seed", seed, "Seed");
  vocab_train->add_option("--channel", channel, "Descriptor channel");
  vocab_train->add_option("descriptors", descriptor_files, "Descriptor files")->required();
  vocab_train->add_option("-o,--out", out, "Codebook file (.fvcb)")->required();
  auto* vocab_encode = vocab_cmd->add_subcommand("encode", "tf-idf bag-of-words vectors");
  vocab_encode->add_option("--m", m, "Nearest words per frame")->check(CLI::IsMember({1, 3}));
  vocab_encode->add_option("--codebook", codebook_files, "Codebook per channel")->required();
  vocab_encode->add_option("descriptors", descriptor_files, "Descriptor files")->required();
  vocab_encode->add_option("-o,--out", out, "Vector file");

  // textsim
  auto* textsim_cmd = app.add_subcommand("textsim", "Title tokens and textual tf-idf vectors");
  textsim_cmd->require_subcommand(1);
  std::string verbs_file, stopwords_file;
  auto* textsim_encode = textsim_cmd->add_subcommand("encode", "tf-idf vectors of the catalog's titles");
  textsim_encode->add_option("metadata", videos_file, "Metadata TSV")->required();
  textsim_encode->add_option("--verbs", verbs_file, "Verb lexicon")->check(CLI::ExistingFile);
  textsim_encode->add_option("--stopwords", stopwords_file, "Stopword lexicon")->check(CLI::ExistingFile);
  textsim_encode->add_option("-o,--out", out, "Vector file");

  // index
  auto* index_cmd = app.add_subcommand("index", "Inverted indexes");
  index_cmd->require_subcommand(1);
  std::string vectors_file, index_file, video, visual_file, textual_file;
  double threshold = 0.7;
  auto* index_build = index_cmd->add_subcommand("build", "Build an index from a vector file");
  index_build->add_option("vectors", vectors_file, "Vector file")->required();
  index_build->add_option("-o,--out", out, "Index file (.fvix)")->required();
  auto* index_query = index_cmd->add_subcommand("query", "Top-k neighbours of an indexed video");
  index_query->add_option("--index", index_file, "Index file")->required();
  index_query->add_option("--video", video, "Query video id")->required();
  index_query->add_option("--k", k, "Result count")->check(CLI::PositiveNumber);
  auto* index_pairs = index_cmd->add_subcommand("pairs", "Pairs whose combined similarity exceeds a threshold");
  index_pairs->add_option("--threshold", threshold, "Similarity threshold")->check(CLI::Range(0.0, 1.0));
  index_pairs->add_option("--visual", visual_file, "Visual index");
  index_pairs->add_option("--textual", textual_file, "Textual index");
  index_pairs->add_option("-o,--out", out, "Output file");

  // selectq
  auto* selectq_cmd = app.add_subcommand("selectq", "Automatic query selection");
  selectq_cmd->require_subcommand(1);
  selectq::SelectionParams params;
  double span_days = 14.0;
  auto* selectq_run = selectq_cmd->add_subcommand("run", "Select queries from similarity-graph components");
  selectq_run->add_option("--catalog", videos_file, "Metadata TSV")->required();
  selectq_run->add_option("--visual", visual_file, "Visual index");
  selectq_run->add_option("--textual", textual_file, "Textual index");
  selectq_run->add_option("--ts", params.similarity_threshold, "Edge similarity threshold")->check(CLI::Range(0.0, 1.0));
  selectq_run->add_option("--tr", params.min_uploader_ratio, "Minimum uploader ratio")->check(CLI::Range(0.0, 1.0));
  selectq_run->add_option("--td", params.max_query_duration, "Query duration limit (s)")->check(CLI::PositiveNumber);
  selectq_run->add_option("--top", params.top, "Queries kept")->check(CLI::PositiveNumber);
  selectq_run->add_option("--span-days", span_days, "Publication span limit (days)")->check(CLI::NonNegativeNumber);
  selectq_run->add_option("-o,--out", out, "Manifest file");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic incident worlds");
  synth_cmd->require_subcommand(1);
  synth::WorldConfig world_config;
  world_config.videos = 200;
  std::string world_file;
  auto* synth_gen = synth_cmd->add_subcommand("gen", "Generate a world with planted query relations");
  synth_gen->add_option("--videos", world_config.videos, "Total videos (0: planted only)");
  synth_gen->add_option("--incidents", world_config.incidents, "Incidents (one query each)")->check(CLI::PositiveNumber);
  synth_gen->add_option("--viewpoints", world_config.viewpoints, "Viewpoints")->check(CLI::PositiveNumber);
  synth_gen->add_option("--seed", world_config.seed, "Seed");
  synth_gen->add_option("--nd", world_config.quota.nd, "ND videos per query");
  synth_gen->add_option("--ds", world_config.quota.ds, "DS videos per query");
  synth_gen->add_option("--cs", world_config.quota.cs, "CS videos per query");
  synth_gen->add_option("--is", world_config.quota.is, "IS videos per query");
  synth_gen->add_option("-o,--out", out, "World file");
  auto* synth_labels = synth_cmd->add_subcommand("labels", "Oracle label table of a world");
  synth_labels->add_option("world", world_file, "World file")->required();
  synth_labels->add_option("-o,--out", out, "Output file");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Retrieval evaluation");
  eval_cmd->require_subcommand(1);
  std::string task_name = "dsvr", method_name = "gv", labels_file, rankings_file;
  double sigma = 0.0;
  auto* eval_run = eval_cmd->add_subcommand("run", "mAP and interpolated PR for one task");
  eval_run->add_option("--task", task_name, "dsvr | csvr | isvr")->check(CLI::IsMember({"dsvr", "csvr", "isvr"}));
  eval_run->add_option("--method", method_name, "gv | bow | lbow | emb | hash")
      ->check(CLI::IsMember({"gv", "bow", "lbow", "emb", "hash"}));
  eval_run->add_option("--labels", labels_file, "Label table (query_id, video_id, label)");
  eval_run->add_option("--rankings", rankings_file, "Rankings (query_id, video_id, score)");
  eval_run->add_option("--seed", seed, "Synthetic seed when no rankings are given");
  eval_run->add_option("--sigma", sigma, "Synthetic descriptor noise")->check(CLI::NonNegativeNumber);
  eval_run->add_option("-o,--out", out, "Results file");

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "End-to-end runs");
  pipeline_cmd->require_subcommand(1);
  bool synthetic = false;
  std::string out_dir;
  auto* pipeline_run = pipeline_cmd->add_subcommand("run", "World -> descriptors -> indexes -> selection -> evaluation");
  pipeline_run->add_flag("--synthetic", synthetic, "Run on a generated world")->required();
  pipeline_run->add_option("--seed", seed, "Seed");
  pipeline_run->add_option("--sigma", sigma, "Descriptor noise")->check(CLI::NonNegativeNumber);
  pipeline_run->add_option("--method", method_name, "gv | bow | lbow | emb | hash")
      ->check(CLI::IsMember({"gv", "bow", "lbow", "emb", "hash"}));
  pipeline_run->add_option("--ts", params.similarity_threshold, "Edge similarity threshold")->check(CLI::Range(0.0, 1.0));
  pipeline_run->add_option("--out", out_dir, "Artifact directory");

  // serve
  std::string data_dir = env_or("FIVR_DATA_DIR", "data");
  int port = std::atoi(env_or("FIVR_PORT", "8080").c_str());
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Annotation HTTP service (/v1)");
  serve_cmd->add_option("--data-dir", data_dir, "Data directory (FIVR_DATA_DIR)");
  serve_cmd->add_option("--port", port, "Port (FIVR_PORT)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (ingest_events->parsed()) {
      auto events = ingest::parse_event_listing(read_file(events_file));
      if (retained_only) events = ingest::filter_events(events);
      emit(out, ingest::serialize_event_listing(events));
    } else if (ingest_videos->parsed()) {
      const auto catalog = ingest::load_catalog(videos_file);
      emit(out, ingest::serialize_catalog(catalog));
      std::cerr << catalog.size() << " videos\n";
    } else if (ingest_filter->parsed()) {
      const auto events = ingest::parse_event_listing(read_file(events_file));
      const auto it = std::find_if(events.begin(), events.end(), [&](auto& e) { return e.event_id == event_id; });
      if (it == events.end()) throw UsageError("no event with id '" + event_id + "'");
      const auto catalog = ingest::load_catalog(videos_file);
      emit(out, ingest::serialize_catalog(ingest::Catalog(ingest::filter_videos_for_event(catalog.records(), *it))));
    } else if (features_extract->parsed()) {
      features::ExtractOptions opts;
      opts.hsv = use_hsv || !use_lbp;
      opts.lbp = use_lbp || !use_hsv;
      if (fps > 0.0) opts.fps = fps;
      auto seq = features::extract_directory(frames_dir, opts);
      seq.video_id = std::filesystem::path(out).stem().string();
      features::write_descriptors(out, seq);
      std::cerr << seq.frame_count() << " frames\n";
    } else if (features_import->parsed()) {
      const auto seq = features::load_descriptors(descriptor_file);
      std::string text = "video_id\t" + seq.video_id + '\n';
      for (const auto& c : seq.channels)
        text += "channel\t" + c.name + '\t' + std::to_string(c.dim) + '\t' + std::to_string(c.count()) + '\n';
      emit("", text);
    } else if (vocab_train->parsed()) {
      std::vector<std::vector<float>> sample;
      for (const auto& f : descriptor_files) {
        const auto seq = features::load_descriptors(f);
        const auto* ch = seq.find(channel);
        if (!ch) throw DataError(f + ": no channel '" + channel + "'");
        for (std::size_t i = 0; i < ch->count(); ++i) sample.emplace_back(ch->frame(i).begin(), ch->frame(i).end());
      }
      const auto result = vocab::train_codebook(sample, k, seed, channel);
      vocab::write_codebook(out, result.codebook);
      std::cerr << "k-means: " << result.iterations << " iterations, objective "
                << format_real(result.objective.back()) << '\n';
    } else if (vocab_encode->parsed()) {
      std::vector<vocab::Codebook> codebooks;
      for (const auto& f : codebook_files) codebooks.push_back(vocab::load_codebook(f));
      std::vector<std::pair<VideoId, SparseVector>> counts;
      for (const auto& f : descriptor_files) {
        const auto seq = features::load_descriptors(f);
        features::DescriptorSequence used{seq.video_id, {}};
        for (const auto& cb : codebooks) used.channels.push_back(seq.channel(cb.channel_name));
        counts.emplace_back(seq.video_id, vocab::aggregate_bow(used, codebooks, m));
      }
      vocab::DocumentFrequencies dfs;
      for (const auto& [id, v] : counts) dfs.add_document(v);
      for (auto& [id, v] : counts) v = vocab::tf_idf(v, dfs);
      emit(out, vectors_text(counts));
    } else if (textsim_encode->parsed()) {
      const auto catalog = ingest::load_catalog(videos_file);
      const auto verbs = verbs_file.empty() ? textsim::Lexicon{} : textsim::load_lexicon(verbs_file);
      const auto stop = stopwords_file.empty() ? textsim::default_stopwords() : textsim::load_lexicon(stopwords_file);
      emit(out, vectors_text(pipeline::text_corpus(catalog, verbs, stop).vectors));
    } else if (index_build->parsed()) {
      const auto ix = index::InvertedIndex::build(load_vectors(vectors_file));
      index::write_index(out, ix);
      std::cerr << ix.n_docs() << " documents, " << ix.vocab_size() << " terms\n";
    } else if (index_query->parsed()) {
      const auto ix = index::load_index(index_file);
      const auto ord = ix.ordinal(video);
      if (!ord) throw UsageError("video '" + video + "' is not indexed");
      std::string text;
      for (const auto& sv : ix.query_top_k(ix.vector(*ord), k, video))
        text += sv.video_id + '\t' + format_real(sv.score) + '\n';
      emit("", text);
    } else if (index_pairs->parsed()) {
      const auto vis = maybe_index(visual_file);
      const auto txt = maybe_index(textual_file);
      if (!vis && !txt) throw UsageError("index pairs needs --visual and/or --textual");
      const auto pairs = index::all_pairs_edges(vis ? &*vis : nullptr, txt ? &*txt : nullptr, threshold);
      std::string text = "a\tb\tscore\tvisual\ttextual\n";
      for (const auto& e : pairs.edges)
        text += e.a + '\t' + e.b + '\t' + format_real(e.score) + '\t' + format_real(e.visual) + '\t' +
                format_real(e.textual) + '\n';
      emit(out, text);
      std::cerr << pairs.candidate_pairs << " candidate pairs of " << pairs.videos << " videos\n";
    } else if (selectq_run->parsed()) {
      const auto catalog = ingest::load_catalog(videos_file);
      const auto vis = maybe_index(visual_file);
      const auto txt = maybe_index(textual_file);
      params.max_span = static_cast<Timestamp>(span_days * kSecondsPerDay);
      const auto report = selectq::select_queries(catalog, vis ? &*vis : nullptr, txt ? &*txt : nullptr, params);
      emit(out, selectq::format_manifest(report.queries));
      std::cerr << report.edges << " edges, " << report.components << " components, " << report.components_kept
                << " kept, " << report.queries.size() << " queries\n";
    } else if (synth_gen->parsed()) {
      emit(out, synth::format_world(synth::generate_world(world_config)));
    } else if (synth_labels->parsed()) {
      emit(out, synth::format_labels(synth::ground_truth(synth::parse_world(read_file(world_file)))));
    } else if (eval_run->parsed()) {
      const auto task = *evalkit::parse_task(task_name);
      std::map<VideoId, std::vector<VideoId>> rankings;
      evalkit::GroundTruth gt;
      if (!rankings_file.empty() || !labels_file.empty()) {
        if (rankings_file.empty() || labels_file.empty()) throw UsageError("--rankings and --labels go together");
        for (const auto& [q, r] : pipeline::parse_rankings(read_file(rankings_file)))
          for (const auto& sv : r) rankings[q].push_back(sv.video_id);
        gt = evalkit::ground_truth_from(synth::parse_labels(read_file(labels_file)));
      } else {
        auto config = pipeline::synthetic_config(seed);
        config.method = *pipeline::parse_method(method_name);
        config.render.sigma = sigma;
        const auto report = pipeline::run_synthetic(config);
        for (const auto& [q, r] : report.rankings)
          for (const auto& sv : r) rankings[q].push_back(sv.video_id);
        gt = evalkit::ground_truth_from(report.labels);
      }
      const auto result = evalkit::mean_average_precision(rankings, gt, task);
      emit(out, evalkit::format_results(result, method_name));
    } else if (pipeline_run->parsed()) {
      auto config = pipeline::synthetic_config(seed);
      config.method = *pipeline::parse_method(method_name);
      config.render.sigma = sigma;
      config.selection = params;
      const auto report = pipeline::run_synthetic(config);
      if (!out_dir.empty()) pipeline::write_artifacts(report, out_dir);
      std::cout << pipeline::format_summary(report);
    } else if (serve_cmd->parsed()) {
      service::ServiceConfig config;
      config.data_dir = data_dir;
      service::Service svc(config);
      httplib::Server server;
      service::mount(server, svc);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      if (!server.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "serving " << data_dir << " on " << host << ':' << port << '\n';
      server.listen_after_bind();
      svc.write_snapshot();
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
