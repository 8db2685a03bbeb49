#pragma once

// Similarity kernels and retrieval structures: sparse cosine through an
// inverted index, dense global vectors, embedding distance, random-hyperplane
// hash codes with Hamming similarity, and posting-driven all-pairs edges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/features.hpp"
#include "fivr/sparse.hpp"

namespace fivr::index {

struct ScoredVideo {
  VideoId video_id;
  double score = 0.0;

  bool operator==(const ScoredVideo&) const = default;
};

// Score descending, then video id ascending.
inline bool ranks_before(const ScoredVideo& a, const ScoredVideo& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.video_id < b.video_id;
}

inline void sort_ranking(std::vector<ScoredVideo>& r) { std::sort(r.begin(), r.end(), ranks_before); }

// Dot product of two unit vectors, clamped to [0, 1]. Empty vectors score 0.
inline double cosine(const SparseVector& a, const SparseVector& b) { return std::clamp(dot(a, b), 0.0, 1.0); }

// ---------------------------------------------------------------------------
// Dense vectors

using DenseVector = std::vector<double>;

enum class DenseMetric { kDot, kEuclidean };

// Mean of the channel's frame vectors, L2-normalised.
inline DenseVector global_vector(const features::Channel& channel) {
  if (channel.count() == 0) throw std::invalid_argument("global vector of empty channel '" + channel.name + "'");
  DenseVector mean(channel.dim, 0.0);
  for (std::size_t f = 0; f < channel.count(); ++f) {
    auto v = channel.frame(f);
    for (std::size_t d = 0; d < channel.dim; ++d) mean[d] += v[d];
  }
  double norm = 0.0;
  for (auto& x : mean) {
    x /= static_cast<double>(channel.count());
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) throw std::invalid_argument("global vector of channel '" + channel.name + "' has zero norm");
  for (auto& x : mean) x /= norm;
  return mean;
}

inline DenseVector global_vector(const features::DescriptorSequence& seq, std::string_view channel) {
  return global_vector(seq.channel(channel));
}

// kDot: a.b. kEuclidean: 1 / (1 + |a - b|), a monotone map of the distance.
inline double dense_similarity(std::span<const double> a, std::span<const double> b, DenseMetric metric) {
  if (a.size() != b.size()) throw std::invalid_argument("dense similarity: dimension mismatch");
  double s = 0.0;
  if (metric == DenseMetric::kDot) {
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return 1.0 / (1.0 + std::sqrt(s));
}

// ---------------------------------------------------------------------------
// Hash codes
//
// Random-hyperplane family over mean-centred frames. Stands in for learned
// multi-feature hashing behind the same encode / Hamming interface.

struct HashFamily {
  DenseVector mean;
  std::vector<DenseVector> projections;
  std::size_t bits = 0;
  std::uint64_t seed = 0;

  bool operator==(const HashFamily&) const = default;
};

struct VideoCode {
  VideoId video_id;
  std::vector<bool> bits;

  bool operator==(const VideoCode&) const = default;
};

inline HashFamily train_hash_family(std::span<const std::vector<float>> sample, std::size_t bits, std::uint64_t seed) {
  if (sample.empty()) throw std::invalid_argument("hash family needs a non-empty sample");
  if (bits == 0) throw std::invalid_argument("hash family needs at least one bit");
  const std::size_t dim = sample.front().size();
  HashFamily fam;
  fam.bits = bits;
  fam.seed = seed;
  fam.mean.assign(dim, 0.0);
  for (const auto& v : sample) {
    if (v.size() != dim) throw std::invalid_argument("hash family: non-uniform sample dimensions");
    for (std::size_t d = 0; d < dim; ++d) fam.mean[d] += v[d];
  }
  for (auto& m : fam.mean) m /= static_cast<double>(sample.size());
  Rng rng(seed);
  for (std::size_t b = 0; b < bits; ++b) {
    DenseVector dir(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : dir) {
        x = rng.normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : dir) x /= norm;
    fam.projections.push_back(std::move(dir));
  }
  return fam;
}

inline std::vector<bool> hash_frame(std::span<const float> frame, const HashFamily& fam) {
  if (frame.size() != fam.mean.size()) throw std::invalid_argument("hash: frame dimension mismatch");
  std::vector<bool> out(fam.bits);
  for (std::size_t b = 0; b < fam.bits; ++b) {
    double s = 0.0;
    for (std::size_t d = 0; d < frame.size(); ++d) s += (frame[d] - fam.mean[d]) * fam.projections[b][d];
    out[b] = s >= 0.0;
  }
  return out;
}

// Per-bit majority vote over frames; ties resolve to 1.
inline VideoCode encode_video(const features::Channel& channel, const HashFamily& fam, VideoId video_id = {}) {
  if (channel.count() == 0) throw std::invalid_argument("hash: empty frame sequence");
  std::vector<std::size_t> ones(fam.bits, 0);
  for (std::size_t f = 0; f < channel.count(); ++f) {
    auto code = hash_frame(channel.frame(f), fam);
    for (std::size_t b = 0; b < fam.bits; ++b) ones[b] += code[b];
  }
  VideoCode vc{std::move(video_id), std::vector<bool>(fam.bits)};
  for (std::size_t b = 0; b < fam.bits; ++b) vc.bits[b] = 2 * ones[b] >= channel.count();
  return vc;
}

inline VideoCode encode_video(const features::DescriptorSequence& seq, std::string_view channel,
                              const HashFamily& fam) {
  return encode_video(seq.channel(channel), fam, seq.video_id);
}

inline double hamming_similarity(const VideoCode& a, const VideoCode& b) {
  if (a.bits.size() != b.bits.size() || a.bits.empty())
    throw std::invalid_argument("hamming similarity: code length mismatch");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) diff += a.bits[i] != b.bits[i];
  return 1.0 - static_cast<double>(diff) / static_cast<double>(a.bits.size());
}

// ---------------------------------------------------------------------------
// Inverted index

struct Posting {
  std::uint32_t doc = 0;
  double weight = 0.0;

  bool operator==(const Posting&) const = default;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  // Documents keep their input order as ordinals. Vectors must be unit-norm
  // (or empty).
  static InvertedIndex build(const std::vector<std::pair<VideoId, SparseVector>>& docs) {
    InvertedIndex ix;
    std::unordered_map<VideoId, std::uint32_t> seen;
    for (const auto& [id, v] : docs) {
      if (!seen.emplace(id, static_cast<std::uint32_t>(ix.doc_ids_.size())).second)
        throw std::invalid_argument("duplicate video_id '" + id + "' in index build");
      if (!v.empty() && std::abs(v.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("index build: vector of '" + id + "' is not unit-normalised");
      ix.doc_ids_.push_back(id);
      for (const auto& [t, w] : v.entries()) {
        if (t >= ix.postings_.size()) ix.postings_.resize(std::size_t(t) + 1);
        ix.postings_[t].push_back({static_cast<std::uint32_t>(ix.doc_ids_.size() - 1), w});
      }
    }
    ix.finish();
    return ix;
  }

  std::size_t n_docs() const noexcept { return doc_ids_.size(); }
  std::size_t vocab_size() const noexcept { return postings_.size(); }
  const std::vector<VideoId>& doc_ids() const noexcept { return doc_ids_; }
  std::span<const Posting> postings(TermId t) const {
    return t < postings_.size() ? std::span<const Posting>(postings_[t]) : std::span<const Posting>{};
  }
  const SparseVector& vector(std::uint32_t doc) const { return forward_[doc]; }

  std::optional<std::uint32_t> ordinal(std::string_view id) const {
    auto it = ordinal_.find(std::string(id));
    if (it == ordinal_.end()) return std::nullopt;
    return it->second;
  }

  // Exact top-k by dot product with ties by ascending video id. Documents
  // sharing no term with q are not returned.
  std::vector<ScoredVideo> query_top_k(const SparseVector& q, std::size_t k,
                                       std::optional<std::string_view> exclude = std::nullopt) const {
    std::vector<double> acc(n_docs(), 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<char> hit(n_docs(), 0);
    for (const auto& [t, qw] : q.entries()) {
      for (const auto& p : postings(t)) {
        acc[p.doc] += qw * p.weight;
        if (!hit[p.doc]) {
          hit[p.doc] = 1;
          touched.push_back(p.doc);
        }
      }
    }
    std::vector<ScoredVideo> out;
    out.reserve(touched.size());
    for (auto d : touched)
      if (!exclude || doc_ids_[d] != *exclude) out.push_back({doc_ids_[d], acc[d]});
    const auto keep = std::min(k, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), ranks_before);
    out.resize(keep);
    return out;
  }

  bool operator==(const InvertedIndex& o) const { return doc_ids_ == o.doc_ids_ && postings_ == o.postings_; }

  // FVIX: magic, u16 version, u32 n_docs, u32 vocab size, doc ids
  // (u32 length + bytes), then per term u32 count + (u32 doc, f64 weight).
  std::string encode() const {
    ByteWriter w;
    w.put_raw("FVIX");
    w.put_u16(1);
    w.put_u32(static_cast<std::uint32_t>(n_docs()));
    w.put_u32(static_cast<std::uint32_t>(vocab_size()));
    for (const auto& id : doc_ids_) w.put_string(id);
    for (const auto& list : postings_) {
      w.put_u32(static_cast<std::uint32_t>(list.size()));
      for (const auto& p : list) {
        w.put_u32(p.doc);
        w.put_f64(p.weight);
      }
    }
    return w.take();
  }

  static InvertedIndex decode(std::string_view bytes) {
    ByteReader r(bytes);
    if (bytes.size() < 4 || r.get_raw(4) != "FVIX") throw DataError("index file: magic mismatch");
    if (auto v = r.get_u16(); v != 1) throw DataError("index file: unsupported version " + std::to_string(v));
    InvertedIndex ix;
    const auto n = r.get_u32();
    const auto vocab = r.get_u32();
    for (std::uint32_t i = 0; i < n; ++i) ix.doc_ids_.push_back(r.get_string());
    ix.postings_.resize(vocab);
    for (auto& list : ix.postings_) {
      const auto count = r.get_u32();
      if (std::uint64_t(count) * 12 > r.remaining()) throw DataError("index file: truncated postings");
      list.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        list[i].doc = r.get_u32();
        list[i].weight = r.get_f64();
        if (list[i].doc >= n) throw DataError("index file: posting references unknown document");
        if (i > 0 && list[i].doc <= list[i - 1].doc) throw DataError("index file: postings not sorted");
      }
    }
    if (!r.at_end()) throw DataError("index file: trailing bytes");
    std::unordered_map<VideoId, int> dup;
    for (const auto& id : ix.doc_ids_)
      if (++dup[id] > 1) throw DataError("index file: duplicate video id '" + id + "'");
    ix.finish();
    return ix;
  }

 private:
  void finish() {
    forward_.assign(doc_ids_.size(), {});
    std::vector<std::vector<SparseVector::Entry>> rows(doc_ids_.size());
    for (std::size_t t = 0; t < postings_.size(); ++t)
      for (const auto& p : postings_[t]) rows[p.doc].emplace_back(static_cast<TermId>(t), p.weight);
    for (std::size_t d = 0; d < rows.size(); ++d) forward_[d] = SparseVector(std::move(rows[d]));
    ordinal_.clear();
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) ordinal_.emplace(doc_ids_[d], static_cast<std::uint32_t>(d));
  }

  std::vector<VideoId> doc_ids_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<SparseVector> forward_;
  std::unordered_map<VideoId, std::uint32_t> ordinal_;
};

inline void write_index(const std::string& path, const InvertedIndex& ix) { write_file(path, ix.encode()); }
inline InvertedIndex load_index(const std::string& path) { return InvertedIndex::decode(read_file(path)); }

// ---------------------------------------------------------------------------
// All-pairs similarity edges

struct Edge {
  VideoId a;  // a < b
  VideoId b;
  double score = 0.0;
  double visual = 0.0;
  double textual = 0.0;

  bool operator==(const Edge&) const = default;
};

struct EdgeEnumeration {
  std::vector<Edge> edges;          // sorted by (a, b)
  std::size_t candidate_pairs = 0;  // distinct pairs sharing a term in either index
  std::size_t videos = 0;
};

// Pairs co-occurring in at least one posting list of either index, scored as
// the plain average of visual and textual cosine (a video absent from one
// index scores 0 there), kept when strictly above the threshold. With a
// single index the score is that index's cosine.
inline EdgeEnumeration all_pairs_edges(const InvertedIndex* visual, const InvertedIndex* textual, double threshold) {
  std::vector<VideoId> ids;
  for (const auto* ix : {visual, textual})
    if (ix) ids.insert(ids.end(), ix->doc_ids().begin(), ix->doc_ids().end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::unordered_map<VideoId, std::uint32_t> gid;
  for (std::size_t i = 0; i < ids.size(); ++i) gid.emplace(ids[i], static_cast<std::uint32_t>(i));

  struct PairScore {
    double visual = 0.0;
    double textual = 0.0;
  };
  std::unordered_map<std::uint64_t, PairScore> pairs;
  auto key = [](std::uint32_t x, std::uint32_t y) { return (std::uint64_t(x) << 32) | y; };

  auto accumulate = [&](const InvertedIndex& ix, bool is_visual) {
    std::vector<std::uint32_t> to_global(ix.n_docs());
    for (std::size_t d = 0; d < ix.n_docs(); ++d) to_global[d] = gid.at(ix.doc_ids()[d]);
    std::vector<double> acc(ix.n_docs(), 0.0);
    std::vector<char> hit(ix.n_docs(), 0);
    std::vector<std::uint32_t> touched;
    for (std::uint32_t d = 0; d < ix.n_docs(); ++d) {
      const auto gd = to_global[d];
      for (const auto& [t, w] : ix.vector(d).entries()) {
        for (const auto& p : ix.postings(t)) {
          if (to_global[p.doc] <= gd) continue;
          if (!hit[p.doc]) {
            hit[p.doc] = 1;
            touched.push_back(p.doc);
          }
          acc[p.doc] += w * p.weight;
        }
      }
      for (auto o : touched) {
        auto& ps = pairs[key(gd, to_global[o])];
        (is_visual ? ps.visual : ps.textual) = acc[o];
        acc[o] = 0.0;
        hit[o] = 0;
      }
      touched.clear();
    }
  };
  if (visual) accumulate(*visual, true);
  if (textual) accumulate(*textual, false);

  const double sides = (visual ? 1.0 : 0.0) + (textual ? 1.0 : 0.0);
  EdgeEnumeration out;
  out.videos = ids.size();
  out.candidate_pairs = pairs.size();
  for (const auto& [k, ps] : pairs) {
    const double combined = (ps.visual + ps.textual) / sides;
    if (combined > threshold)
      out.edges.push_back({ids[k >> 32], ids[k & 0xffffffffu], combined, ps.visual, ps.textual});
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  return out;
}

}  // namespace fivr::index
