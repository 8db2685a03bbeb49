#pragma once

// Visual vocabularies: k-means codebooks, nearest-word assignment, bag-of-words
// aggregation over one or more descriptor channels, and tf-idf weighting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/features.hpp"
#include "fivr/sparse.hpp"

namespace fivr::vocab {

struct Codebook {
  std::string channel_name;
  std::uint32_t dim = 0;
  std::vector<float> centroids;  // k * dim, row-major

  std::uint32_t k() const noexcept { return dim == 0 ? 0 : static_cast<std::uint32_t>(centroids.size() / dim); }
  std::span<const float> centroid(std::size_t i) const { return {centroids.data() + i * dim, dim}; }

  bool operator==(const Codebook&) const = default;
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double relative_tolerance = 1e-4;
};

struct KMeansResult {
  Codebook codebook;
  // Sum of squared distances after seeding, then after each Lloyd iteration.
  std::vector<double> objective;
  std::size_t iterations = 0;
};

namespace detail {

inline double squared_distance(std::span<const float> x, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = static_cast<double>(x[d]) - c[d];
    s += diff * diff;
  }
  return s;
}

inline double squared_distance(std::span<const float> x, std::span<const float> c) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = static_cast<double>(x[d]) - static_cast<double>(c[d]);
    s += diff * diff;
  }
  return s;
}

// Nearest centroid with ties to the lower index; returns the objective.
inline double assign_all(std::span<const std::vector<float>> sample, const std::vector<double>& centres,
                         std::size_t dim, std::vector<std::size_t>& labels) {
  const std::size_t k = centres.size() / dim;
  double objective = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(sample[i], std::span<const double>(centres.data() + c * dim, dim));
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    labels[i] = arg;
    objective += best;
  }
  return objective;
}

}  // namespace detail

// Lloyd's k-means with k-means++ seeding. Deterministic for a given seed;
// the objective never increases between iterations.
inline KMeansResult train_codebook(std::span<const std::vector<float>> sample, std::size_t k, std::uint64_t seed,
                                   std::string channel_name = {}, const KMeansOptions& opts = {}) {
  if (k == 0) throw std::invalid_argument("codebook size must be at least 1");
  if (sample.size() < k)
    throw std::invalid_argument("codebook training needs at least k=" + std::to_string(k) + " samples, got " +
                                std::to_string(sample.size()));
  const std::size_t dim = sample.front().size();
  if (dim == 0) throw std::invalid_argument("codebook training: zero-dimensional sample");
  for (const auto& v : sample)
    if (v.size() != dim) throw std::invalid_argument("codebook training: non-uniform sample dimensions");

  Rng rng(seed);
  std::vector<double> centres;
  centres.reserve(k * dim);
  auto add_centre = [&](std::size_t idx) {
    for (float f : sample[idx]) centres.push_back(f);
  };

  // k-means++ seeding.
  add_centre(rng.below(sample.size()));
  std::vector<double> nearest(sample.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const std::span<const double> last(centres.data() + (c - 1) * dim, dim);
    double total = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      nearest[i] = std::min(nearest[i], detail::squared_distance(sample[i], last));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = sample.size();
      for (std::size_t i = 0; i < sample.size(); ++i) {
        if (nearest[i] == 0.0) continue;
        acc += nearest[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Fewer distinct points than k: duplicate the first sample.
      pick = 0;
    }
    add_centre(pick);
  }

  std::vector<std::size_t> labels(sample.size());
  KMeansResult result;
  double objective = detail::assign_all(sample, centres, dim, labels);
  result.objective.push_back(objective);

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const auto c = labels[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += sample[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centre
      for (std::size_t d = 0; d < dim; ++d) centres[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
    }
    const auto previous_labels = labels;
    const double next = detail::assign_all(sample, centres, dim, labels);
    if (next > objective * (1.0 + 1e-12))
      throw std::logic_error("k-means objective increased: " + format_real(objective) + " -> " + format_real(next));
    result.objective.push_back(next);
    ++result.iterations;
    const bool converged = labels == previous_labels || objective - next <= opts.relative_tolerance * objective;
    objective = next;
    if (converged) break;
  }

  result.codebook.channel_name = std::move(channel_name);
  result.codebook.dim = static_cast<std::uint32_t>(dim);
  result.codebook.centroids.assign(centres.begin(), centres.end());
  return result;
}

// The m nearest centroids by Euclidean distance, nearest first, ties by index.
inline std::vector<TermId> assign_words(std::span<const float> descriptor, const Codebook& codebook, std::size_t m) {
  if (descriptor.size() != codebook.dim)
    throw std::invalid_argument("descriptor dimension " + std::to_string(descriptor.size()) +
                                " does not match codebook dimension " + std::to_string(codebook.dim));
  const std::size_t k = codebook.k();
  if (m < 1 || m > k) throw std::invalid_argument("m must be in [1, k]");
  std::vector<std::pair<double, TermId>> dist(k);
  for (std::size_t c = 0; c < k; ++c)
    dist[c] = {detail::squared_distance(descriptor, codebook.centroid(c)), static_cast<TermId>(c)};
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m), dist.end());
  std::vector<TermId> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = dist[i].second;
  return out;
}

inline const Codebook* find_codebook(std::span<const Codebook> codebooks, std::string_view channel) {
  for (const auto& cb : codebooks)
    if (cb.channel_name == channel) return &cb;
  return nullptr;
}

// Raw term counts. Term ids of channel c are offset by the sizes of the
// codebooks of channels 0..c-1, in the sequence's channel order.
inline SparseVector aggregate_bow(const features::DescriptorSequence& seq, std::span<const Codebook> codebooks,
                                  std::size_t m) {
  std::map<TermId, double> counts;
  TermId offset = 0;
  for (const auto& channel : seq.channels) {
    const Codebook* cb = find_codebook(codebooks, channel.name);
    if (!cb) throw std::invalid_argument("no codebook for channel '" + channel.name + "'");
    for (std::size_t f = 0; f < channel.count(); ++f)
      for (TermId w : assign_words(channel.frame(f), *cb, m)) counts[offset + w] += 1.0;
    offset += cb->k();
  }
  return SparseVector::from_counts(counts);
}

struct DocumentFrequencies {
  std::map<TermId, std::uint32_t> df;
  std::uint32_t n_docs = 0;

  void add_document(const SparseVector& v) {
    ++n_docs;
    for (const auto& e : v.entries()) ++df[e.first];
  }

  std::uint32_t frequency(TermId t) const {
    auto it = df.find(t);
    return it == df.end() ? n_docs : it->second;
  }

  template <typename Range>
  static DocumentFrequencies from(const Range& vectors) {
    DocumentFrequencies d;
    for (const auto& v : vectors) d.add_document(v);
    return d;
  }
};

// count * ln(n_docs / df), L2-normalised. Terms absent from the statistics
// count as present in every document and get weight 0.
inline SparseVector tf_idf(const SparseVector& counts, const DocumentFrequencies& dfs) {
  if (dfs.n_docs == 0) throw std::invalid_argument("tf-idf: document frequencies cover no documents");
  std::vector<SparseVector::Entry> weighted;
  weighted.reserve(counts.size());
  for (const auto& [t, c] : counts.entries()) {
    const double idf = std::log(static_cast<double>(dfs.n_docs) / static_cast<double>(dfs.frequency(t)));
    const double w = c * idf;
    if (w != 0.0) weighted.emplace_back(t, w);
  }
  return SparseVector(std::move(weighted)).normalized();
}

// ---------------------------------------------------------------------------
// FVCB codebook file: magic, u32 k, u32 dim, u16 name length + name, f32 payload.

inline constexpr std::string_view kCodebookMagic = "FVCB";

inline std::string encode_codebook(const Codebook& cb) {
  ByteWriter w;
  w.put_raw(kCodebookMagic);
  w.put_u32(cb.k());
  w.put_u32(cb.dim);
  w.put_u16(static_cast<std::uint16_t>(cb.channel_name.size()));
  w.put_raw(cb.channel_name);
  for (float f : cb.centroids) w.put_f32(f);
  return w.take();
}

inline Codebook decode_codebook(std::string_view bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.get_raw(4) != kCodebookMagic) throw DataError("codebook file: magic mismatch");
  const auto k = r.get_u32();
  Codebook cb;
  cb.dim = r.get_u32();
  cb.channel_name = std::string(r.get_raw(r.get_u16()));
  if (k == 0 || cb.dim == 0) throw DataError("codebook file: k and dim must be positive");
  if (std::uint64_t(k) * cb.dim * 4 != r.remaining()) throw DataError("codebook file: payload size mismatch");
  cb.centroids.resize(std::size_t(k) * cb.dim);
  for (auto& f : cb.centroids) {
    f = r.get_f32();
    if (!std::isfinite(f)) throw DataError("codebook file: non-finite centroid value");
  }
  return cb;
}

inline void write_codebook(const std::string& path, const Codebook& cb) { write_file(path, encode_codebook(cb)); }
inline Codebook load_codebook(const std::string& path) { return decode_codebook(read_file(path)); }

}  // namespace fivr::vocab
