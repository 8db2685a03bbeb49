#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fivr/core.hpp"

namespace fivr {

using TermId = std::uint32_t;

// Sorted (term, weight) pairs with no explicit zeros and a cached L2 norm.
class SparseVector {
 public:
  using Entry = std::pair<TermId, double>;

  SparseVector() = default;

  // Accepts entries in any order; duplicate terms are summed, zeros dropped.
  explicit SparseVector(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (const auto& e : entries) {
      if (!std::isfinite(e.second)) throw std::invalid_argument("SparseVector: non-finite weight");
      if (!entries_.empty() && entries_.back().first == e.first)
        entries_.back().second += e.second;
      else
        entries_.push_back(e);
    }
    std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
    recompute_norm();
  }

  static SparseVector from_counts(const std::map<TermId, double>& counts) {
    return SparseVector(std::vector<Entry>(counts.begin(), counts.end()));
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double norm() const noexcept { return norm_; }

  double weight(TermId t) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                               [](const Entry& e, TermId id) { return e.first < id; });
    return it != entries_.end() && it->first == t ? it->second : 0.0;
  }

  double total() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.second;
    return s;
  }

  SparseVector normalized() const {
    SparseVector out;
    if (norm_ == 0.0) return out;
    out.entries_.reserve(entries_.size());
    for (const auto& [t, w] : entries_) out.entries_.emplace_back(t, w / norm_);
    out.recompute_norm();
    return out;
  }

  bool operator==(const SparseVector& o) const { return entries_ == o.entries_; }

 private:
  void recompute_norm() {
    double s = 0.0;
    for (const auto& e : entries_) s += e.second * e.second;
    norm_ = std::sqrt(s);
  }

  std::vector<Entry> entries_;
  double norm_ = 0.0;
};

// Sum of products over shared terms, accumulated in ascending term order.
inline double dot(const SparseVector& a, const SparseVector& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first < y[j].first)
      ++i;
    else if (y[j].first < x[i].first)
      ++j;
    else
      s += x[i++].second * y[j++].second;
  }
  return s;
}

// Text form: "<id>\t<term>:<weight> <term>:<weight> ..." per line.
inline std::string format_sparse_line(const std::string& id, const SparseVector& v) {
  std::string out = id + '\t';
  bool first = true;
  for (const auto& [t, w] : v.entries()) {
    if (!first) out += ' ';
    first = false;
    out += std::to_string(t) + ':' + format_real(w);
  }
  return out;
}

inline std::vector<std::pair<std::string, SparseVector>> parse_sparse_lines(std::string_view text) {
  std::vector<std::pair<std::string, SparseVector>> out;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string_view::npos) throw ParseError(i + 1, "expected '<id>\\t<entries>'");
    std::vector<SparseVector::Entry> entries;
    const auto body = trim(lines[i].substr(tab + 1));
    if (!body.empty()) {
      for (auto tok : split(body, ' ')) {
        if (tok.empty()) continue;
        const auto colon = tok.find(':');
        auto term = colon == std::string_view::npos ? std::nullopt : parse_int(tok.substr(0, colon));
        auto w = colon == std::string_view::npos ? std::nullopt : parse_real(tok.substr(colon + 1));
        if (!term || !w || *term < 0) throw ParseError(i + 1, "bad entry '" + std::string(tok) + "'");
        entries.emplace_back(static_cast<TermId>(*term), *w);
      }
    }
    out.emplace_back(std::string(lines[i].substr(0, tab)), SparseVector(std::move(entries)));
  }
  return out;
}

}  // namespace fivr
