#pragma once

// Title normalisation into lemma tokens and textual tf-idf vectors.
//
// Part-of-speech tagging is approximated by a verb lexicon and lemmatisation
// by suffix rules; both lexicons are plain word lists so they can be swapped
// for richer data without code changes.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fivr/core.hpp"
#include "fivr/sparse.hpp"
#include "fivr/vocab.hpp"

namespace fivr::textsim {

using Lexicon = std::unordered_set<std::string>;

struct TokenList {
  VideoId video_id;
  std::vector<std::string> tokens;

  bool operator==(const TokenList&) const = default;
};

inline const Lexicon& default_stopwords() {
  static const Lexicon kWords{
      "a",     "about", "above", "after",  "again", "against", "all",   "am",    "an",    "and",   "any",
      "are",   "as",    "at",    "be",     "been",  "before",  "being", "below", "between", "both", "but",
      "by",    "can",   "could", "did",    "do",    "does",    "doing", "down",  "during", "each", "few",
      "for",   "from",  "further", "had",  "has",   "have",    "having", "he",   "her",   "here",  "hers",
      "him",   "his",   "how",   "i",      "if",    "in",      "into",  "is",    "it",    "its",   "just",
      "me",    "more",  "most",  "my",     "no",    "nor",     "not",   "now",   "of",    "off",   "on",
      "once",  "only",  "or",    "other",  "our",   "ours",    "out",   "over",  "own",   "same",  "she",
      "should", "so",   "some",  "such",   "than",  "that",    "the",   "their", "theirs", "them", "then",
      "there", "these", "they",  "this",   "those", "through", "to",    "too",   "under", "until", "up",
      "very",  "was",   "we",    "were",   "what",  "when",    "where", "which", "while", "who",   "whom",
      "why",   "will",  "with",  "would",  "you",   "your",    "yours", "s",     "t",     "vs",    "via"};
  return kWords;
}

// One word per line; blank lines and '#' comments skipped; words lowercased.
inline Lexicon parse_lexicon(std::string_view text) {
  Lexicon out;
  for (auto line : lines_of(text)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::string w(line);
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.insert(std::move(w));
  }
  return out;
}

inline Lexicon load_lexicon(const std::string& path) { return parse_lexicon(read_file(path)); }

namespace detail {

inline std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xe ? 3 : (b >> 3) == 0x1e ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1f) : len == 3 ? (b & 0x0f) : (b & 0x07);
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xc0) != 0x80) ok = false;
      cp = (cp << 6) | (c & 0x3f);
    }
    if (!ok) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xc0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xe0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else {
    out += static_cast<char>(0xf0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  }
}

// Compatibility folding for Latin-1 Supplement and Latin Extended-A letters:
// strips diacritics and lowercases. Returns an ASCII string for foldable code
// points, empty otherwise.
inline std::string_view fold_latin(char32_t cp) {
  static constexpr std::string_view kLatin1[] = {
      // U+00C0 .. U+00FF
      "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
      "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "ss",
      "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
      "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y"};
  // U+0100 .. U+017F; '#' marks the ligatures handled separately.
  static constexpr std::string_view kExtA =
      "aaaaaaccccccccddddeeeeeeeeeegggggggghhhhiiiiiiiiii##jjkkklllllll"
      "lllnnnnnnnnnoooooo##rrrrrrssssssssttttttuuuuuuuuuuuuwwyyyzzzzzzs";
  if (cp >= 0xC0 && cp <= 0xFF) return kLatin1[cp - 0xC0];
  if (cp >= 0x100 && cp <= 0x17F) {
    const std::size_t i = cp - 0x100;
    if (cp == 0x132 || cp == 0x133) return "ij";
    if (cp == 0x152 || cp == 0x153) return "oe";
    if (i < kExtA.size()) return kExtA.substr(i, 1);
  }
  return {};
}

// Simple lowercase mapping for Greek and Cyrillic capitals.
inline char32_t lower_other(char32_t cp) {
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

inline bool is_separator(char32_t cp) {
  if (cp < 0x80) return !std::isalnum(static_cast<int>(cp));
  if (cp <= 0xBF) return true;                       // Latin-1 punctuation and symbols
  if (cp == 0xD7 || cp == 0xF7) return true;         // multiplication / division signs
  if (cp >= 0x2000 && cp <= 0x2BFF) return true;     // punctuation, symbols, arrows
  if (cp >= 0x3000 && cp <= 0x303F) return true;     // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return true;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return true;
  if (cp == 0xFFFD) return true;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return true;   // emoji
  return false;
}

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

// One application of the suffix rules.
inline std::string strip_once(const std::string& w) {
  auto undouble = [](std::string stem) {
    const auto n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z')
      stem.pop_back();
    return stem;
  };
  auto has_vowel = [](std::string_view s) {
    for (char c : s)
      if (is_vowel(c) || c == 'y') return true;
    return false;
  };
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if ((ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") || ends_with(w, "zes")) && w.size() > 4)
    return w.substr(0, w.size() - 2);
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is") && w.size() > 3)
    return w.substr(0, w.size() - 1);
  if (ends_with(w, "ing") && w.size() >= 6 && has_vowel(w.substr(0, w.size() - 3)))
    return undouble(w.substr(0, w.size() - 3));
  if (ends_with(w, "ed") && w.size() >= 5 && has_vowel(w.substr(0, w.size() - 2)))
    return undouble(w.substr(0, w.size() - 2));
  return w;
}

}  // namespace detail

// Suffix-stripping lemmatiser applied to a fixpoint, so lemmatize(lemmatize(w))
// == lemmatize(w). Only pure-ASCII-letter words are rewritten.
inline std::string lemmatize(std::string word) {
  static const std::unordered_set<std::string_view> kInvariant{"news", "series", "species", "chaos", "gas",
                                                               "texas", "lens", "physics", "politics"};
  if (kInvariant.contains(word)) return word;
  for (char c : word)
    if (c < 'a' || c > 'z') return word;
  for (;;) {
    auto next = detail::strip_once(word);
    if (next == word) return word;
    word = std::move(next);
  }
}

// Folds diacritics, lowercases and splits on anything that is not a letter
// or digit.
inline std::vector<std::string> tokenize(std::string_view title) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char32_t cp : detail::decode_utf8(title)) {
    if (cp < 0x80) {
      if (detail::is_separator(cp)) {
        flush();
      } else {
        current += static_cast<char>(std::tolower(static_cast<int>(cp)));
      }
      continue;
    }
    if (auto folded = detail::fold_latin(cp); !folded.empty()) {
      current += folded;
    } else if (detail::is_separator(cp)) {
      flush();
    } else {
      detail::append_utf8(current, detail::lower_other(cp));
    }
  }
  flush();
  return out;
}

// normalise -> lowercase -> split -> drop stopwords -> drop verbs -> lemmatise.
// A token is also dropped when its lemma is a stopword or verb, which keeps
// the pipeline idempotent on its own output.
inline TokenList preprocess_title(std::string_view title, const Lexicon& verbs, const Lexicon& stopwords,
                                  VideoId video_id = {}) {
  TokenList out{std::move(video_id), {}};
  for (auto& tok : tokenize(title)) {
    if (stopwords.contains(tok)) continue;
    if (verbs.contains(tok)) continue;
    auto lemma = lemmatize(tok);
    if (stopwords.contains(lemma) || verbs.contains(lemma)) continue;
    out.tokens.push_back(std::move(lemma));
  }
  return out;
}

// Lemma -> term id. Ids are allocated densely in first-seen order.
class TermDictionary {
 public:
  TermId intern(const std::string& lemma) {
    auto [it, inserted] = ids_.emplace(lemma, static_cast<TermId>(terms_.size()));
    if (inserted) terms_.push_back(lemma);
    return it->second;
  }
  std::optional<TermId> lookup(const std::string& lemma) const {
    auto it = ids_.find(lemma);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::unordered_map<std::string, TermId> ids_;
  std::vector<std::string> terms_;
};

// Raw term counts. With `allocate`, unseen lemmas get fresh ids (corpus
// build); otherwise they are dropped (query time).
inline SparseVector term_counts(const TokenList& tokens, TermDictionary& dictionary, bool allocate) {
  std::map<TermId, double> counts;
  for (const auto& t : tokens.tokens) {
    if (allocate) {
      counts[dictionary.intern(t)] += 1.0;
    } else if (auto id = dictionary.lookup(t)) {
      counts[*id] += 1.0;
    }
  }
  return SparseVector::from_counts(counts);
}

inline SparseVector text_vector(const TokenList& tokens, const TermDictionary& dictionary,
                                const vocab::DocumentFrequencies& dfs) {
  std::map<TermId, double> counts;
  for (const auto& t : tokens.tokens)
    if (auto id = dictionary.lookup(t)) counts[*id] += 1.0;
  return vocab::tf_idf(SparseVector::from_counts(counts), dfs);
}

struct TextCorpus {
  TermDictionary dictionary;
  vocab::DocumentFrequencies dfs;
  std::vector<std::pair<VideoId, SparseVector>> vectors;  // input order
};

// Builds the dictionary and document frequencies over all titles, then the
// tf-idf vector of each.
inline TextCorpus encode_corpus(const std::vector<TokenList>& docs) {
  TextCorpus corpus;
  std::vector<SparseVector> counts;
  counts.reserve(docs.size());
  for (const auto& d : docs) {
    counts.push_back(term_counts(d, corpus.dictionary, true));
    corpus.dfs.add_document(counts.back());
  }
  for (std::size_t i = 0; i < docs.size(); ++i)
    corpus.vectors.emplace_back(docs[i].video_id,
                                corpus.dfs.n_docs ? vocab::tf_idf(counts[i], corpus.dfs) : SparseVector{});
  return corpus;
}

}  // namespace fivr::textsim
