#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cmstress/corpus.hpp"
#include "cmstress/errors.hpp"
#include "cmstress/hash.hpp"
#include "cmstress/utf8.hpp"

namespace cmstress {

enum class AnalyzerKind : std::uint8_t { kWord, kChar };
enum class WeightingScheme : std::uint8_t { kRawCount, kTfIdf };

inline std::string_view to_string(AnalyzerKind kind) {
  return kind == AnalyzerKind::kWord ? "word" : "char";
}

inline AnalyzerKind analyzer_from_string(std::string_view s) {
  if (s == "word") return AnalyzerKind::kWord;
  if (s == "char") return AnalyzerKind::kChar;
  throw InvalidParamsError("unknown analyzer \"" + std::string(s) + "\"");
}

inline std::string_view to_string(WeightingScheme scheme) {
  return scheme == WeightingScheme::kTfIdf ? "tfidf" : "count";
}

inline WeightingScheme weighting_from_string(std::string_view s) {
  if (s == "tfidf") return WeightingScheme::kTfIdf;
  if (s == "count") return WeightingScheme::kRawCount;
  throw InvalidParamsError("unknown weighting \"" + std::string(s) + "\"");
}

struct AnalyzerConfig {
  AnalyzerKind analyzer = AnalyzerKind::kWord;
  std::uint32_t ngram_min = 1;
  std::uint32_t ngram_max = 1;
  bool lowercase = true;
};

inline void validate(const AnalyzerConfig& config) {
  if (config.ngram_min < 1 || config.ngram_min > config.ngram_max) {
    throw InvalidParamsError("ngram range must satisfy 1 <= min <= max");
  }
}

// Tokens are maximal runs of two or more word characters (letters, digits,
// underscore); single-character tokens are dropped. See utf8::is_word_char
// for the classification above ASCII. Order preserved, no deduplication.
inline std::vector<std::string> tokenize_words(std::string_view text, bool lowercase = true) {
  std::vector<std::string> tokens;
  std::vector<char32_t> run;
  std::size_t i = 0;
  auto flush = [&] {
    if (run.size() >= 2) tokens.push_back(utf8::encode_range(run.data(), run.size()));
    run.clear();
  };
  while (i < text.size()) {
    char32_t cp = utf8::decode_next(text, i);
    if (utf8::is_word_char(cp)) {
      run.push_back(lowercase ? utf8::to_lower(cp) : cp);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

// All contiguous code-point substrings of length nmin..nmax over the raw
// text, whitespace and punctuation included (no padding). Grouped by
// length: every nmin-gram left to right, then every (nmin+1)-gram, etc.
inline std::vector<std::string> char_ngrams(std::string_view text, std::uint32_t nmin,
                                            std::uint32_t nmax, bool lowercase = true) {
  if (nmin < 1 || nmin > nmax) {
    throw InvalidParamsError("ngram range must satisfy 1 <= min <= max");
  }
  std::vector<char32_t> cps = utf8::decode(text);
  if (lowercase) {
    for (char32_t& cp : cps) cp = utf8::to_lower(cp);
  }
  const std::size_t len = cps.size();
  std::vector<std::string> grams;
  for (std::uint32_t n = nmin; n <= nmax; ++n) {
    if (len < n) break;
    for (std::size_t start = 0; start + n <= len; ++start) {
      grams.push_back(utf8::encode_range(cps.data() + start, n));
    }
  }
  return grams;
}

namespace detail {

// Word n-grams above length 1 join consecutive tokens with a space.
inline std::vector<std::string> word_ngrams(const std::vector<std::string>& tokens,
                                            std::uint32_t nmin, std::uint32_t nmax) {
  std::vector<std::string> grams;
  for (std::uint32_t n = nmin; n <= nmax; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      std::string gram = tokens[start];
      for (std::size_t k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[start + k];
      }
      grams.push_back(std::move(gram));
    }
  }
  return grams;
}

}  // namespace detail

inline std::vector<std::string> analyze(std::string_view text, const AnalyzerConfig& config) {
  if (config.analyzer == AnalyzerKind::kChar) {
    return char_ngrams(text, config.ngram_min, config.ngram_max, config.lowercase);
  }
  std::vector<std::string> tokens = tokenize_words(text, config.lowercase);
  if (config.ngram_min == 1 && config.ngram_max == 1) return tokens;
  return detail::word_ngrams(tokens, config.ngram_min, config.ngram_max);
}

// index -> weight pairs over a fixed dimension; entries strictly
// increasing by index, no explicit zeros.
struct SparseVector {
  std::uint32_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;

  double at(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return (it != entries.end() && it->first == index) ? it->second : 0.0;
  }

  double l2_norm() const {
    double sq = 0.0;
    for (const auto& [_, w] : entries) sq += w * w;
    return std::sqrt(sq);
  }
};

// Term -> index map with per-term document frequencies, fit on training
// data only. Indices are assigned in sorted term order (bytewise UTF-8),
// which makes vocabularies and serialized models byte-deterministic.
// Frozen after fit: transform never adds terms.
struct Vocabulary {
  AnalyzerConfig config;
  std::uint64_t n_docs = 0;
  std::vector<std::string> terms;          // index -> term, sorted
  std::vector<std::uint64_t> doc_freq;     // index -> df
  std::unordered_map<std::string, std::uint32_t> index;

  std::uint32_t dim() const { return static_cast<std::uint32_t>(terms.size()); }

  std::vector<std::string> analyze(std::string_view text) const {
    return cmstress::analyze(text, config);
  }

  // Binds a model file to the vocabulary it was trained with.
  std::uint64_t fingerprint() const {
    Fnv1a64 h;
    h.update(to_string(config.analyzer));
    h.update_u64(config.ngram_min);
    h.update_u64(config.ngram_max);
    h.update_u64(config.lowercase ? 1 : 0);
    h.update_u64(n_docs);
    h.update_u64(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      h.update(terms[i]);
      h.update_u64(doc_freq[i]);
    }
    return h.value;
  }
};

// Builds the vocabulary over every term appearing in at least one document
// (min document frequency 1, no cap, no stop words).
inline Vocabulary fit_vocabulary(const LabeledCorpus& corpus, const AnalyzerConfig& config) {
  validate(config);
  if (corpus.docs.empty()) {
    throw EmptyCorpusError("cannot fit a vocabulary on an empty corpus");
  }
  std::unordered_map<std::string, std::uint64_t> df;
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : corpus.docs) {
    const std::vector<std::string> terms = analyze(doc.text, config);
    seen.clear();
    for (const auto& term : terms) {
      if (seen.insert(term).second) ++df[term];
    }
  }
  Vocabulary vocab;
  vocab.config = config;
  vocab.n_docs = corpus.docs.size();
  vocab.terms.reserve(df.size());
  for (const auto& [term, _] : df) vocab.terms.push_back(term);
  std::sort(vocab.terms.begin(), vocab.terms.end());
  vocab.doc_freq.resize(vocab.terms.size());
  vocab.index.reserve(vocab.terms.size());
  for (std::uint32_t i = 0; i < vocab.terms.size(); ++i) {
    vocab.doc_freq[i] = df[vocab.terms[i]];
    vocab.index.emplace(vocab.terms[i], i);
  }
  return vocab;
}

// Smoothed inverse document frequency: ln((1 + n_docs) / (1 + df)) + 1.
// Equals 1 exactly for a term present in every document and is strictly
// decreasing in df.
inline double idf_weight(std::uint64_t df, std::uint64_t n_docs) {
  if (df < 1 || df > n_docs) {
    throw DomainError("idf_weight requires 1 <= df <= n_docs, got df=" + std::to_string(df) +
                      ", n_docs=" + std::to_string(n_docs));
  }
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

// RawCount: raw term frequencies of in-vocabulary terms. TfIdf: tf * idf,
// then the whole vector divided by its L2 norm (zero vectors stay zero).
// Out-of-vocabulary terms are ignored.
inline SparseVector vectorize(std::string_view text, const Vocabulary& vocab,
                              WeightingScheme weighting) {
  std::unordered_map<std::uint32_t, double> tf;
  for (const auto& term : vocab.analyze(text)) {
    auto it = vocab.index.find(term);
    if (it != vocab.index.end()) tf[it->second] += 1.0;
  }
  SparseVector vec;
  vec.dim = vocab.dim();
  vec.entries.assign(tf.begin(), tf.end());
  std::sort(vec.entries.begin(), vec.entries.end());
  if (weighting == WeightingScheme::kTfIdf) {
    for (auto& [index, weight] : vec.entries) {
      weight *= idf_weight(vocab.doc_freq[index], vocab.n_docs);
    }
    const double norm = vec.l2_norm();
    if (norm > 0.0) {
      for (auto& [index, weight] : vec.entries) weight /= norm;
    }
  }
  return vec;
}

// One vector per document, same order, uniform dimension.
inline std::vector<SparseVector> transform_corpus(const LabeledCorpus& corpus,
                                                  const Vocabulary& vocab,
                                                  WeightingScheme weighting) {
  std::vector<SparseVector> out;
  out.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    out.push_back(vectorize(doc.text, vocab, weighting));
  }
  return out;
}

inline std::vector<Label> corpus_labels(const LabeledCorpus& corpus) {
  std::vector<Label> labels;
  labels.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) labels.push_back(doc.label);
  return labels;
}

}  // namespace cmstress
