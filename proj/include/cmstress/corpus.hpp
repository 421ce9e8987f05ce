#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmstress/csv.hpp"
#include "cmstress/errors.hpp"

namespace cmstress {

// The two-label schema. Canonical order is lexicographic:
// "Non stressed" precedes "stressed".
enum class Label : std::uint8_t { kNonStressed = 0, kStressed = 1 };

inline constexpr std::size_t kNumLabels = 2;

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Non stressed", "stressed"};

inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kNonStressed, Label::kStressed};

inline std::string_view to_string(Label label) {
  return kLabelNames[static_cast<std::size_t>(label)];
}

inline std::size_t label_index(Label label) {
  return static_cast<std::size_t>(label);
}

// Trims surrounding whitespace and matches case-insensitively against the
// canonical labels ("non-stressed" is also accepted for label 0). Anything
// else is rejected: the schema is closed.
inline Label normalize_label(std::string_view raw) {
  static constexpr std::string_view kSpace = " \t\r\n\f\v";
  const std::size_t b = raw.find_first_not_of(kSpace);
  if (b != std::string_view::npos) {
    const std::size_t e = raw.find_last_not_of(kSpace);
    std::string s(raw.substr(b, e - b + 1));
    for (char& c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 0x20);
    }
    if (s == "stressed") return Label::kStressed;
    if (s == "non stressed" || s == "non-stressed") return Label::kNonStressed;
  }
  throw UnknownLabelError("unknown label: \"" + std::string(raw) + "\"");
}

struct LabeledDocument {
  std::string text;  // stored byte-for-byte as read, no cleaning of any kind
  Label label = Label::kNonStressed;
};

struct LabeledCorpus {
  std::vector<LabeledDocument> docs;
  std::string split_name;    // train | validation | test | ...
  std::string language_tag;  // free-form: "tamil", "telugu", "synthetic", ...

  std::size_t size() const { return docs.size(); }
};

struct ClassDistribution {
  std::array<std::uint64_t, kNumLabels> counts{};
  std::uint64_t total = 0;

  // max/min class count; infinite when a class is absent.
  double imbalance_ratio() const {
    const auto mx = std::max(counts[0], counts[1]);
    const auto mn = std::min(counts[0], counts[1]);
    if (mn == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(mx) / static_cast<double>(mn);
  }
};

// Column names in a corpus CSV; both can be overridden from the CLI.
struct CsvColumns {
  std::string text = "text";
  std::string label = "label";
};

namespace detail {

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                              std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

}  // namespace detail

// Loads a labeled corpus from a CSV file with a header row. Row order is
// preserved and text cells are kept exactly as written; only the label is
// normalized.
inline LabeledCorpus load_corpus(const std::filesystem::path& path,
                                 std::string split_name,
                                 const CsvColumns& columns = {},
                                 std::string language_tag = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw EmptyFileError(path.string() + ": file has no rows");
  }
  const auto text_idx = detail::find_column(row, columns.text);
  const auto label_idx = detail::find_column(row, columns.label);
  if (!text_idx || !label_idx) {
    throw MalformedHeaderError(path.string() + ": header must name columns \"" +
                               columns.text + "\" and \"" + columns.label + "\"");
  }
  const std::size_t width = row.size();
  LabeledCorpus corpus;
  corpus.split_name = std::move(split_name);
  corpus.language_tag = std::move(language_tag);
  std::size_t data_row = 0;
  while (reader.next(row)) {
    ++data_row;
    if (row.size() != width) {
      throw MalformedRowError(path.string() + ": data row " + std::to_string(data_row) +
                              " has " + std::to_string(row.size()) + " fields, expected " +
                              std::to_string(width));
    }
    Label label;
    try {
      label = normalize_label(row[*label_idx]);
    } catch (const UnknownLabelError&) {
      throw UnknownLabelError(path.string() + ": data row " + std::to_string(data_row) +
                              ": unknown label \"" + row[*label_idx] + "\"");
    }
    corpus.docs.push_back({std::move(row[*text_idx]), label});
  }
  if (corpus.docs.empty()) {
    throw EmptyFileError(path.string() + ": zero data rows");
  }
  return corpus;
}

// Loads just the text column, for prediction inputs. Unlike load_corpus an
// input with zero data rows (or no rows at all) yields an empty list.
inline std::vector<std::string> load_texts(const std::filesystem::path& path,
                                           std::string_view text_col = "text") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const auto text_idx = detail::find_column(row, text_col);
  if (!text_idx) {
    throw MalformedHeaderError(path.string() + ": header must name column \"" +
                               std::string(text_col) + "\"");
  }
  const std::size_t width = row.size();
  std::vector<std::string> texts;
  std::size_t data_row = 0;
  while (reader.next(row)) {
    ++data_row;
    if (row.size() != width) {
      throw MalformedRowError(path.string() + ": data row " + std::to_string(data_row) +
                              " has " + std::to_string(row.size()) + " fields, expected " +
                              std::to_string(width));
    }
    texts.push_back(std::move(row[*text_idx]));
  }
  return texts;
}

// Writes a corpus as CSV (header + one row per document), RFC 4180 quoting.
// load_corpus(write_corpus(c)) reproduces every (text, label) pair exactly.
inline void write_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path,
                         const CsvColumns& columns = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  csv::write_record(out, {columns.text, columns.label});
  for (const auto& doc : corpus.docs) {
    csv::write_record(out, {doc.text, std::string(to_string(doc.label))});
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

// Exact per-label counts plus the total.
inline ClassDistribution corpus_stats(const LabeledCorpus& corpus) {
  ClassDistribution dist;
  for (const auto& doc : corpus.docs) {
    ++dist.counts[label_index(doc.label)];
  }
  dist.total = corpus.docs.size();
  return dist;
}

}  // namespace cmstress
