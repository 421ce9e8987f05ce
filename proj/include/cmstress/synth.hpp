#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmstress/corpus.hpp"
#include "cmstress/errors.hpp"
#include "cmstress/rng.hpp"

namespace cmstress {

// Recipe for a deterministic synthetic corpus. The real shared-task data
// cannot be redistributed, so tests and demos run on generated corpora
// whose difficulty is controlled by noise_rate.
struct SynthSpec {
  std::array<std::uint64_t, kNumLabels> n_per_label{};
  std::array<std::vector<std::string>, kNumLabels> marker_tokens;
  std::vector<std::string> shared_vocab;
  std::uint32_t doc_len_min = 3;
  std::uint32_t doc_len_max = 12;
  double noise_rate = 0.0;  // probability a marker is replaced by a shared token
  std::uint64_t seed = 0;
};

inline void validate(const SynthSpec& spec) {
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) {
    throw InvalidSpecError("noise_rate must be in [0, 1]");
  }
  if (spec.doc_len_min < 1 || spec.doc_len_min > spec.doc_len_max) {
    throw InvalidSpecError("doc_len bounds must satisfy 1 <= min <= max");
  }
  if (spec.shared_vocab.empty()) {
    throw InvalidSpecError("shared_vocab must not be empty");
  }
  for (Label label : kAllLabels) {
    const auto li = label_index(label);
    if (spec.n_per_label[li] > 0 && spec.marker_tokens[li].empty()) {
      throw InvalidSpecError("marker_tokens empty for label \"" +
                             std::string(to_string(label)) + "\"");
    }
  }
  for (const auto& m0 : spec.marker_tokens[0]) {
    for (const auto& m1 : spec.marker_tokens[1]) {
      if (m0 == m1) {
        throw InvalidSpecError("marker token \"" + m0 + "\" appears for both labels");
      }
    }
  }
}

// Deterministic in the spec, seed included. Each document of label L has
// one designated slot filled from L's marker list; with probability
// noise_rate that marker is then replaced by a shared token, which is the
// only way a document ends up without a marker. Every other slot draws
// from shared_vocab. Documents are emitted in canonical label order.
//
// Draw order per document is pinned (length, marker slot, one draw per
// slot, then the noise coin and optional replacement), so the output is a
// pure function of the spec.
inline LabeledCorpus generate_synthetic(const SynthSpec& spec) {
  validate(spec);
  SplitMix64 rng(spec.seed);
  LabeledCorpus corpus;
  corpus.split_name = "synthetic";
  corpus.language_tag = "synthetic";
  const auto shared_count = spec.shared_vocab.size();
  for (Label label : kAllLabels) {
    const auto li = label_index(label);
    const auto& markers = spec.marker_tokens[li];
    for (std::uint64_t d = 0; d < spec.n_per_label[li]; ++d) {
      const std::uint32_t len =
          spec.doc_len_min +
          static_cast<std::uint32_t>(rng.next_below(spec.doc_len_max - spec.doc_len_min + 1));
      const std::size_t marker_slot = static_cast<std::size_t>(rng.next_below(len));
      std::vector<const std::string*> tokens(len);
      for (std::size_t pos = 0; pos < len; ++pos) {
        if (pos == marker_slot) {
          tokens[pos] = &markers[rng.next_below(markers.size())];
        } else {
          tokens[pos] = &spec.shared_vocab[rng.next_below(shared_count)];
        }
      }
      if (spec.noise_rate > 0.0 && rng.next_unit() < spec.noise_rate) {
        tokens[marker_slot] = &spec.shared_vocab[rng.next_below(shared_count)];
      }
      std::string text;
      for (std::size_t pos = 0; pos < len; ++pos) {
        if (pos > 0) text += ' ';
        text += *tokens[pos];
      }
      corpus.docs.push_back({std::move(text), label});
    }
  }
  return corpus;
}

// Generator spec document:
// {"n_per_label": {"Non stressed": N, "stressed": M},
//  "marker_tokens": {"Non stressed": [...], "stressed": [...]},
//  "shared_vocab": [...], "doc_len": [min, max],
//  "noise_rate": p, "seed": s}
inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  try {
    for (const auto& [key, value] : j.at("n_per_label").items()) {
      spec.n_per_label[label_index(normalize_label(key))] = value.get<std::uint64_t>();
    }
    for (const auto& [key, value] : j.at("marker_tokens").items()) {
      spec.marker_tokens[label_index(normalize_label(key))] =
          value.get<std::vector<std::string>>();
    }
    spec.shared_vocab = j.at("shared_vocab").get<std::vector<std::string>>();
    if (j.contains("doc_len")) {
      const auto len = j.at("doc_len").get<std::array<std::int64_t, 2>>();
      if (len[0] < 1 || len[1] < len[0]) {
        throw InvalidSpecError("doc_len must be [min, max] with 1 <= min <= max");
      }
      spec.doc_len_min = static_cast<std::uint32_t>(len[0]);
      spec.doc_len_max = static_cast<std::uint32_t>(len[1]);
    }
    spec.noise_rate = j.value("noise_rate", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpecError("malformed generator spec: " + std::string(e.what()));
  }
  validate(spec);
  return spec;
}

}  // namespace cmstress
