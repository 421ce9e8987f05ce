#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmstress/errors.hpp"
#include "cmstress/features.hpp"
#include "cmstress/forest.hpp"
#include "cmstress/hash.hpp"

namespace cmstress {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

// nlohmann keeps object keys sorted and emits shortest round-trip decimals
// for doubles, so a dump of the same values is always the same bytes.
inline std::string dump_json(const nlohmann::json& j, int indent = -1) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace detail

inline nlohmann::json vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::uint32_t i = 0; i < vocab.dim(); ++i) {
    terms.push_back({{"term", vocab.terms[i]}, {"index", i}, {"df", vocab.doc_freq[i]}});
  }
  return {
      {"analyzer", to_string(vocab.config.analyzer)},
      {"ngram_min", vocab.config.ngram_min},
      {"ngram_max", vocab.config.ngram_max},
      {"lowercase", vocab.config.lowercase},
      {"n_docs", vocab.n_docs},
      {"terms", std::move(terms)},
  };
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  Vocabulary vocab;
  vocab.config.analyzer = analyzer_from_string(j.at("analyzer").get<std::string>());
  vocab.config.ngram_min = j.at("ngram_min").get<std::uint32_t>();
  vocab.config.ngram_max = j.at("ngram_max").get<std::uint32_t>();
  vocab.config.lowercase = j.at("lowercase").get<bool>();
  vocab.n_docs = j.at("n_docs").get<std::uint64_t>();
  const auto& terms = j.at("terms");
  vocab.terms.resize(terms.size());
  vocab.doc_freq.resize(terms.size());
  std::vector<bool> seen(terms.size(), false);
  for (const auto& entry : terms) {
    const auto index = entry.at("index").get<std::uint64_t>();
    if (index >= terms.size() || seen[index]) {
      throw CorruptModelError("vocabulary indices are not a bijection onto 0..V-1");
    }
    seen[index] = true;
    vocab.terms[index] = entry.at("term").get<std::string>();
    vocab.doc_freq[index] = entry.at("df").get<std::uint64_t>();
    if (vocab.doc_freq[index] < 1 || vocab.doc_freq[index] > vocab.n_docs) {
      throw CorruptModelError("vocabulary document frequency out of range");
    }
  }
  vocab.index.reserve(vocab.terms.size());
  for (std::uint32_t i = 0; i < vocab.terms.size(); ++i) {
    if (!vocab.index.emplace(vocab.terms[i], i).second) {
      throw CorruptModelError("duplicate vocabulary term \"" + vocab.terms[i] + "\"");
    }
  }
  return vocab;
}

inline nlohmann::json forest_params_to_json(const ForestParams& params) {
  nlohmann::json fps;
  switch (params.feature_rule) {
    case FeatureRule::kSqrt:
      fps = "sqrt";
      break;
    case FeatureRule::kAll:
      fps = "all";
      break;
    case FeatureRule::kFixed:
      fps = params.fixed_features;
      break;
  }
  return {
      {"n_trees", params.n_trees},
      {"max_depth", params.max_depth ? nlohmann::json(*params.max_depth) : nlohmann::json()},
      {"min_samples_split", params.min_samples_split},
      {"features_per_split", fps},
      {"bootstrap", params.bootstrap},
      {"seed", params.seed},
  };
}

inline ForestParams forest_params_from_json(const nlohmann::json& j) {
  ForestParams params;
  params.n_trees = j.at("n_trees").get<std::uint32_t>();
  if (!j.at("max_depth").is_null()) {
    params.max_depth = j.at("max_depth").get<std::uint32_t>();
  }
  params.min_samples_split = j.at("min_samples_split").get<std::uint32_t>();
  const auto& fps = j.at("features_per_split");
  if (fps.is_number()) {
    params.feature_rule = FeatureRule::kFixed;
    params.fixed_features = fps.get<std::uint32_t>();
  } else if (fps.get<std::string>() == "sqrt") {
    params.feature_rule = FeatureRule::kSqrt;
  } else if (fps.get<std::string>() == "all") {
    params.feature_rule = FeatureRule::kAll;
  } else {
    throw CorruptModelError("unknown features_per_split rule");
  }
  params.bootstrap = j.at("bootstrap").get<bool>();
  params.seed = j.at("seed").get<std::uint64_t>();
  return params;
}

inline nlohmann::json tree_to_json(const DecisionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : tree.nodes) {
    if (node.is_leaf) {
      nodes.push_back({{"type", "leaf"},
                       {"label", to_string(node.label)},
                       {"counts", node.counts}});
    } else {
      nodes.push_back({{"type", "internal"},
                       {"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right}});
    }
  }
  return nodes;
}

inline DecisionTree tree_from_json(const nlohmann::json& j, std::uint32_t n_features) {
  DecisionTree tree;
  tree.n_features = n_features;
  if (!j.is_array() || j.empty()) {
    throw CorruptModelError("tree must be a non-empty node array");
  }
  const std::size_t count = j.size();
  tree.nodes.reserve(count);
  std::size_t at = 0;
  for (const auto& nj : j) {
    TreeNode node;
    const auto type = nj.at("type").get<std::string>();
    if (type == "leaf") {
      node.is_leaf = true;
      node.counts = nj.at("counts").get<std::array<std::uint64_t, kNumLabels>>();
      node.label = normalize_label(nj.at("label").get<std::string>());
    } else if (type == "internal") {
      node.is_leaf = false;
      node.feature = nj.at("feature").get<std::uint32_t>();
      node.threshold = nj.at("threshold").get<double>();
      node.left = nj.at("left").get<std::int32_t>();
      node.right = nj.at("right").get<std::int32_t>();
      if (node.feature >= n_features) {
        throw CorruptModelError("tree references feature out of range");
      }
      // preorder: children always come after their parent
      const auto lo = static_cast<std::int64_t>(at) + 1;
      const auto hi = static_cast<std::int64_t>(count);
      if (node.left < lo || node.left >= hi || node.right < lo || node.right >= hi ||
          node.left == node.right) {
        throw CorruptModelError("tree child indices are not a preorder layout");
      }
    } else {
      throw CorruptModelError("unknown tree node type \"" + type + "\"");
    }
    tree.nodes.push_back(node);
    ++at;
  }
  return tree;
}

// The complete model document (without checksum).
inline nlohmann::json model_payload(const Forest& forest, const Vocabulary& vocab,
                                    WeightingScheme weighting) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : forest.trees) trees.push_back(tree_to_json(tree));
  nlohmann::json label_order = nlohmann::json::array();
  for (auto name : kLabelNames) label_order.push_back(std::string(name));
  return {
      {"format_version", kModelFormatVersion},
      {"weighting", to_string(weighting)},
      {"vocabulary", vocabulary_to_json(vocab)},
      {"label_order", std::move(label_order)},
      {"params", forest_params_to_json(forest.params)},
      {"trees", std::move(trees)},
  };
}

// Model file bytes: payload plus a checksum over the compact payload dump.
// Byte-deterministic for a fixed model.
inline std::string model_to_string(const Forest& forest, const Vocabulary& vocab,
                                   WeightingScheme weighting) {
  if (forest.n_features != vocab.dim()) {
    throw DimensionMismatchError("model dimension " + std::to_string(forest.n_features) +
                                 " does not match vocabulary size " +
                                 std::to_string(vocab.dim()));
  }
  nlohmann::json payload = model_payload(forest, vocab, weighting);
  const std::string body = detail::dump_json(payload);
  payload["checksum"] = "fnv1a64:" + to_hex(fnv1a64(body));
  return detail::dump_json(payload, 1) + "\n";
}

inline void save_model(const Forest& forest, const Vocabulary& vocab,
                       WeightingScheme weighting, const std::filesystem::path& path) {
  const std::string bytes = model_to_string(forest, vocab, weighting);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelIoError("cannot open " + path.string() + " for writing");
  out << bytes;
  out.flush();
  if (!out) throw ModelIoError("failed writing " + path.string());
}

struct LoadedModel {
  Forest forest;
  Vocabulary vocab;
  WeightingScheme weighting = WeightingScheme::kTfIdf;
};

inline LoadedModel load_model_from_string(const std::string& bytes, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModelError(origin + ": not a valid model file (" + e.what() + ")");
  }
  if (!j.is_object() || !j.contains("format_version") ||
      !j["format_version"].is_number_integer()) {
    throw CorruptModelError(origin + ": missing format_version");
  }
  const auto version = j["format_version"].get<std::int64_t>();
  if (version != kModelFormatVersion) {
    throw VersionMismatchError(origin + ": model format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(kModelFormatVersion) + ")");
  }
  if (!j.contains("checksum") || !j["checksum"].is_string()) {
    throw CorruptModelError(origin + ": missing checksum");
  }
  const std::string stored = j["checksum"].get<std::string>();
  j.erase("checksum");
  const std::string expected = "fnv1a64:" + to_hex(fnv1a64(detail::dump_json(j)));
  if (stored != expected) {
    throw CorruptModelError(origin + ": checksum mismatch");
  }

  LoadedModel model;
  try {
    model.weighting = weighting_from_string(j.at("weighting").get<std::string>());
    model.vocab = vocabulary_from_json(j.at("vocabulary"));
    const auto labels = j.at("label_order").get<std::vector<std::string>>();
    if (labels.size() != kNumLabels || labels[0] != kLabelNames[0] ||
        labels[1] != kLabelNames[1]) {
      throw CorruptModelError(origin + ": unexpected label_order");
    }
    model.forest.params = forest_params_from_json(j.at("params"));
    model.forest.n_features = model.vocab.dim();
    const auto& trees = j.at("trees");
    if (!trees.is_array() || trees.size() != model.forest.params.n_trees) {
      throw CorruptModelError(origin + ": tree count does not match params");
    }
    model.forest.trees.reserve(trees.size());
    for (const auto& tj : trees) {
      model.forest.trees.push_back(tree_from_json(tj, model.forest.n_features));
    }
  } catch (const ModelError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModelError(origin + ": malformed model document (" + e.what() + ")");
  } catch (const Error& e) {
    throw CorruptModelError(origin + ": malformed model document (" + std::string(e.what()) +
                            ")");
  }
  model.forest.vocab_fingerprint = model.vocab.fingerprint();
  return model;
}

// Loads and fully validates a model file: version, checksum, vocabulary
// bijection, tree layout and the vocabulary/forest dimension binding all
// checked before any prediction can run.
inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError("cannot open model file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model_from_string(buffer.str(), path.string());
}

}  // namespace cmstress
