#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cmstress/corpus.hpp"
#include "cmstress/errors.hpp"
#include "cmstress/features.hpp"
#include "cmstress/rng.hpp"

namespace cmstress {

enum class FeatureRule : std::uint8_t { kSqrt, kAll, kFixed };

struct ForestParams {
  std::uint32_t n_trees = 100;
  std::optional<std::uint32_t> max_depth;  // nullopt = unlimited
  std::uint32_t min_samples_split = 2;
  FeatureRule feature_rule = FeatureRule::kSqrt;
  std::uint32_t fixed_features = 0;  // used when feature_rule == kFixed
  bool bootstrap = true;             // n draws with replacement
  std::uint64_t seed = 0;
};

inline void validate(const ForestParams& params, std::uint32_t n_features) {
  if (params.n_trees < 1) throw InvalidParamsError("n_trees must be >= 1");
  if (params.min_samples_split < 2) {
    throw InvalidParamsError("min_samples_split must be >= 2");
  }
  if (params.feature_rule == FeatureRule::kFixed &&
      (params.fixed_features < 1 || params.fixed_features > n_features)) {
    throw InvalidParamsError("fixed feature count must be in [1, n_features]");
  }
}

inline std::uint32_t features_per_split(const ForestParams& params, std::uint32_t n_features) {
  switch (params.feature_rule) {
    case FeatureRule::kAll:
      return n_features;
    case FeatureRule::kFixed:
      return params.fixed_features;
    case FeatureRule::kSqrt:
    default:
      return std::max<std::uint32_t>(
          1, static_cast<std::uint32_t>(std::sqrt(static_cast<double>(n_features))));
  }
}

// A node of a CART tree. Internal nodes route a sample left iff
// x[feature] <= threshold; leaves carry the class counts of the training
// samples that reached them.
struct TreeNode {
  bool is_leaf = true;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint64_t, kNumLabels> counts{};
  Label label = Label::kNonStressed;
};

struct DecisionTree {
  std::uint32_t n_features = 0;
  std::vector<TreeNode> nodes;  // preorder, root at index 0
};

struct Forest {
  std::vector<DecisionTree> trees;
  ForestParams params;
  std::uint32_t n_features = 0;
  std::uint64_t vocab_fingerprint = 0;  // binds the model to its vectorizer
};

// Gini impurity 1 - sum(p_c^2). Zero iff pure; at most 1 - 1/C.
inline double gini_impurity(const std::array<std::uint64_t, kNumLabels>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw EmptyNodeError("gini impurity of an empty node");
  double g = 1.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

// n indices drawn uniformly with replacement from 0..n-1.
inline std::vector<std::uint32_t> bootstrap_indices(std::uint32_t n, SplitMix64& rng) {
  std::vector<std::uint32_t> out(n);
  for (auto& i : out) i = static_cast<std::uint32_t>(rng.next_below(n));
  return out;
}

struct Split {
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;  // parent impurity minus weighted child impurity
};

// Exhaustive split search over the candidate features. For each candidate
// the node's values (implicit zeros of the sparse vectors included) are
// sorted and every midpoint between consecutive distinct values is scored
// by child-size-weighted Gini. Ties break to the lower feature index, then
// the lower threshold; a split is returned only if it strictly reduces
// impurity. `candidate_features` must be sorted ascending.
inline std::optional<Split> best_split(const std::vector<std::uint32_t>& samples,
                                       const std::vector<SparseVector>& X,
                                       const std::vector<Label>& y,
                                       const std::vector<std::uint32_t>& candidate_features) {
  const std::size_t n = samples.size();
  if (n < 2 || candidate_features.empty()) return std::nullopt;

  std::array<std::uint64_t, kNumLabels> parent_counts{};
  for (auto s : samples) ++parent_counts[label_index(y[s])];
  const double parent_gini = gini_impurity(parent_counts);
  if (parent_gini == 0.0) return std::nullopt;  // pure node, nothing to gain

  const double n_d = static_cast<double>(n);
  double best_weighted = parent_gini;
  std::optional<Split> best;

  std::vector<std::pair<double, Label>> values(n);
  for (std::uint32_t f : candidate_features) {
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = {X[samples[i]].at(f), y[samples[i]]};
    }
    std::sort(values.begin(), values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::array<std::uint64_t, kNumLabels> left{};
    for (std::size_t i = 1; i < n; ++i) {
      ++left[label_index(values[i - 1].second)];
      const double prev = values[i - 1].first;
      const double curr = values[i].first;
      if (!(curr > prev)) continue;  // threshold only between distinct values

      const double nl = static_cast<double>(i);
      const double nr = n_d - nl;
      double sl = 0.0;
      double sr = 0.0;
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        const double lc = static_cast<double>(left[c]);
        const double rc = static_cast<double>(parent_counts[c] - left[c]);
        sl += lc * lc;
        sr += rc * rc;
      }
      const double weighted = (nl - sl / nl + nr - sr / nr) / n_d;
      if (weighted < best_weighted) {
        best_weighted = weighted;
        double threshold = prev + (curr - prev) / 2.0;
        if (!(threshold < curr)) threshold = prev;  // adjacent doubles
        best = Split{f, threshold, parent_gini - weighted};
      }
    }
  }
  return best;
}

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<SparseVector>& X, const std::vector<Label>& y,
              const ForestParams& params, SplitMix64& rng)
      : X_(X), y_(y), params_(params), rng_(rng),
        n_features_(X.empty() ? 0 : X.front().dim) {}

  DecisionTree build(std::vector<std::uint32_t> samples) {
    DecisionTree tree;
    tree.n_features = n_features_;
    nodes_ = &tree.nodes;
    grow(std::move(samples), 0);
    return tree;
  }

 private:
  std::int32_t grow(std::vector<std::uint32_t> samples, std::uint32_t depth) {
    std::array<std::uint64_t, kNumLabels> counts{};
    for (auto s : samples) ++counts[label_index(y_[s])];

    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (pure || depth_capped || samples.size() < params_.min_samples_split) {
      return make_leaf(counts);
    }
    const std::vector<std::uint32_t> candidates = draw_candidates();
    const std::optional<Split> split = best_split(samples, X_, y_, candidates);
    if (!split) return make_leaf(counts);

    std::vector<std::uint32_t> left_samples;
    std::vector<std::uint32_t> right_samples;
    for (auto s : samples) {
      (X_[s].at(split->feature) <= split->threshold ? left_samples : right_samples)
          .push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    const auto idx = static_cast<std::int32_t>(nodes_->size());
    TreeNode node;
    node.is_leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    nodes_->push_back(node);
    const std::int32_t left = grow(std::move(left_samples), depth + 1);
    (*nodes_)[static_cast<std::size_t>(idx)].left = left;
    const std::int32_t right = grow(std::move(right_samples), depth + 1);
    (*nodes_)[static_cast<std::size_t>(idx)].right = right;
    return idx;
  }

  std::int32_t make_leaf(const std::array<std::uint64_t, kNumLabels>& counts) {
    TreeNode node;
    node.is_leaf = true;
    node.counts = counts;
    // majority label, ties to canonical order
    node.label = counts[1] > counts[0] ? Label::kStressed : Label::kNonStressed;
    nodes_->push_back(node);
    return static_cast<std::int32_t>(nodes_->size() - 1);
  }

  // Fresh draw per node, without replacement (partial Fisher-Yates),
  // returned sorted. Drawing all features consumes no randomness.
  std::vector<std::uint32_t> draw_candidates() {
    const std::uint32_t k = features_per_split(params_, n_features_);
    std::vector<std::uint32_t> candidates;
    if (k >= n_features_) {
      candidates.resize(n_features_);
      std::iota(candidates.begin(), candidates.end(), 0);
      return candidates;
    }
    pool_.resize(n_features_);
    std::iota(pool_.begin(), pool_.end(), 0);
    for (std::uint32_t j = 0; j < k; ++j) {
      const auto r = j + static_cast<std::uint32_t>(rng_.next_below(n_features_ - j));
      std::swap(pool_[j], pool_[r]);
    }
    candidates.assign(pool_.begin(), pool_.begin() + k);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
  }

  const std::vector<SparseVector>& X_;
  const std::vector<Label>& y_;
  const ForestParams& params_;
  SplitMix64& rng_;
  std::uint32_t n_features_;
  std::vector<TreeNode>* nodes_ = nullptr;
  std::vector<std::uint32_t> pool_;
};

inline void check_training_input(const std::vector<SparseVector>& X,
                                 const std::vector<Label>& y) {
  if (X.size() != y.size()) {
    throw LengthMismatchError("feature and label counts differ: " + std::to_string(X.size()) +
                              " vs " + std::to_string(y.size()));
  }
  if (X.empty()) throw EmptyTrainingSetError("training set is empty");
  const std::uint32_t dim = X.front().dim;
  for (const auto& x : X) {
    if (x.dim != dim) {
      throw DimensionMismatchError("training vectors have mixed dimensions");
    }
  }
}

}  // namespace detail

// Recursive CART with Gini impurity. Candidate features are redrawn at
// every node; growth stops at purity, the depth limit, the minimum split
// size, or when no split strictly reduces impurity.
inline DecisionTree train_tree(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                               const ForestParams& params, SplitMix64& rng) {
  detail::check_training_input(X, y);
  validate(params, X.front().dim);
  std::vector<std::uint32_t> samples(X.size());
  std::iota(samples.begin(), samples.end(), 0);
  detail::TreeBuilder builder(X, y, params, rng);
  return builder.build(std::move(samples));
}

// Trains the ensemble. Tree i gets an independent splitmix64 stream seeded
// with mix_seed(params.seed, i) and, when bootstrap is on, its own n-draw
// resample, so the result is identical for any thread count.
inline Forest train_forest(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                           const ForestParams& params, unsigned n_threads = 1) {
  detail::check_training_input(X, y);
  const std::uint32_t n_features = X.front().dim;
  validate(params, n_features);

  std::array<std::uint64_t, kNumLabels> class_counts{};
  for (Label label : y) ++class_counts[label_index(label)];
  for (Label label : kAllLabels) {
    if (class_counts[label_index(label)] == 0) {
      std::fprintf(stderr, "warning: training data has no \"%s\" examples\n",
                   std::string(to_string(label)).c_str());
    }
  }

  Forest forest;
  forest.params = params;
  forest.n_features = n_features;
  forest.trees.resize(params.n_trees);

  const auto n = static_cast<std::uint32_t>(X.size());
  auto train_one = [&](std::uint32_t i) {
    SplitMix64 rng(mix_seed(params.seed, i));
    std::vector<std::uint32_t> samples;
    if (params.bootstrap) {
      samples = bootstrap_indices(n, rng);
    } else {
      samples.resize(n);
      std::iota(samples.begin(), samples.end(), 0);
    }
    detail::TreeBuilder builder(X, y, params, rng);
    forest.trees[i] = builder.build(std::move(samples));
  };

  if (n_threads <= 1 || params.n_trees == 1) {
    for (std::uint32_t i = 0; i < params.n_trees; ++i) train_one(i);
  } else {
    std::atomic<std::uint32_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::uint32_t i = next.fetch_add(1);
        if (i >= params.n_trees) return;
        train_one(i);
      }
    };
    std::vector<std::thread> threads;
    const unsigned count = std::min<unsigned>(n_threads, params.n_trees);
    threads.reserve(count);
    for (unsigned t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return forest;
}

inline Label predict_tree(const DecisionTree& tree, const SparseVector& x) {
  if (x.dim != tree.n_features) {
    throw DimensionMismatchError("input dimension " + std::to_string(x.dim) +
                                 " does not match tree dimension " +
                                 std::to_string(tree.n_features));
  }
  const TreeNode* node = &tree.nodes.front();
  while (!node->is_leaf) {
    const bool go_left = x.at(node->feature) <= node->threshold;
    node = &tree.nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
  }
  return node->label;
}

struct Vote {
  Label label = Label::kNonStressed;
  std::array<std::uint64_t, kNumLabels> votes{};
};

// Majority vote over the trees; ties break to canonical label order.
inline Vote predict_forest(const Forest& forest, const SparseVector& x) {
  if (x.dim != forest.n_features) {
    throw DimensionMismatchError("input dimension " + std::to_string(x.dim) +
                                 " does not match model dimension " +
                                 std::to_string(forest.n_features));
  }
  Vote vote;
  for (const auto& tree : forest.trees) {
    ++vote.votes[label_index(predict_tree(tree, x))];
  }
  vote.label = vote.votes[1] > vote.votes[0] ? Label::kStressed : Label::kNonStressed;
  return vote;
}

}  // namespace cmstress
