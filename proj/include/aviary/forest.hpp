#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aviary/features.hpp"
#include "aviary/parallel.hpp"
#include "aviary/rng.hpp"
#include "aviary/types.hpp"

namespace aviary {

// CART decision trees combined by bootstrap aggregation with random feature
// subsets. Training is deterministic: tree t draws from an independent
// stream hash(seed, t), so serial and parallel runs serialize identically.

struct TrainConfig {
  int n_trees = 100;
  int max_depth = 0;  // 0 = unlimited
  int min_samples_split = 2;
  int features_per_split = 4;  // floor(sqrt(17))
  std::uint64_t seed = 42;

  void validate() const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
    if (min_samples_split < 2)
      throw ConfigError("min_samples_split must be >= 2");
    if (features_per_split < 1 || features_per_split > kNumFeatures)
      throw ConfigError("features_per_split must be in [1, 17]");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

using ClassCounts = std::array<std::uint32_t, kNumClasses>;

// Flat tree storage; node 0 is the root. feature < 0 marks a leaf. Samples
// with value <= threshold go left.
struct TreeNode {
  std::int16_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassCounts counts{};
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(const FeatureVector& v) const {
    const TreeNode* node = &nodes.front();
    while (node->feature >= 0) {
      node = v[static_cast<std::size_t>(node->feature)] <= node->threshold
                 ? &nodes[static_cast<std::size_t>(node->left)]
                 : &nodes[static_cast<std::size_t>(node->right)];
    }
    return *node;
  }
};

inline int majority_class(const ClassCounts& counts) {
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k)
    if (counts[static_cast<std::size_t>(k)] >
        counts[static_cast<std::size_t>(best)])
      best = k;  // ties keep the lower index
  return best;
}

// 1 - sum((c_k / N)^2). Caller guarantees a non-empty node.
inline double gini_impurity(const ClassCounts& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  double acc = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / total;
    acc += p * p;
  }
  return 1.0 - acc;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

namespace detail_forest {

// The sample matrix a tree trains on: row-major n x 17 plus labels.
struct SampleView {
  const std::vector<FeatureVector>& x;
  const std::vector<UserClass>& y;
};

// Tie rule shared with the split search: larger decrease wins, then lower
// feature index, then lower threshold.
inline bool split_improves(double decrease, int feature, double threshold,
                           const Split& best) {
  if (decrease != best.impurity_decrease)
    return decrease > best.impurity_decrease;
  if (feature != best.feature) return feature < best.feature;
  return threshold < best.threshold;
}

}  // namespace detail_forest

// Best (feature, threshold) among the candidate features, with thresholds at
// midpoints between consecutive distinct sorted values. Returns nullopt when
// nothing strictly reduces the weighted Gini impurity.
inline std::optional<Split> best_split(
    const detail_forest::SampleView& samples,
    const std::vector<int>& indices, const std::vector<int>& candidate_features) {
  const auto n = static_cast<double>(indices.size());
  if (indices.size() < 2) return std::nullopt;

  ClassCounts parent_counts{};
  for (int i : indices)
    ++parent_counts[static_cast<std::size_t>(samples.y[static_cast<std::size_t>(i)])];
  const double parent_gini = gini_impurity(parent_counts);

  Split best;
  bool found = false;
  std::vector<std::pair<double, UserClass>> column;
  column.reserve(indices.size());
  for (const int feature : candidate_features) {
    column.clear();
    for (int i : indices)
      column.emplace_back(
          samples.x[static_cast<std::size_t>(i)][static_cast<std::size_t>(feature)],
          samples.y[static_cast<std::size_t>(i)]);
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassCounts left_counts{};
    std::size_t left_n = 0;
    for (std::size_t pos = 0; pos + 1 < column.size(); ++pos) {
      ++left_counts[static_cast<std::size_t>(column[pos].second)];
      ++left_n;
      if (column[pos].first == column[pos + 1].first) continue;
      const double threshold = (column[pos].first + column[pos + 1].first) / 2.0;
      ClassCounts right_counts{};
      for (int k = 0; k < kNumClasses; ++k)
        right_counts[static_cast<std::size_t>(k)] =
            parent_counts[static_cast<std::size_t>(k)] -
            left_counts[static_cast<std::size_t>(k)];
      const double weighted =
          (static_cast<double>(left_n) * gini_impurity(left_counts) +
           static_cast<double>(indices.size() - left_n) *
               gini_impurity(right_counts)) /
          n;
      const double decrease = parent_gini - weighted;
      if (decrease <= 0.0) continue;
      if (!found || detail_forest::split_improves(decrease, feature, threshold,
                                                  best)) {
        best = {feature, threshold, decrease};
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

inline std::optional<Split> best_split(
    const std::vector<FeatureVector>& x, const std::vector<UserClass>& y,
    const std::vector<int>& candidate_features) {
  detail_forest::SampleView view{x, y};
  std::vector<int> indices(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    indices[i] = static_cast<int>(i);
  return best_split(view, indices, candidate_features);
}

// n uniform draws with replacement over [0, n).
inline std::vector<int> bootstrap_sample(int n, Rng& rng) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& v : out)
    v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  return out;
}

namespace detail_forest {

class TreeBuilder {
 public:
  TreeBuilder(const SampleView& samples, const TrainConfig& config, Rng& rng)
      : samples_(samples), config_(config), rng_(rng) {}

  DecisionTree build(std::vector<int> indices) {
    tree_.nodes.clear();
    grow(std::move(indices), 0);
    return std::move(tree_);
  }

 private:
  // Preorder growth: the node's feature draw happens before its children's,
  // left subtree before right, which pins the rng consumption order.
  std::int32_t grow(std::vector<int> indices, int depth) {
    const auto node_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    ClassCounts counts{};
    for (int i : indices)
      ++counts[static_cast<std::size_t>(samples_.y[static_cast<std::size_t>(i)])];
    tree_.nodes[static_cast<std::size_t>(node_index)].counts = counts;

    const bool pure =
        std::count_if(counts.begin(), counts.end(),
                      [](std::uint32_t c) { return c > 0; }) <= 1;
    const bool depth_capped = config_.max_depth > 0 && depth >= config_.max_depth;
    if (pure || depth_capped ||
        indices.size() < static_cast<std::size_t>(config_.min_samples_split))
      return node_index;

    const std::vector<int> candidates =
        rng_.sample_indices(config_.features_per_split, kNumFeatures);
    const auto split = best_split(samples_, indices, candidates);
    if (!split) return node_index;
    assert(split->impurity_decrease > 0.0);

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(indices.size());
    right_idx.reserve(indices.size());
    for (int i : indices) {
      const double v = samples_.x[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(split->feature)];
      (v <= split->threshold ? left_idx : right_idx).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    auto& node = tree_.nodes[static_cast<std::size_t>(node_index)];
    node.feature = static_cast<std::int16_t>(split->feature);
    node.threshold = split->threshold;
    const std::int32_t left = grow(std::move(left_idx), depth + 1);
    const std::int32_t right = grow(std::move(right_idx), depth + 1);
    tree_.nodes[static_cast<std::size_t>(node_index)].left = left;
    tree_.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  }

  const SampleView& samples_;
  const TrainConfig& config_;
  Rng& rng_;
  DecisionTree tree_;
};

}  // namespace detail_forest

// Grows one CART tree over the given samples; candidate features are drawn
// from rng without replacement at every internal node.
inline DecisionTree build_tree(const std::vector<FeatureVector>& x,
                               const std::vector<UserClass>& y,
                               const TrainConfig& config, Rng& rng) {
  detail_forest::SampleView view{x, y};
  std::vector<int> indices(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    indices[i] = static_cast<int>(i);
  return detail_forest::TreeBuilder(view, config, rng).build(std::move(indices));
}

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  NormalizationParams normalization;
  TrainConfig config;
  std::array<std::string, kNumClasses> class_order{
      "Personal", "Professional", "Business", "Spam", "FeedNews", "Viral"};
};

inline void check_finite(const FeatureVector& v) {
  for (double x : v)
    if (!std::isfinite(x))
      throw InvalidInputError("feature vector contains a non-finite value");
}

// Fits normalization on the dataset, then trains config.n_trees trees on
// bootstrap resamples of the normalized data. Output is identical for any
// thread count.
inline RandomForestModel train_forest(const std::vector<FeatureVector>& x,
                                      const std::vector<UserClass>& y,
                                      const TrainConfig& config,
                                      int threads = 0) {
  config.validate();
  if (x.size() != y.size())
    throw InvalidInputError("feature/label size mismatch");
  if (x.size() < 2)
    throw InvalidInputError("training requires at least 2 samples");
  for (const auto& v : x) check_finite(v);
  if (std::set<UserClass>(y.begin(), y.end()).size() < 2)
    throw DegenerateDatasetError("training data contains a single class");

  RandomForestModel model;
  model.config = config;
  model.normalization = fit_normalization(x);
  std::vector<FeatureVector> xn(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    xn[i] = apply_normalization(x[i], model.normalization);

  const int n = static_cast<int>(x.size());
  model.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(static_cast<std::size_t>(config.n_trees), threads,
               [&](std::size_t t) {
                 Rng rng = Rng::stream(config.seed, t);
                 const std::vector<int> picks = bootstrap_sample(n, rng);
                 std::vector<FeatureVector> xb;
                 std::vector<UserClass> yb;
                 xb.reserve(picks.size());
                 yb.reserve(picks.size());
                 for (int i : picks) {
                   xb.push_back(xn[static_cast<std::size_t>(i)]);
                   yb.push_back(y[static_cast<std::size_t>(i)]);
                 }
                 model.trees[t] = build_tree(xb, yb, config, rng);
               });
  return model;
}

// Vote fractions over trees; each tree votes its leaf's majority class and
// leaf ties go to the lower class index.
inline std::array<double, kNumClasses> predict_proba(
    const RandomForestModel& model, const FeatureVector& raw) {
  check_finite(raw);
  const FeatureVector v = apply_normalization(raw, model.normalization);
  std::array<int, kNumClasses> votes{};
  for (const auto& tree : model.trees)
    ++votes[static_cast<std::size_t>(majority_class(tree.leaf_for(v).counts))];
  std::array<double, kNumClasses> out{};
  for (int k = 0; k < kNumClasses; ++k)
    out[static_cast<std::size_t>(k)] =
        static_cast<double>(votes[static_cast<std::size_t>(k)]) /
        static_cast<double>(model.trees.size());
  return out;
}

inline UserClass argmax_class(const std::array<double, kNumClasses>& proba) {
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k)
    if (proba[static_cast<std::size_t>(k)] > proba[static_cast<std::size_t>(best)])
      best = k;  // ties keep the lower index
  return static_cast<UserClass>(best);
}

inline UserClass predict(const RandomForestModel& model,
                         const FeatureVector& raw) {
  return argmax_class(predict_proba(model, raw));
}

// --- model (de)serialization ---------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

namespace detail_forest {

inline nlohmann::json node_to_json(const DecisionTree& tree,
                                   std::int32_t index) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
  if (node.feature < 0) {
    return nlohmann::json{{"counts", node.counts}};
  }
  return nlohmann::json{{"feature", node.feature},
                        {"threshold", node.threshold},
                        {"left", node_to_json(tree, node.left)},
                        {"right", node_to_json(tree, node.right)}};
}

inline std::int32_t node_from_json(const nlohmann::json& obj,
                                   DecisionTree& tree) {
  if (!obj.is_object()) throw ModelFormatError("tree node is not an object");
  const auto index = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (obj.contains("counts")) {
    const auto counts = obj.at("counts").get<std::vector<std::uint32_t>>();
    if (counts.size() != static_cast<std::size_t>(kNumClasses))
      throw ModelFormatError("leaf counts must have 6 entries");
    std::copy(counts.begin(), counts.end(),
              tree.nodes[static_cast<std::size_t>(index)].counts.begin());
    return index;
  }
  if (!obj.contains("feature") || !obj.contains("threshold") ||
      !obj.contains("left") || !obj.contains("right"))
    throw ModelFormatError("internal node is missing a field");
  const int feature = obj.at("feature").get<int>();
  if (feature < 0 || feature >= kNumFeatures)
    throw ModelFormatError("feature index out of range");
  const double threshold = obj.at("threshold").get<double>();
  const std::int32_t left = node_from_json(obj.at("left"), tree);
  const std::int32_t right = node_from_json(obj.at("right"), tree);
  auto& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = static_cast<std::int16_t>(feature);
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return index;
}

}  // namespace detail_forest

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{{"n_trees", c.n_trees},
                        {"max_depth", c.max_depth},
                        {"min_samples_split", c.min_samples_split},
                        {"features_per_split", c.features_per_split},
                        {"seed", c.seed}};
}

inline TrainConfig config_from_json(const nlohmann::json& obj) {
  TrainConfig c;
  c.n_trees = obj.at("n_trees").get<int>();
  c.max_depth = obj.at("max_depth").get<int>();
  c.min_samples_split = obj.at("min_samples_split").get<int>();
  c.features_per_split = obj.at("features_per_split").get<int>();
  c.seed = obj.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json model_to_json(const RandomForestModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees)
    trees.push_back(detail_forest::node_to_json(tree, 0));
  return nlohmann::json{{"format_version", kModelFormatVersion},
                        {"config", config_to_json(model.config)},
                        {"normalization",
                         {{"min", model.normalization.min},
                          {"max", model.normalization.max}}},
                        {"class_order", model.class_order},
                        {"trees", std::move(trees)}};
}

inline RandomForestModel model_from_json(const nlohmann::json& obj) {
  if (!obj.is_object() || !obj.contains("format_version"))
    throw ModelFormatError("not a model file");
  if (obj.at("format_version").get<int>() != kModelFormatVersion)
    throw ModelFormatError("unsupported model format_version");
  RandomForestModel model;
  try {
    model.config = config_from_json(obj.at("config"));
    const auto& norm = obj.at("normalization");
    const auto mins = norm.at("min").get<std::vector<double>>();
    const auto maxs = norm.at("max").get<std::vector<double>>();
    if (mins.size() != static_cast<std::size_t>(kNumFeatures) ||
        maxs.size() != static_cast<std::size_t>(kNumFeatures))
      throw ModelFormatError("normalization must have 17 entries");
    std::copy(mins.begin(), mins.end(), model.normalization.min.begin());
    std::copy(maxs.begin(), maxs.end(), model.normalization.max.begin());
    const auto classes = obj.at("class_order").get<std::vector<std::string>>();
    if (classes.size() != static_cast<std::size_t>(kNumClasses))
      throw ModelFormatError("class_order must have 6 entries");
    for (int k = 0; k < kNumClasses; ++k) {
      if (classes[static_cast<std::size_t>(k)] !=
          kClassNames[static_cast<std::size_t>(k)])
        throw ModelFormatError("class_order does not match the canonical order");
      model.class_order[static_cast<std::size_t>(k)] =
          classes[static_cast<std::size_t>(k)];
    }
    for (const auto& tj : obj.at("trees")) {
      DecisionTree tree;
      detail_forest::node_from_json(tj, tree);
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  if (model.trees.size() != static_cast<std::size_t>(model.config.n_trees))
    throw ModelFormatError("tree count does not match config.n_trees");
  return model;
}

}  // namespace aviary
