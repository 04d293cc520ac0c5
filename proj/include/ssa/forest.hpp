#pragma once

// CART regression trees, random forests and the predict-mean baseline.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssa/domain.hpp"
#include "ssa/encoding.hpp"
#include "ssa/random.hpp"

namespace ssa {

/// Leaf when feature < 0. Internal nodes route left iff
/// x[feature] <= threshold. Every node keeps the mean target and the number of
/// training samples (bootstrap multiplicity included) that reached it.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::int64_t coverage = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Nodes stored in preorder; index 0 is the root.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  int depth() const;

  /// Index of the leaf reached by x.
  std::size_t leaf_index(std::span<const double> x) const;
  double predict(std::span<const double> x) const {
    return nodes_[leaf_index(x)].value;
  }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

enum class FeatureSubset { kAll, kSqrt, kOneThird };

std::string_view to_string(FeatureSubset subset);
std::optional<FeatureSubset> parse_feature_subset(std::string_view text);
std::size_t subset_size(FeatureSubset subset, std::size_t n_features);

struct HyperParams {
  int n_trees = 100;
  std::optional<int> max_depth;  // nullopt = unlimited
  int min_samples_leaf = 1;
  FeatureSubset features_per_split = FeatureSubset::kAll;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void check() const;
  std::string describe() const;
  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Greedy CART regression tree on every row of X (no resampling).
Tree fit_tree(const FeatureMatrix& X, std::span<const double> y,
              const HyperParams& hp, Rng& rng);

/// Same as fit_tree but on a multiset of row indices (duplicates allowed).
Tree fit_tree_on_sample(const FeatureMatrix& X, std::span<const double> y,
                        std::span<const std::size_t> sample,
                        const HyperParams& hp, Rng& rng);

/// Name and admissible output range of a prediction target.
struct TargetSpec {
  std::string name;
  double lo = 1.0;
  double hi = 7.0;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

TargetSpec priority_target();
TargetSpec characteristic_target(Characteristic c, CharacteristicScale scale);

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  std::string timestamp;
  std::size_t training_rows = 0;

  friend bool operator==(const TrainingMetadata&,
                         const TrainingMetadata&) = default;
};

enum class ModelKind { kRandomForest, kDecisionTree, kMeanBaseline };
std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

struct Prediction {
  double raw;      // arithmetic mean of the tree outputs
  double clamped;  // raw clamped to the target range
};

/// Trained ensemble. Prediction is the mean over trees, clamped to the
/// target's declared range.
struct TreeEnsembleModel {
  ModelKind kind = ModelKind::kRandomForest;
  std::vector<Tree> trees;
  SchemaPtr schema;
  TargetSpec target;
  HyperParams hyperparams;
  TrainingMetadata metadata;

  Prediction predict_detailed(std::span<const double> x) const;
  double predict_raw(std::span<const double> x) const;
  double predict(std::span<const double> x) const {
    return predict_detailed(x).clamped;
  }
};

/// Schema-checked single prediction.
Prediction predict(const TreeEnsembleModel& model, const EncodedVector& x);

void check_schema(const TreeEnsembleModel& model, const Schema& schema);

/// Trees are grown in parallel; tree t draws all of its randomness from
/// derive_seed(hp.seed, t), so results match fit_forest_serial exactly.
TreeEnsembleModel fit_forest(const FeatureMatrix& X, std::span<const double> y,
                             const HyperParams& hp, const TargetSpec& target);
TreeEnsembleModel fit_forest_serial(const FeatureMatrix& X,
                                    std::span<const double> y,
                                    const HyperParams& hp,
                                    const TargetSpec& target);

/// One unbagged tree over all features, as a single-tree ensemble.
TreeEnsembleModel fit_decision_tree(const FeatureMatrix& X,
                                    std::span<const double> y,
                                    const HyperParams& hp,
                                    const TargetSpec& target);

TreeEnsembleModel fit_mean_baseline(std::span<const double> y,
                                    const TargetSpec& target,
                                    SchemaPtr schema);

std::vector<Prediction> predict_batch(const TreeEnsembleModel& model,
                                      const FeatureMatrix& X);
std::vector<Prediction> predict_batch_serial(const TreeEnsembleModel& model,
                                             const FeatureMatrix& X);

}  // namespace ssa
