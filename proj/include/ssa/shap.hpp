#pragma once

// Exact Shapley attribution for tree ensembles under the path-dependent
// (coverage-weighted) conditional expectation. Each source-feature group is
// a single player, so a one-hot block is attributed as one feature.
//
// v(S) for a tree: walk from the root; at a split on a column whose group is
// in S follow the branch x takes, otherwise average both children weighted by
// their training coverage. The ensemble's v(S) is the mean over trees.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ssa/encoding.hpp"
#include "ssa/forest.hpp"

namespace ssa {

struct Attribution {
  double base_value = 0.0;          // v(empty set)
  std::vector<double> phi;          // per encoded column
  std::vector<double> grouped_phi;  // per source-feature group

  double total() const;  // base_value + sum of grouped_phi
};

inline constexpr std::size_t kDefaultMaxExactFeatures = 12;

/// Enumerates all 2^G coalitions of the schema's groups. Throws
/// TooManyFeatures when the schema has more than max_features groups.
Attribution shap_exact(const TreeEnsembleModel& model, const EncodedVector& x,
                       std::size_t max_features = kDefaultMaxExactFeatures);
Attribution shap_exact(const TreeEnsembleModel& model,
                       std::span<const double> x,
                       std::size_t max_features = kDefaultMaxExactFeatures);

/// Polynomial-time path-dependent TreeSHAP with grouped players.
Attribution shap_fast(const TreeEnsembleModel& model, const EncodedVector& x);
Attribution shap_fast(const TreeEnsembleModel& model,
                      std::span<const double> x);

/// Single-tree variant, no schema checks. groups[c] is the group of column c.
std::vector<double> tree_shap_grouped(const Tree& tree,
                                      std::span<const double> x,
                                      std::span<const std::size_t> groups,
                                      std::size_t n_groups);

/// Per-row shap_fast, parallel over rows.
std::vector<Attribution> shap_batch(const TreeEnsembleModel& model,
                                    const FeatureMatrix& X);
std::vector<Attribution> shap_batch_serial(const TreeEnsembleModel& model,
                                           const FeatureMatrix& X);

enum class Direction { kIncreasesPriority, kDecreasesPriority, kIndeterminate };

std::string_view to_string(Direction d);

struct SalienceReport {
  std::vector<std::size_t> ranking;       // group indices, most salient first
  std::vector<double> mean_abs_phi;       // per group
  std::vector<Direction> column_direction;  // per encoded column
  std::vector<std::string> group_names;

  std::vector<std::string> ranked_names() const;
  std::size_t rank_of(std::string_view group) const;
};

inline constexpr double kDirectionTolerance = 1e-6;

/// Ranks groups by mean |grouped_phi| over the dataset; ties keep schema
/// order.
SalienceReport global_salience(const TreeEnsembleModel& model,
                               const FeatureMatrix& dataset);
SalienceReport salience_from_attributions(
    const TreeEnsembleModel& model, const FeatureMatrix& dataset,
    const std::vector<Attribution>& attributions);

/// Sign of the covariance between a column's value (a one-hot indicator for
/// nominal features) and its group's attribution across the dataset.
/// `feature` is a column name such as "help_dynamic=giving_help" or "duty".
Direction feature_direction(const TreeEnsembleModel& model,
                            const FeatureMatrix& dataset,
                            std::string_view feature);

}  // namespace ssa
