#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssa/forest.hpp"

namespace ssa {

struct CvCell {
  HyperParams hp;
  double mean_mae = 0.0;
  std::vector<double> fold_mae;
};

struct CvResult {
  HyperParams best;
  std::size_t best_index = 0;
  std::vector<CvCell> cells;
};

/// Balanced fold sizes: the first n % k folds get one extra row.
std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k);

/// Fold id per row, from a seeded shuffle cut into fold_sizes() chunks.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k,
                                      std::uint64_t seed);

/// k-fold cross-validation over a hyperparameter grid. Selects the cell with
/// the lowest mean validation MAE; ties go to fewer trees, then shallower
/// depth, then grid order.
CvResult cross_validate(const FeatureMatrix& X, std::span<const double> y,
                        const std::vector<HyperParams>& grid, std::size_t k,
                        std::uint64_t fold_seed, const TargetSpec& target,
                        ModelKind kind = ModelKind::kRandomForest);

/// n_trees x max_depth x min_samples_leaf x features_per_split over
/// {100,300,500} x {unlimited,8,16} x {1,5,10} x {all,sqrt,one_third}.
std::vector<HyperParams> default_forest_grid(std::uint64_t seed);
/// Small grid for smoke runs and tests.
std::vector<HyperParams> quick_forest_grid(std::uint64_t seed);
/// Depth x leaf-size grid for the single decision tree comparison model.
std::vector<HyperParams> default_tree_grid(std::uint64_t seed);

}  // namespace ssa
