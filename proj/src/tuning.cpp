#include "ssa/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "ssa/error.hpp"

namespace ssa {

std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k,
                                      std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> fold(n);
  std::size_t pos = 0;
  const auto sizes = fold_sizes(n, k);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t i = 0; i < sizes[f]; ++i) fold[order[pos++]] = f;
  }
  return fold;
}

namespace {

using ShapeKey = std::tuple<int, int, int, bool, std::uint64_t>;

ShapeKey shape_of(const HyperParams& hp) {
  return {hp.max_depth.value_or(-1), hp.min_samples_leaf,
          static_cast<int>(hp.features_per_split), hp.bootstrap, hp.seed};
}

double depth_rank(const HyperParams& hp) {
  return hp.max_depth ? *hp.max_depth : std::numeric_limits<double>::infinity();
}

}  // namespace

CvResult cross_validate(const FeatureMatrix& X, std::span<const double> y,
                        const std::vector<HyperParams>& grid, std::size_t k,
                        std::uint64_t fold_seed, const TargetSpec& target,
                        ModelKind kind) {
  if (grid.empty()) {
    throw Error(ErrorCode::kGridEmpty, "grid", "hyperparameter grid is empty");
  }
  if (k < 2) throw Error(ErrorCode::kOutOfRange, "k", "k must be >= 2");
  if (X.rows() < k || X.rows() != y.size()) {
    throw Error(ErrorCode::kTooFewRecords, "X",
                "cross-validation needs at least k rows");
  }
  for (const auto& hp : grid) hp.check();

  const auto fold = assign_folds(X.rows(), k, fold_seed);
  CvResult result;
  result.cells.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    result.cells[c].hp = grid[c];
    result.cells[c].fold_mae.assign(k, 0.0);
  }

  // Cells that differ only in n_trees share one forest per fold: tree t
  // depends on (seed, t) alone, so a smaller forest is a prefix of a larger.
  std::map<ShapeKey, std::vector<std::size_t>> shapes;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const ShapeKey key = kind == ModelKind::kRandomForest
                             ? shape_of(grid[c])
                             : ShapeKey{static_cast<int>(c), 0, 0, false, 0};
    shapes[key].push_back(c);
  }

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, valid_rows;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      (fold[r] == f ? valid_rows : train_rows).push_back(r);
    }
    const FeatureMatrix X_train = X.select(train_rows);
    const FeatureMatrix X_valid = X.select(valid_rows);
    std::vector<double> y_train, y_valid;
    for (auto r : train_rows) y_train.push_back(y[r]);
    for (auto r : valid_rows) y_valid.push_back(y[r]);

    for (const auto& [key, cells] : shapes) {
      HyperParams hp = grid[cells.front()];
      int max_trees = 0;
      for (auto c : cells) max_trees = std::max(max_trees, grid[c].n_trees);
      hp.n_trees = max_trees;
      const TreeEnsembleModel model =
          kind == ModelKind::kRandomForest
              ? fit_forest(X_train, y_train, hp, target)
              : fit_decision_tree(X_train, y_train, hp, target);

      std::vector<int> wanted;
      for (auto c : cells) wanted.push_back(grid[c].n_trees);
      std::vector<double> sums(valid_rows.size(), 0.0);
      std::map<int, double> mae_at;
      int done = 0;
      std::vector<int> sorted = wanted;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (int stop : sorted) {
        for (; done < stop; ++done) {
          for (std::size_t i = 0; i < valid_rows.size(); ++i) {
            sums[i] += model.trees[done].predict(X_valid.row(i));
          }
        }
        double err = 0.0;
        for (std::size_t i = 0; i < valid_rows.size(); ++i) {
          const double p =
              std::clamp(sums[i] / stop, target.lo, target.hi);
          err += std::abs(p - y_valid[i]);
        }
        mae_at[stop] = err / static_cast<double>(valid_rows.size());
      }
      for (auto c : cells) result.cells[c].fold_mae[f] = mae_at[grid[c].n_trees];
    }
  }

  for (auto& cell : result.cells) {
    double sum = 0.0;
    for (double m : cell.fold_mae) sum += m;
    cell.mean_mae = sum / static_cast<double>(k);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < grid.size(); ++c) {
    const auto& a = result.cells[c];
    const auto& b = result.cells[best];
    if (a.mean_mae < b.mean_mae) {
      best = c;
    } else if (a.mean_mae == b.mean_mae) {
      if (a.hp.n_trees < b.hp.n_trees ||
          (a.hp.n_trees == b.hp.n_trees && depth_rank(a.hp) < depth_rank(b.hp))) {
        best = c;
      }
    }
  }
  result.best_index = best;
  result.best = grid[best];
  return result;
}

std::vector<HyperParams> default_forest_grid(std::uint64_t seed) {
  std::vector<HyperParams> grid;
  for (int n_trees : {100, 300, 500}) {
    for (std::optional<int> depth : {std::optional<int>{}, std::optional<int>{8},
                                     std::optional<int>{16}}) {
      for (int leaf : {1, 5, 10}) {
        for (auto fps : {FeatureSubset::kAll, FeatureSubset::kSqrt,
                         FeatureSubset::kOneThird}) {
          grid.push_back({n_trees, depth, leaf, fps, true, seed});
        }
      }
    }
  }
  return grid;
}

std::vector<HyperParams> quick_forest_grid(std::uint64_t seed) {
  std::vector<HyperParams> grid;
  for (std::optional<int> depth : {std::optional<int>{}, std::optional<int>{8}}) {
    for (int leaf : {1, 5}) {
      for (auto fps : {FeatureSubset::kAll, FeatureSubset::kOneThird}) {
        grid.push_back({50, depth, leaf, fps, true, seed});
      }
    }
  }
  return grid;
}

std::vector<HyperParams> default_tree_grid(std::uint64_t seed) {
  std::vector<HyperParams> grid;
  for (std::optional<int> depth :
       {std::optional<int>{}, std::optional<int>{4}, std::optional<int>{8},
        std::optional<int>{16}}) {
    for (int leaf : {1, 5, 10, 20}) {
      grid.push_back({1, depth, leaf, FeatureSubset::kAll, false, seed});
    }
  }
  return grid;
}

}  // namespace ssa
