#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssa/forest.hpp"

namespace ssa::detail {

// Per-column sorted distinct values and each row's rank among them. Lets the
// splitter aggregate a node by rank instead of sorting raw doubles.
struct ColumnIndex {
  std::vector<double> distinct;
  std::vector<std::uint32_t> rank;
};

std::vector<ColumnIndex> index_columns(const FeatureMatrix& X);

Tree grow_tree(const FeatureMatrix& X, std::span<const double> y,
               const std::vector<ColumnIndex>& columns,
               std::vector<std::size_t> sample, const HyperParams& hp,
               Rng& rng);

void check_training_input(const FeatureMatrix& X, std::span<const double> y);

}  // namespace ssa::detail
