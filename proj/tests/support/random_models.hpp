#pragma once

// Random schemas, datasets and forests for property and oracle tests.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ssa/encoding.hpp"
#include "ssa/forest.hpp"
#include "ssa/random.hpp"

namespace testing_support {

struct RandomSchema {
  ssa::SchemaPtr schema;
  std::vector<int> width;  // columns per group; > 1 means one-hot
  std::vector<ssa::EncodingKind> kind;
};

inline RandomSchema random_schema(ssa::Rng& rng, std::size_t groups) {
  RandomSchema out;
  std::vector<ssa::SchemaColumn> columns;
  std::vector<std::string> names;
  for (std::size_t g = 0; g < groups; ++g) {
    names.push_back("g" + std::to_string(g));
    const auto type = rng.index(3);
    if (type == 2) {
      const int w = 2 + static_cast<int>(rng.index(3));
      for (int i = 0; i < w; ++i) {
        columns.push_back({names.back() + "=" + std::to_string(i),
                           ssa::EncodingKind::kOneHotComponent, g});
      }
      out.width.push_back(w);
      out.kind.push_back(ssa::EncodingKind::kOneHotComponent);
    } else {
      const auto kind = type == 0 ? ssa::EncodingKind::kNumeric : ssa::EncodingKind::kOrdinal;
      columns.push_back({names.back(), kind, g});
      out.width.push_back(1);
      out.kind.push_back(kind);
    }
  }
  out.schema = std::make_shared<ssa::Schema>(std::move(columns), std::move(names));
  return out;
}

inline std::vector<double> random_row(ssa::Rng& rng, const RandomSchema& s) {
  std::vector<double> row;
  for (std::size_t g = 0; g < s.width.size(); ++g) {
    if (s.width[g] > 1) {
      const auto hot = rng.index(static_cast<std::size_t>(s.width[g]));
      for (int i = 0; i < s.width[g]; ++i) row.push_back(i == static_cast<int>(hot));
    } else if (s.kind[g] == ssa::EncodingKind::kOrdinal) {
      row.push_back(1.0 + static_cast<double>(rng.index(7)));
    } else {
      row.push_back(std::round(rng.uniform(-5.0, 5.0) * 10.0) / 10.0);
    }
  }
  return row;
}

struct RandomProblem {
  RandomSchema schema;
  ssa::FeatureMatrix X;
  std::vector<double> y;
};

inline RandomProblem random_problem(ssa::Rng& rng, std::size_t groups,
                                    std::size_t rows) {
  RandomProblem p;
  p.schema = random_schema(rng, groups);
  p.X = ssa::FeatureMatrix(p.schema.schema, 0);
  std::vector<double> weights(p.schema.schema->size());
  for (auto& w : weights) w = rng.uniform(-2.0, 2.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = random_row(rng, p.schema);
    double target = rng.normal(0.0, 0.5);
    for (std::size_t c = 0; c < row.size(); ++c) target += weights[c] * row[c];
    if (row.size() > 1) target += 0.5 * row[0] * row[row.size() - 1];
    p.X.append(row);
    p.y.push_back(target);
  }
  return p;
}

inline ssa::TargetSpec unbounded_target() { return {"y", -1e9, 1e9}; }

/// Forest with at most max_groups groups, max_trees trees and depth <=
/// max_depth, fitted to a random problem.
inline ssa::TreeEnsembleModel random_forest(ssa::Rng& rng, std::size_t max_groups,
                                            int max_trees, int max_depth,
                                            RandomSchema* schema_out = nullptr) {
  const std::size_t groups = 1 + rng.index(max_groups);
  const std::size_t rows = 10 + rng.index(60);
  auto problem = random_problem(rng, groups, rows);
  ssa::HyperParams hp;
  hp.n_trees = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_trees)));
  hp.max_depth = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_depth)));
  hp.min_samples_leaf = 1 + static_cast<int>(rng.index(3));
  hp.features_per_split = static_cast<ssa::FeatureSubset>(rng.index(3));
  hp.bootstrap = rng.bernoulli(0.8);
  hp.seed = rng.next();
  if (schema_out) *schema_out = problem.schema;
  return ssa::fit_forest(problem.X, problem.y, hp, unbounded_target());
}

}  // namespace testing_support
