#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles/split_oracle.hpp"
#include "ssa/error.hpp"
#include "ssa/forest.hpp"
#include "ssa/model_io.hpp"
#include "ssa/stats.hpp"
#include "ssa/tuning.hpp"
#include "support/random_models.hpp"

using namespace ssa;
using testing_support::random_problem;
using testing_support::unbounded_target;

namespace {

FeatureMatrix one_column(const std::vector<double>& values) {
  auto schema = std::make_shared<Schema>(
      std::vector<SchemaColumn>{{"x", EncodingKind::kNumeric, 0}},
      std::vector<std::string>{"x"});
  FeatureMatrix X(schema, 0);
  for (double v : values) X.append(std::vector<double>{v});
  return X;
}

HyperParams single_tree(std::optional<int> depth = std::nullopt) {
  HyperParams hp;
  hp.n_trees = 1;
  hp.max_depth = depth;
  hp.bootstrap = false;
  return hp;
}

void check_coverage(const Tree& tree) {
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) continue;
    EXPECT_EQ(n.coverage, tree.node(n.left).coverage + tree.node(n.right).coverage);
  }
}

TreeEnsembleModel leaves(const std::vector<double>& values, TargetSpec target) {
  TreeEnsembleModel m;
  m.schema = one_column({0.0}).schema();
  m.target = target;
  for (double v : values) m.trees.push_back(Tree({TreeNode{-1, 0, -1, -1, v, 1}}));
  return m;
}

}  // namespace

TEST(FitTree, ConstantTargetIsOneLeaf) {
  Rng rng(1);
  const auto X = one_column({1, 2, 3, 4});
  const std::vector<double> y(4, 5.0);
  const Tree t = fit_tree(X, y, single_tree(), rng);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.root().value, 5.0);
}

TEST(FitTree, HandComputedSplit) {
  Rng rng(1);
  const auto X = one_column({0, 1});
  const std::vector<double> y = {2, 4};
  const Tree t = fit_tree(X, y, single_tree(1), rng);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.root().feature, 0);
  EXPECT_EQ(t.root().threshold, 0.5);
  EXPECT_EQ(t.node(t.root().left).value, 2.0);
  EXPECT_EQ(t.node(t.root().right).value, 4.0);
}

TEST(FitTree, RootSplitMatchesExhaustiveSearch) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_problem(rng, 1 + rng.index(5), 2 + rng.index(29));
    if (trial % 3 == 0) {
      for (auto& v : p.y) v = std::round(v);  // force tied candidates
    }
    Rng tree_rng(trial);
    const Tree t = fit_tree(p.X, p.y, single_tree(1 + trial % 3), tree_rng);
    const auto best = oracle::best_split(p.X, p.y);
    if (!best || t.root().is_leaf()) {
      // No split improves a constant target.
      const bool constant =
          std::all_of(p.y.begin(), p.y.end(), [&](double v) { return v == p.y[0]; });
      EXPECT_TRUE(constant || !best) << "trial " << trial;
      continue;
    }
    EXPECT_EQ(t.root().feature, best->feature) << "trial " << trial;
    EXPECT_EQ(t.root().threshold, best->threshold) << "trial " << trial;
    check_coverage(t);
  }
}

TEST(FitTree, UnlimitedDepthFitsDistinctRowsExactly) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_problem(rng, 2 + rng.index(6), 5 + rng.index(60));
    std::set<std::vector<double>> rows;
    FeatureMatrix X(p.X.schema(), 0);
    std::vector<double> y;
    for (std::size_t r = 0; r < p.X.rows(); ++r) {
      std::vector<double> row(p.X.row(r).begin(), p.X.row(r).end());
      if (rows.insert(row).second) {
        X.append(row);
        y.push_back(p.y[r]);
      }
    }
    Rng tree_rng(trial);
    const Tree t = fit_tree(X, y, single_tree(), tree_rng);
    std::set<std::size_t> leaves_hit;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      EXPECT_EQ(t.predict(X.row(r)), y[r]);
      leaves_hit.insert(t.leaf_index(X.row(r)));
    }
    EXPECT_EQ(leaves_hit.size(), X.rows());
    check_coverage(t);
  }
}

TEST(FitTree, RespectsDepthAndLeafSize) {
  Rng rng(9);
  auto p = random_problem(rng, 5, 80);
  HyperParams hp = single_tree(3);
  hp.min_samples_leaf = 7;
  Rng tree_rng(1);
  const Tree t = fit_tree(p.X, p.y, hp, tree_rng);
  EXPECT_LE(t.depth(), 3);
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) EXPECT_GE(n.coverage, 7);
  }
}

TEST(FitForest, SingleUnbaggedTreeEqualsFitTree) {
  Rng rng(3);
  auto p = random_problem(rng, 4, 40);
  HyperParams hp = single_tree();
  const auto model = fit_forest(p.X, p.y, hp, unbounded_target());
  Rng tree_rng(derive_seed(hp.seed, 0));
  const Tree t = fit_tree(p.X, p.y, hp, tree_rng);
  for (std::size_t r = 0; r < p.X.rows(); ++r) {
    EXPECT_EQ(model.predict_raw(p.X.row(r)), t.predict(p.X.row(r)));
  }
}

TEST(FitForest, ConstantTarget) {
  Rng rng(4);
  auto p = random_problem(rng, 3, 30);
  std::vector<double> y(p.y.size(), 3.25);
  HyperParams hp;
  hp.n_trees = 10;
  const auto model = fit_forest(p.X, y, hp, priority_target());
  for (std::size_t r = 0; r < p.X.rows(); ++r) EXPECT_EQ(model.predict(p.X.row(r)), 3.25);
}

TEST(FitForest, ParallelMatchesSerialBitForBit) {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_problem(rng, 6, 120);
    HyperParams hp;
    hp.n_trees = 25;
    hp.features_per_split = FeatureSubset::kSqrt;
    hp.min_samples_leaf = 2;
    hp.seed = rng.next();
    const auto a = fit_forest(p.X, p.y, hp, unbounded_target());
    const auto b = fit_forest_serial(p.X, p.y, hp, unbounded_target());
    EXPECT_EQ(a.trees, b.trees);
    const auto c = fit_forest(p.X, p.y, hp, unbounded_target());
    EXPECT_EQ(a.trees, c.trees);
    const auto pa = predict_batch(a, p.X);
    const auto pb = predict_batch_serial(a, p.X);
    for (std::size_t r = 0; r < pa.size(); ++r) EXPECT_EQ(pa[r].raw, pb[r].raw);
  }
}

TEST(FitForest, PredictionIsMeanOfTrees) {
  Rng rng(8);
  auto p = random_problem(rng, 5, 60);
  HyperParams hp;
  hp.n_trees = 17;
  const auto model = fit_forest(p.X, p.y, hp, unbounded_target());
  for (std::size_t r = 0; r < p.X.rows(); ++r) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.predict(p.X.row(r));
    EXPECT_NEAR(model.predict_raw(p.X.row(r)), sum / 17.0, 1e-12);
  }
  for (const auto& t : model.trees) check_coverage(t);
}

TEST(Predict, MeanAndClamp) {
  EXPECT_EQ(leaves({3.2}, priority_target()).predict(std::vector<double>{9.0}), 3.2);
  EXPECT_EQ(leaves({2, 4}, priority_target()).predict(std::vector<double>{0.0}), 3.0);
  const auto m = leaves({7.4}, priority_target());
  const auto d = m.predict_detailed(std::vector<double>{0.0});
  EXPECT_EQ(d.clamped, 7.0);
  EXPECT_DOUBLE_EQ(d.raw, 7.4);
}

TEST(Baseline, PredictsTrainingMean) {
  const auto X = one_column({0, 1});
  const std::vector<double> y = {1, 7};
  const auto m = fit_mean_baseline(y, priority_target(), X.schema());
  EXPECT_EQ(m.predict(std::vector<double>{123.0}), 4.0);
  const std::vector<double> c(5, 2.5);
  const auto k = fit_mean_baseline(c, priority_target(), X.schema());
  for (double v : c) EXPECT_EQ(std::abs(k.predict(std::vector<double>{0.0}) - v), 0.0);
}

TEST(FitForest, BeatsBaselineOnCopiedComponent) {
  Rng rng(10);
  auto schema = std::make_shared<Schema>(
      std::vector<SchemaColumn>{{"duty", EncodingKind::kOrdinal, 0},
                                {"noise", EncodingKind::kNumeric, 1}},
      std::vector<std::string>{"duty", "noise"});
  FeatureMatrix train(schema, 0), test(schema, 0);
  std::vector<double> ytrain, ytest;
  for (int i = 0; i < 400; ++i) {
    const double duty = 1.0 + static_cast<double>(rng.index(6));
    const double noise = rng.uniform();
    (i < 300 ? train : test).append(std::vector<double>{duty, noise});
    (i < 300 ? ytrain : ytest).push_back(duty);
  }
  HyperParams hp;
  hp.n_trees = 20;
  const auto forest = fit_forest(train, ytrain, hp, priority_target());
  const auto base = fit_mean_baseline(ytrain, priority_target(), schema);
  std::vector<double> pf, pb;
  for (std::size_t r = 0; r < test.rows(); ++r) {
    pf.push_back(forest.predict(test.row(r)));
    pb.push_back(base.predict(test.row(r)));
  }
  // Baseline error is the mean absolute deviation about the training mean.
  const double m = mean(ytrain);
  double mad = 0.0;
  for (double v : ytest) mad += std::abs(v - m);
  mad /= static_cast<double>(ytest.size());
  EXPECT_NEAR(mean_absolute_error(pb, ytest), mad, 1e-12);
  EXPECT_LT(mean_absolute_error(pf, ytest), mad);
  EXPECT_LT(mean_absolute_error(pf, ytest), 0.05);
}

TEST(Tuning, FoldSizes) {
  EXPECT_EQ(fold_sizes(103, 5), (std::vector<std::size_t>{21, 21, 21, 20, 20}));
  const auto folds = assign_folds(103, 5, 1);
  std::vector<std::size_t> count(5, 0);
  for (auto f : folds) ++count[f];
  EXPECT_EQ(count, fold_sizes(103, 5));
  EXPECT_EQ(folds, assign_folds(103, 5, 1));
}

TEST(Tuning, SingleCellGrid) {
  Rng rng(11);
  auto p = random_problem(rng, 3, 40);
  HyperParams hp;
  hp.n_trees = 3;
  hp.max_depth = 2;
  const auto cv = cross_validate(p.X, p.y, {hp}, 4, 1, unbounded_target());
  EXPECT_EQ(cv.best, hp);
  EXPECT_EQ(cv.cells.size(), 1u);
  EXPECT_EQ(cv.cells[0].fold_mae.size(), 4u);
}

TEST(Tuning, PrefersLowerErrorCell) {
  std::vector<double> xs, y;
  for (int i = 0; i < 90; ++i) {
    xs.push_back(i);
    y.push_back(i < 30 ? 1.0 : (i < 60 ? 4.0 : 7.0));
  }
  const auto X = one_column(xs);
  const auto stump = single_tree(0);
  const auto deep = single_tree(4);
  const auto cv = cross_validate(X, y, {stump, deep}, 5, 3, priority_target());
  EXPECT_EQ(cv.best, deep);
  EXPECT_GT(cv.cells[0].mean_mae, cv.cells[1].mean_mae);
}

TEST(Tuning, TiesGoToFewerTreesThenShallower) {
  Rng rng(12);
  auto p = random_problem(rng, 3, 40);
  HyperParams many = single_tree(3);
  many.n_trees = 4;  // unbagged, all features: identical trees
  HyperParams one = single_tree(3);
  HyperParams deeper = single_tree(9);
  const auto cv = cross_validate(p.X, p.y, {many, deeper, one}, 4, 2, unbounded_target());
  EXPECT_EQ(cv.cells[0].mean_mae, cv.cells[2].mean_mae);
  if (cv.cells[1].mean_mae == cv.cells[2].mean_mae) {
    EXPECT_EQ(cv.best, one);
  } else {
    EXPECT_NE(cv.best, many);
  }
}

TEST(Tuning, EmptyGridRejected) {
  Rng rng(13);
  auto p = random_problem(rng, 2, 20);
  try {
    cross_validate(p.X, p.y, {}, 3, 1, unbounded_target());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridEmpty);
  }
}

TEST(ModelIo, RoundTripPreservesPredictionsExactly) {
  Rng rng(14);
  testing_support::RandomSchema schema;
  const auto model = testing_support::random_forest(rng, 8, 30, 6, &schema);
  const auto text = serialize_model(model);
  const auto back = parse_model(text);
  EXPECT_EQ(back.trees, model.trees);
  EXPECT_EQ(*back.schema, *model.schema);
  EXPECT_EQ(back.hyperparams, model.hyperparams);
  EXPECT_EQ(serialize_model(back), text);
  for (int i = 0; i < 1000; ++i) {
    const auto x = testing_support::random_row(rng, schema);
    EXPECT_EQ(back.predict_raw(x), model.predict_raw(x));
  }
}

TEST(ModelIo, RejectsUnknownMajorVersionAndGarbage) {
  Rng rng(15);
  const auto model = testing_support::random_forest(rng, 3, 3, 2);
  auto j = nlohmann::json::parse(serialize_model(model));
  j["format_version"] = "2.0";
  try {
    parse_model(j.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedVersion);
  }
  try {
    parse_model("{not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
  }
}

TEST(ModelIo, SchemaMismatchOnPredict) {
  Rng rng(16);
  const auto model = testing_support::random_forest(rng, 3, 3, 2);
  const FeatureEncoder enc;
  EncodedVector wrong{std::vector<double>(enc.schema()->size(), 0.0), enc.schema()};
  try {
    predict(model, wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}
