#include <algorithm>
#include <numeric>

#include "ssa/error.hpp"
#include "ssa/forest.hpp"
#include "tree_internal.hpp"

namespace ssa {

TargetSpec priority_target() { return {"priority", kPriorityMin, kPriorityMax}; }

TargetSpec characteristic_target(Characteristic c, CharacteristicScale scale) {
  return {std::string(to_name(c)), 1.0, static_cast<double>(scale_max(scale))};
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kDecisionTree: return "decision_tree";
    case ModelKind::kMeanBaseline: return "mean_baseline";
  }
  return "random_forest";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  if (text == "random_forest") return ModelKind::kRandomForest;
  if (text == "decision_tree") return ModelKind::kDecisionTree;
  if (text == "mean_baseline") return ModelKind::kMeanBaseline;
  return std::nullopt;
}

double TreeEnsembleModel::predict_raw(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return sum / static_cast<double>(trees.size());
}

Prediction TreeEnsembleModel::predict_detailed(
    std::span<const double> x) const {
  const double raw = predict_raw(x);
  return {raw, std::clamp(raw, target.lo, target.hi)};
}

void check_schema(const TreeEnsembleModel& model, const Schema& schema) {
  if (!model.schema || !(*model.schema == schema)) {
    throw Error(ErrorCode::kSchemaMismatch, model.target.name,
                "input schema does not match the model schema");
  }
}

Prediction predict(const TreeEnsembleModel& model, const EncodedVector& x) {
  if (!x.schema || x.values.size() != x.schema->size()) {
    throw Error(ErrorCode::kSchemaMismatch, model.target.name,
                "vector has no schema");
  }
  if (x.schema != model.schema) check_schema(model, *x.schema);
  return model.predict_detailed(x.values);
}

namespace {

Tree grow_member(const FeatureMatrix& X, std::span<const double> y,
                 const std::vector<detail::ColumnIndex>& columns,
                 const HyperParams& hp, std::size_t t) {
  Rng rng(derive_seed(hp.seed, t));
  std::vector<std::size_t> sample(X.rows());
  if (hp.bootstrap) {
    for (auto& s : sample) s = rng.index(X.rows());
  } else {
    std::iota(sample.begin(), sample.end(), std::size_t{0});
  }
  return detail::grow_tree(X, y, columns, std::move(sample), hp, rng);
}

TreeEnsembleModel make_model(const FeatureMatrix& X, const HyperParams& hp,
                             const TargetSpec& target) {
  TreeEnsembleModel model;
  model.kind = ModelKind::kRandomForest;
  model.schema = X.schema();
  model.target = target;
  model.hyperparams = hp;
  model.metadata.seed = hp.seed;
  model.metadata.training_rows = X.rows();
  model.trees.resize(static_cast<std::size_t>(hp.n_trees));
  return model;
}

}  // namespace

TreeEnsembleModel fit_forest(const FeatureMatrix& X, std::span<const double> y,
                             const HyperParams& hp, const TargetSpec& target) {
  detail::check_training_input(X, y);
  hp.check();
  const auto columns = detail::index_columns(X);
  TreeEnsembleModel model = make_model(X, hp, target);
  const auto n = static_cast<std::ptrdiff_t>(model.trees.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    model.trees[t] = grow_member(X, y, columns, hp, static_cast<std::size_t>(t));
  }
  return model;
}

TreeEnsembleModel fit_forest_serial(const FeatureMatrix& X,
                                    std::span<const double> y,
                                    const HyperParams& hp,
                                    const TargetSpec& target) {
  detail::check_training_input(X, y);
  hp.check();
  const auto columns = detail::index_columns(X);
  TreeEnsembleModel model = make_model(X, hp, target);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    model.trees[t] = grow_member(X, y, columns, hp, t);
  }
  return model;
}

TreeEnsembleModel fit_decision_tree(const FeatureMatrix& X,
                                    std::span<const double> y,
                                    const HyperParams& hp,
                                    const TargetSpec& target) {
  HyperParams single = hp;
  single.n_trees = 1;
  single.bootstrap = false;
  single.features_per_split = FeatureSubset::kAll;
  TreeEnsembleModel model = fit_forest_serial(X, y, single, target);
  model.kind = ModelKind::kDecisionTree;
  return model;
}

TreeEnsembleModel fit_mean_baseline(std::span<const double> y,
                                    const TargetSpec& target,
                                    SchemaPtr schema) {
  if (y.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "y", "no training targets");
  }
  double sum = 0.0;
  for (double v : y) sum += v;
  TreeNode leaf;
  leaf.value = sum / static_cast<double>(y.size());
  leaf.coverage = static_cast<std::int64_t>(y.size());

  TreeEnsembleModel model;
  model.kind = ModelKind::kMeanBaseline;
  model.trees.emplace_back(std::vector<TreeNode>{leaf});
  model.schema = std::move(schema);
  model.target = target;
  model.hyperparams.n_trees = 1;
  model.hyperparams.bootstrap = false;
  model.metadata.training_rows = y.size();
  return model;
}

std::vector<Prediction> predict_batch(const TreeEnsembleModel& model,
                                      const FeatureMatrix& X) {
  if (X.schema()) check_schema(model, *X.schema());
  std::vector<Prediction> out(X.rows());
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    out[r] = model.predict_detailed(X.row(static_cast<std::size_t>(r)));
  }
  return out;
}

std::vector<Prediction> predict_batch_serial(const TreeEnsembleModel& model,
                                             const FeatureMatrix& X) {
  if (X.schema()) check_schema(model, *X.schema());
  std::vector<Prediction> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    out[r] = model.predict_detailed(X.row(r));
  }
  return out;
}

}  // namespace ssa
