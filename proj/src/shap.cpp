#include "ssa/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "ssa/error.hpp"

namespace ssa {

double Attribution::total() const {
  double sum = base_value;
  for (double v : grouped_phi) sum += v;
  return sum;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kIncreasesPriority: return "increases_priority";
    case Direction::kDecreasesPriority: return "decreases_priority";
    case Direction::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

namespace {

std::vector<std::size_t> column_groups(const Schema& schema) {
  std::vector<std::size_t> groups(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) groups[c] = schema.group_of(c);
  return groups;
}

void check_input(const TreeEnsembleModel& model, std::span<const double> x) {
  if (!model.schema || model.trees.empty()) {
    throw Error(ErrorCode::kModelNotLoaded, "model", "model is empty");
  }
  if (x.size() != model.schema->size()) {
    throw Error(ErrorCode::kSchemaMismatch, model.target.name,
                "input width does not match schema");
  }
}

// Spreads each group's value onto one member column: the active component of
// a one-hot block, otherwise the group's first column.
std::vector<double> spread_to_columns(const Schema& schema,
                                      std::span<const double> x,
                                      const std::vector<double>& grouped) {
  std::vector<double> phi(schema.size(), 0.0);
  for (std::size_t g = 0; g < schema.group_count(); ++g) {
    const auto& cols = schema.group_columns(g);
    if (cols.empty()) continue;
    std::size_t target = cols.front();
    for (auto c : cols) {
      if (schema.column(c).kind == EncodingKind::kOneHotComponent &&
          x[c] == 1.0) {
        target = c;
        break;
      }
    }
    phi[target] = grouped[g];
  }
  return phi;
}

// Coverage-weighted expectation of a tree given that the groups in `mask`
// are known.
double conditional_expectation(const Tree& tree, std::size_t node,
                               std::span<const double> x,
                               std::span<const std::size_t> groups,
                               std::uint64_t mask) {
  const TreeNode& n = tree.node(node);
  if (n.is_leaf()) return n.value;
  if ((mask >> groups[n.feature]) & 1U) {
    const std::size_t next = x[n.feature] <= n.threshold ? n.left : n.right;
    return conditional_expectation(tree, next, x, groups, mask);
  }
  const TreeNode& l = tree.node(n.left);
  const TreeNode& r = tree.node(n.right);
  return (static_cast<double>(l.coverage) *
              conditional_expectation(tree, n.left, x, groups, mask) +
          static_cast<double>(r.coverage) *
              conditional_expectation(tree, n.right, x, groups, mask)) /
         static_cast<double>(n.coverage);
}

struct PathElement {
  std::ptrdiff_t group;
  double zero_fraction;
  double one_fraction;
  double weight;
};

void extend_path(PathElement* path, std::size_t depth, double zero_fraction,
                 double one_fraction, std::ptrdiff_t group) {
  path[depth] = {group, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  const double d1 = static_cast<double>(depth + 1);
  for (std::size_t k = depth; k-- > 0;) {
    path[k + 1].weight += one_fraction * path[k].weight * (k + 1) / d1;
    path[k].weight = zero_fraction * path[k].weight * (depth - k) / d1;
  }
}

void unwind_path(PathElement* path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const double d1 = static_cast<double>(depth + 1);
  double next_one_portion = path[depth].weight;
  for (std::size_t k = depth; k-- > 0;) {
    if (one != 0.0) {
      const double tmp = path[k].weight;
      path[k].weight = next_one_portion * d1 / ((k + 1) * one);
      next_one_portion = tmp - path[k].weight * zero * (depth - k) / d1;
    } else {
      path[k].weight = path[k].weight * d1 / (zero * (depth - k));
    }
  }
  for (std::size_t k = index; k < depth; ++k) {
    path[k].group = path[k + 1].group;
    path[k].zero_fraction = path[k + 1].zero_fraction;
    path[k].one_fraction = path[k + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, std::size_t depth,
                        std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const double d1 = static_cast<double>(depth + 1);
  double next_one_portion = path[depth].weight;
  double total = 0.0;
  for (std::size_t k = depth; k-- > 0;) {
    if (one != 0.0) {
      const double tmp = next_one_portion * d1 / ((k + 1) * one);
      total += tmp;
      next_one_portion = path[k].weight - tmp * zero * (depth - k) / d1;
    } else if (zero != 0.0) {
      total += path[k].weight / zero / ((depth - k) / d1);
    }
  }
  return total;
}

class TreeShap {
 public:
  TreeShap(const Tree& tree, std::span<const double> x,
           std::span<const std::size_t> groups, std::vector<double>& phi)
      : tree_(tree), x_(x), groups_(groups), phi_(phi) {
    const auto d = static_cast<std::size_t>(tree.depth()) + 2;
    buffer_.resize(d * (d + 1) / 2 + d);
  }

  void run() { recurse(0, 0, buffer_.data(), 1.0, 1.0, -1); }

 private:
  void recurse(std::size_t node, std::size_t depth, PathElement* parent_path,
               double zero_fraction, double one_fraction,
               std::ptrdiff_t group) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, zero_fraction, one_fraction, group);

    const TreeNode& n = tree_.node(node);
    if (n.is_leaf()) {
      for (std::size_t i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const PathElement& el = path[i];
        phi_[static_cast<std::size_t>(el.group)] +=
            w * (el.one_fraction - el.zero_fraction) * n.value;
      }
      return;
    }

    const bool go_left = x_[n.feature] <= n.threshold;
    const std::size_t hot = go_left ? n.left : n.right;
    const std::size_t cold = go_left ? n.right : n.left;
    const double cover = static_cast<double>(n.coverage);
    const double hot_zero = tree_.node(hot).coverage / cover;
    const double cold_zero = tree_.node(cold).coverage / cover;
    const auto split_group = static_cast<std::ptrdiff_t>(groups_[n.feature]);

    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    std::size_t k = 0;
    for (; k <= depth; ++k) {
      if (path[k].group == split_group) break;
    }
    if (k != depth + 1) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      unwind_path(path, depth, k);
      --depth;
    }
    recurse(hot, depth + 1, path, hot_zero * incoming_zero, incoming_one,
            split_group);
    recurse(cold, depth + 1, path, cold_zero * incoming_zero, 0.0,
            split_group);
  }

  const Tree& tree_;
  std::span<const double> x_;
  std::span<const std::size_t> groups_;
  std::vector<double>& phi_;
  std::vector<PathElement> buffer_;
};

// v(empty set): coverage-weighted mean of the leaves, which equals the root
// value for fitted trees up to rounding.
double expected_value(const Tree& tree, std::size_t node) {
  const TreeNode& n = tree.node(node);
  if (n.is_leaf()) return n.value;
  const double l = static_cast<double>(tree.node(n.left).coverage);
  const double r = static_cast<double>(tree.node(n.right).coverage);
  return (l * expected_value(tree, n.left) + r * expected_value(tree, n.right)) /
         (l + r);
}

double root_expectation(const TreeEnsembleModel& model) {
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += expected_value(tree, 0);
  return sum / static_cast<double>(model.trees.size());
}

}  // namespace

std::vector<double> tree_shap_grouped(const Tree& tree,
                                      std::span<const double> x,
                                      std::span<const std::size_t> groups,
                                      std::size_t n_groups) {
  std::vector<double> phi(n_groups, 0.0);
  if (tree.size() > 1) TreeShap(tree, x, groups, phi).run();
  return phi;
}

Attribution shap_exact(const TreeEnsembleModel& model,
                       std::span<const double> x, std::size_t max_features) {
  check_input(model, x);
  const Schema& schema = *model.schema;
  const std::size_t n_groups = schema.group_count();
  if (n_groups > max_features || n_groups > 30) {
    throw Error(ErrorCode::kTooManyFeatures, model.target.name,
                std::to_string(n_groups) +
                    " feature groups exceed the exact limit; use shap_fast");
  }
  const auto groups = column_groups(schema);
  const std::uint64_t n_masks = std::uint64_t{1} << n_groups;

  std::vector<double> value(n_masks, 0.0);
  for (const auto& tree : model.trees) {
    for (std::uint64_t m = 0; m < n_masks; ++m) {
      value[m] += conditional_expectation(tree, 0, x, groups, m);
    }
  }
  const double n_trees = static_cast<double>(model.trees.size());
  for (auto& v : value) v /= n_trees;

  // Shapley weight |S|!(G-|S|-1)!/G! = 1 / (G * C(G-1, |S|)).
  std::vector<double> weight(n_groups, 0.0);
  for (std::size_t s = 0; s < n_groups; ++s) {
    double binom = 1.0;
    for (std::size_t i = 0; i < s; ++i) {
      binom = binom * static_cast<double>(n_groups - 1 - i) /
              static_cast<double>(i + 1);
    }
    weight[s] = 1.0 / (static_cast<double>(n_groups) * binom);
  }

  Attribution out;
  out.base_value = value[0];
  out.grouped_phi.assign(n_groups, 0.0);
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::uint64_t bit = std::uint64_t{1} << g;
    double phi = 0.0;
    for (std::uint64_t m = 0; m < n_masks; ++m) {
      if (m & bit) continue;
      phi += weight[static_cast<std::size_t>(std::popcount(m))] *
             (value[m | bit] - value[m]);
    }
    out.grouped_phi[g] = phi;
  }
  out.phi = spread_to_columns(schema, x, out.grouped_phi);
  return out;
}

Attribution shap_exact(const TreeEnsembleModel& model, const EncodedVector& x,
                       std::size_t max_features) {
  if (x.schema && x.schema != model.schema) check_schema(model, *x.schema);
  return shap_exact(model, std::span<const double>(x.values), max_features);
}

Attribution shap_fast(const TreeEnsembleModel& model,
                      std::span<const double> x) {
  check_input(model, x);
  const Schema& schema = *model.schema;
  const auto groups = column_groups(schema);
  Attribution out;
  out.base_value = root_expectation(model);
  out.grouped_phi.assign(schema.group_count(), 0.0);
  std::vector<double> phi(schema.group_count(), 0.0);
  for (const auto& tree : model.trees) {
    if (tree.size() > 1) TreeShap(tree, x, groups, phi).run();
  }
  const double n_trees = static_cast<double>(model.trees.size());
  for (std::size_t g = 0; g < phi.size(); ++g) out.grouped_phi[g] = phi[g] / n_trees;
  out.phi = spread_to_columns(schema, x, out.grouped_phi);
  return out;
}

Attribution shap_fast(const TreeEnsembleModel& model, const EncodedVector& x) {
  if (x.schema && x.schema != model.schema) check_schema(model, *x.schema);
  return shap_fast(model, std::span<const double>(x.values));
}

std::vector<Attribution> shap_batch(const TreeEnsembleModel& model,
                                    const FeatureMatrix& X) {
  if (X.schema()) check_schema(model, *X.schema());
  std::vector<Attribution> out(X.rows());
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    out[r] = shap_fast(model, X.row(static_cast<std::size_t>(r)));
  }
  return out;
}

std::vector<Attribution> shap_batch_serial(const TreeEnsembleModel& model,
                                           const FeatureMatrix& X) {
  if (X.schema()) check_schema(model, *X.schema());
  std::vector<Attribution> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = shap_fast(model, X.row(r));
  return out;
}

std::vector<std::string> SalienceReport::ranked_names() const {
  std::vector<std::string> out;
  for (auto g : ranking) out.push_back(group_names[g]);
  return out;
}

std::size_t SalienceReport::rank_of(std::string_view group) const {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (group_names[ranking[i]] == group) return i;
  }
  throw Error(ErrorCode::kUnknownFeature, std::string(group),
              "feature not in salience report");
}

namespace {

Direction covariance_direction(const FeatureMatrix& X, std::size_t column,
                               std::size_t group,
                               const std::vector<Attribution>& attributions) {
  const std::size_t n = X.rows();
  double mean_x = 0.0, mean_phi = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    mean_x += X.at(r, column);
    mean_phi += attributions[r].grouped_phi[group];
  }
  mean_x /= static_cast<double>(n);
  mean_phi /= static_cast<double>(n);
  double cov = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    cov += (X.at(r, column) - mean_x) *
           (attributions[r].grouped_phi[group] - mean_phi);
  }
  cov /= static_cast<double>(n);
  if (std::abs(cov) < kDirectionTolerance) return Direction::kIndeterminate;
  return cov > 0 ? Direction::kIncreasesPriority
                 : Direction::kDecreasesPriority;
}

void check_dataset(const TreeEnsembleModel& model, const FeatureMatrix& X) {
  if (X.rows() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "dataset", "dataset is empty");
  }
  if (X.schema()) check_schema(model, *X.schema());
}

}  // namespace

SalienceReport salience_from_attributions(
    const TreeEnsembleModel& model, const FeatureMatrix& X,
    const std::vector<Attribution>& attributions) {
  check_dataset(model, X);
  const Schema& schema = *model.schema;
  SalienceReport report;
  report.group_names = schema.groups();
  report.mean_abs_phi.assign(schema.group_count(), 0.0);
  for (const auto& a : attributions) {
    for (std::size_t g = 0; g < schema.group_count(); ++g) {
      report.mean_abs_phi[g] += std::abs(a.grouped_phi[g]);
    }
  }
  for (auto& v : report.mean_abs_phi) v /= static_cast<double>(X.rows());
  report.ranking.resize(schema.group_count());
  std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return report.mean_abs_phi[a] > report.mean_abs_phi[b];
                   });
  report.column_direction.resize(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    report.column_direction[c] =
        covariance_direction(X, c, schema.group_of(c), attributions);
  }
  return report;
}

SalienceReport global_salience(const TreeEnsembleModel& model,
                               const FeatureMatrix& X) {
  check_dataset(model, X);
  return salience_from_attributions(model, X, shap_batch(model, X));
}

Direction feature_direction(const TreeEnsembleModel& model,
                            const FeatureMatrix& X,
                            std::string_view feature) {
  check_dataset(model, X);
  const auto column = model.schema->find_column(feature);
  if (!column) {
    throw Error(ErrorCode::kUnknownFeature, std::string(feature),
                "feature '" + std::string(feature) + "' not in schema");
  }
  const auto attributions = shap_batch(model, X);
  return covariance_direction(X, *column, model.schema->group_of(*column),
                              attributions);
}

}  // namespace ssa
