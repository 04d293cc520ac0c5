#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ssa/error.hpp"
#include "ssa/forest.hpp"
#include "tree_internal.hpp"

namespace ssa {

int Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> depth(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    best = std::max(best, depth[i]);
    if (!n.is_leaf()) {
      depth[n.left] = depth[i] + 1;
      depth[n.right] = depth[i] + 1;
    }
  }
  return best;
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

std::string_view to_string(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::kAll: return "all";
    case FeatureSubset::kSqrt: return "sqrt";
    case FeatureSubset::kOneThird: return "one_third";
  }
  return "all";
}

std::optional<FeatureSubset> parse_feature_subset(std::string_view text) {
  if (text == "all") return FeatureSubset::kAll;
  if (text == "sqrt") return FeatureSubset::kSqrt;
  if (text == "one_third") return FeatureSubset::kOneThird;
  return std::nullopt;
}

std::size_t subset_size(FeatureSubset subset, std::size_t n_features) {
  std::size_t k = n_features;
  switch (subset) {
    case FeatureSubset::kAll: break;
    case FeatureSubset::kSqrt:
      k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
      break;
    case FeatureSubset::kOneThird: k = n_features / 3; break;
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

void HyperParams::check() const {
  if (n_trees < 1) {
    throw Error(ErrorCode::kOutOfRange, "n_trees", "n_trees must be >= 1");
  }
  if (max_depth && *max_depth < 0) {
    throw Error(ErrorCode::kOutOfRange, "max_depth", "max_depth must be >= 0");
  }
  if (min_samples_leaf < 1) {
    throw Error(ErrorCode::kOutOfRange, "min_samples_leaf",
                "min_samples_leaf must be >= 1");
  }
}

std::string HyperParams::describe() const {
  std::ostringstream out;
  out << "n_trees=" << n_trees << " max_depth="
      << (max_depth ? std::to_string(*max_depth) : std::string("unlimited"))
      << " min_samples_leaf=" << min_samples_leaf
      << " features_per_split=" << to_string(features_per_split)
      << " bootstrap=" << (bootstrap ? "true" : "false");
  return out.str();
}

namespace detail {

std::vector<ColumnIndex> index_columns(const FeatureMatrix& X) {
  std::vector<ColumnIndex> out(X.cols());
  std::vector<double> values(X.rows());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    for (std::size_t r = 0; r < X.rows(); ++r) values[r] = X.at(r, c);
    auto& col = out[c];
    col.distinct = values;
    std::sort(col.distinct.begin(), col.distinct.end());
    col.distinct.erase(std::unique(col.distinct.begin(), col.distinct.end()),
                       col.distinct.end());
    col.rank.resize(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
      col.rank[r] = static_cast<std::uint32_t>(
          std::lower_bound(col.distinct.begin(), col.distinct.end(),
                           values[r]) -
          col.distinct.begin());
    }
  }
  return out;
}

void check_training_input(const FeatureMatrix& X, std::span<const double> y) {
  if (X.rows() == 0 || y.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "X", "no training rows");
  }
  if (X.rows() != y.size()) {
    throw Error(ErrorCode::kSchemaMismatch, "y",
                "X and y differ in length");
  }
  if (!X.schema() || X.schema()->size() != X.cols()) {
    throw Error(ErrorCode::kSchemaMismatch, "X", "matrix has no schema");
  }
}

}  // namespace detail

namespace {

using detail::ColumnIndex;

double midpoint(double a, double b) {
  double mid = a + (b - a) / 2.0;
  if (mid >= b || !std::isfinite(mid)) mid = a;
  return mid;
}

struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum_l^2 / n_l + sum_r^2 / n_r, larger is better
};

bool better(const SplitCandidate& c, const SplitCandidate& best) {
  if (!best.valid) return true;
  const double tol = 1e-12 * std::max(1.0, std::abs(best.score));
  if (c.score > best.score + tol) return true;
  if (c.score < best.score - tol) return false;
  if (c.feature != best.feature) return c.feature < best.feature;
  return c.threshold < best.threshold;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& X, std::span<const double> y,
              const std::vector<ColumnIndex>& columns, const HyperParams& hp,
              Rng& rng)
      : X_(X),
        y_(y),
        hp_(hp),
        rng_(rng),
        columns_(columns),
        features_(X.cols()) {
    std::iota(features_.begin(), features_.end(), 0);
    k_ = subset_size(hp.features_per_split, X.cols());
    std::size_t widest = 0;
    for (const auto& c : columns_) widest = std::max(widest, c.distinct.size());
    bucket_count_.assign(widest, 0);
    bucket_sum_.assign(widest, 0.0);
  }

  Tree build(std::vector<std::size_t> sample) {
    nodes_.clear();
    grow(sample, 0);
    return Tree(std::move(nodes_));
  }

 private:
  int grow(std::span<std::size_t> sample, int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0;
    double lo = y_[sample[0]], hi = y_[sample[0]];
    for (auto r : sample) {
      sum += y_[r];
      lo = std::min(lo, y_[r]);
      hi = std::max(hi, y_[r]);
    }
    nodes_[index].value = sum / static_cast<double>(sample.size());
    nodes_[index].coverage = static_cast<std::int64_t>(sample.size());

    const bool depth_reached = hp_.max_depth && depth >= *hp_.max_depth;
    const auto n = static_cast<std::size_t>(sample.size());
    if (depth_reached || lo == hi ||
        n < 2 * static_cast<std::size_t>(hp_.min_samples_leaf)) {
      return index;
    }
    const SplitCandidate split = find_split(sample);
    if (!split.valid) return index;

    auto mid = std::stable_partition(sample.begin(), sample.end(),
                                     [&](std::size_t r) {
                                       return X_.at(r, split.feature) <=
                                              split.threshold;
                                     });
    const auto n_left = static_cast<std::size_t>(mid - sample.begin());
    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    const int left = grow(sample.subspan(0, n_left), depth + 1);
    const int right = grow(sample.subspan(n_left), depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  SplitCandidate find_split(std::span<const std::size_t> sample) {
    SplitCandidate best;
    if (k_ >= features_.size()) {
      for (std::size_t f = 0; f < features_.size(); ++f) {
        evaluate(sample, f, best);
      }
      return best;
    }
    // Shuffle; the first k entries become the candidate subset.
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const std::size_t j = i + rng_.index(features_.size() - i);
      std::swap(features_[i], features_[j]);
    }
    std::vector<std::size_t> subset(features_.begin(), features_.begin() + k_);
    std::sort(subset.begin(), subset.end());
    for (auto f : subset) evaluate(sample, f, best);
    // Keep drawing when the subset offers no admissible split.
    for (std::size_t i = k_; !best.valid && i < features_.size(); ++i) {
      evaluate(sample, features_[i], best);
    }
    return best;
  }

  void evaluate(std::span<const std::size_t> sample, std::size_t f,
                SplitCandidate& best) {
    const ColumnIndex& col = columns_[f];
    const std::size_t d = col.distinct.size();
    if (d < 2) return;
    runs_.clear();
    if (d <= 4 * sample.size()) {
      for (auto r : sample) {
        const auto b = col.rank[r];
        ++bucket_count_[b];
        bucket_sum_[b] += y_[r];
      }
      for (std::size_t b = 0; b < d; ++b) {
        if (bucket_count_[b]) {
          runs_.push_back({static_cast<std::uint32_t>(b), bucket_count_[b],
                           bucket_sum_[b]});
          bucket_count_[b] = 0;
          bucket_sum_[b] = 0.0;
        }
      }
    } else {
      scratch_.clear();
      for (auto r : sample) scratch_.push_back({col.rank[r], r});
      std::sort(scratch_.begin(), scratch_.end());
      for (const auto& [rank, r] : scratch_) {
        if (runs_.empty() || runs_.back().rank != rank) {
          runs_.push_back({rank, 0, 0.0});
        }
        ++runs_.back().count;
        runs_.back().sum += y_[r];
      }
    }
    if (runs_.size() < 2) return;

    double total = 0.0;
    std::size_t n = 0;
    for (const auto& run : runs_) {
      total += run.sum;
      n += run.count;
    }
    const std::size_t min_leaf = hp_.min_samples_leaf;
    double left_sum = 0.0;
    std::size_t left_n = 0;
    for (std::size_t i = 0; i + 1 < runs_.size(); ++i) {
      left_sum += runs_[i].sum;
      left_n += runs_[i].count;
      const std::size_t right_n = n - left_n;
      if (left_n < min_leaf) continue;
      if (right_n < min_leaf) break;
      const double right_sum = total - left_sum;
      SplitCandidate c;
      c.valid = true;
      c.feature = static_cast<int>(f);
      c.threshold = midpoint(col.distinct[runs_[i].rank],
                             col.distinct[runs_[i + 1].rank]);
      c.score = left_sum * left_sum / static_cast<double>(left_n) +
                right_sum * right_sum / static_cast<double>(right_n);
      if (better(c, best)) best = c;
    }
  }

  struct Run {
    std::uint32_t rank;
    std::size_t count;
    double sum;
  };

  const FeatureMatrix& X_;
  std::span<const double> y_;
  const HyperParams& hp_;
  Rng& rng_;
  const std::vector<ColumnIndex>& columns_;
  std::vector<std::size_t> features_;
  std::size_t k_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> bucket_count_;
  std::vector<double> bucket_sum_;
  std::vector<Run> runs_;
  std::vector<std::pair<std::uint32_t, std::size_t>> scratch_;
};

}  // namespace

Tree detail::grow_tree(const FeatureMatrix& X, std::span<const double> y,
                       const std::vector<ColumnIndex>& columns,
                       std::vector<std::size_t> sample, const HyperParams& hp,
                       Rng& rng) {
  TreeBuilder builder(X, y, columns, hp, rng);
  return builder.build(std::move(sample));
}

Tree fit_tree_on_sample(const FeatureMatrix& X, std::span<const double> y,
                        std::span<const std::size_t> sample,
                        const HyperParams& hp, Rng& rng) {
  detail::check_training_input(X, y);
  hp.check();
  if (sample.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "sample", "empty sample");
  }
  const auto columns = detail::index_columns(X);
  return detail::grow_tree(
      X, y, columns, std::vector<std::size_t>(sample.begin(), sample.end()),
      hp, rng);
}

Tree fit_tree(const FeatureMatrix& X, std::span<const double> y,
              const HyperParams& hp, Rng& rng) {
  detail::check_training_input(X, y);
  std::vector<std::size_t> sample(X.rows());
  std::iota(sample.begin(), sample.end(), std::size_t{0});
  return fit_tree_on_sample(X, y, sample, hp, rng);
}

}  // namespace ssa
