#include "ssa/stats.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "ssa/error.hpp"

namespace ssa {

double mean(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptySample, "values", "empty sample");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> absolute_errors(std::span<const double> predicted,
                                    std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorCode::kInvalidValue, "predicted",
                "prediction and label counts differ");
  }
  std::vector<double> out(predicted.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::abs(predicted[i] - actual[i]);
  }
  return out;
}

double mean_absolute_error(std::span<const double> predicted,
                           std::span<const double> actual) {
  const auto errors = absolute_errors(predicted, actual);
  return mean(errors);
}

std::string_view to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::kTwoSided: return "two_sided";
    case Alternative::kLess: return "less";
    case Alternative::kGreater: return "greater";
  }
  return "two_sided";
}

std::optional<Alternative> parse_alternative(std::string_view text) {
  if (text == "two_sided" || text == "two-sided") return Alternative::kTwoSided;
  if (text == "less") return Alternative::kLess;
  if (text == "greater") return Alternative::kGreater;
  return std::nullopt;
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return values[i] < values[j];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

struct Tails {
  double at_most;   // P(U <= u)
  double at_least;  // P(U >= u)
};

// Counts, over every subset of size n_a of the pooled (doubled) ranks, how
// many have a rank sum <= and >= the observed one. Doubling keeps midranks
// integral.
Tails exact_tails(const std::vector<double>& ranks, std::size_t n_a,
                  std::int64_t observed_doubled) {
  const std::size_t n = ranks.size();
  std::vector<std::int64_t> doubled(n);
  std::int64_t total_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = std::llround(ranks[i] * 2.0);
    total_sum += doubled[i];
  }
  // count[k][s]: subsets of size k with doubled sum s.
  std::vector<std::vector<std::uint64_t>> count(
      n_a + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(total_sum) + 1, 0));
  count[0][0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(doubled[i]);
    for (std::size_t k = std::min(n_a, i + 1); k-- > 0;) {
      auto& dst = count[k + 1];
      const auto& src = count[k];
      for (std::size_t s = src.size(); s-- > 0;) {
        if (src[s] != 0 && s + r < dst.size()) dst[s + r] += src[s];
      }
    }
  }
  std::uint64_t le = 0, ge = 0, all = 0;
  for (std::size_t s = 0; s < count[n_a].size(); ++s) {
    const auto c = count[n_a][s];
    all += c;
    if (static_cast<std::int64_t>(s) <= observed_doubled) le += c;
    if (static_cast<std::int64_t>(s) >= observed_doubled) ge += c;
  }
  return {static_cast<double>(le) / static_cast<double>(all),
          static_cast<double>(ge) / static_cast<double>(all)};
}

Tails normal_tails(double u, std::size_t n_a, std::size_t n_b,
                   const std::vector<double>& pooled) {
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  const double n = na + nb;
  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double variance =
      na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(variance > 0.0)) return {1.0, 1.0};
  const double sd = std::sqrt(variance);
  const double mu = na * nb / 2.0;
  return {normal_cdf((u - mu + 0.5) / sd), normal_cdf(-(u - mu - 0.5) / sd)};
}

}  // namespace

RankSumResult rank_sum_test(std::span<const double> a,
                            std::span<const double> b,
                            Alternative alternative) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kEmptySample, a.empty() ? "errors_a" : "errors_b",
                "rank-sum test needs two nonempty samples");
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  RankSumResult result;
  result.u = rank_sum_a - na * (na + 1.0) / 2.0;
  result.u_b = na * nb - result.u;

  Tails tails;
  if (pooled.size() <= kExactRankSumLimit) {
    result.method = RankSumMethod::kExact;
    tails = exact_tails(ranks, a.size(), std::llround(rank_sum_a * 2.0));
  } else {
    result.method = RankSumMethod::kNormal;
    tails = normal_tails(result.u, a.size(), b.size(), pooled);
  }
  double p = 1.0;
  switch (alternative) {
    case Alternative::kLess: p = tails.at_most; break;
    case Alternative::kGreater: p = tails.at_least; break;
    case Alternative::kTwoSided:
      p = 2.0 * std::min(tails.at_most, tails.at_least);
      break;
  }
  result.p = std::clamp(p, DBL_MIN, 1.0);
  return result;
}

}  // namespace ssa
