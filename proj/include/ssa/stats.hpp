#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ssa {

double mean(std::span<const double> values);
double mean_absolute_error(std::span<const double> predicted,
                           std::span<const double> actual);
std::vector<double> absolute_errors(std::span<const double> predicted,
                                    std::span<const double> actual);

enum class Alternative { kTwoSided, kLess, kGreater };

std::string_view to_string(Alternative alternative);
std::optional<Alternative> parse_alternative(std::string_view text);

enum class RankSumMethod { kExact, kNormal };

struct RankSumResult {
  double u = 0.0;    // U statistic of sample a
  double u_b = 0.0;  // n_a * n_b - u
  double p = 1.0;
  RankSumMethod method = RankSumMethod::kExact;
};

/// Largest combined sample size that uses the exact null distribution.
inline constexpr std::size_t kExactRankSumLimit = 12;

/// Wilcoxon rank-sum (Mann-Whitney U) test. `less` tests whether a tends to
/// be smaller than b. Midranks for ties. Exact p by enumerating every
/// assignment of the pooled ranks when n_a + n_b <= kExactRankSumLimit;
/// normal approximation with tie and continuity correction above that.
/// Two-sided p = min(1, 2 * min(P(U <= u), P(U >= u))). Throws EmptySample.
RankSumResult rank_sum_test(std::span<const double> a,
                            std::span<const double> b,
                            Alternative alternative = Alternative::kTwoSided);

/// Midranks (1-based) of the pooled values.
std::vector<double> midranks(std::span<const double> values);

double normal_cdf(double z);

}  // namespace ssa
