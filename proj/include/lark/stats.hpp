#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lark::stats {

struct WilcoxonResult {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double w = 0.0;  // min(W+, W-)
    double p = 1.0;  // two-sided
    std::size_t n_effective = 0;
    bool exact = true;
    bool degenerate = false;  // every difference was zero
};

inline constexpr std::size_t kExactWilcoxonMaxN = 20;

/// Paired signed-rank test on differences. Zero differences are dropped,
/// tied magnitudes share average ranks. Exact null distribution for
/// n_eff <= 20, normal approximation with tie and continuity correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences);

/// Average ranks (1-based) of |d| for the nonzero differences, in input order
/// of the nonzero entries.
std::vector<double> signed_rank_magnitudes(std::span<const double> nonzero);

/// Exact two-sided p for the observed W+ given the rank multiset.
double wilcoxon_exact_p(std::span<const double> ranks, double w_plus);
/// Normal-approximation two-sided p with tie and continuity correction.
double wilcoxon_normal_p(std::span<const double> ranks, double w_plus);

/// Mean difference over the sample (n - 1) standard deviation. nullopt when
/// n < 2 or the deviation is zero.
std::optional<double> cohens_dz(std::span<const double> differences);

/// Holm step-down adjusted p-values, returned in input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

struct MeanCI {
    double mean = 0.0;
    std::optional<double> lower;  // nullopt when n < 2
    std::optional<double> upper;
};

/// mean +/- z * s / sqrt(n), z the two-sided normal quantile for `level`.
MeanCI mean_ci(std::span<const double> values, double level = 0.95);

/// z quantile for a two-sided interval at `level` (1.959964 at 0.95).
double normal_two_sided_quantile(double level);

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);

/// scores[system][round]; NaN marks a missing cell. Within each round,
/// rank 1 is the highest score among present systems, ties share the
/// average rank. Missing cells stay NaN.
std::vector<std::vector<double>> per_round_ranks(const std::vector<std::vector<double>>& scores);

}  // namespace lark::stats
