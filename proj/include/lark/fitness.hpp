#pragma once

#include <cstddef>
#include <span>

namespace lark {

struct AdjustedFitness {
    double value = 0.0;
    bool penalized = false;
    bool clamped = false;
};

/// R = B * (1 - lambda * max(0, (T - T_target) / T_target)), floored at 0.
/// Throws ValidationError when target is 0, lambda is outside [0, 1], or B < 0.
AdjustedFitness compute_adjusted(double borda, std::size_t tokens, std::size_t target, double lambda);

/// Logistic sigma((R_i - mean) / tau). Throws ValidationError when tau <= 0.
double duplication_probability(double adjusted, double population_mean, double tau);

inline constexpr double kTauEpsilon = 1e-9;

/// Adaptive temperature 0.25 * (max R - min R + eps).
double adaptive_tau(std::span<const double> adjusted);

/// (1/k) * sum B_i / T_i over strategies with T_i > 0. Zero-token strategies
/// are excluded from the average (and logged); returns 0 when none remain.
double efficiency(std::span<const double> borda, std::span<const std::size_t> tokens);

}  // namespace lark
