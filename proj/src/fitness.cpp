#include "lark/fitness.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lark/error.hpp"

namespace lark {

AdjustedFitness compute_adjusted(double borda, std::size_t tokens, std::size_t target, double lambda) {
    if (target == 0) throw ValidationError("target token count must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError(fmt::format("lambda {} outside [0, 1]", lambda));
    if (!(borda >= 0.0)) throw ValidationError("Borda score must be non-negative");

    AdjustedFitness r;
    r.penalized = tokens > target;
    const double excess =
        r.penalized ? (static_cast<double>(tokens) - static_cast<double>(target)) / static_cast<double>(target) : 0.0;
    const double factor = 1.0 - lambda * excess;
    if (factor < 0.0) {
        r.clamped = true;
        r.value = 0.0;
    } else {
        r.value = borda * factor;
    }
    return r;
}

double duplication_probability(double adjusted, double population_mean, double tau) {
    if (!(tau > 0.0)) throw ValidationError(fmt::format("temperature must be positive, got {}", tau));
    const double z = (adjusted - population_mean) / tau;
    return 1.0 / (1.0 + std::exp(-z));
}

double adaptive_tau(std::span<const double> adjusted) {
    if (adjusted.empty()) return kTauEpsilon;
    auto [lo, hi] = std::minmax_element(adjusted.begin(), adjusted.end());
    return 0.25 * (*hi - *lo + kTauEpsilon);
}

double efficiency(std::span<const double> borda, std::span<const std::size_t> tokens) {
    if (borda.size() != tokens.size()) throw ValidationError("efficiency: vectors differ in length");
    if (borda.empty()) throw ValidationError("efficiency of an empty population");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < borda.size(); ++i) {
        if (tokens[i] == 0) {
            spdlog::warn("efficiency: strategy {} has zero tokens; excluded", i);
            continue;
        }
        sum += borda[i] / static_cast<double>(tokens[i]);
        ++used;
    }
    return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

}  // namespace lark
