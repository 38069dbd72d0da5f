#pragma once

#include <cstdint>
#include <vector>

#include "lark/model.hpp"

namespace lark {

/// u(x) = sum of weights of features present + length_pref * T(x) + jitter.
/// Jitter is amplitude * U(-1, 1) seeded by (seed, stakeholder, text).
double utility(const SyntheticUtility& u, const Strategy& strategy, std::uint64_t seed = 0);

/// Ids by descending utility; exact ties by ascending id.
RankingProfile rank_by_utility(const SyntheticUtility& u, const Population& population, std::uint64_t seed = 0);

/// Utility used when a scenario has no extension block entry for a
/// stakeholder: seeded feature weights derived from the stakeholder id.
SyntheticUtility default_utility(const Stakeholder& stakeholder);

struct BenchmarkOptions {
    std::size_t min_stakeholders = 3;
    std::size_t max_stakeholders = 7;
    std::size_t target_tokens = 24;
    double lambda = 0.5;
};

/// n scenarios cycling through the six domains, each with 3-7 stakeholders,
/// seeded weights and utilities with deliberately opposed feature preferences.
std::vector<Scenario> make_benchmark_scenarios(std::size_t count, std::uint64_t seed,
                                               const BenchmarkOptions& options = {});

}  // namespace lark
