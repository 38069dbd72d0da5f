#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lark/model.hpp"
#include "lark/provider.hpp"
#include "lark/tokenizer.hpp"

namespace lark {

/// Shared context for the strategy operators.
struct GeneratorContext {
    const Provider& provider;
    Tokenizer tokenizer;
    SamplingConfig sampling{};
    std::size_t parallelism = 1;
};

struct SeedBatch {
    std::vector<Strategy> strategies;
    std::vector<UsageEntry> usage;
};

/// k seed strategies with ids from `ids`. Throws ValidationError for k = 0 and
/// ProviderError when the provider fails (the run cannot continue).
SeedBatch sample_seeds(const GeneratorContext& ctx, const Scenario& scenario, std::size_t k, std::uint64_t seed,
                       IdAllocator& ids);

struct RefineOutcome {
    std::optional<Strategy> strategy;  // nullopt: no-op, keep the input
    UsageEntry usage;
    std::string error;  // provider failure text on a no-op
};

/// Phi(x, C). The new strategy is unnamed (empty id) until the caller assigns
/// one, so concurrent calls stay independent of id order.
RefineOutcome plasticity(const GeneratorContext& ctx, const Strategy& strategy, const Scenario& scenario,
                         int generation, std::uint64_t seed);

RefineOutcome maturation(const GeneratorContext& ctx, const Strategy& strategy, const Scenario& scenario,
                         const Stakeholder& hint, int generation, std::uint64_t seed);

struct RankOutcome {
    RankingProfile profile;  // always a valid permutation
    std::optional<RepairEvent> repair;
    UsageEntry usage;
};

/// The stakeholder's ranking of the population, repaired when the provider
/// returns an invalid permutation or fails outright.
RankOutcome rank_population(const GeneratorContext& ctx, const Stakeholder& stakeholder,
                            const Population& population, const Scenario& scenario, std::uint64_t seed,
                            std::string_view round = "main");

}  // namespace lark
