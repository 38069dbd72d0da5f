#include "lark/generators.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lark/aggregation.hpp"
#include "lark/error.hpp"
#include "lark/parallel.hpp"
#include "lark/rng.hpp"

namespace lark {

namespace {
constexpr int kDistinctSeedTries = 5;
}

SeedBatch sample_seeds(const GeneratorContext& ctx, const Scenario& scenario, std::size_t k, std::uint64_t seed,
                       IdAllocator& ids) {
    if (k == 0) throw ValidationError("k must be at least 1");
    std::vector<Completion> replies(k);
    parallel_for(k, ctx.parallelism, [&](std::size_t i) {
        GenerationRequest req;
        req.kind = RequestKind::seed;
        req.scenario = &scenario;
        req.index = i;
        req.temperature = ctx.sampling.seed_temperature;
        req.max_output_tokens = ctx.sampling.max_output_tokens;
        req.seed = derive_seed(seed, "seed", i);
        replies[i] = ctx.provider.generate(req);
    });

    SeedBatch batch;
    for (std::size_t i = 0; i < k; ++i) {
        Completion reply = std::move(replies[i]);
        batch.usage.push_back({RequestKind::seed, fmt::format("slot{}", i), reply.usage});
        // Re-request on an exact duplicate so the population starts distinct.
        for (int attempt = 1; attempt <= kDistinctSeedTries; ++attempt) {
            const bool dup = std::any_of(batch.strategies.begin(), batch.strategies.end(),
                                         [&](const Strategy& s) { return s.text == reply.text; });
            if (!dup && !reply.text.empty()) break;
            GenerationRequest req;
            req.kind = RequestKind::seed;
            req.scenario = &scenario;
            req.index = i;
            req.temperature = ctx.sampling.seed_temperature;
            req.max_output_tokens = ctx.sampling.max_output_tokens;
            req.seed = derive_seed(seed, "seed", i, "retry", attempt);
            reply = ctx.provider.generate(req);
            batch.usage.push_back({RequestKind::seed, fmt::format("slot{}", i), reply.usage});
        }
        if (reply.text.empty()) throw ProviderError(RequestKind::seed, "provider returned an empty seed", false);
        Strategy s;
        s.id = ids.next(0);
        s.token_count = ctx.tokenizer.count_generated(reply.text, reply.reported_completion_tokens);
        s.text = std::move(reply.text);
        s.origin = Origin::seed;
        s.generation_born = 0;
        batch.strategies.push_back(std::move(s));
    }
    return batch;
}

namespace {

RefineOutcome refine(const GeneratorContext& ctx, const GenerationRequest& req, const Strategy& input, Origin origin,
                     int generation) {
    RefineOutcome out;
    out.usage.kind = req.kind;
    out.usage.subject = input.id;
    Completion reply;
    try {
        reply = ctx.provider.generate(req);
    } catch (const ProviderError& e) {
        spdlog::warn("{} of {} failed, keeping the input: {}", to_string(req.kind), input.id, e.what());
        out.error = e.what();
        return out;
    }
    out.usage.usage = reply.usage;
    if (reply.text.empty()) {
        spdlog::info("{} of {} returned empty text; no-op", to_string(req.kind), input.id);
        return out;
    }
    Strategy s;
    s.token_count = ctx.tokenizer.count_generated(reply.text, reply.reported_completion_tokens);
    s.text = std::move(reply.text);
    s.parent = input.id;
    s.origin = origin;
    s.generation_born = generation;
    out.strategy = std::move(s);
    return out;
}

}  // namespace

RefineOutcome plasticity(const GeneratorContext& ctx, const Strategy& strategy, const Scenario& scenario,
                         int generation, std::uint64_t seed) {
    if (strategy.text.empty()) throw ValidationError("plasticity needs a non-empty strategy");
    GenerationRequest req;
    req.kind = RequestKind::plasticity;
    req.scenario = &scenario;
    req.subject = &strategy;
    req.temperature = ctx.sampling.refine_temperature;
    req.max_output_tokens = ctx.sampling.max_output_tokens;
    req.seed = seed;
    return refine(ctx, req, strategy, Origin::plasticity, generation);
}

RefineOutcome maturation(const GeneratorContext& ctx, const Strategy& strategy, const Scenario& scenario,
                         const Stakeholder& hint, int generation, std::uint64_t seed) {
    GenerationRequest req;
    req.kind = RequestKind::maturation;
    req.scenario = &scenario;
    req.subject = &strategy;
    req.stakeholder = &hint;
    req.temperature = ctx.sampling.refine_temperature;
    req.max_output_tokens = ctx.sampling.max_output_tokens;
    req.seed = seed;
    return refine(ctx, req, strategy, Origin::duplication_maturation, generation);
}

RankOutcome rank_population(const GeneratorContext& ctx, const Stakeholder& stakeholder, const Population& population,
                            const Scenario& scenario, std::uint64_t seed, std::string_view round) {
    GenerationRequest req;
    req.kind = RequestKind::stakeholder_rank;
    req.scenario = &scenario;
    req.stakeholder = &stakeholder;
    req.population = &population;
    req.temperature = ctx.sampling.refine_temperature;
    req.max_output_tokens = ctx.sampling.max_output_tokens;
    req.seed = seed;

    RankOutcome out;
    out.usage.kind = RequestKind::stakeholder_rank;
    out.usage.subject = stakeholder.id;
    std::vector<std::string> raw;
    try {
        RankCompletion reply = ctx.provider.rank(req);
        raw = std::move(reply.ranking);
        out.usage.usage = reply.usage;
    } catch (const ProviderError& e) {
        spdlog::warn("ranking by {} failed, falling back to population order: {}", stakeholder.id, e.what());
    }
    const auto ids = population.ids();
    bool repaired = false;
    out.profile.stakeholder_id = stakeholder.id;
    out.profile.ranking = repair_ranking(raw, ids, &repaired);
    if (repaired) {
        spdlog::info("repaired ranking from {} ({} raw ids)", stakeholder.id, raw.size());
        out.repair = RepairEvent{stakeholder.id, std::string(round), std::move(raw)};
    }
    return out;
}

}  // namespace lark
