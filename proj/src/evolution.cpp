#include "lark/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lark/aggregation.hpp"
#include "lark/error.hpp"
#include "lark/fitness.hpp"
#include "lark/generators.hpp"
#include "lark/parallel.hpp"
#include "lark/prompts.hpp"

namespace lark {

std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_plasticity: return "no_plasticity";
        case Variant::no_rcv: return "no_rcv";
        case Variant::no_dup_mat: return "no_dup_mat";
        case Variant::no_penalty: return "no_penalty";
    }
    return "full";
}

Variant parse_variant(std::string_view tag) {
    for (auto v : kAllVariants) {
        if (to_string(v) == tag) return v;
    }
    throw ValidationError(fmt::format("unknown variant '{}'", tag));
}

std::string_view display_name(Variant v) noexcept {
    switch (v) {
        case Variant::full: return "Lark Full";
        case Variant::no_plasticity: return "Lark NoPlasticity";
        case Variant::no_rcv: return "Lark NoRankedChoiceVoting";
        case Variant::no_dup_mat: return "Lark NoMutationAndNoDuplication";
        case Variant::no_penalty: return "Lark NoPenalty";
    }
    return "Lark Full";
}

AblationFlags flags_for(Variant v) noexcept {
    AblationFlags f;
    f.plasticity_off = v == Variant::no_plasticity;
    f.rcv_off = v == Variant::no_rcv;
    f.dup_mat_off = v == Variant::no_dup_mat;
    f.penalty_off = v == Variant::no_penalty;
    return f;
}

void EvolutionConfig::validate() const {
    if (k < 1) throw ValidationError("k must be at least 1");
    if (generations < 1) throw ValidationError("generations must be at least 1");
    if (!(p_plast >= 0.0 && p_plast <= 1.0)) throw ValidationError("p_plast must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
    if (tau && !(*tau > 0.0)) throw ValidationError("tau must be positive");
    if (lambda && !(*lambda >= 0.0 && *lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
    if (target_tokens && *target_tokens == 0) throw ValidationError("target_tokens must be positive");
    if (parallelism < 1) throw ValidationError("parallelism must be at least 1");
    if (!(plasticity_delta >= 0.0)) throw ValidationError("plasticity_delta must be non-negative");
}

double EvolutionConfig::plasticity_probability(std::size_t generation) const {
    return p_plast * std::pow(gamma, static_cast<double>(generation) - 1.0);
}

Population select_survivors(std::span<const ScoredCandidate> candidates, std::size_t k, int generation) {
    if (candidates.size() < k)
        throw ValidationError(fmt::format("{} candidates cannot fill a population of {}", candidates.size(), k));
    std::vector<const ScoredCandidate*> order;
    order.reserve(candidates.size());
    for (const auto& c : candidates) order.push_back(&c);
    std::sort(order.begin(), order.end(), [](const ScoredCandidate* a, const ScoredCandidate* b) {
        if (a->adjusted != b->adjusted) return a->adjusted > b->adjusted;
        if (a->strategy.token_count != b->strategy.token_count)
            return a->strategy.token_count < b->strategy.token_count;
        return a->strategy.id < b->strategy.id;
    });
    Population p;
    p.generation = generation;
    for (std::size_t i = 0; i < k; ++i) p.members.push_back(order[i]->strategy);
    return p;
}

std::vector<std::string> sample_duplications(std::span<const FitnessRecord> fitness, Rng& rng) {
    std::vector<std::string> out;
    for (const auto& f : fitness) {
        if (rng.bernoulli(f.p_dup)) out.push_back(f.strategy_id);
    }
    return out;
}

namespace {

struct RankRound {
    std::vector<RankingProfile> profiles;
    std::vector<RepairEvent> repairs;
    std::vector<UsageEntry> usage;
};

RankRound rank_all(const GeneratorContext& ctx, const Scenario& scenario, const Population& population,
                   std::uint64_t seed, std::string_view round) {
    const auto& sts = scenario.stakeholders;
    std::vector<RankOutcome> outcomes(sts.size());
    parallel_for(sts.size(), ctx.parallelism, [&](std::size_t j) {
        outcomes[j] = rank_population(ctx, sts[j], population, scenario, seed, round);
    });
    RankRound r;
    for (auto& o : outcomes) {
        r.profiles.push_back(std::move(o.profile));
        if (o.repair) r.repairs.push_back(std::move(*o.repair));
        r.usage.push_back(std::move(o.usage));
    }
    return r;
}

struct Scored {
    BordaResult borda;
    std::vector<AdjustedFitness> adjusted;
};

Scored score_round(const std::vector<RankingProfile>& profiles, const Scenario& scenario,
                   const std::vector<Strategy>& members, const EvolutionConfig& config) {
    std::vector<std::string> ids;
    std::vector<std::size_t> tokens;
    for (const auto& m : members) {
        ids.push_back(m.id);
        tokens.push_back(m.token_count);
    }
    Scored s;
    s.borda = config.ablation.rcv_off ? average_scores(profiles, ids, tokens)
                                      : borda_scores(profiles, scenario.weights(), ids, tokens);
    const auto target = config.effective_target(scenario);
    const double lambda = config.effective_lambda(scenario);
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (config.ablation.penalty_off) {
            s.adjusted.push_back({s.borda.scores[i], tokens[i] > target, false});
        } else {
            s.adjusted.push_back(compute_adjusted(s.borda.scores[i], tokens[i], target, lambda));
        }
    }
    return s;
}

// The stakeholder who ranked `id` lowest; ties go to the heavier, then smaller id.
const Stakeholder& least_served(const std::string& id, const std::vector<RankingProfile>& profiles,
                                const Scenario& scenario) {
    const Stakeholder* best = nullptr;
    std::size_t best_pos = 0;
    for (const auto& p : profiles) {
        const auto pos = static_cast<std::size_t>(std::find(p.ranking.begin(), p.ranking.end(), id) - p.ranking.begin());
        const Stakeholder* st = scenario.find_stakeholder(p.stakeholder_id);
        if (!best || pos > best_pos ||
            (pos == best_pos && (st->influence_weight > best->influence_weight ||
                                 (st->influence_weight == best->influence_weight && st->id < best->id)))) {
            best = st;
            best_pos = pos;
        }
    }
    return *best;
}

void append(std::vector<UsageEntry>& to, std::vector<UsageEntry> from) {
    to.insert(to.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

GenerationRecord step(const GeneratorContext& ctx, const Scenario& scenario, const EvolutionConfig& config,
                      const Population& previous, int t, IdAllocator& ids) {
    GenerationRecord rec;
    rec.generation = t;
    std::vector<Strategy> members = previous.members;

    // Plasticity: per-member Bernoulli(p_plast * gamma^(t-1)), replace in place.
    if (!config.ablation.plasticity_off) {
        const double p = config.plasticity_probability(static_cast<std::size_t>(t));
        std::vector<std::size_t> chosen;
        for (std::size_t i = 0; i < members.size(); ++i) {
            Rng draw(derive_seed(config.seed, "plasticity-draw", t, i));
            if (draw.bernoulli(p)) chosen.push_back(i);
        }
        std::vector<RefineOutcome> outcomes(chosen.size());
        parallel_for(chosen.size(), ctx.parallelism, [&](std::size_t c) {
            const std::size_t i = chosen[c];
            outcomes[c] = plasticity(ctx, members[i], scenario, t, derive_seed(config.seed, "plasticity", t, i));
        });
        for (std::size_t c = 0; c < chosen.size(); ++c) {
            auto& o = outcomes[c];
            Strategy& slot = members[chosen[c]];
            rec.usage.push_back(o.usage);
            if (!o.strategy) {
                rec.plasticity.push_back({slot.id, slot.id, true});
                continue;
            }
            o.strategy->id = ids.next(t);
            rec.plasticity.push_back({slot.id, o.strategy->id, false});
            slot = std::move(*o.strategy);
        }
    }
    rec.evaluated = members;

    // Stakeholder evaluation, scoring and penalty.
    Population current{t, members};
    RankRound main = rank_all(ctx, scenario, current, config.seed, "main");
    append(rec.usage, std::move(main.usage));
    rec.repairs = std::move(main.repairs);
    rec.profiles = std::move(main.profiles);
    const Scored scored = score_round(rec.profiles, scenario, members, config);

    std::vector<double> r_values;
    std::vector<double> b_values;
    std::vector<std::size_t> t_values;
    for (std::size_t i = 0; i < members.size(); ++i) {
        r_values.push_back(scored.adjusted[i].value);
        b_values.push_back(scored.borda.scores[i]);
        t_values.push_back(members[i].token_count);
    }
    rec.tau = config.tau ? *config.tau : adaptive_tau(r_values);
    double r_mean = 0.0;
    for (double r : r_values) r_mean += r;
    r_mean /= static_cast<double>(r_values.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        FitnessRecord f;
        f.strategy_id = members[i].id;
        f.borda = b_values[i];
        f.adjusted = r_values[i];
        f.token_count = t_values[i];
        f.p_dup = duplication_probability(r_values[i], r_mean, rec.tau);
        f.penalized = scored.adjusted[i].penalized;
        f.clamped = scored.adjusted[i].clamped;
        rec.fitness.push_back(std::move(f));
    }
    rec.cv = scored.borda.cv;
    rec.consensus_id = scored.borda.consensus_id;
    rec.efficiency = efficiency(b_values, t_values);

    // Duplication and maturation.
    if (!config.ablation.dup_mat_off) {
        Rng dup_rng(derive_seed(config.seed, "duplication", t));
        const auto parents = sample_duplications(rec.fitness, dup_rng);
        std::vector<const Strategy*> parent_ptrs;
        std::vector<const Stakeholder*> hints;
        for (const auto& pid : parents) {
            parent_ptrs.push_back(current.find(pid));
            hints.push_back(&least_served(pid, rec.profiles, scenario));
        }
        std::vector<RefineOutcome> outcomes(parents.size());
        parallel_for(parents.size(), ctx.parallelism, [&](std::size_t d) {
            outcomes[d] = maturation(ctx, *parent_ptrs[d], scenario, *hints[d], t,
                                     derive_seed(config.seed, "maturation", t, parents[d]));
        });
        for (std::size_t d = 0; d < parents.size(); ++d) {
            auto& o = outcomes[d];
            rec.usage.push_back(o.usage);
            if (!o.strategy) {
                rec.duplications.push_back({parents[d], "", hints[d]->id, true});
                continue;
            }
            o.strategy->id = ids.next(t);
            rec.duplications.push_back({parents[d], o.strategy->id, hints[d]->id, false});
            rec.matured.push_back(std::move(*o.strategy));
        }
    }

    // Survivor selection over P_{t-1} and the duplicates.
    std::vector<ScoredCandidate> candidates;
    if (rec.matured.empty()) {
        for (std::size_t i = 0; i < members.size(); ++i) candidates.push_back({members[i], r_values[i]});
    } else {
        Population pool{t, members};
        pool.members.insert(pool.members.end(), rec.matured.begin(), rec.matured.end());
        RankRound supplementary = rank_all(ctx, scenario, pool, config.seed, "pool");
        append(rec.usage, std::move(supplementary.usage));
        for (auto& r : supplementary.repairs) rec.repairs.push_back(std::move(r));
        rec.pool_profiles = std::move(supplementary.profiles);
        const Scored pooled = score_round(rec.pool_profiles, scenario, pool.members, config);
        for (std::size_t i = 0; i < pool.members.size(); ++i) {
            rec.pool_scores.push_back({pool.members[i].id, pooled.borda.scores[i], pooled.adjusted[i].value,
                                       pool.members[i].token_count});
            candidates.push_back({pool.members[i], pooled.adjusted[i].value});
        }
    }
    const Population next = select_survivors(candidates, config.k, t);
    rec.survivors = next.ids();
    rec.usage_total = sum_usage(rec.usage);
    return rec;
}

}  // namespace

RunTrace run(const Scenario& scenario, const EvolutionConfig& config, const Provider& provider) {
    config.validate();
    validate(scenario);

    RunTrace trace;
    trace.config = config;
    trace.scenario = scenario;
    trace.provider_name = provider.name();
    trace.prompt_hashes = prompts::hashes();

    GeneratorContext ctx{provider, Tokenizer(config.tokenizer), config.sampling, config.parallelism};
    IdAllocator ids;

    auto finalize = [&](const Population& last) {
        trace.final_population = last;
        ProviderUsage total = sum_usage(trace.seed_usage);
        for (const auto& g : trace.generations) total += g.usage_total;
        trace.total = total;
        return trace;
    };

    Population population;
    try {
        SeedBatch seeds = sample_seeds(ctx, scenario, config.k, config.seed, ids);
        population.generation = 0;
        population.members = std::move(seeds.strategies);
        trace.seed_usage = std::move(seeds.usage);
    } catch (const ProviderError& e) {
        spdlog::error("run {} aborted during seeding: {}", scenario.id, e.what());
        trace.aborted = true;
        trace.abort_reason = e.what();
        return finalize(population);
    }
    trace.initial = population;

    for (std::size_t t = 1; t <= config.generations; ++t) {
        const auto started = std::chrono::steady_clock::now();
        GenerationRecord rec;
        try {
            rec = step(ctx, scenario, config, population, static_cast<int>(t), ids);
        } catch (const ProviderError& e) {
            spdlog::error("run {} aborted in generation {}: {}", scenario.id, t, e.what());
            trace.aborted = true;
            trace.abort_reason = e.what();
            break;
        }
        if (config.record_wall_clock) {
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }

        Population next;
        next.generation = static_cast<int>(t);
        for (const auto& id : rec.survivors) {
            auto it = std::find_if(rec.evaluated.begin(), rec.evaluated.end(), [&](const auto& s) { return s.id == id; });
            if (it == rec.evaluated.end()) {
                it = std::find_if(rec.matured.begin(), rec.matured.end(), [&](const auto& s) { return s.id == id; });
            }
            next.members.push_back(*it);
        }
        population = std::move(next);
        trace.efficiency.push_back(rec.efficiency);
        trace.generations.push_back(std::move(rec));
    }
    return finalize(population);
}

std::vector<AblationRun> run_ablation_suite(std::span<const Scenario> scenarios, const EvolutionConfig& base,
                                            const Provider& provider, std::size_t parallel_runs) {
    base.validate();
    std::vector<AblationRun> runs(scenarios.size() * kAllVariants.size());
    parallel_for(runs.size(), parallel_runs, [&](std::size_t idx) {
        const Scenario& s = scenarios[idx / kAllVariants.size()];
        const Variant v = kAllVariants[idx % kAllVariants.size()];
        AblationRun& out = runs[idx];
        out.scenario_id = s.id;
        out.variant = v;
        EvolutionConfig cfg = base;
        cfg.ablation = flags_for(v);
        try {
            RunTrace t = run(s, cfg, provider);
            if (t.aborted) {
                out.error = t.abort_reason;
            } else {
                out.trace = std::move(t);
            }
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });
    return runs;
}

}  // namespace lark
