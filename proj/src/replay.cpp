#include "lark/replay.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lark/aggregation.hpp"
#include "lark/error.hpp"
#include "lark/fitness.hpp"
#include "lark/scenario_io.hpp"

namespace lark {

namespace {

class Checker {
public:
    explicit Checker(std::vector<ReplayDiff>& out) : out_(out) {}

    void number(int gen, const std::string& field, double stored, double derived) {
        const double tol = 1e-12 * std::max(1.0, std::abs(derived));
        if (std::abs(stored - derived) > tol || std::isnan(stored) != std::isnan(derived))
            out_.push_back({gen, field, format_double(stored), format_double(derived)});
    }

    template <class T>
    void equal(int gen, const std::string& field, const T& stored, const T& derived) {
        if (!(stored == derived)) out_.push_back({gen, field, show(stored), show(derived)});
    }

private:
    static std::string show(const std::string& s) { return s; }
    static std::string show(bool b) { return b ? "true" : "false"; }
    static std::string show(std::size_t n) { return std::to_string(n); }
    static std::string show(const std::optional<double>& v) { return v ? format_double(*v) : "null"; }
    static std::string show(const std::vector<std::string>& v) { return fmt::format("[{}]", fmt::join(v, ", ")); }

    std::vector<ReplayDiff>& out_;
};

struct Derived {
    BordaResult borda;
    std::vector<AdjustedFitness> adjusted;
};

Derived derive(const std::vector<RankingProfile>& profiles, const std::vector<std::string>& ids,
               const std::vector<std::size_t>& tokens, const RunTrace& trace) {
    const auto& cfg = trace.config;
    const auto& s = trace.scenario;
    Derived d;
    d.borda = cfg.ablation.rcv_off ? average_scores(profiles, ids, tokens)
                                   : borda_scores(profiles, s.weights(), ids, tokens);
    const auto target = cfg.effective_target(s);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        d.adjusted.push_back(cfg.ablation.penalty_off
                                 ? AdjustedFitness{d.borda.scores[i], tokens[i] > target, false}
                                 : compute_adjusted(d.borda.scores[i], tokens[i], target, cfg.effective_lambda(s)));
    }
    return d;
}

void check_generation(const GenerationRecord& g, const RunTrace& trace, const Tokenizer& tok, Checker& check,
                      std::vector<ReplayDiff>& out) {
    const int gen = g.generation;
    std::vector<std::string> ids;
    std::vector<std::size_t> tokens;
    for (const auto& m : g.evaluated) {
        ids.push_back(m.id);
        tokens.push_back(m.token_count);
        if (tok.recomputable()) check.equal(gen, fmt::format("evaluated[{}].token_count", m.id), m.token_count, tok.count(m.text));
    }
    check.equal(gen, "population_size", g.evaluated.size(), trace.config.k);
    if (g.fitness.size() != g.evaluated.size()) {
        out.push_back({gen, "fitness.size", std::to_string(g.fitness.size()), std::to_string(g.evaluated.size())});
        return;
    }

    Derived d;
    try {
        d = derive(g.profiles, ids, tokens, trace);
    } catch (const Error& e) {
        out.push_back({gen, "profiles", "unscorable", e.what()});
        return;
    }
    std::vector<double> r;
    for (const auto& a : d.adjusted) r.push_back(a.value);
    const double tau = trace.config.tau ? *trace.config.tau : adaptive_tau(r);
    double r_mean = 0.0;
    for (double v : r) r_mean += v;
    r_mean /= static_cast<double>(r.size());

    check.number(gen, "tau", g.tau, tau);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& f = g.fitness[i];
        const std::string at = fmt::format("fitness[{}]", ids[i]);
        check.equal(gen, at + ".strategy_id", f.strategy_id, ids[i]);
        check.number(gen, at + ".borda", f.borda, d.borda.scores[i]);
        check.number(gen, at + ".adjusted", f.adjusted, d.adjusted[i].value);
        check.equal(gen, at + ".token_count", f.token_count, tokens[i]);
        check.number(gen, at + ".p_dup", f.p_dup, duplication_probability(d.adjusted[i].value, r_mean, g.tau));
        check.equal(gen, at + ".penalized", f.penalized, d.adjusted[i].penalized);
        check.equal(gen, at + ".clamped", f.clamped, d.adjusted[i].clamped);
    }
    check.equal(gen, "cv", g.cv, d.borda.cv);
    check.equal(gen, "consensus_id", g.consensus_id, d.borda.consensus_id);
    check.number(gen, "efficiency", g.efficiency, efficiency(d.borda.scores, tokens));

    std::vector<ScoredCandidate> candidates;
    if (g.matured.empty()) {
        for (std::size_t i = 0; i < ids.size(); ++i) candidates.push_back({g.evaluated[i], g.fitness[i].adjusted});
    } else {
        std::vector<Strategy> pool = g.evaluated;
        pool.insert(pool.end(), g.matured.begin(), g.matured.end());
        std::vector<std::string> pool_ids;
        std::vector<std::size_t> pool_tokens;
        for (const auto& m : pool) {
            pool_ids.push_back(m.id);
            pool_tokens.push_back(m.token_count);
        }
        for (const auto& m : g.matured) {
            if (tok.recomputable()) check.equal(gen, fmt::format("matured[{}].token_count", m.id), m.token_count, tok.count(m.text));
        }
        Derived pd;
        try {
            pd = derive(g.pool_profiles, pool_ids, pool_tokens, trace);
        } catch (const Error& e) {
            out.push_back({gen, "pool_profiles", "unscorable", e.what()});
            return;
        }
        check.equal(gen, "pool_scores.size", g.pool_scores.size(), pool.size());
        for (std::size_t i = 0; i < pool.size() && i < g.pool_scores.size(); ++i) {
            const std::string at = fmt::format("pool_scores[{}]", pool_ids[i]);
            check.number(gen, at + ".borda", g.pool_scores[i].borda, pd.borda.scores[i]);
            check.number(gen, at + ".adjusted", g.pool_scores[i].adjusted, pd.adjusted[i].value);
        }
        for (std::size_t i = 0; i < pool.size() && i < g.pool_scores.size(); ++i) {
            candidates.push_back({pool[i], g.pool_scores[i].adjusted});
        }
    }
    if (candidates.size() >= trace.config.k) {
        check.equal(gen, "survivors", g.survivors, select_survivors(candidates, trace.config.k, gen).ids());
    } else {
        out.push_back({gen, "survivors", "", "too few candidates"});
    }
    check.equal(gen, "usage_total.prompt_tokens", g.usage_total.prompt_tokens, sum_usage(g.usage).prompt_tokens);
    check.equal(gen, "usage_total.completion_tokens", g.usage_total.completion_tokens,
                sum_usage(g.usage).completion_tokens);
    check.number(gen, "usage_total.cost", g.usage_total.cost, sum_usage(g.usage).cost);
}

}  // namespace

std::vector<ReplayDiff> replay(const RunTrace& trace) {
    std::vector<ReplayDiff> out;
    Checker check(out);
    const Tokenizer tok(trace.config.tokenizer);

    std::vector<std::string> previous = trace.initial.ids();
    for (const auto& g : trace.generations) {
        // Members untouched by plasticity must carry over from the previous survivors.
        std::vector<std::string> expected = previous;
        for (const auto& p : g.plasticity) {
            if (p.noop) continue;
            std::replace(expected.begin(), expected.end(), p.parent, p.child);
        }
        std::vector<std::string> evaluated;
        for (const auto& m : g.evaluated) evaluated.push_back(m.id);
        check.equal(g.generation, "evaluated.ids", evaluated, expected);
        check_generation(g, trace, tok, check, out);
        previous = g.survivors;
    }

    if (!trace.generations.empty()) {
        check.equal(0, "final_population", trace.final_population.ids(), trace.generations.back().survivors);
    }
    check.equal(0, "efficiency.size", trace.efficiency.size(), trace.generations.size());
    for (std::size_t i = 0; i < trace.efficiency.size() && i < trace.generations.size(); ++i)
        check.number(0, fmt::format("efficiency[{}]", i + 1), trace.efficiency[i], trace.generations[i].efficiency);
    ProviderUsage total = sum_usage(trace.seed_usage);
    for (const auto& g : trace.generations) total += g.usage_total;
    check.equal(0, "total.prompt_tokens", trace.total.prompt_tokens, total.prompt_tokens);
    check.equal(0, "total.completion_tokens", trace.total.completion_tokens, total.completion_tokens);
    check.number(0, "total.cost", trace.total.cost, total.cost);
    return out;
}

std::string format_diff(const ReplayDiff& d) {
    if (d.generation == 0) return fmt::format("{}: stored {} but derived {}", d.field, d.stored, d.derived);
    return fmt::format("generation {} {}: stored {} but derived {}", d.generation, d.field, d.stored, d.derived);
}

}  // namespace lark
