#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <set>

#include "lark/evolution.hpp"
#include "lark/mock_provider.hpp"
#include "lark/replay.hpp"
#include "lark/stakeholder_sim.hpp"
#include "lark/trace_io.hpp"

using namespace lark;

namespace {

const std::vector<Scenario>& scenarios() {
    static const auto s = make_benchmark_scenarios(6, 21);
    return s;
}

Strategy strategy(std::string id, std::size_t tokens) {
    Strategy s;
    s.id = std::move(id);
    s.token_count = tokens;
    s.text = s.id;
    return s;
}

// Fails every request of one kind after a number of successful calls.
class FlakyProvider final : public Provider {
public:
    FlakyProvider(RequestKind kind, int allowed) : kind_(kind), allowed_(allowed) {}
    std::string name() const override { return "flaky"; }
    Completion generate(const GenerationRequest& r) const override {
        check(r.kind);
        return inner_.generate(r);
    }
    RankCompletion rank(const GenerationRequest& r) const override {
        check(r.kind);
        return inner_.rank(r);
    }

private:
    void check(RequestKind k) const {
        if (k == kind_ && calls_++ >= allowed_) throw ProviderError(k, "scripted outage", false);
    }
    RequestKind kind_;
    int allowed_;
    mutable std::atomic<int> calls_{0};
    MockProvider inner_;
};

}  // namespace

TEST_CASE("survivor selection tie-breaks") {
    const std::vector<ScoredCandidate> c{{strategy("a", 90), 5}, {strategy("b", 80), 3}, {strategy("c", 70), 3},
                                         {strategy("d", 60), 1}};
    CHECK(select_survivors(c, 2, 1).ids() == std::vector<std::string>{"a", "c"});
    CHECK(select_survivors(c, 4, 1).ids() == std::vector<std::string>{"a", "c", "b", "d"});
    const std::vector<ScoredCandidate> flat{{strategy("a", 9), 1}, {strategy("b", 3), 1}, {strategy("c", 5), 1}};
    CHECK(select_survivors(flat, 2, 1).ids() == std::vector<std::string>{"b", "c"});
    CHECK_THROWS_AS(select_survivors(flat, 4, 1), ValidationError);
}

TEST_CASE("duplication sampling is seeded") {
    std::vector<FitnessRecord> f(6);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i].strategy_id = "x" + std::to_string(i);
        f[i].p_dup = 0.5;
    }
    Rng a(3), b(3);
    CHECK(sample_duplications(f, a) == sample_duplications(f, b));

    int hits = 0;
    std::vector<FitnessRecord> low(1);
    low[0].strategy_id = "low";
    low[0].p_dup = 1.0 / (1.0 + std::exp(10.0));
    Rng r(8);
    for (int i = 0; i < 10000; ++i) hits += static_cast<int>(sample_duplications(low, r).size());
    CHECK(hits < 100);
}

TEST_CASE("config validation") {
    EvolutionConfig c;
    CHECK_NOTHROW(c.validate());
    auto bad = [](auto mutate) {
        EvolutionConfig x;
        mutate(x);
        return x;
    };
    CHECK_THROWS_AS(bad([](auto& x) { x.k = 0; }).validate(), ValidationError);
    CHECK_THROWS_AS(bad([](auto& x) { x.generations = 0; }).validate(), ValidationError);
    CHECK_THROWS_AS(bad([](auto& x) { x.p_plast = 1.2; }).validate(), ValidationError);
    CHECK_THROWS_AS(bad([](auto& x) { x.gamma = 0.0; }).validate(), ValidationError);
    CHECK_THROWS_AS(bad([](auto& x) { x.tau = 0.0; }).validate(), ValidationError);
    CHECK_THROWS_AS(bad([](auto& x) { x.lambda = -0.1; }).validate(), ValidationError);
    CHECK(c.plasticity_probability(1) == 0.6);
    CHECK(c.plasticity_probability(3) == doctest::Approx(0.6 * 0.64));
}

TEST_CASE("a run keeps its structural invariants") {
    MockProvider mock;
    EvolutionConfig cfg;
    for (const auto& s : scenarios()) {
        const RunTrace t = run(s, cfg, mock);
        REQUIRE_FALSE(t.aborted);
        REQUIRE(t.generations.size() == cfg.generations);
        CHECK(t.initial.size() == cfg.k);
        std::set<std::string> known;
        for (const auto& m : t.initial.members) known.insert(m.id);
        for (const auto& g : t.generations) {
            CHECK(g.evaluated.size() == cfg.k);
            CHECK(g.survivors.size() == cfg.k);
            CHECK(g.fitness.size() == cfg.k);
            CHECK(g.profiles.size() == s.stakeholders.size());
            std::vector<std::string> ids;
            for (const auto& m : g.evaluated) ids.push_back(m.id);
            for (const auto& p : g.profiles) CHECK(is_permutation_of(p.ranking, ids));
            double sum_b = 0.0;
            for (const auto& f : g.fitness) sum_b += f.borda;
            CHECK(sum_b == doctest::Approx(cfg.k * (cfg.k - 1) / 2.0).epsilon(1e-12));
            // lineage closure: every parent was seen before
            for (const auto& m : g.evaluated) {
                if (m.parent) CHECK(known.contains(*m.parent));
                known.insert(m.id);
            }
            for (const auto& m : g.matured) {
                REQUIRE(m.parent.has_value());
                CHECK(known.contains(*m.parent));
                known.insert(m.id);
            }
            for (const auto& id : g.survivors) CHECK(known.contains(id));
            CHECK(std::set<std::string>(g.survivors.begin(), g.survivors.end()).size() == cfg.k);
        }
        CHECK(t.final_population.ids() == t.generations.back().survivors);
        CHECK(t.efficiency.size() == cfg.generations);
        CHECK(t.total.prompt_tokens > 0);
    }
}

TEST_CASE("runs are reproducible and seed-sensitive") {
    MockProvider mock;
    EvolutionConfig cfg;
    const auto& s = scenarios()[2];
    const RunTrace a = run(s, cfg, mock);
    const RunTrace b = run(s, cfg, mock);
    CHECK(serialize_trace(a) == serialize_trace(b));
    cfg.seed = 2;
    CHECK(trace_hash(run(s, cfg, mock)) != trace_hash(a));

    EvolutionConfig par;
    par.parallelism = 4;
    RunTrace c = run(s, par, mock);
    c.config.parallelism = 1;
    CHECK(serialize_trace(c) == serialize_trace(a));
}

TEST_CASE("ablation flags leave their signatures") {
    MockProvider mock;
    EvolutionConfig base;
    const auto runs = run_ablation_suite(scenarios(), base, mock, 2);
    REQUIRE(runs.size() == scenarios().size() * 5);
    std::map<std::string, std::string> initial_hash;
    for (const auto& r : runs) {
        REQUIRE(r.trace.has_value());
        const RunTrace& t = *r.trace;
        CHECK(r.scenario_id == t.scenario.id);
        RunTrace only_p0;
        only_p0.initial = t.initial;
        const std::string p0 = serialize_trace(only_p0);
        if (!initial_hash.contains(r.scenario_id)) initial_hash[r.scenario_id] = p0;
        CHECK(initial_hash[r.scenario_id] == p0);
        for (const auto& g : t.generations) {
            switch (r.variant) {
                case Variant::no_plasticity:
                    CHECK(g.plasticity.empty());
                    for (const auto& m : g.evaluated) CHECK(m.origin != Origin::plasticity);
                    break;
                case Variant::no_dup_mat:
                    CHECK(g.duplications.empty());
                    CHECK(g.matured.empty());
                    for (const auto& m : g.evaluated) CHECK(m.origin != Origin::duplication_maturation);
                    break;
                case Variant::no_penalty:
                    for (const auto& f : g.fitness) CHECK(f.adjusted == f.borda);
                    break;
                case Variant::no_rcv: {
                    // unweighted mean positional points
                    for (std::size_t i = 0; i < g.evaluated.size(); ++i) {
                        double pts = 0.0;
                        for (const auto& p : g.profiles) {
                            const auto pos = std::find(p.ranking.begin(), p.ranking.end(), g.evaluated[i].id) -
                                             p.ranking.begin();
                            pts += static_cast<double>(g.evaluated.size() - 1 - static_cast<std::size_t>(pos));
                        }
                        CHECK(g.fitness[i].borda ==
                              doctest::Approx(pts / static_cast<double>(g.profiles.size())).epsilon(1e-12));
                    }
                    break;
                }
                case Variant::full:
                    break;
            }
        }
    }
}

TEST_CASE("the full variant exercises every mechanism on the corpus") {
    MockProvider mock;
    EvolutionConfig cfg;
    std::size_t plasticity = 0, matured = 0, penalized = 0;
    for (const auto& s : scenarios()) {
        const RunTrace t = run(s, cfg, mock);
        for (const auto& g : t.generations) {
            plasticity += g.plasticity.size();
            matured += g.matured.size();
            for (const auto& f : g.fitness) penalized += f.penalized ? 1 : 0;
        }
    }
    CHECK(plasticity > 0);
    CHECK(matured > 0);
    CHECK(penalized > 0);
}

TEST_CASE("fixed tau is honoured") {
    MockProvider mock;
    EvolutionConfig cfg;
    cfg.tau = 0.75;
    const RunTrace t = run(scenarios()[0], cfg, mock);
    for (const auto& g : t.generations) CHECK(g.tau == 0.75);
}

TEST_CASE("k = 1 runs") {
    MockProvider mock;
    EvolutionConfig cfg;
    cfg.k = 1;
    cfg.generations = 3;
    const RunTrace t = run(scenarios()[1], cfg, mock);
    CHECK_FALSE(t.aborted);
    for (const auto& g : t.generations) {
        CHECK(g.survivors.size() == 1);
        CHECK(g.fitness[0].borda == 0.0);
        CHECK(g.efficiency == 0.0);
    }
}

TEST_CASE("a provider outage aborts with the completed generations kept") {
    EvolutionConfig cfg;
    cfg.ablation.dup_mat_off = true;
    const auto& s = scenarios()[0];
    const int per_gen = static_cast<int>(s.stakeholders.size());
    FlakyProvider flaky(RequestKind::stakeholder_rank, per_gen * 2);
    // Ranking failures are repaired, never fatal.
    const RunTrace survived = run(s, cfg, flaky);
    CHECK_FALSE(survived.aborted);
    CHECK_FALSE(survived.generations.back().repairs.empty());

    FlakyProvider no_seeds(RequestKind::seed, 2);
    const RunTrace aborted = run(s, cfg, no_seeds);
    CHECK(aborted.aborted);
    CHECK(aborted.generations.empty());
    CHECK(aborted.abort_reason.find("seed") != std::string::npos);

    EvolutionConfig bad;
    bad.k = 0;
    MockProvider mock;
    CHECK_THROWS_AS(run(s, bad, mock), ValidationError);
}

TEST_CASE("trace serialization round-trips") {
    MockProvider mock;
    EvolutionConfig cfg;
    cfg.lambda = 0.25;
    cfg.record_wall_clock = true;
    const RunTrace t = run(scenarios()[3], cfg, mock);
    const std::string text = serialize_trace(t);
    const RunTrace back = parse_trace(text);
    const bool same = back == t;
    CHECK(same);
    CHECK(serialize_trace(back) == text);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(t.generations.size() + 2));

    CHECK_THROWS_AS(parse_trace(""), ParseError);
    CHECK_THROWS_AS(parse_trace("{not json}\n"), ParseError);
    std::string wrong_schema = text;
    wrong_schema.replace(wrong_schema.find("\"schema\":1"), 10, "\"schema\":9");
    CHECK_THROWS_AS(parse_trace(wrong_schema), ParseError);
}

TEST_CASE("replay finds exactly the tampered field") {
    MockProvider mock;
    EvolutionConfig cfg;
    const RunTrace t = run(scenarios()[4], cfg, mock);
    CHECK(replay(t).empty());
    CHECK(replay(parse_trace(serialize_trace(t))).empty());

    RunTrace tampered = t;
    tampered.generations[2].fitness[1].borda += 0.5;
    const auto diffs = replay(tampered);
    REQUIRE(diffs.size() == 1);
    CHECK(diffs[0].generation == 3);
    CHECK(diffs[0].field == "fitness[" + tampered.generations[2].fitness[1].strategy_id + "].borda");

    RunTrace swapped = t;
    std::swap(swapped.generations[1].survivors[0], swapped.generations[1].survivors[1]);
    CHECK_FALSE(replay(swapped).empty());

    RunTrace eff = t;
    eff.generations[0].efficiency *= 2.0;
    CHECK_FALSE(replay(eff).empty());
}

TEST_CASE("replay covers every variant") {
    MockProvider mock;
    for (Variant v : kAllVariants) {
        EvolutionConfig cfg;
        cfg.ablation = flags_for(v);
        CHECK(replay(run(scenarios()[5], cfg, mock)).empty());
    }
}

TEST_CASE("variant names") {
    for (Variant v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
    CHECK(display_name(Variant::full) == "Lark Full");
    CHECK(display_name(Variant::no_dup_mat) == "Lark NoMutationAndNoDuplication");
    CHECK_THROWS_AS(parse_variant("bogus"), ValidationError);
}

TEST_CASE("with every mechanism off the best member never loses ground") {
    MockProvider mock;
    EvolutionConfig cfg;
    cfg.generations = 3;
    cfg.ablation = {true, true, true, true};
    for (const auto& s : scenarios()) {
        const RunTrace t = run(s, cfg, mock);
        auto best = [](const GenerationRecord& g) {
            double b = g.fitness.front().adjusted;
            for (const auto& f : g.fitness) b = std::max(b, f.adjusted);
            return b;
        };
        CHECK(best(t.generations[2]) >= best(t.generations[0]));
        CHECK(t.generations[2].survivors == t.generations[0].survivors);
    }
}
