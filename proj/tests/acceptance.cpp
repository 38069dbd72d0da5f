// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lark/aggregation.hpp"
#include "lark/benchmark.hpp"
#include "lark/config_io.hpp"
#include "lark/evolution.hpp"
#include "lark/fitness.hpp"
#include "lark/mock_provider.hpp"
#include "lark/report.hpp"
#include "lark/rng.hpp"
#include "lark/scenario_io.hpp"
#include "lark/stakeholder_sim.hpp"
#include "lark/stats.hpp"
#include "lark/trace_io.hpp"

namespace fs = std::filesystem;
using namespace lark;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed checks for one criterion.
struct Verdict {
    std::vector<std::string> failures;
    std::string note;

    void check(bool ok, const std::string& what) {
        if (!ok && failures.size() < 8) failures.push_back(what);
        if (!ok && failures.size() == 8) failures.push_back("...");
    }
    bool passed() const { return failures.empty(); }
};

// Naive scorer: linear search for each candidate in each ranking.
std::vector<double> oracle_borda(const std::vector<std::vector<std::string>>& rankings,
                                 const std::vector<double>& weights, const std::vector<std::string>& ids) {
    const std::size_t k = ids.size();
    std::vector<double> out(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < rankings.size(); ++j) {
            for (std::size_t pos = 0; pos < rankings[j].size(); ++pos) {
                if (rankings[j][pos] == ids[i]) out[i] += weights[j] * static_cast<double>(k - 1 - pos);
            }
        }
    }
    return out;
}

struct Instance {
    std::vector<std::string> ids;
    std::vector<RankingProfile> profiles;
    std::vector<std::vector<std::string>> rankings;
};

Instance random_instance(Rng& rng, std::size_t k, std::size_t m) {
    Instance in;
    for (std::size_t i = 0; i < k; ++i) in.ids.push_back(fmt::format("c{}", i));
    for (std::size_t j = 0; j < m; ++j) {
        auto r = in.ids;
        rng.shuffle(r);
        in.rankings.push_back(r);
        in.profiles.push_back({fmt::format("s{}", j + 1), r});
    }
    return in;
}

Verdict criterion_1() {
    Verdict v;
    const auto t0 = Clock::now();
    Rng rng(derive_seed(2024, "acceptance-borda"));
    double worst = 0.0;
    double worst_sum = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 1 + rng.below(5);
        const std::size_t m = 1 + rng.below(4);
        const Instance in = random_instance(rng, k, m);
        std::vector<double> raw;
        for (std::size_t j = 0; j < m; ++j) raw.push_back(rng.uniform(0.05, 1.0));
        const auto w = normalize_weights(raw);
        const auto got = borda_scores(in.profiles, w, in.ids);
        const auto want = oracle_borda(in.rankings, w, in.ids);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            worst = std::max(worst, std::abs(got.scores[i] - want[i]));
            sum += got.scores[i];
        }
        worst_sum = std::max(worst_sum, std::abs(sum - static_cast<double>(k * (k - 1)) / 2.0));

        // Dyadic weights (multiples of 1/16 summing to one) make every sum
        // exactly representable, so the identity can be checked with ==.
        std::vector<double> dyadic(m, 0.0);
        int left = 16;
        for (std::size_t j = 0; j + 1 < m; ++j) {
            const int units = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(left - static_cast<int>(m - 1 - j))));
            dyadic[j] = units / 16.0;
            left -= units;
        }
        dyadic[m - 1] = left / 16.0;
        const auto exact = borda_scores(in.profiles, dyadic, in.ids);
        double exact_sum = 0.0;
        for (double s : exact.scores) exact_sum += s;
        v.check(exact_sum == static_cast<double>(k * (k - 1)) / 2.0,
                fmt::format("trial {}: dyadic sum {} != {}", trial, exact_sum, k * (k - 1) / 2));
    }
    const double elapsed = seconds_since(t0);
    v.check(worst <= 1e-12, fmt::format("max |B - oracle| = {:.3e}", worst));
    v.check(worst_sum <= 1e-12, fmt::format("max |sum B - k(k-1)/2| = {:.3e} with normalized weights", worst_sum));
    v.check(elapsed < 5.0, fmt::format("took {:.2f} s", elapsed));
    v.note = fmt::format("1000 instances, max oracle error {:.1e}, {:.3f} s", worst, elapsed);
    return v;
}

Verdict criterion_2() {
    Verdict v;
    v.check(compute_adjusted(10.0, 150, 100, 0.5).value == 7.5, "R(10, 150, 100, 0.5) != 7.5");
    for (std::size_t t = 0; t <= 100; ++t) {
        for (double lambda : {0.0, 0.3, 1.0}) {
            v.check(compute_adjusted(4.25, t, 100, lambda).value == 4.25, fmt::format("R != B at T={}", t));
        }
    }
    const std::size_t target = 100;
    const double b = 3.5;
    for (std::size_t ti = 0; ti < 100; ++ti) {
        const std::size_t t = 50 + ti * 5;
        for (std::size_t li = 0; li < 100; ++li) {
            const double lambda = static_cast<double>(li) / 99.0;
            const double r = compute_adjusted(b, t, target, lambda).value;
            if (ti + 1 < 100)
                v.check(compute_adjusted(b, t + 5, target, lambda).value <= r,
                        fmt::format("increasing in T at T={}, lambda={}", t, lambda));
            if (li + 1 < 100)
                v.check(compute_adjusted(b, t, target, static_cast<double>(li + 1) / 99.0).value <= r,
                        fmt::format("increasing in lambda at T={}, lambda={}", t, lambda));
            v.check(r >= 0.0, "negative R");
        }
    }
    v.note = "exact example, identity below target, 100x100 grid monotone";
    return v;
}

Verdict criterion_3() {
    Verdict v;
    for (double mean : {-2.0, 0.0, 1.5, 7.25}) {
        for (double tau : {0.1, 1.0, 3.0}) {
            v.check(duplication_probability(mean, mean, tau) == 0.5, fmt::format("p != 0.5 at R = mean = {}", mean));
        }
    }
    const double tau = 0.8;
    const double p = duplication_probability(2.0 + tau, 2.0, tau);
    v.check(std::abs(p - 1.0 / (1.0 + std::exp(-1.0))) < 1e-15, fmt::format("p(z=1) = {}", p));
    std::vector<FitnessRecord> draws(10000);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        draws[i].strategy_id = fmt::format("x{}", i);
        draws[i].p_dup = p;
    }
    Rng rng(derive_seed(2024, "acceptance-duplication"));
    const double freq = static_cast<double>(sample_duplications(draws, rng).size()) / 10000.0;
    v.check(freq >= 0.72 && freq <= 0.74, fmt::format("frequency {}", freq));
    v.note = fmt::format("Monte Carlo frequency {:.4f}", freq);
    return v;
}

// Mean of B/T over members with T > 0; zero when there are none.
double oracle_efficiency(const GenerationRecord& g) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : g.fitness) {
        if (f.token_count == 0) continue;
        sum += f.borda / static_cast<double>(f.token_count);
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

Verdict criterion_4() {
    Verdict v;
    const auto scenarios = make_benchmark_scenarios(50, 404);
    MockProvider mock;
    std::size_t records = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        EvolutionConfig cfg;
        cfg.seed = 1000 + i;
        const RunTrace t = run(scenarios[i], cfg, mock);
        v.check(!t.aborted, scenarios[i].id + " aborted");
        for (std::size_t g = 0; g < t.generations.size(); ++g) {
            const double e = oracle_efficiency(t.generations[g]);
            worst = std::max(worst, std::abs(e - t.generations[g].efficiency));
            v.check(std::abs(e - t.generations[g].efficiency) <= 1e-9,
                    fmt::format("{} gen {}: stored {} vs {}", scenarios[i].id, g + 1, t.generations[g].efficiency, e));
            v.check(t.efficiency.at(g) == t.generations[g].efficiency, "efficiency series mismatch");
            ++records;
        }
    }
    v.note = fmt::format("{} generation records, max error {:.1e}", records, worst);
    return v;
}

Verdict criterion_5() {
    Verdict v;
    const auto scenarios = make_benchmark_scenarios(50, 505);
    MockProvider mock;
    std::size_t monotone = 0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        bool static_utilities = true;
        for (const auto& u : scenarios[i].synthetic) static_utilities = static_utilities && u.jitter == 0.0;
        v.check(static_utilities, scenarios[i].id + " has jittered utilities");

        EvolutionConfig cfg;
        cfg.seed = 7000 + i;
        cfg.ablation.plasticity_off = true;
        const RunTrace t = run(scenarios[i], cfg, mock);
        v.check(!t.aborted, scenarios[i].id + " aborted");
        bool ok = true;
        double prev = -std::numeric_limits<double>::infinity();
        std::set<std::string> known;
        for (const auto& m : t.initial.members) known.insert(m.id);
        for (const auto& g : t.generations) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& f : g.fitness) best = std::max(best, f.adjusted);
            if (best < prev) ok = false;
            prev = best;
            v.check(g.evaluated.size() == cfg.k && g.survivors.size() == cfg.k,
                    fmt::format("{} gen {}: population size", scenarios[i].id, g.generation));
            for (const auto& m : g.evaluated) {
                v.check(known.contains(m.id), fmt::format("{}: {} evaluated before it existed", scenarios[i].id, m.id));
            }
            for (const auto& m : g.matured) {
                v.check(m.parent && known.contains(*m.parent),
                        fmt::format("{}: {} has an unknown parent", scenarios[i].id, m.id));
                known.insert(m.id);
            }
            for (const auto& id : g.survivors)
                v.check(known.contains(id), fmt::format("{}: survivor {} has no lineage", scenarios[i].id, id));
        }
        v.check(t.final_population.size() == cfg.k, "final population size");
        if (ok) ++monotone;
    }
    v.check(monotone == scenarios.size(), fmt::format("best R non-decreasing in {}/50 runs", monotone));
    v.note = fmt::format("best R non-decreasing in {}/50 runs", monotone);
    return v;
}

Verdict criterion_6() {
    Verdict v;
    const auto scenarios = make_benchmark_scenarios(12, 606);
    MockProvider mock;
    EvolutionConfig base;
    const auto runs = run_ablation_suite(scenarios, base, mock);
    v.check(runs.size() == scenarios.size() * kAllVariants.size(), "suite cardinality");
    std::map<std::string, std::string> p0;
    std::map<Variant, std::size_t> signature_hits;
    for (const auto& r : runs) {
        if (!r.trace) {
            v.check(false, r.scenario_id + " " + std::string(to_string(r.variant)) + " failed: " + r.error);
            continue;
        }
        const RunTrace& t = *r.trace;
        std::string ids;
        for (const auto& m : t.initial.members) ids += m.id + "|" + m.text + "\n";
        if (!p0.contains(r.scenario_id)) p0[r.scenario_id] = ids;
        v.check(p0[r.scenario_id] == ids, r.scenario_id + ": variants do not share P0");
        v.check(t.config.seed == base.seed, "seed differs across variants");
        bool sig = true;
        for (const auto& g : t.generations) {
            switch (r.variant) {
                case Variant::no_dup_mat:
                    sig = sig && g.matured.empty() && g.duplications.empty();
                    for (const auto& m : g.evaluated) sig = sig && m.origin != Origin::duplication_maturation;
                    break;
                case Variant::no_penalty:
                    for (const auto& f : g.fitness) sig = sig && f.adjusted == f.borda;
                    break;
                case Variant::no_plasticity:
                    sig = sig && g.plasticity.empty();
                    for (const auto& m : g.evaluated) sig = sig && m.origin != Origin::plasticity;
                    break;
                case Variant::no_rcv:
                    for (std::size_t i = 0; i < g.evaluated.size(); ++i) {
                        std::vector<double> equal(g.profiles.size(), 1.0 / static_cast<double>(g.profiles.size()));
                        std::vector<std::vector<std::string>> rankings;
                        for (const auto& p : g.profiles) rankings.push_back(p.ranking);
                        std::vector<std::string> ids;
                        for (const auto& m : g.evaluated) ids.push_back(m.id);
                        const auto want = oracle_borda(rankings, equal, ids);
                        sig = sig && std::abs(g.fitness[i].borda - want[i]) <= 1e-12;
                    }
                    break;
                case Variant::full:
                    break;
            }
        }
        v.check(sig, fmt::format("{} {}: signature missing", r.scenario_id, to_string(r.variant)));
        if (sig) ++signature_hits[r.variant];
    }

    // Skewed weights: the heavy stakeholder's favourite wins under weighted
    // Borda, the light stakeholders' favourite wins under equal weighting.
    const std::vector<std::string> ids{"a", "b", "c"};
    const std::vector<RankingProfile> profiles{{"s1", {"a", "b", "c"}}, {"s2", {"b", "c", "a"}}};
    const std::vector<double> skew{0.9, 0.1};
    const auto weighted = borda_scores(profiles, skew, ids);
    const auto averaged = average_scores(profiles, ids);
    v.check(weighted.consensus_id == "a", "weighted consensus " + weighted.consensus_id);
    v.check(averaged.consensus_id == "b", "average-score consensus " + averaged.consensus_id);
    v.check(weighted.consensus_id != averaged.consensus_id, "consensus identical on the skewed fixture");
    v.note = fmt::format("{} scenarios x 5 variants; skewed fixture consensus {} vs {}", scenarios.size(),
                         weighted.consensus_id, averaged.consensus_id);
    return v;
}

Verdict criterion_7() {
    Verdict v;
    const std::vector<double> d{1, 2, 3, 4, 5};
    v.check(stats::wilcoxon_signed_rank(d).p == 0.0625, fmt::format("p = {}", stats::wilcoxon_signed_rank(d).p));
    const std::vector<double> three{1, 2, 3};
    v.check(stats::cohens_dz(three) == 2.0, "d_z != 2");
    const std::vector<double> raw{0.01, 0.04, 0.03};
    const auto holm = stats::holm_adjust(raw);
    v.check(std::abs(holm[0] - 0.03) < 1e-15 && std::abs(holm[1] - 0.06) < 1e-15 && std::abs(holm[2] - 0.06) < 1e-15,
            fmt::format("holm = ({}, {}, {})", holm[0], holm[1], holm[2]));
    const auto ci = stats::mean_ci(three);
    v.check(ci.lower && std::abs(*ci.lower - 0.8684) <= 1e-4, "ci lower");
    v.check(ci.upper && std::abs(*ci.upper - 3.1316) <= 1e-4, "ci upper");

    Rng rng(derive_seed(2024, "acceptance-wilcoxon"));
    double worst = 0.0;
    for (int s = 0; s < 200; ++s) {
        std::vector<double> diffs;
        const double shift = rng.uniform(-0.5, 1.0);
        for (int i = 0; i < 20; ++i) diffs.push_back(shift + rng.uniform(-1.0, 1.0));
        std::vector<double> nonzero;
        double w_plus = 0.0;
        for (double x : diffs)
            if (x != 0.0) nonzero.push_back(x);
        const auto ranks = stats::signed_rank_magnitudes(nonzero);
        for (std::size_t i = 0; i < nonzero.size(); ++i)
            if (nonzero[i] > 0) w_plus += ranks[i];
        const double exact = stats::wilcoxon_exact_p(ranks, w_plus);
        const double approx = stats::wilcoxon_normal_p(ranks, w_plus);
        worst = std::max(worst, std::abs(exact - approx));
    }
    v.check(worst <= 0.01, fmt::format("max |exact - approx| = {:.4f} at n = 20", worst));
    v.note = fmt::format("n=20 max |dp| {:.4f}", worst);
    return v;
}

Verdict criterion_8() {
    Verdict v;
    const auto rows = report::parse_overall_csv(read_file(fs::path(LARK_TEST_DATA) / "table1_published.csv"));
    v.check(rows.size() == 14, fmt::format("{} rows", rows.size()));
    const std::string md = report::render_overall(rows, 30);
    for (const char* needle : {"2.55 [2.17, 2.93]", "29.4 [26.34, 32.46]",
                               "| Lark Full | 2.55 [2.17, 2.93] | 29.4 [26.34, 32.46] | 0.016006 |",
                               "| Model | Mean Rank ↓ [95% CI] | Mean Score /50 ↑ [95% CI] | Avg. Cost ($/task) |",
                               "(30 rounds)"}) {
        v.check(md.find(needle) != std::string::npos, fmt::format("missing '{}'", needle));
    }
    v.note = "published Lark Full row reproduced";
    return v;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    }
    return files;
}

// Runs the whole mock pipeline into `out` and writes the report artifacts.
BenchmarkResult pipeline(const fs::path& out) {
    fs::remove_all(out);
    const auto scenarios = make_benchmark_scenarios(30, 7);
    for (const auto& s : scenarios) save_scenario(s, out / "scenarios" / (s.id + ".yaml"));
    EvolutionConfig cfg;
    cfg.generations = 5;
    cfg.k = 6;
    const RunConfig priced = default_run_config();
    auto result = run_benchmark(scenarios, default_roster(), cfg, *make_provider(priced), make_judges(priced), out);
    std::vector<std::string> ablations;
    for (Variant v : kAllVariants)
        if (v != Variant::full) ablations.emplace_back(display_name(v));
    const auto tables = report::compute_tables(result.matrix, std::string(display_name(Variant::full)), ablations);
    const std::size_t n = result.matrix.rounds.size();
    const fs::path rep = out / "reports";
    write_file_atomic(rep / "table1.md", report::render_overall(tables.overall, n));
    write_file_atomic(rep / "table2.md", report::render_ablations(tables.ablations, n));
    write_file_atomic(rep / "table3.md", report::render_comparisons(tables.comparisons, n));
    write_file_atomic(rep / "overall.csv", report::overall_csv(tables.overall));
    write_file_atomic(rep / "ablations.csv", report::ablations_csv(tables.ablations));
    write_file_atomic(rep / "comparisons.csv", report::comparisons_csv(tables.comparisons));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < result.traces.size(); ++i)
        ids.push_back(result.traces[i].scenario.id + "__" + result.trace_systems[i]);
    write_file_atomic(rep / "efficiency.csv", report::efficiency_csv(ids, result.traces));
    return result;
}

const fs::path kWork = fs::temp_directory_path() / "lark-acceptance";

Verdict criterion_9() {
    Verdict v;
    double slowest = 0.0;
    std::vector<std::map<std::string, std::string>> snaps;
    for (const char* name : {"a", "b"}) {
        const auto t0 = Clock::now();
        const auto result = pipeline(kWork / name);
        const double elapsed = seconds_since(t0);
        slowest = std::max(slowest, elapsed);
        v.check(elapsed < 600.0, fmt::format("pipeline took {:.1f} s", elapsed));
        v.check(result.matrix.rounds.size() == 30, "round count");
        v.check(result.matrix.systems.size() == 5, "system count");
        v.check(result.traces.size() == 150, fmt::format("{} traces", result.traces.size()));
        for (const auto& c : result.matrix.cells) v.check(c.score.has_value(), c.scenario_id + "/" + c.system + " missing");
        snaps.push_back(snapshot(kWork / name));
    }
    v.check(snaps[0].size() == snaps[1].size(), "artifact sets differ");
    std::size_t identical = 0;
    for (const auto& [path, bytes] : snaps[0]) {
        const auto it = snaps[1].find(path);
        const bool same = it != snaps[1].end() && it->second == bytes;
        v.check(same, path + " differs between runs");
        if (same) ++identical;
    }
    for (const char* f : {"reports/table1.md", "reports/table2.md", "reports/table3.md", "reports/scores.csv"})
        v.check(snaps[0].contains(f), std::string("missing ") + f);
    v.note = fmt::format("{} artifacts byte-identical, slowest run {:.1f} s", identical, slowest);
    return v;
}

Verdict criterion_10() {
    Verdict v;
    const fs::path dir = kWork / "a" / "evaluations";
    if (!fs::exists(dir)) {
        v.check(false, "no evaluations from the pipeline run");
        return v;
    }
    std::vector<std::string> names;
    for (const auto& s : default_roster()) names.push_back(s.name);
    std::size_t files = 0, payloads = 0, hits = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string fname = e.path().filename().string();
        if (!fname.ends_with(".payloads.jsonl")) continue;
        ++files;
        const std::string text = read_file(e.path());
        payloads += static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        for (const auto& n : names) {
            for (auto pos = text.find(n); pos != std::string::npos; pos = text.find(n, pos + 1)) {
                ++hits;
                v.check(false, fmt::format("'{}' in {}", n, fname));
            }
        }
    }
    v.check(files == 30, fmt::format("{} payload files", files));
    v.check(payloads > 0, "no payloads persisted");
    v.note = fmt::format("{} payloads in {} files, {} roster-name occurrences", payloads, files, hits);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"Borda oracle equivalence", criterion_1},
        {"token penalty", criterion_2},
        {"duplication probability", criterion_3},
        {"efficiency recomputation", criterion_4},
        {"loop dynamics without plasticity", criterion_5},
        {"ablation signatures", criterion_6},
        {"statistics", criterion_7},
        {"report fidelity", criterion_8},
        {"end-to-end determinism", criterion_9},
        {"blinding audit", criterion_10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        fmt::print("[{}] {:2}. {}: {}\n", v.passed() ? "PASS" : "FAIL", i + 1, criteria[i].first, v.note);
        for (const auto& f : v.failures) fmt::print("        - {}\n", f);
        std::fflush(stdout);
        if (!v.passed()) ++failed;
    }
    fs::remove_all(kWork);
    fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
