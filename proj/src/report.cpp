#include "lark/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lark/error.hpp"
#include "lark/scenario_io.hpp"
#include "lark/stats.hpp"

namespace lark::report {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Interval interval_of(const std::vector<double>& values) {
    if (values.empty()) return {kNaN, std::nullopt, std::nullopt};
    const auto ci = stats::mean_ci(values);
    return {ci.mean, ci.lower, ci.upper};
}

std::size_t index_of(const std::vector<std::string>& v, const std::string& name) {
    const auto it = std::find(v.begin(), v.end(), name);
    if (it == v.end()) throw ValidationError(fmt::format("system '{}' is not in the score matrix", name));
    return static_cast<std::size_t>(it - v.begin());
}

std::string fixed(double v, int decimals) {
    if (std::isnan(v)) return "NA";
    return fmt::format("{:.{}f}", v, decimals);
}

std::string opt_csv(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::optional<double> opt_number(const std::string& s, const std::string& field) {
    if (s == "NA" || s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(field, fmt::format("'{}' is not a number", s));
    }
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out(1);
    for (char c : line) {
        if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

}  // namespace

std::string format_interval(const Interval& iv, int value_decimals, int ci_decimals) {
    std::string out = fixed(iv.value, value_decimals);
    if (iv.lower && iv.upper) out += fmt::format(" [{}, {}]", fixed(*iv.lower, ci_decimals), fixed(*iv.upper, ci_decimals));
    return out;
}

std::string format_p(double p) {
    if (p >= 0.001) return fmt::format("{:.3f}", p);
    return fmt::format("{:.2e}", p);
}

Tables compute_tables(const ScoreMatrix& matrix, const std::string& full,
                      const std::vector<std::string>& ablation_systems) {
    const auto scores = matrix.dense_scores();
    const auto costs = matrix.dense_costs();
    const auto ranks = stats::per_round_ranks(scores);
    const std::size_t f = index_of(matrix.systems, full);

    Tables t;
    for (std::size_t s = 0; s < matrix.systems.size(); ++s) {
        std::vector<double> r, sc, c;
        for (std::size_t k = 0; k < matrix.rounds.size(); ++k) {
            if (!std::isnan(scores[s][k])) {
                r.push_back(ranks[s][k]);
                sc.push_back(scores[s][k]);
            }
            if (!std::isnan(costs[s][k])) c.push_back(costs[s][k]);
        }
        OverallRow row{matrix.systems[s], interval_of(r), interval_of(sc), std::nullopt};
        if (!c.empty()) row.cost = stats::mean(c);
        t.overall.push_back(std::move(row));
    }
    std::stable_sort(t.overall.begin(), t.overall.end(), [](const OverallRow& a, const OverallRow& b) {
        if (std::isnan(a.mean_rank.value) || std::isnan(b.mean_rank.value)) return !std::isnan(a.mean_rank.value) && std::isnan(b.mean_rank.value);
        return a.mean_rank.value < b.mean_rank.value;
    });

    auto paired = [&](std::size_t other, std::vector<double>& dscore, std::vector<double>& drank) {
        std::size_t excluded = 0;
        for (std::size_t k = 0; k < matrix.rounds.size(); ++k) {
            if (std::isnan(scores[f][k]) || std::isnan(scores[other][k])) {
                ++excluded;
                continue;
            }
            dscore.push_back(scores[f][k] - scores[other][k]);
            drank.push_back(ranks[other][k] - ranks[f][k]);
        }
        if (excluded > 0)
            spdlog::info("{} vs {}: {} round(s) excluded for missing cells", full, matrix.systems[other], excluded);
    };

    for (const auto& name : ablation_systems) {
        std::vector<double> ds, dr;
        paired(index_of(matrix.systems, name), ds, dr);
        t.ablations.push_back({name, interval_of(ds), interval_of(dr)});
    }

    std::vector<double> raw;
    for (std::size_t s = 0; s < matrix.systems.size(); ++s) {
        if (s == f) continue;
        std::vector<double> ds, dr;
        paired(s, ds, dr);
        ComparisonRow row;
        row.comparator = matrix.systems[s];
        if (!ds.empty()) {
            row.delta_mean = stats::mean(ds);
            row.d_z = stats::cohens_dz(ds);
            const auto w = stats::wilcoxon_signed_rank(ds);
            row.p_raw = w.p;
            row.n_effective = w.n_effective;
        } else {
            row.delta_mean = kNaN;
        }
        raw.push_back(row.p_raw);
        t.comparisons.push_back(std::move(row));
    }
    const auto holm = stats::holm_adjust(raw);
    for (std::size_t i = 0; i < holm.size(); ++i) t.comparisons[i].p_holm = holm[i];
    return t;
}

std::string render_overall(const std::vector<OverallRow>& rows, std::size_t rounds) {
    std::string out = fmt::format("Overall quality, rank, and cost ({} rounds)\n\n", rounds);
    out += "| Model | Mean Rank ↓ [95% CI] | Mean Score /50 ↑ [95% CI] | Avg. Cost ($/task) |\n";
    out += "|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += fmt::format("| {} | {} | {} | {} |\n", r.system, format_interval(r.mean_rank, 2, 2),
                           format_interval(r.mean_score, 1, 2), r.cost ? fixed(*r.cost, 6) : "NA");
    }
    return out;
}

std::string render_ablations(const std::vector<AblationRow>& rows, std::size_t rounds) {
    std::string out = fmt::format("Ablation deltas vs. the full system ({} rounds)\n\n", rounds);
    out += "| Variant | ΔScore (/50) ↑ [95% CI] | ΔRank (pos.) ↓ [95% CI] |\n";
    out += "|---|---|---|\n";
    for (const auto& r : rows) {
        out += fmt::format("| {} | {} | {} |\n", r.variant, format_interval(r.delta_score, 1, 2),
                           format_interval(r.delta_rank, 2, 2));
    }
    return out;
}

std::string render_comparisons(const std::vector<ComparisonRow>& rows, std::size_t rounds) {
    std::string out = fmt::format("Full system vs. comparators on composite scores ({} rounds)\n\n", rounds);
    out += "| Comparator | ΔMean (/50) | d_z | Wilcoxon p | Holm p | n |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", r.comparator, fixed(r.delta_mean, 1),
                           r.d_z ? fixed(*r.d_z, 2) : "NA", format_p(r.p_raw), format_p(r.p_holm), r.n_effective);
    }
    return out;
}

std::string overall_csv(const std::vector<OverallRow>& rows) {
    std::string out = "system,mean_rank,rank_lo,rank_hi,mean_score,score_lo,score_hi,cost\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.system, format_double(r.mean_rank.value),
                           opt_csv(r.mean_rank.lower), opt_csv(r.mean_rank.upper), format_double(r.mean_score.value),
                           opt_csv(r.mean_score.lower), opt_csv(r.mean_score.upper), opt_csv(r.cost));
    }
    return out;
}

std::string ablations_csv(const std::vector<AblationRow>& rows) {
    std::string out = "variant,delta_score,delta_score_lo,delta_score_hi,delta_rank,delta_rank_lo,delta_rank_hi\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.variant, format_double(r.delta_score.value),
                           opt_csv(r.delta_score.lower), opt_csv(r.delta_score.upper), format_double(r.delta_rank.value),
                           opt_csv(r.delta_rank.lower), opt_csv(r.delta_rank.upper));
    }
    return out;
}

std::string comparisons_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "comparator,delta_mean,d_z,p_raw,p_holm,n_effective\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", r.comparator, format_double(r.delta_mean), opt_csv(r.d_z),
                           format_double(r.p_raw), format_double(r.p_holm), r.n_effective);
    }
    return out;
}

std::vector<OverallRow> parse_overall_csv(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    std::vector<OverallRow> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("system,", 0) == 0) continue;
        const auto f = split(line);
        const std::string where = fmt::format("line {}", line_no);
        if (f.size() != 8) throw ParseError(where, fmt::format("expected 8 fields, found {}", f.size()));
        OverallRow r;
        r.system = f[0];
        const auto rank = opt_number(f[1], where + " mean_rank");
        const auto score = opt_number(f[4], where + " mean_score");
        if (!rank || !score) throw ParseError(where, "mean rank and mean score are required");
        r.mean_rank = {*rank, opt_number(f[2], where + " rank_lo"), opt_number(f[3], where + " rank_hi")};
        r.mean_score = {*score, opt_number(f[5], where + " score_lo"), opt_number(f[6], where + " score_hi")};
        r.cost = opt_number(f[7], where + " cost");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string efficiency_csv(const std::vector<std::string>& run_ids, const std::vector<RunTrace>& traces) {
    if (run_ids.size() != traces.size()) throw ValidationError("one run id per trace is required");
    std::string out = "run_id,generation,efficiency\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (const auto& g : traces[i].generations)
            out += fmt::format("{},{},{}\n", run_ids[i], g.generation, format_double(g.efficiency));
    }
    return out;
}

}  // namespace lark::report
