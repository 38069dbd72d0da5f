#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lark/benchmark.hpp"
#include "lark/evolution.hpp"

namespace lark::report {

struct Interval {
    double value = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
};

struct OverallRow {
    std::string system;
    Interval mean_rank;
    Interval mean_score;
    std::optional<double> cost;
};

struct AblationRow {
    std::string variant;
    Interval delta_score;  // Full - variant
    Interval delta_rank;   // variant - Full
};

struct ComparisonRow {
    std::string comparator;
    double delta_mean = 0.0;
    std::optional<double> d_z;
    double p_raw = 1.0;
    double p_holm = 1.0;
    std::size_t n_effective = 0;
};

struct Tables {
    std::vector<OverallRow> overall;
    std::vector<AblationRow> ablations;
    std::vector<ComparisonRow> comparisons;
};

/// Computes all three tables. `full` names the reference system; ablation rows
/// are the systems listed in `ablation_systems`. Rounds missing either cell of
/// a pair are excluded from that comparison only.
Tables compute_tables(const ScoreMatrix& matrix, const std::string& full,
                      const std::vector<std::string>& ablation_systems);

std::string render_overall(const std::vector<OverallRow>& rows, std::size_t rounds);
std::string render_ablations(const std::vector<AblationRow>& rows, std::size_t rounds);
std::string render_comparisons(const std::vector<ComparisonRow>& rows, std::size_t rounds);

std::string overall_csv(const std::vector<OverallRow>& rows);
std::string ablations_csv(const std::vector<AblationRow>& rows);
std::string comparisons_csv(const std::vector<ComparisonRow>& rows);

/// Reads hand-entered overall rows:
/// system,mean_rank,rank_lo,rank_hi,mean_score,score_lo,score_hi,cost
std::vector<OverallRow> parse_overall_csv(std::string_view csv);

/// run_id,generation,efficiency rows for every trace.
std::string efficiency_csv(const std::vector<std::string>& run_ids, const std::vector<RunTrace>& traces);

/// "2.55 [2.17, 2.93]"
std::string format_interval(const Interval& iv, int value_decimals, int ci_decimals);
/// p-values: fixed with three decimals at or above 0.001, otherwise "5.93e-06".
std::string format_p(double p);

}  // namespace lark::report
