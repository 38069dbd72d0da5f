#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lark/evolution.hpp"
#include "lark/judge.hpp"

namespace lark {

/// A roster entry: either a runnable variant or a directory of pre-generated
/// outputs named <scenario-id>.txt (with an optional costs.csv of
/// scenario_id,cost rows).
struct SystemSpec {
    std::string name;
    std::optional<Variant> variant;
    std::optional<std::filesystem::path> outputs_dir;
};

/// Full plus the four ablations under their display names.
std::vector<SystemSpec> default_roster();
/// Reads a YAML roster: systems: [{name, variant} | {name, outputs}].
std::vector<SystemSpec> load_roster(const std::filesystem::path& path);

/// Long-format matrix: one cell per (round, system).
struct ScoreCell {
    std::string scenario_id;
    std::string system;
    std::optional<double> score;  // nullopt: missing
    double cost = 0.0;
};

struct ScoreMatrix {
    std::vector<std::string> systems;  // roster order
    std::vector<std::string> rounds;   // scenario order
    std::vector<ScoreCell> cells;

    const ScoreCell* find(const std::string& scenario, const std::string& system) const;
    /// scores[system][round] with NaN for missing cells.
    std::vector<std::vector<double>> dense_scores() const;
    std::vector<std::vector<double>> dense_costs() const;
};

std::string score_matrix_csv(const ScoreMatrix& m);
/// Throws ParseError on malformed rows.
ScoreMatrix parse_score_matrix_csv(std::string_view csv);

/// Final output of a run: the top member of the final population.
std::string final_output(const RunTrace& trace);

struct BenchmarkResult {
    ScoreMatrix matrix;
    std::vector<RunTrace> traces;  // runnable systems, (scenario, roster) order
    std::vector<std::string> trace_systems;
    std::vector<EvaluationRecord> evaluations;  // one per scenario
};

/// Runs every runnable system on every scenario, judges all outputs per round
/// and fills the score matrix. Cost per cell = run usage cost plus an equal
/// share of that round's judge cost. When `out_dir` is set, writes runs/,
/// evaluations/ and reports/scores.csv beneath it.
BenchmarkResult run_benchmark(const std::vector<Scenario>& scenarios, const std::vector<SystemSpec>& roster,
                              const EvolutionConfig& base, const Provider& provider, const JudgeConfig& judges,
                              const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                              std::size_t parallel_rounds = 1);

}  // namespace lark
