#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lark/benchmark.hpp"
#include "lark/config_io.hpp"
#include "lark/evolution.hpp"
#include "lark/judge.hpp"
#include "lark/replay.hpp"
#include "lark/report.hpp"
#include "lark/scenario_io.hpp"
#include "lark/stakeholder_sim.hpp"
#include "lark/trace_io.hpp"

namespace fs = std::filesystem;
using namespace lark;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> generations;
    std::optional<std::size_t> k;
    std::optional<std::size_t> parallelism;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Base seed for the run(s)");
    cmd->add_option("--generations", o.generations, "Number of generations G")->check(CLI::PositiveNumber);
    cmd->add_option("--k", o.k, "Population size")->check(CLI::PositiveNumber);
    cmd->add_option("--parallel", o.parallelism, "Concurrent provider calls per run")->check(CLI::PositiveNumber);
}

RunConfig load_config(const std::string& path, const Overrides& o) {
    RunConfig c = path.empty() ? default_run_config() : load_run_config(path);
    if (o.seed) c.evolution.seed = *o.seed;
    if (o.generations) c.evolution.generations = *o.generations;
    if (o.k) c.evolution.k = *o.k;
    if (o.parallelism) c.evolution.parallelism = *o.parallelism;
    c.evolution.validate();
    return c;
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
    if (!fs::is_directory(dir)) throw Error(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Scenario> load_scenarios(const fs::path& dir) {
    std::vector<Scenario> out;
    for (const auto& f : sorted_files(dir, ".yaml")) out.push_back(load_scenario(f));
    if (out.empty()) throw Error(fmt::format("no scenario files in '{}'", dir.string()));
    return out;
}

std::string system_name(const EvolutionConfig& c) {
    for (Variant v : kAllVariants) {
        if (flags_for(v) == c.ablation) return std::string(display_name(v));
    }
    return "Lark Custom";
}

int cmd_gen_scenarios(std::size_t count, std::uint64_t seed, const fs::path& out, const BenchmarkOptions& options) {
    fs::create_directories(out);
    const auto scenarios = make_benchmark_scenarios(count, seed, options);
    for (const auto& s : scenarios) save_scenario(s, out / (s.id + ".yaml"));
    fmt::print("wrote {} scenarios to {}\n", scenarios.size(), out.string());
    return 0;
}

int cmd_run(const fs::path& scenario_file, const std::string& config, const Overrides& o, const std::string& variant,
            const fs::path& out) {
    RunConfig cfg = load_config(config, o);
    cfg.evolution.ablation = flags_for(parse_variant(variant));
    const Scenario s = load_scenario(scenario_file);
    const auto provider = make_provider(cfg);
    const RunTrace trace = run(s, cfg.evolution, *provider);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_trace(trace, out);
    fmt::print("{}: {} generations, final top {} , cost {:.6f}\n", s.id, trace.generations.size(),
               trace.final_population.members.empty() ? "-" : trace.final_population.members.front().id,
               trace.total.cost);
    if (trace.aborted) {
        spdlog::error("run aborted: {}", trace.abort_reason);
        return 1;
    }
    return 0;
}

int cmd_ablate(const fs::path& scenarios_dir, const std::string& config, const Overrides& o, std::size_t parallel_runs,
               const fs::path& out) {
    const RunConfig cfg = load_config(config, o);
    const auto scenarios = load_scenarios(scenarios_dir);
    const auto provider = make_provider(cfg);
    const auto runs = run_ablation_suite(scenarios, cfg.evolution, *provider, parallel_runs);
    fs::create_directories(out);
    int failures = 0;
    for (const auto& r : runs) {
        if (!r.trace) {
            spdlog::error("{} / {} failed: {}", r.scenario_id, to_string(r.variant), r.error);
            ++failures;
            continue;
        }
        save_trace(*r.trace, out / fmt::format("{}__{}.jsonl", r.scenario_id, to_string(r.variant)));
    }
    fmt::print("wrote {} traces to {} ({} failed)\n", runs.size() - static_cast<std::size_t>(failures), out.string(),
               failures);
    return failures == 0 ? 0 : 1;
}

int cmd_judge(const fs::path& runs_dir, const std::string& config, const fs::path& out) {
    const RunConfig cfg = load_config(config, {});
    const JudgeConfig judges = make_judges(cfg);

    // Group traces by scenario in file order.
    std::vector<std::string> scenario_order;
    std::map<std::string, std::vector<RunTrace>> by_scenario;
    for (const auto& f : sorted_files(runs_dir, ".jsonl")) {
        RunTrace t = load_trace(f);
        if (!by_scenario.contains(t.scenario.id)) scenario_order.push_back(t.scenario.id);
        by_scenario[t.scenario.id].push_back(std::move(t));
    }
    if (scenario_order.empty()) throw Error(fmt::format("no traces in '{}'", runs_dir.string()));

    fs::create_directories(out / "evaluations");
    fs::create_directories(out / "reports");
    ScoreMatrix matrix;
    matrix.rounds = scenario_order;
    for (const auto& sid : scenario_order) {
        const auto& traces = by_scenario.at(sid);
        std::map<std::string, std::string> outputs;
        std::map<std::string, double> run_cost;
        for (const auto& t : traces) {
            const std::string name = system_name(t.config);
            if (std::find(matrix.systems.begin(), matrix.systems.end(), name) == matrix.systems.end())
                matrix.systems.push_back(name);
            run_cost[name] = t.total.cost;
            if (!t.aborted) outputs[name] = final_output(t);
        }
        std::optional<EvaluationRecord> eval;
        if (outputs.size() >= 2) {
            eval = judge_outputs(outputs, traces.front().scenario, judges);
            write_file_atomic(out / "evaluations" / (sid + ".json"), to_json(*eval).dump(2) + "\n");
            write_file_atomic(out / "evaluations" / (sid + ".payloads.jsonl"), payload_log(*eval));
        }
        const double share = eval ? eval->judge_usage().cost / static_cast<double>(outputs.size()) : 0.0;
        for (const auto& [name, cost] : run_cost) {
            ScoreCell cell{sid, name, std::nullopt, cost};
            if (eval && outputs.contains(name)) {
                cell.score = eval->composite_for(name);
                cell.cost += share;
            }
            matrix.cells.push_back(std::move(cell));
        }
    }
    auto variant_rank = [](const std::string& name) {
        for (std::size_t i = 0; i < kAllVariants.size(); ++i) {
            if (display_name(kAllVariants[i]) == name) return i;
        }
        return kAllVariants.size();
    };
    std::stable_sort(matrix.systems.begin(), matrix.systems.end(),
                     [&](const std::string& a, const std::string& b) { return variant_rank(a) < variant_rank(b); });
    std::stable_sort(matrix.cells.begin(), matrix.cells.end(), [&](const ScoreCell& a, const ScoreCell& b) {
        const auto ra = std::find(matrix.rounds.begin(), matrix.rounds.end(), a.scenario_id);
        const auto rb = std::find(matrix.rounds.begin(), matrix.rounds.end(), b.scenario_id);
        if (ra != rb) return ra < rb;
        return std::find(matrix.systems.begin(), matrix.systems.end(), a.system) <
               std::find(matrix.systems.begin(), matrix.systems.end(), b.system);
    });
    write_file_atomic(out / "reports" / "scores.csv", score_matrix_csv(matrix));
    fmt::print("judged {} rounds; scores in {}\n", matrix.rounds.size(), (out / "reports" / "scores.csv").string());
    return 0;
}

int cmd_bench(const fs::path& scenarios_dir, const std::string& roster_file, const std::string& config,
              const Overrides& o, std::size_t parallel_rounds, const fs::path& out) {
    const RunConfig cfg = load_config(config, o);
    const auto scenarios = load_scenarios(scenarios_dir);
    const auto roster = roster_file.empty() ? default_roster() : load_roster(roster_file);
    const auto provider = make_provider(cfg);
    const auto result = run_benchmark(scenarios, roster, cfg.evolution, *provider, make_judges(cfg), out, parallel_rounds);
    fmt::print("benchmark: {} rounds x {} systems; scores in {}\n", result.matrix.rounds.size(),
               result.matrix.systems.size(), (out / "reports" / "scores.csv").string());
    return 0;
}

std::vector<std::string> ablation_names(const ScoreMatrix& m, const std::string& full) {
    std::vector<std::string> out;
    for (Variant v : kAllVariants) {
        const std::string name(display_name(v));
        if (name != full && std::find(m.systems.begin(), m.systems.end(), name) != m.systems.end())
            out.push_back(name);
    }
    return out;
}

int cmd_stats(const fs::path& scores, const std::string& full, const std::string& out) {
    const auto matrix = parse_score_matrix_csv(read_file(scores));
    const auto tables = report::compute_tables(matrix, full, ablation_names(matrix, full));
    fmt::print("{}", report::render_comparisons(tables.comparisons, matrix.rounds.size()));
    if (!out.empty()) write_file_atomic(out, report::comparisons_csv(tables.comparisons));
    return 0;
}

int cmd_report(const std::string& scores, const std::string& runs_dir, const std::string& table1_csv,
               const std::string& full, const fs::path& out) {
    if (!table1_csv.empty()) {
        const auto rows = report::parse_overall_csv(read_file(table1_csv));
        const std::string text = report::render_overall(rows, 30);
        if (out.empty()) {
            fmt::print("{}", text);
        } else {
            fs::create_directories(out);
            write_file_atomic(out / "table1.md", text);
            fmt::print("{}", text);
        }
        return 0;
    }
    if (scores.empty()) throw Error("report needs --scores or --table1-csv");
    if (out.empty()) throw Error("report needs --out");
    const auto matrix = parse_score_matrix_csv(read_file(scores));
    const auto tables = report::compute_tables(matrix, full, ablation_names(matrix, full));
    const std::size_t n = matrix.rounds.size();
    fs::create_directories(out);
    write_file_atomic(out / "table1.md", report::render_overall(tables.overall, n));
    write_file_atomic(out / "table2.md", report::render_ablations(tables.ablations, n));
    write_file_atomic(out / "table3.md", report::render_comparisons(tables.comparisons, n));
    write_file_atomic(out / "overall.csv", report::overall_csv(tables.overall));
    write_file_atomic(out / "ablations.csv", report::ablations_csv(tables.ablations));
    write_file_atomic(out / "comparisons.csv", report::comparisons_csv(tables.comparisons));
    if (!runs_dir.empty()) {
        std::vector<std::string> ids;
        std::vector<RunTrace> traces;
        for (const auto& f : sorted_files(runs_dir, ".jsonl")) {
            ids.push_back(f.stem().string());
            traces.push_back(load_trace(f));
        }
        write_file_atomic(out / "efficiency.csv", report::efficiency_csv(ids, traces));
    }
    fmt::print("{}\n{}\n{}", report::render_overall(tables.overall, n), report::render_ablations(tables.ablations, n),
               report::render_comparisons(tables.comparisons, n));
    return 0;
}

int cmd_replay(const fs::path& trace_file) {
    const RunTrace trace = load_trace(trace_file);
    const auto diffs = replay(trace);
    for (const auto& d : diffs) fmt::print("{}\n", format_diff(d));
    if (diffs.empty()) {
        fmt::print("{}: consistent ({} generations)\n", trace_file.string(), trace.generations.size());
        return 0;
    }
    fmt::print("{}: {} difference(s)\n", trace_file.string(), diffs.size());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("lark"));
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Stakeholder-aware evolutionary strategy search with blinded evaluation"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Errors only");

    std::string config;
    Overrides overrides;

    auto* gen = app.add_subcommand("gen-scenarios", "Generate benchmark scenario files");
    std::size_t count = 30;
    std::uint64_t gen_seed = 7;
    std::string gen_out;
    BenchmarkOptions bench_opts;
    gen->add_option("--count", count, "Number of scenarios")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--min-stakeholders", bench_opts.min_stakeholders)->check(CLI::Range(1, 7));
    gen->add_option("--max-stakeholders", bench_opts.max_stakeholders)->check(CLI::Range(1, 7));
    gen->add_option("--target-tokens", bench_opts.target_tokens)->check(CLI::PositiveNumber);
    gen->add_option("--lambda", bench_opts.lambda)->check(CLI::Range(0.0, 1.0));

    auto* run_cmd = app.add_subcommand("run", "Run the evolutionary loop on one scenario");
    std::string scenario_file;
    std::string variant = "full";
    std::string run_out;
    run_cmd->add_option("--scenario", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--config", config, "Run config (YAML)")->check(CLI::ExistingFile);
    run_cmd->add_option("--variant", variant, "full | no_plasticity | no_rcv | no_dup_mat | no_penalty");
    run_cmd->add_option("--out", run_out, "Trace output (JSONL)")->required();
    add_overrides(run_cmd, overrides);

    auto* ablate = app.add_subcommand("ablate", "Run the full system and its four ablations on every scenario");
    std::string scenarios_dir;
    std::string ablate_out;
    std::size_t parallel_runs = 1;
    ablate->add_option("--scenarios", scenarios_dir, "Scenario directory")->required()->check(CLI::ExistingDirectory);
    ablate->add_option("--config", config, "Run config (YAML)")->check(CLI::ExistingFile);
    ablate->add_option("--out", ablate_out, "Trace directory")->required();
    ablate->add_option("--parallel-runs", parallel_runs, "Concurrent runs")->check(CLI::PositiveNumber);
    add_overrides(ablate, overrides);

    auto* judge = app.add_subcommand("judge", "Blind-judge the final outputs of a directory of traces");
    std::string runs_dir;
    std::string judge_out;
    judge->add_option("--runs", runs_dir, "Trace directory")->required()->check(CLI::ExistingDirectory);
    judge->add_option("--config", config, "Run config (YAML)")->check(CLI::ExistingFile);
    judge->add_option("--out", judge_out, "Benchmark directory")->required();

    auto* bench = app.add_subcommand("bench", "Run, judge and score a roster on every scenario");
    std::string roster;
    std::string bench_out;
    std::size_t parallel_rounds = 1;
    bench->add_option("--scenarios", scenarios_dir, "Scenario directory")->required()->check(CLI::ExistingDirectory);
    bench->add_option("--roster", roster, "Roster file (YAML)")->check(CLI::ExistingFile);
    bench->add_option("--config", config, "Run config (YAML)")->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "Benchmark directory")->required();
    bench->add_option("--parallel-rounds", parallel_rounds, "Concurrent rounds")->check(CLI::PositiveNumber);
    add_overrides(bench, overrides);

    auto* stats_cmd = app.add_subcommand("stats", "Paired tests of the full system against every comparator");
    std::string scores;
    std::string full = "Lark Full";
    std::string stats_out;
    stats_cmd->add_option("--scores", scores, "scores.csv")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--full", full, "Reference system name");
    stats_cmd->add_option("--out", stats_out, "CSV output");

    auto* report_cmd = app.add_subcommand("report", "Render the overall, ablation and comparison tables");
    std::string report_runs;
    std::string table1_csv;
    std::string report_out;
    report_cmd->add_option("--scores", scores, "scores.csv")->check(CLI::ExistingFile);
    report_cmd->add_option("--runs", report_runs, "Trace directory for the efficiency CSV")
        ->check(CLI::ExistingDirectory);
    report_cmd->add_option("--table1-csv", table1_csv, "Render hand-entered overall rows instead")
        ->check(CLI::ExistingFile);
    report_cmd->add_option("--full", full, "Reference system name");
    report_cmd->add_option("--out", report_out, "Report directory");

    auto* replay_cmd = app.add_subcommand("replay", "Re-derive every computed field of a trace and list differences");
    std::string trace_file;
    replay_cmd->add_option("trace", trace_file, "Trace file (JSONL)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) std::cerr << app.help();
        return app.exit(e);
    }
    spdlog::set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (gen->parsed()) return cmd_gen_scenarios(count, gen_seed, gen_out, bench_opts);
        if (run_cmd->parsed()) return cmd_run(scenario_file, config, overrides, variant, run_out);
        if (ablate->parsed()) return cmd_ablate(scenarios_dir, config, overrides, parallel_runs, ablate_out);
        if (judge->parsed()) return cmd_judge(runs_dir, config, judge_out);
        if (bench->parsed()) return cmd_bench(scenarios_dir, roster, config, overrides, parallel_rounds, bench_out);
        if (stats_cmd->parsed()) return cmd_stats(scores, full, stats_out);
        if (report_cmd->parsed()) return cmd_report(scores, report_runs, table1_csv, full, report_out);
        if (replay_cmd->parsed()) return cmd_replay(trace_file);
    } catch (const ParseError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 2;
}
