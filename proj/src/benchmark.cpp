#include "lark/benchmark.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "lark/error.hpp"
#include "lark/parallel.hpp"
#include "lark/scenario_io.hpp"
#include "lark/trace_io.hpp"

namespace lark {

std::vector<SystemSpec> default_roster() {
    std::vector<SystemSpec> roster;
    for (Variant v : kAllVariants) roster.push_back({std::string(display_name(v)), v, std::nullopt});
    return roster;
}

std::vector<SystemSpec> load_roster(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ParseError("roster", e.what());
    }
    const auto systems = root["systems"];
    if (!systems || !systems.IsSequence() || systems.size() == 0)
        throw ParseError("systems", "roster needs a non-empty 'systems' list");
    std::vector<SystemSpec> out;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const auto node = systems[i];
        const std::string field = fmt::format("systems[{}]", i);
        if (!node["name"]) throw ParseError(field + ".name", "missing system name");
        SystemSpec spec;
        spec.name = node["name"].as<std::string>();
        if (node["variant"] && node["outputs"]) throw ParseError(field, "give either 'variant' or 'outputs', not both");
        if (node["variant"]) {
            try {
                spec.variant = parse_variant(node["variant"].as<std::string>());
            } catch (const Error& e) {
                throw ParseError(field + ".variant", e.what());
            }
        } else if (node["outputs"]) {
            std::filesystem::path dir = node["outputs"].as<std::string>();
            spec.outputs_dir = dir.is_relative() ? path.parent_path() / dir : dir;
        } else {
            throw ParseError(field, "needs 'variant' or 'outputs'");
        }
        for (const auto& prior : out) {
            if (prior.name == spec.name) throw ParseError(field + ".name", fmt::format("duplicate system '{}'", spec.name));
        }
        out.push_back(std::move(spec));
    }
    return out;
}

const ScoreCell* ScoreMatrix::find(const std::string& scenario, const std::string& system) const {
    for (const auto& c : cells) {
        if (c.scenario_id == scenario && c.system == system) return &c;
    }
    return nullptr;
}

namespace {

template <class Get>
std::vector<std::vector<double>> dense(const ScoreMatrix& m, Get get) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> out(m.systems.size(), std::vector<double>(m.rounds.size(), nan));
    for (std::size_t s = 0; s < m.systems.size(); ++s) {
        for (std::size_t r = 0; r < m.rounds.size(); ++r) {
            if (const auto* c = m.find(m.rounds[r], m.systems[s])) out[s][r] = get(*c);
        }
    }
    return out;
}

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted) throw ParseError(fmt::format("line {}", line_no), "unterminated quote");
    return fields;
}

double parse_number(const std::string& text, const std::string& field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError(field, fmt::format("'{}' is not a number", text));
    }
}

}  // namespace

std::vector<std::vector<double>> ScoreMatrix::dense_scores() const {
    return dense(*this, [](const ScoreCell& c) { return c.score.value_or(std::numeric_limits<double>::quiet_NaN()); });
}

std::vector<std::vector<double>> ScoreMatrix::dense_costs() const {
    return dense(*this, [](const ScoreCell& c) { return c.cost; });
}

std::string score_matrix_csv(const ScoreMatrix& m) {
    std::string out = "scenario,system,score,cost\n";
    for (const auto& c : m.cells) {
        out += fmt::format("{},{},{},{}\n", csv_field(c.scenario_id), csv_field(c.system),
                           c.score ? format_double(*c.score) : "NA", format_double(c.cost));
    }
    return out;
}

ScoreMatrix parse_score_matrix_csv(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line)) throw ParseError("header", "empty score matrix");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "scenario,system,score,cost") throw ParseError("header", fmt::format("unexpected header '{}'", line));
    ScoreMatrix m;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line, line_no);
        const std::string where = fmt::format("line {}", line_no);
        if (f.size() != 4) throw ParseError(where, fmt::format("expected 4 fields, found {}", f.size()));
        ScoreCell c;
        c.scenario_id = f[0];
        c.system = f[1];
        if (f[2] != "NA" && !f[2].empty()) c.score = parse_number(f[2], where + " score");
        c.cost = f[3] == "NA" || f[3].empty() ? 0.0 : parse_number(f[3], where + " cost");
        if (m.find(c.scenario_id, c.system)) throw ParseError(where, "duplicate (scenario, system) cell");
        if (std::find(m.rounds.begin(), m.rounds.end(), c.scenario_id) == m.rounds.end()) m.rounds.push_back(c.scenario_id);
        if (std::find(m.systems.begin(), m.systems.end(), c.system) == m.systems.end()) m.systems.push_back(c.system);
        m.cells.push_back(std::move(c));
    }
    return m;
}

std::string final_output(const RunTrace& trace) {
    if (!trace.final_population.members.empty()) return trace.final_population.members.front().text;
    if (!trace.initial.members.empty()) return trace.initial.members.front().text;
    throw ValidationError(fmt::format("run on '{}' produced no strategies", trace.scenario.id));
}

namespace {

std::map<std::string, double> read_costs(const std::filesystem::path& dir) {
    std::map<std::string, double> costs;
    const auto file = dir / "costs.csv";
    if (!std::filesystem::exists(file)) return costs;
    std::istringstream in(read_file(file));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line.rfind("scenario", 0) == 0)) continue;
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 2) throw ParseError(fmt::format("{}:{}", file.string(), line_no), "expected scenario_id,cost");
        costs[f[0]] = parse_number(f[1], fmt::format("{}:{}", file.string(), line_no));
    }
    return costs;
}

struct RoundResult {
    std::vector<ScoreCell> cells;
    std::vector<std::optional<RunTrace>> traces;  // per roster entry
    std::optional<EvaluationRecord> evaluation;
};

}  // namespace

BenchmarkResult run_benchmark(const std::vector<Scenario>& scenarios, const std::vector<SystemSpec>& roster,
                              const EvolutionConfig& base, const Provider& provider, const JudgeConfig& judges,
                              const std::optional<std::filesystem::path>& out_dir, std::size_t parallel_rounds) {
    base.validate();
    judges.validate();
    if (roster.size() < 2) throw ValidationError("a benchmark needs at least two systems");
    std::vector<std::map<std::string, double>> external_costs(roster.size());
    for (std::size_t s = 0; s < roster.size(); ++s) {
        if (roster[s].outputs_dir) external_costs[s] = read_costs(*roster[s].outputs_dir);
    }
    if (out_dir) {
        for (const char* sub : {"runs", "evaluations", "reports"}) std::filesystem::create_directories(*out_dir / sub);
    }

    std::vector<RoundResult> rounds(scenarios.size());
    parallel_for(scenarios.size(), parallel_rounds, [&](std::size_t r) {
        const Scenario& scenario = scenarios[r];
        RoundResult& out = rounds[r];
        out.traces.resize(roster.size());
        std::map<std::string, std::string> outputs;
        std::vector<double> run_cost(roster.size(), 0.0);
        for (std::size_t s = 0; s < roster.size(); ++s) {
            const SystemSpec& spec = roster[s];
            if (spec.variant) {
                EvolutionConfig cfg = base;
                cfg.ablation = flags_for(*spec.variant);
                try {
                    RunTrace trace = run(scenario, cfg, provider);
                    run_cost[s] = trace.total.cost;
                    if (!trace.aborted) outputs[spec.name] = final_output(trace);
                    if (out_dir)
                        save_trace(trace, *out_dir / "runs" /
                                              fmt::format("{}__{}.jsonl", scenario.id, to_string(*spec.variant)));
                    out.traces[s] = std::move(trace);
                } catch (const std::exception& e) {
                    spdlog::error("{} on {} failed: {}", spec.name, scenario.id, e.what());
                }
            } else {
                const auto file = *spec.outputs_dir / (scenario.id + ".txt");
                if (std::filesystem::exists(file)) {
                    outputs[spec.name] = read_file(file);
                } else {
                    spdlog::warn("{} has no output for {}", spec.name, scenario.id);
                }
                const auto it = external_costs[s].find(scenario.id);
                if (it != external_costs[s].end()) run_cost[s] = it->second;
            }
        }

        double judge_share = 0.0;
        if (outputs.size() >= 2) {
            out.evaluation = judge_outputs(outputs, scenario, judges);
            judge_share = out.evaluation->judge_usage().cost / static_cast<double>(outputs.size());
            if (out_dir) {
                write_file_atomic(*out_dir / "evaluations" / (scenario.id + ".json"),
                                  to_json(*out.evaluation).dump(2) + "\n");
                write_file_atomic(*out_dir / "evaluations" / (scenario.id + ".payloads.jsonl"),
                                  payload_log(*out.evaluation));
            }
        } else {
            spdlog::warn("round {} has fewer than two outputs; not judged", scenario.id);
        }
        for (std::size_t s = 0; s < roster.size(); ++s) {
            ScoreCell cell;
            cell.scenario_id = scenario.id;
            cell.system = roster[s].name;
            const bool judged = out.evaluation && outputs.contains(roster[s].name);
            if (judged) cell.score = out.evaluation->composite_for(roster[s].name);
            cell.cost = run_cost[s] + (judged ? judge_share : 0.0);
            out.cells.push_back(std::move(cell));
        }
    });

    BenchmarkResult result;
    for (const auto& spec : roster) result.matrix.systems.push_back(spec.name);
    for (std::size_t r = 0; r < scenarios.size(); ++r) {
        result.matrix.rounds.push_back(scenarios[r].id);
        for (auto& c : rounds[r].cells) result.matrix.cells.push_back(std::move(c));
        for (std::size_t s = 0; s < roster.size(); ++s) {
            if (rounds[r].traces[s]) {
                result.traces.push_back(std::move(*rounds[r].traces[s]));
                result.trace_systems.push_back(roster[s].name);
            }
        }
        if (rounds[r].evaluation) result.evaluations.push_back(std::move(*rounds[r].evaluation));
    }
    if (out_dir) write_file_atomic(*out_dir / "reports" / "scores.csv", score_matrix_csv(result.matrix));
    return result;
}

}  // namespace lark
