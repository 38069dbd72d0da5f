#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lark/model.hpp"
#include "lark/provider.hpp"
#include "lark/rng.hpp"
#include "lark/tokenizer.hpp"

namespace lark {

struct AblationFlags {
    bool plasticity_off = false;
    bool rcv_off = false;
    bool dup_mat_off = false;
    bool penalty_off = false;

    bool operator==(const AblationFlags&) const = default;
};

/// The full system and its four single-mechanism ablations.
enum class Variant { full, no_plasticity, no_rcv, no_dup_mat, no_penalty };

inline constexpr std::array<Variant, 5> kAllVariants = {Variant::full, Variant::no_plasticity, Variant::no_rcv,
                                                        Variant::no_dup_mat, Variant::no_penalty};

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view tag);
/// Human-readable system name used in reports, e.g. "Lark NoPenalty".
std::string_view display_name(Variant v) noexcept;
AblationFlags flags_for(Variant v) noexcept;

struct EvolutionConfig {
    std::size_t k = 6;
    std::size_t generations = 5;
    double p_plast = 0.6;
    double gamma = 0.8;
    std::optional<double> tau;  // nullopt: adaptive per generation
    std::optional<double> lambda;                     // overrides the scenario budget
    std::optional<std::size_t> target_tokens;         // overrides the scenario budget
    AblationFlags ablation{};
    std::uint64_t seed = 1;
    std::string provider = "mock";
    std::size_t parallelism = 1;
    TokenizerMode tokenizer = TokenizerMode::whitespace;
    SamplingConfig sampling{};
    double plasticity_delta = 0.2;
    bool record_wall_clock = false;

    /// Throws ValidationError when an invariant is violated.
    void validate() const;

    double effective_lambda(const Scenario& s) const { return lambda.value_or(s.budget.lambda); }
    std::size_t effective_target(const Scenario& s) const { return target_tokens.value_or(s.budget.target_tokens); }
    /// p_plast * gamma^(t-1)
    double plasticity_probability(std::size_t generation) const;

    bool operator==(const EvolutionConfig&) const = default;
};

inline constexpr int kTraceSchemaVersion = 1;

struct RunTrace {
    int schema_version = kTraceSchemaVersion;
    EvolutionConfig config;
    Scenario scenario;
    std::string provider_name;
    std::map<std::string, std::string> prompt_hashes;
    Population initial;  // P_0
    std::vector<UsageEntry> seed_usage;
    std::vector<GenerationRecord> generations;
    Population final_population;
    std::vector<double> efficiency;
    ProviderUsage total;
    bool aborted = false;
    std::string abort_reason;

    bool operator==(const RunTrace&) const = default;
};

/// A candidate for survivor selection.
struct ScoredCandidate {
    Strategy strategy;
    double adjusted = 0.0;
};

/// The k highest-R candidates in descending R; ties by lower token count,
/// then smaller id. Throws ValidationError when fewer than k candidates.
Population select_survivors(std::span<const ScoredCandidate> candidates, std::size_t k, int generation);

/// One Bernoulli(p_dup) draw per record in order; returns the selected ids.
std::vector<std::string> sample_duplications(std::span<const FitnessRecord> fitness, Rng& rng);

/// Runs the loop for config.generations generations. A provider failure stops
/// the run; the returned trace then holds the completed generations and is
/// marked aborted. Invalid configurations throw before any provider call.
RunTrace run(const Scenario& scenario, const EvolutionConfig& config, const Provider& provider);

struct AblationRun {
    std::string scenario_id;
    Variant variant = Variant::full;
    std::optional<RunTrace> trace;  // nullopt: this variant failed
    std::string error;
};

/// Full plus the four ablations per scenario, all with the same seed. Runs are
/// independent and may execute on up to `parallel_runs` threads; the result
/// order is (scenario, variant) regardless.
std::vector<AblationRun> run_ablation_suite(std::span<const Scenario> scenarios, const EvolutionConfig& base,
                                            const Provider& provider, std::size_t parallel_runs = 1);

}  // namespace lark
