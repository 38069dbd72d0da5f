#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lark {

// ---------------------------------------------------------------------------
// Scenario vocabulary
// ---------------------------------------------------------------------------

enum class Domain {
    multi_stakeholder_tradeoffs,
    policy_proposal,
    product_roadmap,
    campaign_plan,
    infrastructure_siting,
    clinical_decision_making,
};

inline constexpr std::array<Domain, 6> kAllDomains = {
    Domain::multi_stakeholder_tradeoffs, Domain::policy_proposal,       Domain::product_roadmap,
    Domain::campaign_plan,               Domain::infrastructure_siting, Domain::clinical_decision_making,
};

std::string_view to_string(Domain d) noexcept;
/// Throws ValidationError for an unknown tag.
Domain parse_domain(std::string_view tag);

struct Stakeholder {
    std::string id;
    std::string persona;
    double influence_weight = 0.0;

    bool operator==(const Stakeholder&) const = default;
};

struct ComputeBudget {
    std::size_t target_tokens = 0;
    double lambda = 0.0;

    bool operator==(const ComputeBudget&) const = default;
};

/// Known utility of a synthetic stakeholder. Only the mock pipeline reads it.
struct SyntheticUtility {
    std::string stakeholder_id;
    std::map<std::string, double> feature_weights;
    double length_preference = 0.0;
    double jitter = 0.0;

    bool operator==(const SyntheticUtility&) const = default;
};

struct Scenario {
    std::string id;
    std::string context;
    std::vector<std::string> objectives;
    std::vector<Stakeholder> stakeholders;
    Domain domain = Domain::multi_stakeholder_tradeoffs;
    ComputeBudget budget;
    std::vector<SyntheticUtility> synthetic;  // empty when the scenario carries no extension block

    const Stakeholder* find_stakeholder(std::string_view id) const noexcept;
    const SyntheticUtility* utility_for(std::string_view stakeholder_id) const noexcept;
    std::vector<double> weights() const;

    bool operator==(const Scenario&) const = default;
};

/// Tolerance for the "weights sum to one" invariant.
inline constexpr double kWeightSumTolerance = 1e-9;

/// Scales raw weights to sum to one. A vector already summing to one within
/// 1e-12 is returned untouched, which makes the operation idempotent.
/// Throws ValidationError on negative weights or a non-positive total.
std::vector<double> normalize_weights(std::span<const double> raw);

/// Normalizes in place and checks every scenario invariant.
void normalize_and_validate(Scenario& scenario);
void validate(const Scenario& scenario);

// ---------------------------------------------------------------------------
// Strategies and populations
// ---------------------------------------------------------------------------

enum class Origin { seed, plasticity, duplication_maturation };

std::string_view to_string(Origin o) noexcept;
Origin parse_origin(std::string_view tag);

struct Strategy {
    std::string id;
    std::string text;
    std::size_t token_count = 0;
    std::optional<std::string> parent;
    Origin origin = Origin::seed;
    int generation_born = 0;

    bool operator==(const Strategy&) const = default;
};

/// Hands out run-scoped ids of the form g<generation>-<counter>, e.g. g3-07.
/// The counter never resets within a run.
class IdAllocator {
public:
    std::string next(int generation);
    std::uint64_t issued() const noexcept { return counter_; }

private:
    std::uint64_t counter_ = 0;
};

struct Population {
    int generation = 0;
    std::vector<Strategy> members;

    std::size_t size() const noexcept { return members.size(); }
    std::vector<std::string> ids() const;
    const Strategy* find(std::string_view id) const noexcept;

    bool operator==(const Population&) const = default;
};

struct RankingProfile {
    std::string stakeholder_id;
    std::vector<std::string> ranking;  // position 0 is most preferred

    bool operator==(const RankingProfile&) const = default;
};

/// True when `ranking` contains each id of `ids` exactly once and nothing else.
bool is_permutation_of(std::span<const std::string> ranking, std::span<const std::string> ids);

// ---------------------------------------------------------------------------
// Scoring and bookkeeping records
// ---------------------------------------------------------------------------

struct FitnessRecord {
    std::string strategy_id;
    double borda = 0.0;
    double adjusted = 0.0;
    std::size_t token_count = 0;
    double p_dup = 0.5;
    bool penalized = false;  // T > T_target
    bool clamped = false;    // penalty factor went negative and R was set to 0

    bool operator==(const FitnessRecord&) const = default;
};

enum class RequestKind { seed, plasticity, maturation, stakeholder_rank, judge_score };

std::string_view to_string(RequestKind k) noexcept;
RequestKind parse_request_kind(std::string_view tag);

struct ProviderUsage {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double cost = 0.0;

    ProviderUsage& operator+=(const ProviderUsage& o) noexcept {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        cost += o.cost;
        return *this;
    }
    bool operator==(const ProviderUsage&) const = default;
};

struct UsageEntry {
    RequestKind kind = RequestKind::seed;
    std::string subject;  // strategy or stakeholder id the request was about
    ProviderUsage usage;

    bool operator==(const UsageEntry&) const = default;
};

ProviderUsage sum_usage(std::span<const UsageEntry> entries) noexcept;

struct PlasticityEvent {
    std::string parent;
    std::string child;  // equals parent on a no-op
    bool noop = false;

    bool operator==(const PlasticityEvent&) const = default;
};

struct DuplicationEvent {
    std::string parent;
    std::string child;  // empty on a no-op
    std::string hint;   // stakeholder id the copy was specialized for
    bool noop = false;

    bool operator==(const DuplicationEvent&) const = default;
};

struct RepairEvent {
    std::string stakeholder_id;
    std::string round;  // "main" or "pool"
    std::vector<std::string> raw;

    bool operator==(const RepairEvent&) const = default;
};

/// Scores of the union pool used for survivor selection.
struct PoolScore {
    std::string strategy_id;
    double borda = 0.0;
    double adjusted = 0.0;
    std::size_t token_count = 0;

    bool operator==(const PoolScore&) const = default;
};

struct GenerationRecord {
    int generation = 0;
    std::vector<Strategy> evaluated;  // post-plasticity population, k members
    std::vector<RankingProfile> profiles;
    std::vector<FitnessRecord> fitness;  // one per evaluated member, same order
    std::optional<double> cv;            // nullopt: undefined (zero mean)
    std::string consensus_id;
    double tau = 0.0;
    double efficiency = 0.0;
    std::vector<PlasticityEvent> plasticity;
    std::vector<DuplicationEvent> duplications;
    std::vector<Strategy> matured;
    std::vector<RankingProfile> pool_profiles;  // empty when nothing was duplicated
    std::vector<PoolScore> pool_scores;
    std::vector<std::string> survivors;  // P_t in canonical order
    std::vector<RepairEvent> repairs;
    std::vector<UsageEntry> usage;
    ProviderUsage usage_total;
    double wall_seconds = 0.0;

    bool operator==(const GenerationRecord&) const = default;
};

}  // namespace lark
