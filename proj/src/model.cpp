#include "lark/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "lark/error.hpp"

namespace lark {

namespace {
constexpr std::array<std::string_view, 6> kDomainTags = {
    "multi_stakeholder_tradeoffs", "policy_proposal",       "product_roadmap",
    "campaign_plan",               "infrastructure_siting", "clinical_decision_making",
};
}  // namespace

std::string_view to_string(Domain d) noexcept { return kDomainTags[static_cast<std::size_t>(d)]; }

Domain parse_domain(std::string_view tag) {
    for (std::size_t i = 0; i < kDomainTags.size(); ++i) {
        if (kDomainTags[i] == tag) return static_cast<Domain>(i);
    }
    throw ValidationError(fmt::format("unknown domain tag '{}'", tag));
}

std::string_view to_string(Origin o) noexcept {
    switch (o) {
        case Origin::seed: return "seed";
        case Origin::plasticity: return "plasticity";
        case Origin::duplication_maturation: return "duplication+maturation";
    }
    return "seed";
}

Origin parse_origin(std::string_view tag) {
    if (tag == "seed") return Origin::seed;
    if (tag == "plasticity") return Origin::plasticity;
    if (tag == "duplication+maturation") return Origin::duplication_maturation;
    throw ValidationError(fmt::format("unknown origin '{}'", tag));
}

std::string_view to_string(RequestKind k) noexcept {
    switch (k) {
        case RequestKind::seed: return "seed";
        case RequestKind::plasticity: return "plasticity";
        case RequestKind::maturation: return "maturation";
        case RequestKind::stakeholder_rank: return "stakeholder_rank";
        case RequestKind::judge_score: return "judge_score";
    }
    return "seed";
}

RequestKind parse_request_kind(std::string_view tag) {
    for (auto k : {RequestKind::seed, RequestKind::plasticity, RequestKind::maturation, RequestKind::stakeholder_rank,
                   RequestKind::judge_score}) {
        if (to_string(k) == tag) return k;
    }
    throw ValidationError(fmt::format("unknown request kind '{}'", tag));
}

const Stakeholder* Scenario::find_stakeholder(std::string_view sid) const noexcept {
    auto it = std::find_if(stakeholders.begin(), stakeholders.end(), [&](const auto& s) { return s.id == sid; });
    return it == stakeholders.end() ? nullptr : &*it;
}

const SyntheticUtility* Scenario::utility_for(std::string_view sid) const noexcept {
    auto it = std::find_if(synthetic.begin(), synthetic.end(), [&](const auto& u) { return u.stakeholder_id == sid; });
    return it == synthetic.end() ? nullptr : &*it;
}

std::vector<double> Scenario::weights() const {
    std::vector<double> w;
    w.reserve(stakeholders.size());
    for (const auto& s : stakeholders) w.push_back(s.influence_weight);
    return w;
}

std::vector<double> normalize_weights(std::span<const double> raw) {
    if (raw.empty()) throw ValidationError("no weights to normalize");
    double total = 0.0;
    for (double w : raw) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("influence weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("influence weights sum to zero");
    std::vector<double> out(raw.begin(), raw.end());
    if (std::abs(total - 1.0) <= 1e-12) return out;
    for (double& w : out) w /= total;
    return out;
}

void normalize_and_validate(Scenario& scenario) {
    if (scenario.stakeholders.empty()) throw ValidationError("scenario has no stakeholders");
    auto w = normalize_weights(scenario.weights());
    for (std::size_t j = 0; j < w.size(); ++j) scenario.stakeholders[j].influence_weight = w[j];
    validate(scenario);
}

void validate(const Scenario& s) {
    if (s.id.empty()) throw ValidationError("scenario id is empty");
    if (s.objectives.empty()) throw ValidationError("scenario has no objectives");
    if (s.stakeholders.empty()) throw ValidationError("scenario has no stakeholders");
    std::unordered_set<std::string> seen;
    double total = 0.0;
    for (const auto& st : s.stakeholders) {
        if (st.id.empty()) throw ValidationError("stakeholder with empty id");
        if (!seen.insert(st.id).second) throw ValidationError(fmt::format("duplicate stakeholder id '{}'", st.id));
        if (!(st.influence_weight >= 0.0)) throw ValidationError(fmt::format("negative weight for '{}'", st.id));
        total += st.influence_weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance)
        throw ValidationError(fmt::format("stakeholder weights sum to {} (expected 1)", total));
    if (s.budget.target_tokens == 0) throw ValidationError("budget.target_tokens must be positive");
    if (!(s.budget.lambda >= 0.0 && s.budget.lambda <= 1.0)) throw ValidationError("budget.lambda must lie in [0, 1]");
    for (const auto& u : s.synthetic) {
        if (!s.find_stakeholder(u.stakeholder_id))
            throw ValidationError(fmt::format("synthetic utility for unknown stakeholder '{}'", u.stakeholder_id));
    }
}

std::string IdAllocator::next(int generation) { return fmt::format("g{}-{:02d}", generation, counter_++); }

std::vector<std::string> Population::ids() const {
    std::vector<std::string> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.id);
    return out;
}

const Strategy* Population::find(std::string_view id) const noexcept {
    auto it = std::find_if(members.begin(), members.end(), [&](const auto& m) { return m.id == id; });
    return it == members.end() ? nullptr : &*it;
}

bool is_permutation_of(std::span<const std::string> ranking, std::span<const std::string> ids) {
    if (ranking.size() != ids.size()) return false;
    std::vector<std::string> a(ranking.begin(), ranking.end());
    std::vector<std::string> b(ids.begin(), ids.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (std::adjacent_find(b.begin(), b.end()) != b.end()) return false;
    return a == b;
}

ProviderUsage sum_usage(std::span<const UsageEntry> entries) noexcept {
    ProviderUsage total;
    for (const auto& e : entries) total += e.usage;
    return total;
}

}  // namespace lark
