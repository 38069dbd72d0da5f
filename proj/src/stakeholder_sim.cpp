#include "lark/stakeholder_sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lark/error.hpp"
#include "lark/rng.hpp"
#include "lark/vocabulary.hpp"

namespace lark {

double utility(const SyntheticUtility& u, const Strategy& strategy, std::uint64_t seed) {
    double value = 0.0;
    const auto present = features_in(strategy.text);
    for (const auto& [feature, weight] : u.feature_weights) {
        if (present.contains(feature)) value += weight;
    }
    value += u.length_preference * static_cast<double>(strategy.token_count);
    if (u.jitter != 0.0) {
        Rng rng(derive_seed(seed, "jitter", u.stakeholder_id, strategy.text));
        value += u.jitter * rng.uniform(-1.0, 1.0);
    }
    return value;
}

RankingProfile rank_by_utility(const SyntheticUtility& u, const Population& population, std::uint64_t seed) {
    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(population.size());
    for (const auto& m : population.members) scored.emplace_back(utility(u, m, seed), &m.id);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return *a.second < *b.second;
    });
    RankingProfile profile;
    profile.stakeholder_id = u.stakeholder_id;
    for (const auto& [_, id] : scored) profile.ranking.push_back(*id);
    return profile;
}

namespace {

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

}  // namespace

SyntheticUtility default_utility(const Stakeholder& stakeholder) {
    Rng rng(derive_seed(0, "default-utility", stakeholder.id));
    SyntheticUtility u;
    u.stakeholder_id = stakeholder.id;
    for (auto f : kFeatureVocabulary) u.feature_weights.emplace(std::string(f), round3(rng.uniform(-1.0, 1.0)));
    u.length_preference = -0.02;
    return u;
}

namespace {

struct DomainBank {
    std::string_view setting;
    std::array<std::string_view, 4> places;
    std::array<std::string_view, 5> objectives;
    std::array<std::string_view, 7> personas;
};

// clang-format off
constexpr std::array<DomainBank, 6> kBanks = {{
    {"A regional water utility must split a fixed upgrade budget between {} while facing a drought forecast.",
     {"urban and rural districts", "residential and industrial users", "treatment and distribution works", "north and south service areas"},
     {"keep household tariffs affordable", "meet drought resilience targets", "protect industrial supply contracts",
      "reduce leakage within three years", "maintain regulator approval"},
     {"Residential ratepayer association focused on bills", "Industrial customers needing guaranteed volumes",
      "Environmental regulator enforcing abstraction limits", "Utility finance office guarding the capital plan",
      "Farmers' cooperative dependent on irrigation", "Local council accountable to voters",
      "Field engineers who maintain the network"}},
    {"A city council is drafting a policy on {} and must reconcile competing public interests.",
     {"short-term rental regulation", "low-emission traffic zones", "public space for street vendors", "night-time noise limits"},
     {"balance economic activity with resident wellbeing", "remain legally enforceable", "be funded within the current budget",
      "gain broad public legitimacy", "produce measurable outcomes within two years"},
     {"Neighbourhood residents' group", "Small business chamber", "City legal department", "Civil liberties advocates",
      "Transport authority planners", "Tourism board", "Low-income tenants' union"}},
    {"A software company is planning the next four quarters of its {} roadmap with a fixed engineering headcount.",
     {"mobile banking app", "hospital scheduling platform", "logistics tracking product", "education analytics suite"},
     {"grow enterprise revenue", "reduce churn among existing customers", "pay down reliability debt",
      "meet an upcoming accessibility regulation", "keep the team's workload sustainable"},
     {"Enterprise sales lead chasing large contracts", "Customer success manager watching churn", "Site reliability engineers",
      "Compliance officer", "Product designer advocating usability", "Chief financial officer", "Engineering team representatives"}},
    {"A public health agency is designing a campaign about {} with a limited media budget.",
     {"seasonal vaccination uptake", "heat-wave safety for older adults", "youth vaping prevention", "early cancer screening"},
     {"reach underserved communities", "stay within the media budget", "avoid stigmatizing messages",
      "show measurable behaviour change", "coordinate with local clinics"},
     {"Community health workers", "Agency communications office", "Clinic network directors", "Patient advocacy groups",
      "Budget oversight committee", "Youth council representatives", "Faith and cultural organizations"}},
    {"A regional authority must choose a site for {} among several contested locations.",
     {"a new solar farm", "a waste transfer station", "a regional hospital annex", "a battery storage facility"},
     {"minimize environmental impact", "keep construction costs within budget", "secure planning consent",
      "distribute burdens fairly across communities", "ensure long-term operational access"},
     {"Residents near the candidate sites", "Environmental conservation trust", "Regional finance board", "Grid or service operator",
      "Indigenous land council", "Construction contractors", "Emergency services"}},
    {"A hospital clinical committee is deciding how to manage {} under staffing constraints.",
     {"post-operative pain protocols", "sepsis early-warning escalation", "discharge planning for frail patients",
      "antibiotic stewardship in the ICU"},
     {"improve patient outcomes", "respect staff capacity", "comply with clinical guidelines", "control pharmacy costs",
      "keep patients and families informed"},
     {"Attending physicians", "Nursing staff", "Hospital pharmacy", "Patient and family council", "Hospital administration",
      "Infection control team", "Medical ethics board"}},
}};
// clang-format on

}  // namespace

std::vector<Scenario> make_benchmark_scenarios(std::size_t count, std::uint64_t seed, const BenchmarkOptions& options) {
    if (count == 0) throw ValidationError("scenario count must be at least 1");
    if (options.min_stakeholders == 0 || options.min_stakeholders > options.max_stakeholders ||
        options.max_stakeholders > 7)
        throw ValidationError("stakeholder range must satisfy 1 <= min <= max <= 7");

    std::vector<Scenario> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t d = i % kAllDomains.size();
        const DomainBank& bank = kBanks[d];
        Rng rng(derive_seed(seed, "scenario", i));

        Scenario s;
        s.domain = kAllDomains[d];
        s.id = fmt::format("{}-{:02d}", to_string(s.domain), i / kAllDomains.size() + 1);
        s.context = fmt::format(fmt::runtime(bank.setting), bank.places[rng.below(bank.places.size())]);

        std::vector<std::size_t> objective_order = {0, 1, 2, 3, 4};
        rng.shuffle(objective_order);
        for (std::size_t o = 0; o < 3; ++o) s.objectives.emplace_back(bank.objectives[objective_order[o]]);

        const std::size_t m =
            options.min_stakeholders + rng.below(options.max_stakeholders - options.min_stakeholders + 1);
        std::vector<std::size_t> persona_order = {0, 1, 2, 3, 4, 5, 6};
        rng.shuffle(persona_order);
        std::vector<double> raw;
        const std::size_t group_offset = rng.below(kFeatureGroups);
        for (std::size_t j = 0; j < m; ++j) {
            Stakeholder st;
            st.id = fmt::format("s{}", j + 1);
            st.persona = std::string(bank.personas[persona_order[j]]);
            raw.push_back(static_cast<double>(1 + rng.below(5)));
            s.stakeholders.push_back(st);

            // Each stakeholder favours one feature group and opposes another,
            // so neighbouring stakeholders pull in different directions.
            SyntheticUtility u;
            u.stakeholder_id = st.id;
            const std::size_t liked = (j + group_offset) % kFeatureGroups;
            const std::size_t disliked = (liked + 2) % kFeatureGroups;
            for (std::size_t f = 0; f < kFeatureVocabulary.size(); ++f) {
                const std::size_t g = f / kFeaturesPerGroup;
                double w;
                if (g == liked) {
                    w = rng.uniform(0.5, 1.5);
                } else if (g == disliked) {
                    w = -rng.uniform(0.5, 1.5);
                } else {
                    w = rng.uniform(-0.2, 0.2);
                }
                u.feature_weights.emplace(std::string(kFeatureVocabulary[f]), round3(w));
            }
            u.length_preference = -round3(rng.uniform(0.0, 0.05));
            s.synthetic.push_back(std::move(u));
        }
        const auto w = normalize_weights(raw);
        for (std::size_t j = 0; j < m; ++j) s.stakeholders[j].influence_weight = w[j];
        s.budget.target_tokens = options.target_tokens;
        s.budget.lambda = options.lambda;
        validate(s);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace lark
