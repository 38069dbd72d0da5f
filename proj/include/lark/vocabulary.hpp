#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>

namespace lark {

/// Fixed feature tokens the mock generator draws from. Six per rubric
/// criterion, in criterion order (coverage, feasibility, specificity,
/// constraints, clarity).
inline constexpr std::size_t kFeaturesPerGroup = 6;
inline constexpr std::size_t kFeatureGroups = 5;

inline constexpr std::array<std::string_view, kFeatureGroups * kFeaturesPerGroup> kFeatureVocabulary = {
    "stakeholder-forum",  "equity-audit",     "impact-survey",     "community-liaison", "grievance-channel", "needs-assessment",
    "phased-rollout",     "pilot-program",    "budget-reserve",    "vendor-shortlist",  "staffing-plan",     "risk-register",
    "milestone-calendar", "kpi-dashboard",    "owner-matrix",      "weekly-review",     "baseline-metrics",  "unit-costing",
    "compliance-check",   "budget-cap",       "legal-review",      "privacy-safeguard", "safety-protocol",   "emission-limit",
    "executive-summary",  "decision-log",     "faq-sheet",         "one-page-brief",    "visual-roadmap",    "glossary-appendix",
};

/// Group index of a vocabulary feature, or -1.
int feature_group(std::string_view feature) noexcept;

/// Distinct vocabulary features present in `text` as whitespace-delimited
/// words (surrounding punctuation ignored).
std::set<std::string> features_in(std::string_view text);

}  // namespace lark
