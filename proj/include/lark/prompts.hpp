#pragma once

#include <map>
#include <string>
#include <string_view>

#include "lark/model.hpp"

namespace lark::prompts {

inline constexpr std::string_view kTemplateVersion = "v1";

/// Raw template text by name: system, seed, plasticity, maturation, rank, judge.
std::string_view get(std::string_view name);

/// SHA-256 of every shipped template, keyed by name.
const std::map<std::string, std::string>& hashes();

/// Replaces each {{key}} with its value. Unknown placeholders are left as is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

std::string seed(const Scenario& scenario, std::size_t index, std::size_t target_tokens);
std::string plasticity(const Scenario& scenario, const Strategy& strategy);
std::string maturation(const Scenario& scenario, const Strategy& strategy, const Stakeholder& hint);
std::string rank(const Scenario& scenario, const Stakeholder& stakeholder, const Population& population);

}  // namespace lark::prompts
