#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lark/evolution.hpp"

namespace lark {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const Scenario& s);
Scenario scenario_from_json(const ordered_json& j);
ordered_json to_json(const EvolutionConfig& c);
EvolutionConfig config_from_json(const ordered_json& j);
ordered_json to_json(const Strategy& s);
Strategy strategy_from_json(const ordered_json& j);
ordered_json to_json(const GenerationRecord& r);
GenerationRecord generation_record_from_json(const ordered_json& j);

/// Three kinds of line: one "header" (schema, config, scenario, prompt hashes,
/// P_0), one "generation" per completed generation, one "summary".
std::string serialize_trace(const RunTrace& trace);
/// Throws ParseError on malformed lines or an unsupported schema version.
RunTrace parse_trace(std::string_view text);

void save_trace(const RunTrace& trace, const std::filesystem::path& path);
RunTrace load_trace(const std::filesystem::path& path);

/// SHA-256 of the serialized trace.
std::string trace_hash(const RunTrace& trace);

}  // namespace lark
