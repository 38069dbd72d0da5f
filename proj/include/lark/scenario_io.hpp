#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lark/model.hpp"

namespace lark {

inline constexpr int kScenarioSchemaVersion = 1;

/// Parses a scenario document (YAML). Weights are normalized to sum to one.
/// Throws ParseError naming the offending field, or ValidationError.
Scenario parse_scenario(std::string_view document);
Scenario load_scenario(const std::filesystem::path& path);

/// Emits the scenario document, including the synthetic-utility extension
/// block when present. Output is byte-stable for equal scenarios.
std::string dump_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Writes via a temporary sibling and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace lark
