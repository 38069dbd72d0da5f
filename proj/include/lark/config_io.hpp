#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "lark/evolution.hpp"
#include "lark/judge.hpp"
#include "lark/openai_provider.hpp"

namespace lark {

struct EndpointConfig {
    std::string kind = "mock";  // mock | openai
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "mock";
    int timeout_seconds = 120;
    int retry_attempts = 3;
    int retry_backoff_ms = 1000;
};

/// Everything a run config file can set.
struct RunConfig {
    EvolutionConfig evolution{};
    EndpointConfig generator{};
    std::vector<EndpointConfig> judges{EndpointConfig{}, EndpointConfig{}};
    std::string blinding_salt = "lark";
    std::uint64_t shuffle_seed = 0;
    PriceTable prices{};
    std::optional<std::filesystem::path> exchange_log;
};

/// Defaults plus nominal mock prices so cost accounting is exercised offline.
RunConfig default_run_config();

/// Parses a YAML run config (version: 1 required). Missing keys keep defaults.
RunConfig parse_run_config(std::string_view document);
RunConfig load_run_config(const std::filesystem::path& path);

std::unique_ptr<Provider> make_provider(const RunConfig& config);
JudgeConfig make_judges(const RunConfig& config);

}  // namespace lark
