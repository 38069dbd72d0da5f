#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lark/provider.hpp"
#include "lark/tokenizer.hpp"

namespace lark {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatResult {
    std::string content;
    std::optional<std::size_t> prompt_tokens;
    std::optional<std::size_t> completion_tokens;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubles after each failure
};

/// Receives one JSON object per exchange: {"request": ..., "response": ...,
/// "status": ..., "attempt": ...}. Credentials are never included.
using ExchangeLog = std::function<void(const nlohmann::json&)>;

/// Appends exchanges to a JSONL file; safe to share across threads.
ExchangeLog jsonl_exchange_log(const std::filesystem::path& path);

/// Minimal OpenAI-compatible chat-completions client.
class ChatClient {
public:
    struct Options {
        std::string base_url = "https://api.openai.com/v1";
        std::string model;
        std::string api_key;  // sent as a bearer token
        std::chrono::seconds timeout{120};
        RetryPolicy retry{};
        std::optional<std::filesystem::path> cache_dir;  // response cache keyed by request hash
        ExchangeLog log;
        std::function<void(std::chrono::milliseconds)> sleep;  // injectable for tests
    };

    explicit ChatClient(Options options);

    /// Retries transient failures (transport errors, 408, 429, 5xx) per the
    /// retry policy, then throws ProviderError tagged with `kind`.
    ChatResult complete(RequestKind kind, const std::vector<ChatMessage>& messages, double temperature,
                        std::size_t max_tokens) const;

    const Options& options() const noexcept { return options_; }

    /// Builds the request body (exposed for tests).
    nlohmann::json request_body(const std::vector<ChatMessage>& messages, double temperature,
                                std::size_t max_tokens) const;

    /// Extracts content and usage from a response body; throws ProviderError.
    static ChatResult parse_response(RequestKind kind, const nlohmann::json& body);

private:
    ChatResult post_once(RequestKind kind, const nlohmann::json& body, int attempt) const;

    Options options_;
    std::string scheme_host_port_;
    std::string path_prefix_;
};

/// Reads LARK_API_KEY; empty string when unset.
std::string api_key_from_env();
/// Reads LARK_CACHE_DIR.
std::optional<std::filesystem::path> cache_dir_from_env();

/// Provider backed by a chat-completions endpoint.
class OpenAIProvider final : public Provider {
public:
    struct Options {
        ChatClient::Options client;
        SamplingConfig sampling{};
        Tokenizer tokenizer{};
        PriceTable prices{};
    };

    explicit OpenAIProvider(Options options);

    std::string name() const override { return "openai:" + options_.client.model; }
    Completion generate(const GenerationRequest& request) const override;
    RankCompletion rank(const GenerationRequest& request) const override;

private:
    ProviderUsage usage_for(const ChatResult& r, const std::string& prompt) const;

    Options options_;
    ChatClient client_;
};

/// Pulls population ids out of free text in order of first appearance per
/// occurrence (duplicates kept so the repair rule can see them).
std::vector<std::string> extract_ranked_ids(std::string_view response, const std::vector<std::string>& ids);

}  // namespace lark
