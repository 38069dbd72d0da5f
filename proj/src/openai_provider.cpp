#include "lark/openai_provider.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "lark/hash.hpp"
#include "lark/prompts.hpp"
#include "lark/scenario_io.hpp"

namespace lark {

using nlohmann::json;

ExchangeLog jsonl_exchange_log(const std::filesystem::path& path) {
    auto mutex = std::make_shared<std::mutex>();
    return [mutex, path](const json& entry) {
        std::lock_guard lock(*mutex);
        std::ofstream out(path, std::ios::app);
        out << entry.dump() << '\n';
    };
}

ChatClient::ChatClient(Options options) : options_(std::move(options)) {
    const auto scheme = options_.base_url.find("://");
    if (scheme == std::string::npos) throw ValidationError(fmt::format("endpoint URL '{}' has no scheme", options_.base_url));
    const auto path = options_.base_url.find('/', scheme + 3);
    scheme_host_port_ = options_.base_url.substr(0, path);
    path_prefix_ = path == std::string::npos ? "" : options_.base_url.substr(path);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (options_.retry.attempts < 1) throw ValidationError("retry attempts must be at least 1");
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

json ChatClient::request_body(const std::vector<ChatMessage>& messages, double temperature, std::size_t max_tokens) const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return {{"model", options_.model}, {"messages", msgs}, {"temperature", temperature}, {"max_tokens", max_tokens}};
}

ChatResult ChatClient::parse_response(RequestKind kind, const json& body) {
    try {
        ChatResult r;
        r.content = body.at("choices").at(0).at("message").at("content").get<std::string>();
        if (body.contains("usage") && body["usage"].is_object()) {
            const auto& u = body["usage"];
            if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_unsigned())
                r.prompt_tokens = u["prompt_tokens"].get<std::size_t>();
            if (u.contains("completion_tokens") && u["completion_tokens"].is_number_unsigned())
                r.completion_tokens = u["completion_tokens"].get<std::size_t>();
        }
        return r;
    } catch (const json::exception& e) {
        throw ProviderError(kind, fmt::format("malformed response: {}", e.what()), false);
    }
}

namespace {

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

struct AttemptFailure {
    std::string message;
    bool transient;
};

}  // namespace

ChatResult ChatClient::post_once(RequestKind kind, const json& body, int attempt) const {
    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(options_.timeout);
    cli.set_read_timeout(options_.timeout);
    cli.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = cli.Post(path_prefix_ + "/chat/completions", headers, body.dump(), "application/json");
    json entry = {{"kind", to_string(kind)}, {"attempt", attempt}, {"request", body}};
    if (!res) {
        entry["status"] = nullptr;
        entry["error"] = httplib::to_string(res.error());
        if (options_.log) options_.log(entry);
        throw ProviderError(kind, fmt::format("transport error: {}", httplib::to_string(res.error())), true);
    }
    entry["status"] = res->status;
    json parsed = json::parse(res->body, nullptr, false);
    entry["response"] = parsed.is_discarded() ? json(res->body) : parsed;
    if (options_.log) options_.log(entry);
    if (res->status != 200) {
        throw ProviderError(kind, fmt::format("HTTP {}", res->status), transient_status(res->status));
    }
    if (parsed.is_discarded()) throw ProviderError(kind, "response is not JSON", false);
    auto result = parse_response(kind, parsed);
    if (options_.cache_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*options_.cache_dir, ec);
        write_file_atomic(*options_.cache_dir / (sha256_hex(body.dump()) + ".json"), parsed.dump());
    }
    return result;
}

ChatResult ChatClient::complete(RequestKind kind, const std::vector<ChatMessage>& messages, double temperature,
                                std::size_t max_tokens) const {
    const json body = request_body(messages, temperature, max_tokens);
    if (options_.cache_dir) {
        const auto cached = *options_.cache_dir / (sha256_hex(body.dump()) + ".json");
        if (std::filesystem::exists(cached)) {
            json parsed = json::parse(read_file(cached), nullptr, false);
            if (!parsed.is_discarded()) return parse_response(kind, parsed);
        }
    }
    auto backoff = options_.retry.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return post_once(kind, body, attempt);
        } catch (const ProviderError& e) {
            if (!e.transient() || attempt >= options_.retry.attempts) throw;
            spdlog::warn("{} (attempt {}/{}), retrying in {} ms", e.what(), attempt, options_.retry.attempts,
                         backoff.count());
            options_.sleep(backoff);
            backoff *= 2;
        }
    }
}

std::string api_key_from_env() {
    const char* v = std::getenv("LARK_API_KEY");
    return v ? std::string(v) : std::string();
}

std::optional<std::filesystem::path> cache_dir_from_env() {
    const char* v = std::getenv("LARK_CACHE_DIR");
    if (!v || !*v) return std::nullopt;
    return std::filesystem::path(v);
}

OpenAIProvider::OpenAIProvider(Options options) : options_(std::move(options)), client_(options_.client) {}

ProviderUsage OpenAIProvider::usage_for(const ChatResult& r, const std::string& prompt) const {
    const std::size_t in = r.prompt_tokens.value_or(count_chars4_tokens(prompt));
    const std::size_t out = r.completion_tokens.value_or(count_chars4_tokens(r.content));
    return options_.prices.usage(options_.client.model, in, out);
}

Completion OpenAIProvider::generate(const GenerationRequest& request) const {
    if (!request.scenario) throw ProviderError(request.kind, "request has no scenario", false);
    std::string prompt;
    switch (request.kind) {
        case RequestKind::seed:
            prompt = prompts::seed(*request.scenario, request.index, request.scenario->budget.target_tokens);
            break;
        case RequestKind::plasticity:
            if (!request.subject) throw ProviderError(request.kind, "plasticity request without a strategy", false);
            prompt = prompts::plasticity(*request.scenario, *request.subject);
            break;
        case RequestKind::maturation:
            if (!request.subject || !request.stakeholder)
                throw ProviderError(request.kind, "maturation request without strategy or hint", false);
            prompt = prompts::maturation(*request.scenario, *request.subject, *request.stakeholder);
            break;
        default:
            throw ProviderError(request.kind, "not a generation request", false);
    }
    const std::string system(prompts::get("system"));
    const auto r = client_.complete(request.kind, {{"system", system}, {"user", prompt}}, request.temperature,
                                    request.max_output_tokens);
    Completion c;
    c.usage = usage_for(r, system + prompt);
    c.reported_completion_tokens = r.completion_tokens;
    c.text = r.content;
    return c;
}

RankCompletion OpenAIProvider::rank(const GenerationRequest& request) const {
    if (!request.scenario || !request.stakeholder || !request.population)
        throw ProviderError(RequestKind::stakeholder_rank, "incomplete ranking request", false);
    const std::string system(prompts::get("system"));
    const std::string prompt = prompts::rank(*request.scenario, *request.stakeholder, *request.population);
    const auto r = client_.complete(RequestKind::stakeholder_rank, {{"system", system}, {"user", prompt}},
                                    request.temperature, request.max_output_tokens);
    RankCompletion out;
    out.ranking = extract_ranked_ids(r.content, request.population->ids());
    out.usage = usage_for(r, system + prompt);
    return out;
}

std::vector<std::string> extract_ranked_ids(std::string_view response, const std::vector<std::string>& ids) {
    auto id_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; };
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < response.size()) {
        if (!id_char(response[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < response.size() && id_char(response[j])) ++j;
        const std::string_view token = response.substr(i, j - i);
        for (const auto& id : ids) {
            if (token == id) {
                out.push_back(id);
                break;
            }
        }
        i = j;
    }
    return out;
}

}  // namespace lark
