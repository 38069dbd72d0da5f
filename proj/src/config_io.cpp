#include "lark/config_io.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "lark/error.hpp"
#include "lark/mock_provider.hpp"
#include "lark/scenario_io.hpp"

namespace lark {

namespace {

template <class T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& path) {
    const YAML::Node n = parent[key];
    if (!n) return;
    if (!n.IsScalar()) throw ParseError(path + key, "expected a scalar");
    try {
        out = n.as<T>();
    } catch (const YAML::Exception& e) {
        throw ParseError(path + key, e.msg);
    }
}

template <class T>
void read_optional(const YAML::Node& parent, const char* key, std::optional<T>& out, const std::string& path) {
    const YAML::Node n = parent[key];
    if (!n) return;
    if (n.IsNull()) {
        out.reset();
        return;
    }
    T v{};
    read(parent, key, v, path);
    out = v;
}

EndpointConfig read_endpoint(const YAML::Node& node, EndpointConfig e, const std::string& path) {
    if (!node.IsMap()) throw ParseError(path, "expected a mapping");
    read(node, "kind", e.kind, path + ".");
    read(node, "base_url", e.base_url, path + ".");
    read(node, "model", e.model, path + ".");
    read(node, "timeout_seconds", e.timeout_seconds, path + ".");
    read(node, "retry_attempts", e.retry_attempts, path + ".");
    read(node, "retry_backoff_ms", e.retry_backoff_ms, path + ".");
    if (e.kind != "mock" && e.kind != "openai") throw ParseError(path + ".kind", fmt::format("unknown kind '{}'", e.kind));
    if (e.retry_attempts < 1) throw ParseError(path + ".retry_attempts", "must be at least 1");
    if (e.timeout_seconds < 1) throw ParseError(path + ".timeout_seconds", "must be at least 1");
    return e;
}

ChatClient::Options client_options(const EndpointConfig& e, const RunConfig& config) {
    ChatClient::Options o;
    o.base_url = e.base_url;
    o.model = e.model;
    o.api_key = api_key_from_env();
    o.timeout = std::chrono::seconds(e.timeout_seconds);
    o.retry = {e.retry_attempts, std::chrono::milliseconds(e.retry_backoff_ms)};
    o.cache_dir = cache_dir_from_env();
    if (config.exchange_log) o.log = jsonl_exchange_log(*config.exchange_log);
    return o;
}

}  // namespace

RunConfig default_run_config() {
    RunConfig c;
    c.judges[0].model = "mock-judge-a";
    c.judges[1].model = "mock-judge-b";
    c.prices.set("mock", {0.27, 1.10});
    c.prices.set("mock-judge-a", {0.15, 0.60});
    c.prices.set("mock-judge-b", {0.15, 0.60});
    return c;
}

RunConfig parse_run_config(std::string_view document) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(document));
    } catch (const YAML::Exception& e) {
        throw ParseError("<document>", e.msg);
    }
    if (!root.IsMap()) throw ParseError("<document>", "expected a mapping at top level");
    int version = 0;
    read(root, "version", version, "");
    if (version != 1) throw ParseError("version", fmt::format("unsupported or missing config version {}", version));

    RunConfig c = default_run_config();
    if (const auto ev = root["evolution"]) {
        const std::string p = "evolution.";
        auto& e = c.evolution;
        read(ev, "k", e.k, p);
        read(ev, "generations", e.generations, p);
        read(ev, "p_plast", e.p_plast, p);
        read(ev, "gamma", e.gamma, p);
        read_optional(ev, "tau", e.tau, p);
        read_optional(ev, "lambda", e.lambda, p);
        read_optional(ev, "target_tokens", e.target_tokens, p);
        read(ev, "seed", e.seed, p);
        read(ev, "parallelism", e.parallelism, p);
        read(ev, "plasticity_delta", e.plasticity_delta, p);
        read(ev, "record_wall_clock", e.record_wall_clock, p);
        std::string tokenizer(to_string(e.tokenizer));
        read(ev, "tokenizer", tokenizer, p);
        try {
            e.tokenizer = parse_tokenizer_mode(tokenizer);
        } catch (const Error& err) {
            throw ParseError(p + "tokenizer", err.what());
        }
        if (const auto s = ev["sampling"]) {
            const std::string sp = p + "sampling.";
            read(s, "seed_temperature", e.sampling.seed_temperature, sp);
            read(s, "refine_temperature", e.sampling.refine_temperature, sp);
            read(s, "judge_temperature", e.sampling.judge_temperature, sp);
            read(s, "max_output_tokens", e.sampling.max_output_tokens, sp);
        }
        try {
            e.validate();
        } catch (const ValidationError& err) {
            throw ParseError("evolution", err.what());
        }
    }
    if (const auto g = root["generator"]) c.generator = read_endpoint(g, c.generator, "generator");
    c.evolution.provider = c.generator.kind;
    if (const auto js = root["judges"]) {
        if (!js.IsSequence() || js.size() == 0) throw ParseError("judges", "expected a non-empty list");
        c.judges.clear();
        for (std::size_t i = 0; i < js.size(); ++i)
            c.judges.push_back(read_endpoint(js[i], EndpointConfig{}, fmt::format("judges[{}]", i)));
    }
    read(root, "blinding_salt", c.blinding_salt, "");
    read(root, "shuffle_seed", c.shuffle_seed, "");
    if (const auto prices = root["prices"]) {
        if (!prices.IsMap()) throw ParseError("prices", "expected a mapping of model to prices");
        for (const auto& kv : prices) {
            const auto model = kv.first.as<std::string>();
            const std::string p = "prices." + model + ".";
            ModelPrice mp;
            read(kv.second, "input_per_million", mp.input_per_million, p);
            read(kv.second, "output_per_million", mp.output_per_million, p);
            if (mp.input_per_million < 0 || mp.output_per_million < 0) throw ParseError(p, "prices must be non-negative");
            c.prices.set(model, mp);
        }
    }
    if (root["exchange_log"]) {
        std::string path;
        read(root, "exchange_log", path, "");
        c.exchange_log = path;
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

std::unique_ptr<Provider> make_provider(const RunConfig& config) {
    const auto& g = config.generator;
    if (g.kind == "mock") {
        MockProvider::Options o;
        o.tokenizer = Tokenizer(config.evolution.tokenizer);
        o.plasticity_delta = config.evolution.plasticity_delta;
        o.model = g.model;
        o.prices = config.prices;
        return std::make_unique<MockProvider>(o);
    }
    OpenAIProvider::Options o;
    o.client = client_options(g, config);
    o.sampling = config.evolution.sampling;
    o.tokenizer = Tokenizer(config.evolution.tokenizer);
    o.prices = config.prices;
    return std::make_unique<OpenAIProvider>(o);
}

JudgeConfig make_judges(const RunConfig& config) {
    JudgeConfig j;
    j.temperature = config.evolution.sampling.judge_temperature;
    j.blinding_salt = config.blinding_salt;
    j.shuffle_seed = config.shuffle_seed;
    for (const auto& e : config.judges) {
        if (e.kind == "mock") {
            j.judges.push_back(std::make_shared<MockJudge>(e.model, config.prices));
        } else {
            j.judges.push_back(std::make_shared<LiveJudge>(client_options(e, config), config.prices));
        }
    }
    return j;
}

}  // namespace lark
