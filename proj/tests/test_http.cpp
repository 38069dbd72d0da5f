#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

#include "lark/judge.hpp"
#include "lark/openai_provider.hpp"
#include "lark/scenario_io.hpp"
#include "lark/stakeholder_sim.hpp"

using namespace lark;
using nlohmann::json;

namespace {

json reply_with(const std::string& content, int prompt_tokens = 11, int completion_tokens = 7) {
    return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})},
            {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}};
}

// Local chat-completions stand-in. The handler decides status and body per call.
class FakeServer {
public:
    using Handler = std::function<std::pair<int, std::string>(const json& body, int call)>;

    explicit FakeServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mutex_);
            const int call = calls_++;
            bodies_.push_back(json::parse(req.body));
            auth_.push_back(req.get_header_value("Authorization"));
            const auto [status, body] = handler_(bodies_.back(), call);
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    int calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }
    json body(std::size_t i) const {
        std::lock_guard lock(mutex_);
        return bodies_.at(i);
    }
    std::string auth(std::size_t i) const {
        std::lock_guard lock(mutex_);
        return auth_.at(i);
    }

private:
    Handler handler_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mutex_;
    int calls_ = 0;
    std::vector<json> bodies_;
    std::vector<std::string> auth_;
};

ChatClient::Options options_for(const FakeServer& s, std::vector<std::chrono::milliseconds>* sleeps = nullptr) {
    ChatClient::Options o;
    o.base_url = s.url();
    o.model = "test-model";
    o.api_key = "sk-secret-123";
    o.timeout = std::chrono::seconds(5);
    o.retry = {3, std::chrono::milliseconds(100)};
    o.sleep = [sleeps](std::chrono::milliseconds d) {
        if (sleeps) sleeps->push_back(d);
    };
    return o;
}

const Scenario& scenario() {
    static const Scenario s = make_benchmark_scenarios(1, 5)[0];
    return s;
}

}  // namespace

TEST_CASE("chat client sends the expected request") {
    FakeServer server([](const json&, int) { return std::pair{200, reply_with("hello").dump()}; });
    ChatClient client(options_for(server));
    const auto r = client.complete(RequestKind::seed, {{"system", "sys"}, {"user", "hi"}}, 0.8, 256);
    CHECK(r.content == "hello");
    CHECK(r.prompt_tokens == 11u);
    CHECK(r.completion_tokens == 7u);
    REQUIRE(server.calls() == 1);
    const json b = server.body(0);
    CHECK(b["model"] == "test-model");
    CHECK(b["temperature"] == 0.8);
    CHECK(b["max_tokens"] == 256);
    CHECK(b["messages"].size() == 2);
    CHECK(b["messages"][1]["content"] == "hi");
    CHECK(server.auth(0) == "Bearer sk-secret-123");
}

TEST_CASE("transient failures are retried with doubling backoff") {
    FakeServer server([](const json&, int call) {
        if (call == 0) return std::pair{500, std::string("{}")};
        if (call == 1) return std::pair{429, std::string("{}")};
        return std::pair{200, reply_with("third time").dump()};
    });
    std::vector<std::chrono::milliseconds> sleeps;
    ChatClient client(options_for(server, &sleeps));
    CHECK(client.complete(RequestKind::judge_score, {{"user", "x"}}, 0.1, 16).content == "third time");
    CHECK(server.calls() == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0].count() == 100);
    CHECK(sleeps[1].count() == 200);
}

TEST_CASE("retries are bounded and errors carry the request kind") {
    FakeServer server([](const json&, int) { return std::pair{503, std::string("{}")}; });
    ChatClient client(options_for(server));
    try {
        client.complete(RequestKind::maturation, {{"user", "x"}}, 0.1, 16);
        FAIL("expected a provider error");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == RequestKind::maturation);
        CHECK(e.transient());
    }
    CHECK(server.calls() == 3);
}

TEST_CASE("client errors are not retried") {
    FakeServer server([](const json&, int) { return std::pair{400, std::string(R"({"error":"bad"})")}; });
    ChatClient client(options_for(server));
    CHECK_THROWS_AS(client.complete(RequestKind::seed, {{"user", "x"}}, 0.1, 16), ProviderError);
    CHECK(server.calls() == 1);
}

TEST_CASE("malformed responses are rejected") {
    CHECK_THROWS_AS(ChatClient::parse_response(RequestKind::seed, json::object()), ProviderError);
    CHECK_THROWS_AS(ChatClient::parse_response(RequestKind::seed, json{{"choices", json::array()}}), ProviderError);
    const auto r = ChatClient::parse_response(
        RequestKind::seed, json{{"choices", json::array({{{"message", {{"content", "ok"}}}}})}});
    CHECK(r.content == "ok");
    CHECK_FALSE(r.prompt_tokens.has_value());
    ChatClient::Options no_scheme;
    no_scheme.base_url = "localhost";
    CHECK_THROWS_AS(ChatClient{no_scheme}, ValidationError);
}

TEST_CASE("responses are cached by request") {
    const auto dir = std::filesystem::temp_directory_path() / "lark-http-cache";
    std::filesystem::remove_all(dir);
    FakeServer server([](const json& b, int) {
        return std::pair{200, reply_with("echo " + b["messages"][0]["content"].get<std::string>()).dump()};
    });
    auto o = options_for(server);
    o.cache_dir = dir;
    ChatClient client(o);
    CHECK(client.complete(RequestKind::seed, {{"user", "a"}}, 0.1, 16).content == "echo a");
    CHECK(client.complete(RequestKind::seed, {{"user", "a"}}, 0.1, 16).content == "echo a");
    CHECK(server.calls() == 1);
    CHECK(client.complete(RequestKind::seed, {{"user", "b"}}, 0.1, 16).content == "echo b");
    CHECK(server.calls() == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("exchange log records traffic without credentials") {
    const auto path = std::filesystem::temp_directory_path() / "lark-exchanges.jsonl";
    std::filesystem::remove(path);
    FakeServer server([](const json&, int call) {
        return call == 0 ? std::pair{500, std::string("{}")} : std::pair{200, reply_with("fine").dump()};
    });
    auto o = options_for(server);
    o.log = jsonl_exchange_log(path);
    ChatClient(o).complete(RequestKind::seed, {{"user", "hello"}}, 0.1, 16);
    const std::string log = read_file(path);
    CHECK(std::count(log.begin(), log.end(), '\n') == 2);
    CHECK(log.find("sk-secret-123") == std::string::npos);
    CHECK(log.find("hello") != std::string::npos);
    CHECK(log.find("\"status\":500") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("ranked ids are extracted in order with duplicates") {
    const std::vector<std::string> ids{"g1-00", "g1-01", "g1-02"};
    CHECK(extract_ranked_ids("1. g1-02\n2. g1-00\n3. g1-01", ids) == std::vector<std::string>{"g1-02", "g1-00", "g1-01"});
    CHECK(extract_ranked_ids("g1-01, g1-01; g1-001 and g1-00.", ids) ==
          std::vector<std::string>{"g1-01", "g1-01", "g1-00"});
    CHECK(extract_ranked_ids("none here", ids).empty());
}

TEST_CASE("live provider ranks and generates through the endpoint") {
    FakeServer server([](const json& b, int) {
        const std::string user = b["messages"][1]["content"];
        if (user.find("g1-01") != std::string::npos) return std::pair{200, reply_with("g1-01 > g1-00").dump()};
        return std::pair{200, reply_with("A plan.", 40, 3).dump()};
    });
    OpenAIProvider::Options po;
    po.client = options_for(server);
    po.prices.set("test-model", {1.0, 2.0});
    OpenAIProvider provider(po);

    const Scenario& s = scenario();
    Population pop;
    for (int i = 0; i < 3; ++i) {
        Strategy st;
        st.id = "g1-0" + std::to_string(i);
        st.text = "text " + st.id;
        pop.members.push_back(st);
    }
    GenerationRequest rank;
    rank.kind = RequestKind::stakeholder_rank;
    rank.scenario = &s;
    rank.stakeholder = &s.stakeholders[0];
    rank.population = &pop;
    const auto rc = provider.rank(rank);
    CHECK(rc.ranking == std::vector<std::string>{"g1-01", "g1-00"});

    GenerationRequest seed;
    seed.kind = RequestKind::seed;
    seed.scenario = &s;
    const auto c = provider.generate(seed);
    CHECK(c.text == "A plan.");
    CHECK(c.usage.prompt_tokens == 40);
    CHECK(c.usage.completion_tokens == 3);
    CHECK(c.usage.cost == doctest::Approx((40.0 + 6.0) / 1e6));
    CHECK(c.reported_completion_tokens == 3u);
}

TEST_CASE("live judge scores parse strictly") {
    const std::vector<std::string> ids{"R-aa", "R-bb", "R-cc"};
    const auto s = LiveJudge::parse_scores(
        R"(Here you go: {"R-aa":[1,2,3,4,5],"R-bb":[1,2,3,4],"R-cc":[1,2,3,4,11]} thanks)", ids);
    REQUIRE(s.size() == 1);
    CHECK(s.at("R-aa")[4] == 5.0);
    CHECK(LiveJudge::parse_scores("no json", ids).empty());
    CHECK(LiveJudge::parse_scores("{broken", ids).empty());
}

TEST_CASE("live judge re-prompts once for the missing entries") {
    std::atomic<int> second_request_entries{-1};
    FakeServer server([&](const json& b, int call) {
        const std::string payload = b["messages"][0]["content"];
        const auto a = anonymize("salt", scenario().id, "alpha");
        const auto bb = anonymize("salt", scenario().id, "beta");
        json scores = json::object();
        if (call == 0) {
            scores[a] = {8, 8, 8, 8, 8};
        } else {
            second_request_entries = static_cast<int>((payload.find(a) != std::string::npos) +
                                                      (payload.find(bb) != std::string::npos));
            scores[bb] = {6, 6, 6, 6, 6};
        }
        return std::pair{200, reply_with(scores.dump()).dump()};
    });
    JudgeConfig cfg;
    cfg.blinding_salt = "salt";
    cfg.judges = {std::make_shared<LiveJudge>(options_for(server), PriceTable{})};
    const auto rec = judge_outputs({{"alpha", "plan a"}, {"beta", "plan b"}}, scenario(), cfg);
    CHECK(server.calls() == 2);
    CHECK(second_request_entries == 1);
    CHECK(rec.verdicts[0].payloads.size() == 2);
    CHECK(rec.composite_for("alpha") == 40.0);
    CHECK(rec.composite_for("beta") == 30.0);
}
