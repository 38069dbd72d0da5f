#include "lark/judge.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "lark/error.hpp"
#include "lark/hash.hpp"
#include "lark/prompts.hpp"
#include "lark/rng.hpp"
#include "lark/tokenizer.hpp"
#include "lark/vocabulary.hpp"

namespace lark {

using nlohmann::ordered_json;

namespace {

double composite_of(const CriterionScores& c) {
    double s = 0.0;
    for (double v : c) s += v;
    return s;
}

std::string render_payload(const Scenario& scenario, const std::vector<BlindEntry>& entries) {
    std::string criteria;
    for (std::size_t c = 0; c < kRubricCriteria; ++c) criteria += fmt::format("{}. {}\n", c + 1, kRubricCriterionNames[c]);
    std::string objectives;
    for (const auto& o : scenario.objectives) objectives += fmt::format("- {}\n", o);
    std::string responses;
    for (const auto& e : entries) responses += fmt::format("[{}]\n{}\n\n", e.anon_id, e.text);
    return prompts::render(prompts::get("judge"), {{"criteria", criteria},
                                                   {"context", scenario.context},
                                                   {"objectives", objectives},
                                                   {"responses", responses}});
}

// Positional points with average ranks for ties; entries without a value sit
// at the bottom together.
std::map<std::string, double> judge_points(const std::vector<std::string>& anon_ids,
                                           const std::map<std::string, JudgeCell>& cells) {
    std::vector<std::pair<double, std::string>> ordered;
    for (const auto& id : anon_ids) {
        const auto it = cells.find(id);
        const bool valid = it != cells.end() && it->second.composite;
        ordered.emplace_back(valid ? *it->second.composite : -1.0, id);
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const double k = static_cast<double>(ordered.size());
    std::map<std::string, double> points;
    std::size_t i = 0;
    while (i < ordered.size()) {
        std::size_t j = i;
        while (j + 1 < ordered.size() && ordered[j + 1].first == ordered[i].first) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t q = i; q <= j; ++q) points[ordered[q].second] = k - avg_rank;
        i = j + 1;
    }
    return points;
}

}  // namespace

CriterionScores MockJudge::score_text(std::string_view text, std::size_t target_tokens) {
    const std::size_t t = count_whitespace_tokens(text);
    const double length_factor =
        t == 0 ? 0.0 : std::min(1.0, static_cast<double>(target_tokens) / static_cast<double>(t));
    std::array<int, kRubricCriteria> hits{};
    for (const auto& f : features_in(text)) {
        const int g = feature_group(f);
        if (g >= 0) ++hits[static_cast<std::size_t>(g)];
    }
    CriterionScores out{};
    for (std::size_t c = 0; c < kRubricCriteria; ++c)
        out[c] = std::min(kCriterionMax, std::round(2.0 + 4.0 * hits[c] * length_factor));
    return out;
}

JudgeReply MockJudge::score(const JudgeRequest& request) const {
    if (!request.scenario) throw ValidationError("judge request has no scenario");
    JudgeReply reply;
    ordered_json body = ordered_json::object();
    for (const auto& e : request.entries) {
        const auto s = score_text(e.text, request.scenario->budget.target_tokens);
        reply.scores[e.anon_id] = s;
        body[e.anon_id] = s;
    }
    reply.usage = prices_.usage(model_, count_chars4_tokens(request.payload), count_chars4_tokens(body.dump()));
    return reply;
}

LiveJudge::LiveJudge(ChatClient::Options client, PriceTable prices)
    : client_(std::move(client)), prices_(std::move(prices)) {}

JudgeReply LiveJudge::score(const JudgeRequest& request) const {
    const auto r = client_.complete(RequestKind::judge_score, {{"user", request.payload}}, request.temperature, 1024);
    std::vector<std::string> ids;
    for (const auto& e : request.entries) ids.push_back(e.anon_id);
    JudgeReply reply;
    reply.scores = parse_scores(r.content, ids);
    reply.usage = prices_.usage(client_.options().model, r.prompt_tokens.value_or(count_chars4_tokens(request.payload)),
                                r.completion_tokens.value_or(count_chars4_tokens(r.content)));
    return reply;
}

std::map<std::string, CriterionScores> LiveJudge::parse_scores(std::string_view content,
                                                               const std::vector<std::string>& anon_ids) {
    std::map<std::string, CriterionScores> out;
    const auto open = content.find('{');
    const auto close = content.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return out;
    const auto parsed = nlohmann::json::parse(content.substr(open, close - open + 1), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) return out;
    for (const auto& id : anon_ids) {
        const auto it = parsed.find(id);
        if (it == parsed.end() || !it->is_array() || it->size() != kRubricCriteria) continue;
        CriterionScores s{};
        bool ok = true;
        for (std::size_t c = 0; c < kRubricCriteria && ok; ++c) {
            const auto& v = (*it)[c];
            ok = v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= kCriterionMax;
            if (ok) s[c] = v.get<double>();
        }
        if (ok) out[id] = s;
    }
    return out;
}

void JudgeConfig::validate() const {
    if (judges.empty()) throw ValidationError("at least one judge is required");
    for (const auto& j : judges) {
        if (!j) throw ValidationError("null judge in configuration");
    }
    if (!(temperature >= 0.0)) throw ValidationError("judge temperature must be non-negative");
}

JudgeConfig default_judge_config() {
    JudgeConfig c;
    c.judges = {std::make_shared<MockJudge>("mock-judge-a"), std::make_shared<MockJudge>("mock-judge-b")};
    return c;
}

std::optional<double> EvaluationRecord::composite_for(const std::string& system) const {
    for (const auto& [anon, name] : anon_to_system) {
        if (name != system) continue;
        const auto it = composite.find(anon);
        if (it == composite.end()) return std::nullopt;
        return it->second;
    }
    return std::nullopt;
}

ProviderUsage EvaluationRecord::judge_usage() const {
    ProviderUsage total;
    for (const auto& v : verdicts) total += v.usage;
    return total;
}

std::string anonymize(const std::string& salt, const std::string& scenario_id, const std::string& system) {
    return "R-" + sha256_hex(salt + '\n' + scenario_id + '\n' + system).substr(0, 8);
}

EvaluationRecord judge_outputs(const std::map<std::string, std::string>& outputs, const Scenario& scenario,
                               const JudgeConfig& config) {
    config.validate();
    if (outputs.size() < 2) throw ValidationError("judging needs at least two systems");

    EvaluationRecord record;
    record.scenario_id = scenario.id;
    record.prompt_hash = prompts::hashes().at("judge");
    std::map<std::string, std::string> text_of;  // by anonymized id
    for (const auto& [system, text] : outputs) {
        const auto anon = anonymize(config.blinding_salt, scenario.id, system);
        if (!record.anon_to_system.emplace(anon, system).second)
            throw ValidationError(fmt::format("anonymized id collision in scenario '{}'", scenario.id));
        text_of[anon] = text;
    }
    std::vector<std::string> anon_ids;
    for (const auto& [anon, _] : text_of) anon_ids.push_back(anon);

    for (std::size_t j = 0; j < config.judges.size(); ++j) {
        const Judge& judge = *config.judges[j];
        JudgeVerdict verdict;
        verdict.judge = judge.name();
        verdict.presentation_order = anon_ids;
        Rng rng(derive_seed(config.shuffle_seed, "judge-order", j, scenario.id));
        rng.shuffle(verdict.presentation_order);

        std::vector<std::string> pending = verdict.presentation_order;
        for (int attempt = 0; attempt < 2 && !pending.empty(); ++attempt) {
            JudgeRequest req;
            req.scenario = &scenario;
            req.temperature = config.temperature;
            req.attempt = attempt;
            for (const auto& id : pending) req.entries.push_back({id, text_of.at(id)});
            req.payload = render_payload(scenario, req.entries);
            verdict.payloads.push_back(req.payload);
            ++verdict.attempts;
            const auto reply = judge.score(req);
            verdict.usage += reply.usage;
            std::vector<std::string> still_missing;
            for (const auto& id : pending) {
                const auto it = reply.scores.find(id);
                if (it == reply.scores.end()) {
                    still_missing.push_back(id);
                } else {
                    verdict.cells[id] = {it->second, composite_of(it->second)};
                }
            }
            pending = std::move(still_missing);
        }
        for (const auto& id : pending) verdict.cells[id] = {};
        record.verdicts.push_back(std::move(verdict));
    }

    const double judge_weight = 1.0 / static_cast<double>(record.verdicts.size());
    for (const auto& id : anon_ids) record.judge_borda[id] = 0.0;
    for (const auto& v : record.verdicts) {
        for (const auto& [id, pts] : judge_points(anon_ids, v.cells)) record.judge_borda[id] += judge_weight * pts;
    }
    for (const auto& id : anon_ids) {
        double sum = 0.0;
        int n = 0;
        for (const auto& v : record.verdicts) {
            const auto& cell = v.cells.at(id);
            if (cell.composite) {
                sum += *cell.composite;
                ++n;
            }
        }
        if (n > 0) record.composite[id] = sum / n;
    }
    record.aggregated_ranking = anon_ids;
    std::stable_sort(record.aggregated_ranking.begin(), record.aggregated_ranking.end(),
                     [&](const std::string& a, const std::string& b) {
                         return record.judge_borda.at(a) > record.judge_borda.at(b);
                     });
    return record;
}

ordered_json to_json(const EvaluationRecord& record) {
    ordered_json verdicts = ordered_json::array();
    for (const auto& v : record.verdicts) {
        ordered_json cells = ordered_json::object();
        for (const auto& [id, cell] : v.cells) {
            cells[id] = {{"criteria", cell.criteria ? ordered_json(*cell.criteria) : ordered_json(nullptr)},
                         {"composite", cell.composite ? ordered_json(*cell.composite) : ordered_json(nullptr)}};
        }
        verdicts.push_back({{"judge", v.judge},
                            {"presentation_order", v.presentation_order},
                            {"cells", cells},
                            {"attempts", v.attempts},
                            {"usage",
                             {{"prompt_tokens", v.usage.prompt_tokens},
                              {"completion_tokens", v.usage.completion_tokens},
                              {"cost", v.usage.cost}}}});
    }
    return {{"schema_version", record.schema_version},
            {"scenario_id", record.scenario_id},
            {"prompt_hash", record.prompt_hash},
            {"aggregation", record.aggregation},
            {"anon_to_system", record.anon_to_system},
            {"verdicts", verdicts},
            {"composite", record.composite},
            {"judge_borda", record.judge_borda},
            {"aggregated_ranking", record.aggregated_ranking}};
}

EvaluationRecord evaluation_from_json(const ordered_json& j) {
    try {
        EvaluationRecord r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != 1)
            throw ParseError("schema_version", fmt::format("unsupported evaluation schema {}", r.schema_version));
        r.scenario_id = j.at("scenario_id").get<std::string>();
        r.prompt_hash = j.at("prompt_hash").get<std::string>();
        r.aggregation = j.at("aggregation").get<std::string>();
        r.anon_to_system = j.at("anon_to_system").get<std::map<std::string, std::string>>();
        for (const auto& v : j.at("verdicts")) {
            JudgeVerdict verdict;
            verdict.judge = v.at("judge").get<std::string>();
            verdict.presentation_order = v.at("presentation_order").get<std::vector<std::string>>();
            for (const auto& [id, cell] : v.at("cells").items()) {
                JudgeCell c;
                if (!cell.at("criteria").is_null()) c.criteria = cell.at("criteria").get<CriterionScores>();
                if (!cell.at("composite").is_null()) c.composite = cell.at("composite").get<double>();
                verdict.cells[id] = c;
            }
            verdict.attempts = v.at("attempts").get<std::size_t>();
            const auto& u = v.at("usage");
            verdict.usage = {u.at("prompt_tokens").get<std::size_t>(), u.at("completion_tokens").get<std::size_t>(),
                             u.at("cost").get<double>()};
            r.verdicts.push_back(std::move(verdict));
        }
        r.composite = j.at("composite").get<std::map<std::string, double>>();
        r.judge_borda = j.at("judge_borda").get<std::map<std::string, double>>();
        r.aggregated_ranking = j.at("aggregated_ranking").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("evaluation", e.what());
    }
}

std::string payload_log(const EvaluationRecord& record) {
    std::string out;
    for (const auto& v : record.verdicts) {
        for (std::size_t i = 0; i < v.payloads.size(); ++i) {
            out += ordered_json({{"judge", v.judge}, {"attempt", i}, {"payload", v.payloads[i]}}).dump();
            out += '\n';
        }
    }
    return out;
}

}  // namespace lark
