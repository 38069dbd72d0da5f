#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lark/model.hpp"
#include "lark/openai_provider.hpp"
#include "lark/provider.hpp"

namespace lark {

inline constexpr std::size_t kRubricCriteria = 5;
inline constexpr double kCriterionMax = 10.0;
inline constexpr double kRubricTotal = kRubricCriteria * kCriterionMax;

inline constexpr std::array<std::string_view, kRubricCriteria> kRubricCriterionNames = {
    "Coverage/Completeness (addresses all key stakeholder concerns)",
    "Feasibility/Realism (practical implementability)",
    "Specificity/Thoroughness (concrete operational details)",
    "Constraint Adherence (respects stated limitations)",
    "Clarity/Structure (logical organization)",
};

using CriterionScores = std::array<double, kRubricCriteria>;

/// One system output as a judge sees it: anonymized id and text only.
struct BlindEntry {
    std::string anon_id;
    std::string text;
};

struct JudgeRequest {
    const Scenario* scenario = nullptr;
    std::vector<BlindEntry> entries;  // presentation order
    std::string payload;              // the exact judge-bound prompt
    double temperature = 0.1;
    int attempt = 0;
};

struct JudgeReply {
    std::map<std::string, CriterionScores> scores;  // absent key: missing or malformed
    ProviderUsage usage;
};

class Judge {
public:
    virtual ~Judge() = default;
    virtual std::string name() const = 0;
    virtual JudgeReply score(const JudgeRequest& request) const = 0;
};

/// Order-blind offline judge. Criterion c scores
/// min(10, round(2 + 4 * hits_c * min(1, T_target / T))) where hits_c counts
/// distinct vocabulary features of group c in the text and T is its
/// whitespace token count.
class MockJudge final : public Judge {
public:
    explicit MockJudge(std::string model = "mock-judge", PriceTable prices = {})
        : model_(std::move(model)), prices_(std::move(prices)) {}
    std::string name() const override { return model_; }
    JudgeReply score(const JudgeRequest& request) const override;

    static CriterionScores score_text(std::string_view text, std::size_t target_tokens);

private:
    std::string model_;
    PriceTable prices_;
};

/// Judge backed by a chat-completions endpoint. Expects a JSON object mapping
/// each anonymized id to five numbers.
class LiveJudge final : public Judge {
public:
    LiveJudge(ChatClient::Options client, PriceTable prices);
    std::string name() const override { return client_.options().model; }
    JudgeReply score(const JudgeRequest& request) const override;

    /// Parses a judge response; entries that are absent or not five numbers
    /// in [0, 10] are left out.
    static std::map<std::string, CriterionScores> parse_scores(std::string_view content,
                                                               const std::vector<std::string>& anon_ids);

private:
    ChatClient client_;
    PriceTable prices_;
};

struct JudgeConfig {
    std::vector<std::shared_ptr<const Judge>> judges;  // two by default
    double temperature = 0.1;
    std::string blinding_salt = "lark";
    std::uint64_t shuffle_seed = 0;

    void validate() const;
};

/// Two mock judges.
JudgeConfig default_judge_config();

struct JudgeCell {
    std::optional<CriterionScores> criteria;  // nullopt: invalid after one re-prompt
    std::optional<double> composite;
};

struct JudgeVerdict {
    std::string judge;
    std::vector<std::string> presentation_order;  // anonymized ids as shown
    std::map<std::string, JudgeCell> cells;       // by anonymized id
    std::vector<std::string> payloads;            // every prompt sent to this judge
    std::size_t attempts = 0;
    ProviderUsage usage;
};

struct EvaluationRecord {
    int schema_version = 1;
    std::string scenario_id;
    std::string prompt_hash;
    std::string aggregation = "uniform-borda";
    std::map<std::string, std::string> anon_to_system;  // de-blinding key, persisted only here
    std::vector<JudgeVerdict> verdicts;
    std::map<std::string, double> composite;   // mean over judges with a valid cell
    std::map<std::string, double> judge_borda;  // uniform-weight Borda over judge rankings
    std::vector<std::string> aggregated_ranking;  // anonymized ids, best first

    /// Composite for a system name; nullopt when no judge produced a valid cell.
    std::optional<double> composite_for(const std::string& system) const;
    ProviderUsage judge_usage() const;
};

/// Stable anonymized id for a system within a scenario.
std::string anonymize(const std::string& salt, const std::string& scenario_id, const std::string& system);

/// Blinds, shuffles per judge, scores, re-prompts once for missing cells and
/// aggregates. `outputs` maps system name to final text; needs >= 2 systems.
EvaluationRecord judge_outputs(const std::map<std::string, std::string>& outputs, const Scenario& scenario,
                               const JudgeConfig& config);

nlohmann::ordered_json to_json(const EvaluationRecord& record);
EvaluationRecord evaluation_from_json(const nlohmann::ordered_json& j);

/// Judge-bound payloads only, one JSON line each; this is what the blinding
/// audit scans.
std::string payload_log(const EvaluationRecord& record);

}  // namespace lark
