#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lark/error.hpp"
#include "lark/model.hpp"

namespace lark {

/// Raised when an endpoint call fails; carries the request kind.
class ProviderError : public Error {
public:
    ProviderError(RequestKind kind, const std::string& what, bool transient = true)
        : Error(std::string(to_string(kind)) + " request failed: " + what), kind_(kind), transient_(transient) {}

    RequestKind kind() const noexcept { return kind_; }
    bool transient() const noexcept { return transient_; }

private:
    RequestKind kind_;
    bool transient_;
};

/// Per-model prices in currency units per one million tokens.
struct ModelPrice {
    double input_per_million = 0.0;
    double output_per_million = 0.0;
};

class PriceTable {
public:
    void set(std::string model, ModelPrice price) { prices_[std::move(model)] = price; }
    /// Unknown models cost nothing.
    ProviderUsage usage(const std::string& model, std::size_t prompt_tokens, std::size_t completion_tokens) const;
    const std::map<std::string, ModelPrice>& entries() const noexcept { return prices_; }

private:
    std::map<std::string, ModelPrice> prices_;
};

/// What a provider is asked to do. Which optional fields are set depends on `kind`.
struct GenerationRequest {
    RequestKind kind = RequestKind::seed;
    const Scenario* scenario = nullptr;
    const Strategy* subject = nullptr;        // plasticity, maturation
    const Stakeholder* stakeholder = nullptr;  // stakeholder_rank, maturation hint
    const Population* population = nullptr;   // stakeholder_rank
    std::size_t index = 0;                    // seed slot
    double temperature = 0.8;
    std::size_t max_output_tokens = 512;
    std::uint64_t seed = 0;
};

struct Completion {
    std::string text;
    ProviderUsage usage;
    std::optional<std::size_t> reported_completion_tokens;
};

struct RankCompletion {
    std::vector<std::string> ranking;  // raw, may need repair
    ProviderUsage usage;
};

/// Generates and ranks strategy text. Implementations must be safe to call
/// concurrently from several threads.
class Provider {
public:
    virtual ~Provider() = default;

    virtual std::string name() const = 0;

    /// seed, plasticity, maturation
    virtual Completion generate(const GenerationRequest& request) const = 0;

    /// stakeholder_rank
    virtual RankCompletion rank(const GenerationRequest& request) const = 0;
};

/// Sampling temperatures per request family.
struct SamplingConfig {
    double seed_temperature = 0.8;
    double refine_temperature = 0.7;
    double judge_temperature = 0.1;
    std::size_t max_output_tokens = 512;

    bool operator==(const SamplingConfig&) const = default;
};

}  // namespace lark
