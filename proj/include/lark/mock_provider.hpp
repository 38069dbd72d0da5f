#pragma once

#include <cstdint>
#include <string>

#include "lark/provider.hpp"
#include "lark/tokenizer.hpp"

namespace lark {

/// Offline provider. Every output is a pure function of the request and its
/// seed: seeds are template text built from the scenario objectives plus
/// feature tokens from the fixed vocabulary; plasticity swaps, drops or adds a
/// feature within the brevity bound; maturation appends a clause naming the
/// hinted stakeholder. Rankings come from the scenario's synthetic utilities.
class MockProvider final : public Provider {
public:
    struct Options {
        Tokenizer tokenizer{};
        double plasticity_delta = 0.2;  // max growth as a fraction of input tokens
        std::string model = "mock";
        PriceTable prices{};
    };

    MockProvider() = default;
    explicit MockProvider(Options options) : options_(std::move(options)) {}

    std::string name() const override { return "mock"; }
    Completion generate(const GenerationRequest& request) const override;
    RankCompletion rank(const GenerationRequest& request) const override;

    const Options& options() const noexcept { return options_; }

private:
    Completion finish(const GenerationRequest& request, std::string prompt, std::string text) const;
    std::string seed_text(const GenerationRequest& request) const;
    std::string plasticity_text(const GenerationRequest& request) const;
    std::string maturation_text(const GenerationRequest& request) const;

    Options options_;
};

}  // namespace lark
