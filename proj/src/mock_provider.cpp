#include "lark/mock_provider.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "lark/error.hpp"
#include "lark/prompts.hpp"
#include "lark/rng.hpp"
#include "lark/stakeholder_sim.hpp"
#include "lark/vocabulary.hpp"

namespace lark {

namespace {

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::istringstream in{std::string(text)};
    for (std::string w; in >> w;) words.push_back(std::move(w));
    return words;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

// Splits trailing punctuation off a word ("pilot-program." -> "pilot-program", ".").
std::pair<std::string, std::string> split_suffix(const std::string& word) {
    std::size_t end = word.size();
    while (end > 0 && std::ispunct(static_cast<unsigned char>(word[end - 1])) && word[end - 1] != '-') --end;
    return {word.substr(0, end), word.substr(end)};
}

std::vector<std::size_t> feature_positions(const std::vector<std::string>& words) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (feature_group(split_suffix(words[i]).first) >= 0) pos.push_back(i);
    }
    return pos;
}

std::vector<std::string_view> absent_features(std::string_view text) {
    const auto present = features_in(text);
    std::vector<std::string_view> out;
    for (auto f : kFeatureVocabulary) {
        if (!present.contains(std::string(f))) out.push_back(f);
    }
    return out;
}

std::string_view pick(Rng& rng, const std::vector<std::string_view>& from) { return from[rng.below(from.size())]; }

}  // namespace

Completion MockProvider::generate(const GenerationRequest& request) const {
    if (!request.scenario) throw ProviderError(request.kind, "request has no scenario", false);
    switch (request.kind) {
        case RequestKind::seed:
            return finish(request,
                          prompts::seed(*request.scenario, request.index, request.scenario->budget.target_tokens),
                          seed_text(request));
        case RequestKind::plasticity:
            if (!request.subject) throw ProviderError(request.kind, "plasticity request without a strategy", false);
            return finish(request, prompts::plasticity(*request.scenario, *request.subject), plasticity_text(request));
        case RequestKind::maturation:
            if (!request.subject || !request.stakeholder)
                throw ProviderError(request.kind, "maturation request without strategy or hint", false);
            return finish(request, prompts::maturation(*request.scenario, *request.subject, *request.stakeholder),
                          maturation_text(request));
        default:
            throw ProviderError(request.kind, "not a generation request", false);
    }
}

Completion MockProvider::finish(const GenerationRequest& request, std::string prompt, std::string text) const {
    (void)request;
    Completion c;
    const std::string full_prompt = std::string(prompts::get("system")) + prompt;
    c.usage = options_.prices.usage(options_.model, count_chars4_tokens(full_prompt), count_chars4_tokens(text));
    c.text = std::move(text);
    return c;
}

std::string MockProvider::seed_text(const GenerationRequest& request) const {
    const Scenario& s = *request.scenario;
    Rng rng(derive_seed(request.seed, "mock-seed", s.id, request.index));
    std::string text = fmt::format("Address {}", s.objectives[request.index % s.objectives.size()]);
    if (s.objectives.size() > 1 && rng.bernoulli(0.5)) {
        text += fmt::format(" and {}", s.objectives[(request.index + 1) % s.objectives.size()]);
    }
    text += ". Measures:";
    std::vector<std::string_view> pool(kFeatureVocabulary.begin(), kFeatureVocabulary.end());
    rng.shuffle(pool);
    const std::size_t n = 3 + rng.below(4);
    for (std::size_t i = 0; i < n; ++i) text += fmt::format(" {}", pool[i]);
    text += ".";
    return text;
}

std::string MockProvider::plasticity_text(const GenerationRequest& request) const {
    const Strategy& in = *request.subject;
    const Tokenizer& tok = options_.tokenizer;
    const std::size_t in_tokens = tok.count(in.text);
    const std::size_t bound =
        in_tokens + static_cast<std::size_t>(std::floor(options_.plasticity_delta * static_cast<double>(in_tokens)));
    Rng rng(derive_seed(request.seed, "mock-plasticity", in.text));

    const auto words = split_words(in.text);
    const auto positions = feature_positions(words);
    const auto absent = absent_features(in.text);

    for (int attempt = 0; attempt < 8; ++attempt) {
        auto edited = words;
        const double r = rng.uniform();
        if (!positions.empty() && !absent.empty() && r < 0.4) {
            // swap one feature for an absent one
            const std::size_t p = positions[rng.below(positions.size())];
            edited[p] = std::string(pick(rng, absent)) + split_suffix(edited[p]).second;
        } else if (positions.size() > 1 && r < 0.7) {
            // drop a feature, keeping sentence punctuation on its neighbour
            const std::size_t p = positions[rng.below(positions.size())];
            const auto suffix = split_suffix(edited[p]).second;
            if (!suffix.empty() && p > 0 && split_suffix(edited[p - 1]).second.empty()) edited[p - 1] += suffix;
            edited.erase(edited.begin() + static_cast<std::ptrdiff_t>(p));
        } else if (!absent.empty()) {
            // add a feature after the last one
            const std::string added(pick(rng, absent));
            if (positions.empty()) {
                edited.push_back(added);
            } else {
                const std::size_t p = positions.back();
                auto [base, suffix] = split_suffix(edited[p]);
                edited[p] = base;
                edited.insert(edited.begin() + static_cast<std::ptrdiff_t>(p) + 1, added + suffix);
            }
        } else {
            continue;
        }
        auto text = join_words(edited);
        if (!text.empty() && tok.count(text) <= bound) return text;
    }
    return join_words(words);
}

std::string MockProvider::maturation_text(const GenerationRequest& request) const {
    const Strategy& parent = *request.subject;
    Rng rng(derive_seed(request.seed, "mock-maturation", parent.text, request.stakeholder->id));
    auto absent = absent_features(parent.text);
    rng.shuffle(absent);
    std::string clause = fmt::format(" Specialized for {}:", request.stakeholder->id);
    const std::size_t n = std::min<std::size_t>(2, absent.size());
    for (std::size_t i = 0; i < n; ++i) clause += fmt::format(" {}", absent[i]);
    clause += ".";
    return parent.text + clause;
}

RankCompletion MockProvider::rank(const GenerationRequest& request) const {
    if (!request.scenario || !request.stakeholder || !request.population)
        throw ProviderError(RequestKind::stakeholder_rank, "incomplete ranking request", false);
    const SyntheticUtility* u = request.scenario->utility_for(request.stakeholder->id);
    const SyntheticUtility fallback = u ? SyntheticUtility{} : default_utility(*request.stakeholder);
    RankCompletion out;
    out.ranking = rank_by_utility(u ? *u : fallback, *request.population, request.seed).ranking;

    std::string reply;
    for (const auto& id : out.ranking) reply += (reply.empty() ? "" : ", ") + id;
    const std::string full_prompt = std::string(prompts::get("system")) +
                                    prompts::rank(*request.scenario, *request.stakeholder, *request.population);
    out.usage = options_.prices.usage(options_.model, count_chars4_tokens(full_prompt), count_chars4_tokens(reply));
    return out;
}

}  // namespace lark
