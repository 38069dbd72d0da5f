#include "lark/prompts.hpp"

#include <fmt/format.h>

#include "lark/error.hpp"
#include "lark/hash.hpp"
#include "lark/scenario_io.hpp"

namespace lark::prompts {

namespace detail {
const std::map<std::string, std::string_view, std::less<>>& templates();
}

std::string_view get(std::string_view name) {
    const auto& t = detail::templates();
    auto it = t.find(name);
    if (it == t.end()) throw Error(fmt::format("no prompt template '{}'", name));
    return it->second;
}

const std::map<std::string, std::string>& hashes() {
    static const std::map<std::string, std::string> table = [] {
        std::map<std::string, std::string> h;
        for (const auto& [name, text] : detail::templates()) h[name] = sha256_hex(text);
        return h;
    }();
    return table;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const auto open = tmpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        const std::string key(tmpl.substr(open + 2, close - open - 2));
        if (auto it = values.find(key); it != values.end()) {
            out.append(it->second);
        } else {
            out.append(tmpl.substr(open, close + 2 - open));
        }
        i = close + 2;
    }
    return out;
}

namespace {

std::string objectives_block(const Scenario& s) {
    std::string out;
    for (const auto& o : s.objectives) out += "- " + o + "\n";
    return out;
}

std::string stakeholders_block(const Scenario& s) {
    std::string out;
    for (const auto& st : s.stakeholders)
        out += fmt::format("- {} (weight {}): {}\n", st.id, format_double(st.influence_weight), st.persona);
    return out;
}

}  // namespace

std::string seed(const Scenario& scenario, std::size_t index, std::size_t target_tokens) {
    return render(get("seed"), {{"context", scenario.context},
                                {"objectives", objectives_block(scenario)},
                                {"stakeholders", stakeholders_block(scenario)},
                                {"index", std::to_string(index + 1)},
                                {"target_tokens", std::to_string(target_tokens)}});
}

std::string plasticity(const Scenario& scenario, const Strategy& strategy) {
    return render(get("plasticity"), {{"context", scenario.context},
                                      {"objectives", objectives_block(scenario)},
                                      {"strategy", strategy.text}});
}

std::string maturation(const Scenario& scenario, const Strategy& strategy, const Stakeholder& hint) {
    return render(get("maturation"), {{"context", scenario.context},
                                      {"objectives", objectives_block(scenario)},
                                      {"strategy", strategy.text},
                                      {"hint", hint.id},
                                      {"hint_persona", hint.persona}});
}

std::string rank(const Scenario& scenario, const Stakeholder& stakeholder, const Population& population) {
    std::string candidates;
    for (const auto& m : population.members) candidates += fmt::format("[{}] {}\n", m.id, m.text);
    return render(get("rank"), {{"stakeholder", stakeholder.id},
                                {"persona", stakeholder.persona},
                                {"context", scenario.context},
                                {"candidates", candidates}});
}

}  // namespace lark::prompts
