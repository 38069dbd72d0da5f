#include "lark/provider.hpp"

namespace lark {

ProviderUsage PriceTable::usage(const std::string& model, std::size_t prompt_tokens,
                                std::size_t completion_tokens) const {
    ProviderUsage u;
    u.prompt_tokens = prompt_tokens;
    u.completion_tokens = completion_tokens;
    if (auto it = prices_.find(model); it != prices_.end()) {
        u.cost = static_cast<double>(prompt_tokens) * it->second.input_per_million / 1e6 +
                 static_cast<double>(completion_tokens) * it->second.output_per_million / 1e6;
    }
    return u;
}

}  // namespace lark
