#include "lark/tokenizer.hpp"

#include <cctype>

#include <fmt/format.h>

#include "lark/error.hpp"

namespace lark {

std::string_view to_string(TokenizerMode m) noexcept {
    switch (m) {
        case TokenizerMode::whitespace: return "whitespace";
        case TokenizerMode::chars4: return "chars4";
        case TokenizerMode::provider: return "provider";
    }
    return "whitespace";
}

TokenizerMode parse_tokenizer_mode(std::string_view tag) {
    if (tag == "whitespace") return TokenizerMode::whitespace;
    if (tag == "chars4") return TokenizerMode::chars4;
    if (tag == "provider") return TokenizerMode::provider;
    throw ValidationError(fmt::format("unknown tokenizer mode '{}'", tag));
}

std::size_t count_whitespace_tokens(std::string_view text) noexcept {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::size_t count_chars4_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

std::size_t Tokenizer::count(std::string_view text) const noexcept {
    return mode_ == TokenizerMode::whitespace ? count_whitespace_tokens(text) : count_chars4_tokens(text);
}

std::size_t Tokenizer::count_generated(std::string_view text, std::optional<std::size_t> reported) const noexcept {
    if (mode_ == TokenizerMode::provider && reported) return *reported;
    return count(text);
}

}  // namespace lark
