#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace lark {

enum class TokenizerMode {
    whitespace,  // whitespace-delimited words
    chars4,      // ceil(characters / 4)
    provider,    // completion tokens reported by the endpoint, chars4 otherwise
};

std::string_view to_string(TokenizerMode m) noexcept;
TokenizerMode parse_tokenizer_mode(std::string_view tag);

class Tokenizer {
public:
    explicit Tokenizer(TokenizerMode mode = TokenizerMode::whitespace) : mode_(mode) {}

    TokenizerMode mode() const noexcept { return mode_; }

    /// Deterministic count of `text`. In provider mode this is the offline
    /// fallback (chars/4).
    std::size_t count(std::string_view text) const noexcept;

    /// Count for freshly generated text, preferring the endpoint's figure in
    /// provider mode.
    std::size_t count_generated(std::string_view text, std::optional<std::size_t> reported) const noexcept;

    /// False when counts cannot be re-derived from text alone.
    bool recomputable() const noexcept { return mode_ != TokenizerMode::provider; }

private:
    TokenizerMode mode_;
};

std::size_t count_whitespace_tokens(std::string_view text) noexcept;
std::size_t count_chars4_tokens(std::string_view text) noexcept;

}  // namespace lark
