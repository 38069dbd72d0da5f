#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lark {

/// FNV-1a over bytes, used only to fold labels into seed material.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace detail {
constexpr std::uint64_t mix_part(std::uint64_t h, std::uint64_t v) noexcept { return splitmix64(h ^ splitmix64(v)); }
constexpr std::uint64_t mix_part(std::uint64_t h, std::string_view v) noexcept { return splitmix64(h ^ fnv1a(v)); }
constexpr std::uint64_t mix_part(std::uint64_t h, const char* v) noexcept { return mix_part(h, std::string_view(v)); }
template <class T>
    requires std::is_integral_v<T>
constexpr std::uint64_t mix_part(std::uint64_t h, T v) noexcept {
    return mix_part(h, static_cast<std::uint64_t>(v));
}
}  // namespace detail

/// Derives an independent stream seed from a base seed and a list of labels.
/// Streams keyed this way do not shift when an unrelated stream draws more.
template <class... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) noexcept {
    std::uint64_t h = splitmix64(base);
    ((h = detail::mix_part(h, parts)), ...);
    return h;
}

/// Seeded generator with distribution helpers that do not depend on the
/// standard library's implementation-defined distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // rejection keeps the draw unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace lark
