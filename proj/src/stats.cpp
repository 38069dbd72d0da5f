#include "lark/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "lark/error.hpp"

namespace lark::stats {

double mean(std::span<const double> values) {
    if (values.empty()) throw ValidationError("mean of an empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) throw ValidationError("sample standard deviation needs n >= 2");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<double> signed_rank_magnitudes(std::span<const double> nonzero) {
    const std::size_t n = nonzero.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(nonzero[a]) < std::abs(nonzero[b]); });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) ++j;
        // positions i..j share the average of ranks i+1..j+1
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t q = i; q <= j; ++q) ranks[order[q]] = avg;
        i = j + 1;
    }
    return ranks;
}

double wilcoxon_exact_p(std::span<const double> ranks, double w_plus) {
    // Doubled ranks are integers even with average ranks, so the null
    // distribution of 2*W+ can be counted exactly over all 2^n sign patterns.
    std::vector<long long> doubled;
    long long total = 0;
    for (double r : ranks) {
        doubled.push_back(std::llround(2.0 * r));
        total += doubled.back();
    }
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    long long reach = 0;
    for (long long r : doubled) {
        for (long long s = reach; s >= 0; --s) {
            if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
        }
        reach += r;
    }
    const long long observed = std::llround(2.0 * w_plus);
    const long long w = std::min(observed, total - observed);
    double tail = 0.0;
    for (long long s = 0; s <= w; ++s) tail += counts[static_cast<std::size_t>(s)];
    const double patterns = std::ldexp(1.0, static_cast<int>(ranks.size()));
    return std::min(1.0, 2.0 * tail / patterns);
}

double wilcoxon_normal_p(std::span<const double> ranks, double w_plus) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double r : ranks) {
        sum += r;
        sum_sq += r * r;
    }
    // Var(W+) = sum r^2 / 4 already carries the tie correction.
    const double mu = sum / 2.0;
    const double sd = std::sqrt(sum_sq / 4.0);
    if (sd == 0.0) return 1.0;
    const double z = std::max(0.0, std::abs(w_plus - mu) - 0.5) / sd;
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
    if (differences.empty()) throw ValidationError("wilcoxon_signed_rank needs at least one difference");
    std::vector<double> nonzero;
    for (double d : differences) {
        if (d != 0.0) nonzero.push_back(d);
    }
    WilcoxonResult r;
    r.n_effective = nonzero.size();
    if (nonzero.empty()) {
        r.degenerate = true;
        r.p = 1.0;
        return r;
    }
    const auto ranks = signed_rank_magnitudes(nonzero);
    for (std::size_t i = 0; i < nonzero.size(); ++i) (nonzero[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
    r.w = std::min(r.w_plus, r.w_minus);
    r.exact = r.n_effective <= kExactWilcoxonMaxN;
    r.p = r.exact ? wilcoxon_exact_p(ranks, r.w_plus) : wilcoxon_normal_p(ranks, r.w_plus);
    return r;
}

std::optional<double> cohens_dz(std::span<const double> differences) {
    if (differences.size() < 2) return std::nullopt;
    const double sd = sample_sd(differences);
    if (sd == 0.0) return std::nullopt;
    return mean(differences) / sd;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-values must lie in [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double scaled = std::min(1.0, static_cast<double>(m - i) * p_values[order[i]]);
        running = std::max(running, scaled);
        adjusted[order[i]] = running;
    }
    return adjusted;
}

double normal_two_sided_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - (1.0 - level) / 2.0);
}

MeanCI mean_ci(std::span<const double> values, double level) {
    MeanCI ci;
    ci.mean = mean(values);
    if (values.size() < 2) return ci;
    const double half = normal_two_sided_quantile(level) * sample_sd(values) / std::sqrt(static_cast<double>(values.size()));
    ci.lower = ci.mean - half;
    ci.upper = ci.mean + half;
    return ci;
}

std::vector<std::vector<double>> per_round_ranks(const std::vector<std::vector<double>>& scores) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> ranks(scores.size());
    if (scores.empty()) return ranks;
    const std::size_t rounds = scores.front().size();
    for (auto& row : ranks) row.assign(rounds, nan);
    for (const auto& row : scores) {
        if (row.size() != rounds) throw ValidationError("score matrix rows differ in length");
    }
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<std::size_t> present;
        for (std::size_t s = 0; s < scores.size(); ++s) {
            if (!std::isnan(scores[s][r])) present.push_back(s);
        }
        std::sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) { return scores[a][r] > scores[b][r]; });
        std::size_t i = 0;
        while (i < present.size()) {
            std::size_t j = i;
            while (j + 1 < present.size() && scores[present[j + 1]][r] == scores[present[i]][r]) ++j;
            const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t q = i; q <= j; ++q) ranks[present[q]][r] = avg;
            i = j + 1;
        }
    }
    return ranks;
}

}  // namespace lark::stats
