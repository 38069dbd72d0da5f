#include "lark/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "lark/error.hpp"

namespace lark {

double BordaResult::score_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) return scores[i];
    }
    throw ValidationError(fmt::format("no score for '{}'", id));
}

namespace {

// Positional points (k - rank) for each profile, indexed [profile][member].
std::vector<std::vector<double>> positional_points(std::span<const RankingProfile> profiles,
                                                   std::span<const std::string> ids) {
    const std::size_t k = ids.size();
    if (k == 0) throw ValidationError("cannot score an empty population");
    if (profiles.empty()) throw ValidationError("no ranking profiles");
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < k; ++i) {
        if (!index.emplace(ids[i], i).second) throw ValidationError(fmt::format("duplicate strategy id '{}'", ids[i]));
    }
    std::vector<std::vector<double>> points(profiles.size(), std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        const auto& ranking = profiles[j].ranking;
        if (!is_permutation_of(ranking, ids))
            throw ValidationError(
                fmt::format("ranking of '{}' is not a permutation of the population", profiles[j].stakeholder_id));
        for (std::size_t pos = 0; pos < k; ++pos) {
            // rank is pos + 1
            points[j][index.at(ranking[pos])] = static_cast<double>(k - (pos + 1));
        }
    }
    return points;
}

BordaResult finish(std::span<const std::string> ids, std::vector<double> scores,
                   std::span<const std::size_t> token_counts) {
    BordaResult r;
    r.ids.assign(ids.begin(), ids.end());
    r.scores = std::move(scores);
    r.consensus_id = ids[argmax_with_tiebreak(r.scores, ids, token_counts)];
    r.cv = consensus_cv(r.scores);
    return r;
}

}  // namespace

BordaResult borda_scores(std::span<const RankingProfile> profiles, std::span<const double> weights,
                         std::span<const std::string> ids, std::span<const std::size_t> token_counts) {
    if (weights.size() != profiles.size())
        throw ValidationError(fmt::format("{} weights for {} profiles", weights.size(), profiles.size()));
    const auto points = positional_points(profiles, ids);
    std::vector<double> scores(ids.size(), 0.0);
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        if (!(weights[j] >= 0.0)) throw ValidationError("negative influence weight");
        for (std::size_t i = 0; i < ids.size(); ++i) scores[i] += weights[j] * points[j][i];
    }
    return finish(ids, std::move(scores), token_counts);
}

BordaResult average_scores(std::span<const RankingProfile> profiles, std::span<const std::string> ids,
                           std::span<const std::size_t> token_counts) {
    const auto points = positional_points(profiles, ids);
    std::vector<double> scores(ids.size(), 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        double sum = 0.0;
        for (const auto& row : points) sum += row[i];
        scores[i] = sum / static_cast<double>(profiles.size());
    }
    return finish(ids, std::move(scores), token_counts);
}

std::optional<double> consensus_cv(std::span<const double> scores) {
    if (scores.empty()) throw ValidationError("consensus_cv of an empty score vector");
    const double n = static_cast<double>(scores.size());
    double mean = 0.0;
    for (double b : scores) mean += b;
    mean /= n;
    if (mean == 0.0) return std::nullopt;
    double ss = 0.0;
    for (double b : scores) ss += (b - mean) * (b - mean);
    return std::sqrt(ss / n) / mean;
}

std::size_t argmax_with_tiebreak(std::span<const double> scores, std::span<const std::string> ids,
                                 std::span<const std::size_t> token_counts) {
    const bool use_tokens = token_counts.size() == scores.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] != scores[best]) {
            if (scores[i] > scores[best]) best = i;
            continue;
        }
        if (use_tokens && token_counts[i] != token_counts[best]) {
            if (token_counts[i] < token_counts[best]) best = i;
            continue;
        }
        if (ids[i] < ids[best]) best = i;
    }
    return best;
}

std::vector<std::string> repair_ranking(std::span<const std::string> raw, std::span<const std::string> population_ids,
                                        bool* repaired) {
    std::unordered_set<std::string_view> known(population_ids.begin(), population_ids.end());
    std::unordered_set<std::string_view> used;
    std::vector<std::string> out;
    out.reserve(population_ids.size());
    for (const auto& id : raw) {
        if (known.contains(id) && used.insert(id).second) out.push_back(id);
    }
    for (const auto& id : population_ids) {
        if (!used.contains(id)) out.push_back(id);
    }
    if (repaired) *repaired = !std::equal(out.begin(), out.end(), raw.begin(), raw.end());
    return out;
}

}  // namespace lark
