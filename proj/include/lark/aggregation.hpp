#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lark/model.hpp"

namespace lark {

/// Influence-weighted Borda outcome. `ids` fixes the order of `scores`.
struct BordaResult {
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::string consensus_id;
    std::optional<double> cv;  // nullopt when the mean score is zero

    double score_of(std::string_view id) const;
};

/// B(x) = sum_j w_j * (k - rank_j(x)), rank 1-based.
///
/// `ids` is the population order; every profile must be a permutation of it.
/// `token_counts` (parallel to `ids`) feeds the argmax tie-break: lower token
/// count first, then lexicographically smaller id. Pass an empty span to
/// break ties by id only. Throws ValidationError on mismatched id sets, k = 0,
/// or a weight vector that does not match the profile count.
BordaResult borda_scores(std::span<const RankingProfile> profiles, std::span<const double> weights,
                         std::span<const std::string> ids, std::span<const std::size_t> token_counts = {});

/// Unweighted mean of positional points across stakeholders. Used when ranked
/// choice is ablated; identical to Borda with uniform weights.
BordaResult average_scores(std::span<const RankingProfile> profiles, std::span<const std::string> ids,
                           std::span<const std::size_t> token_counts = {});

/// Population standard deviation over mean. nullopt when the mean is zero.
/// Throws ValidationError on an empty vector.
std::optional<double> consensus_cv(std::span<const double> scores);

/// Index of the best entry: highest score, then lower token count, then smaller id.
std::size_t argmax_with_tiebreak(std::span<const double> scores, std::span<const std::string> ids,
                                 std::span<const std::size_t> token_counts);

/// Forces a ranked id list into a permutation of `population_ids`: keeps the
/// first occurrence of each known id, drops unknown ids, then appends the
/// missing ids in population order. `repaired` is set when anything changed.
std::vector<std::string> repair_ranking(std::span<const std::string> raw, std::span<const std::string> population_ids,
                                        bool* repaired = nullptr);

}  // namespace lark
