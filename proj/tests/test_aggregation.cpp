#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lark/aggregation.hpp"
#include "lark/error.hpp"
#include "lark/fitness.hpp"
#include "lark/rng.hpp"

using namespace lark;

namespace {

std::vector<std::string> letters(std::size_t k) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < k; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)));
    return ids;
}

// Scans every (stakeholder, position) cell looking for the candidate.
std::vector<double> naive_borda(const std::vector<RankingProfile>& profiles, const std::vector<double>& w,
                                const std::vector<std::string>& ids) {
    const std::size_t k = ids.size();
    std::vector<double> out(k, 0.0);
    for (std::size_t x = 0; x < k; ++x) {
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            for (std::size_t pos = 0; pos < k; ++pos) {
                if (profiles[j].ranking[pos] == ids[x]) out[x] += w[j] * static_cast<double>(k - 1 - pos);
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("borda single voter") {
    const std::vector<std::string> ids{"x1", "x2"};
    const std::vector<RankingProfile> p{{"s1", {"x1", "x2"}}};
    const std::vector<double> w{1.0};
    const auto r = borda_scores(p, w, ids);
    CHECK(r.scores == std::vector<double>{1.0, 0.0});
    CHECK(r.consensus_id == "x1");
}

TEST_CASE("borda two voters with equal weight") {
    const auto ids = letters(3);
    const std::vector<RankingProfile> p{{"s1", {"a", "b", "c"}}, {"s2", {"b", "a", "c"}}};
    const std::vector<double> w{0.5, 0.5};
    const auto r = borda_scores(p, w, ids);
    CHECK(r.scores == std::vector<double>{1.5, 1.5, 0.0});
    // tie on score and no token counts: smaller id wins
    CHECK(r.consensus_id == "a");
    const std::vector<std::size_t> tokens{20, 10, 5};
    CHECK(borda_scores(p, w, ids, tokens).consensus_id == "b");
}

TEST_CASE("identical rankings give the single-voter vector") {
    const auto ids = letters(4);
    const std::vector<RankingProfile> p{{"s1", {"c", "a", "d", "b"}}, {"s2", {"c", "a", "d", "b"}},
                                        {"s3", {"c", "a", "d", "b"}}};
    const std::vector<double> w{0.25, 0.5, 0.25};
    const auto r = borda_scores(p, w, ids);
    CHECK(r.score_of("c") == 3.0);
    CHECK(r.score_of("a") == 2.0);
    CHECK(r.score_of("d") == 1.0);
    CHECK(r.score_of("b") == 0.0);
}

TEST_CASE("borda matches the brute-force scorer on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 1 + rng.below(6);
        const std::size_t m = 1 + rng.below(5);
        const auto ids = letters(k);
        std::vector<double> raw(m);
        for (auto& x : raw) x = 0.1 + rng.uniform();
        const auto w = normalize_weights(raw);
        std::vector<RankingProfile> p;
        for (std::size_t j = 0; j < m; ++j) {
            auto r = ids;
            rng.shuffle(r);
            p.push_back({"s" + std::to_string(j), r});
        }
        const auto got = borda_scores(p, w, ids);
        const auto want = naive_borda(p, w, ids);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(std::abs(got.scores[i] - want[i]) <= 1e-12);
            total += got.scores[i];
        }
        CHECK(total == doctest::Approx(static_cast<double>(k * (k - 1)) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("borda rejects malformed profiles") {
    const auto ids = letters(3);
    const std::vector<double> w{1.0};
    CHECK_THROWS_AS(borda_scores(std::vector<RankingProfile>{{"s1", {"a", "a", "c"}}}, w, ids), ValidationError);
    CHECK_THROWS_AS(borda_scores(std::vector<RankingProfile>{{"s1", {"a", "b"}}}, w, ids), ValidationError);
    const std::vector<double> two{0.5, 0.5};
    CHECK_THROWS_AS(borda_scores(std::vector<RankingProfile>{{"s1", {"a", "b", "c"}}}, two, ids), ValidationError);
}

TEST_CASE("consensus cv") {
    const std::vector<double> flat{5, 5, 5};
    CHECK(consensus_cv(flat) == 0.0);
    const std::vector<double> two{1, 3};
    CHECK(consensus_cv(two) == 0.5);
    const std::vector<double> zeros{0, 0};
    CHECK_FALSE(consensus_cv(zeros).has_value());
    const std::vector<double> scaled{3, 9};
    CHECK(*consensus_cv(scaled) == doctest::Approx(0.5));
}

TEST_CASE("average scores ablation") {
    const auto ids = letters(3);
    const std::vector<RankingProfile> p{{"s1", {"a", "b", "c"}}, {"s2", {"b", "a", "c"}}};
    CHECK(average_scores(p, ids, {}).scores == std::vector<double>{1.5, 1.5, 0.0});

    const std::vector<RankingProfile> skew{{"s1", {"a", "b", "c"}}, {"s2", {"b", "c", "a"}}};
    const std::vector<double> w{0.9, 0.1};
    const auto weighted = borda_scores(skew, w, ids);
    const auto averaged = average_scores(skew, ids, {});
    CHECK(weighted.score_of("a") == doctest::Approx(1.8));
    CHECK(averaged.score_of("a") == 1.0);
    CHECK(weighted.consensus_id == "a");
    CHECK(averaged.consensus_id != weighted.consensus_id);

    const std::vector<RankingProfile> one{{"s1", {"b", "c", "a"}}};
    const std::vector<double> unit{1.0};
    CHECK(average_scores(one, ids, {}).scores == borda_scores(one, unit, ids).scores);
}

TEST_CASE("argmax tie-break order") {
    const std::vector<std::string> ids{"g1-02", "g1-01", "g1-03"};
    const std::vector<double> s{2.0, 2.0, 1.0};
    CHECK(argmax_with_tiebreak(s, ids, {}) == 1);
    const std::vector<std::size_t> t{5, 9, 1};
    CHECK(argmax_with_tiebreak(s, ids, t) == 0);
}

TEST_CASE("ranking repair keeps first occurrences then appends the rest") {
    const std::vector<std::string> ids{"a", "b", "c"};
    bool repaired = false;
    CHECK(repair_ranking(std::vector<std::string>{"a", "a", "c"}, ids, &repaired) ==
          std::vector<std::string>{"a", "c", "b"});
    CHECK(repaired);
    CHECK(repair_ranking(std::vector<std::string>{"zz", "c"}, ids, &repaired) == std::vector<std::string>{"c", "a", "b"});
    CHECK(repaired);
    CHECK(repair_ranking(std::vector<std::string>{"b", "c", "a"}, ids, &repaired) ==
          std::vector<std::string>{"b", "c", "a"});
    CHECK_FALSE(repaired);
    CHECK(repair_ranking(std::vector<std::string>{}, ids, &repaired) == ids);
}

TEST_CASE("token penalty") {
    CHECK(compute_adjusted(10, 100, 100, 0.7).value == 10.0);
    CHECK_FALSE(compute_adjusted(10, 100, 100, 0.7).penalized);
    CHECK(compute_adjusted(10, 150, 100, 0.5).value == 7.5);
    CHECK(compute_adjusted(10, 150, 100, 0.5).penalized);
    const auto clamped = compute_adjusted(10, 500, 100, 1.0);
    CHECK(clamped.value == 0.0);
    CHECK(clamped.clamped);
    CHECK(compute_adjusted(10, 50, 100, 1.0).value == 10.0);
    CHECK(compute_adjusted(0, 500, 100, 1.0).value == 0.0);
    CHECK_THROWS_AS(compute_adjusted(10, 10, 0, 0.5), ValidationError);
    CHECK_THROWS_AS(compute_adjusted(10, 10, 10, 1.5), ValidationError);
    CHECK_THROWS_AS(compute_adjusted(-1, 10, 10, 0.5), ValidationError);
}

TEST_CASE("duplication probability is a logistic in z") {
    CHECK(duplication_probability(3.0, 3.0, 0.7) == 0.5);
    const double up = duplication_probability(4.0, 3.0, 1.0);
    const double down = duplication_probability(2.0, 3.0, 1.0);
    CHECK(up == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    CHECK(down == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    CHECK(up + down == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(duplication_probability(-1e6, 0.0, 1e-3) == 0.0);
    CHECK(duplication_probability(1e6, 0.0, 1e-3) == 1.0);
    CHECK_THROWS_AS(duplication_probability(1, 1, 0.0), ValidationError);
}

TEST_CASE("adaptive tau") {
    const std::vector<double> r{1, 5, 3};
    CHECK(adaptive_tau(r) == doctest::Approx(0.25 * (4 + 1e-9)));
    const std::vector<double> same{2, 2};
    CHECK(adaptive_tau(same) > 0.0);
}

TEST_CASE("efficiency") {
    const std::vector<double> b{10, 20};
    const std::vector<std::size_t> t{100, 200};
    CHECK(efficiency(b, t) == doctest::Approx(0.1));
    const std::vector<std::size_t> doubled{200, 400};
    CHECK(efficiency(b, doubled) == doctest::Approx(0.05));
    const std::vector<double> zero{0};
    const std::vector<std::size_t> one{10};
    CHECK(efficiency(zero, one) == 0.0);
    const std::vector<double> b2{4, 6};
    const std::vector<std::size_t> t0{0, 3};
    CHECK(efficiency(b2, t0) == doctest::Approx(2.0));
    const std::vector<std::size_t> all0{0, 0};
    CHECK(efficiency(b2, all0) == 0.0);
}
