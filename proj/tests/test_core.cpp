#include "cdri/core.hpp"

#include "cdri/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cdri;
using testutil::make_record;
using testutil::uniform_record;

namespace {

std::array<ParameterScore, 5> params(const std::array<double, 5>& scores,
                                     const std::array<double, 5>& weights) {
    std::array<ParameterScore, 5> out{};
    for (int p = 0; p < 5; ++p) {
        out[static_cast<std::size_t>(p)] =
            ParameterScore{p + 1, scores[static_cast<std::size_t>(p)],
                           weights[static_cast<std::size_t>(p)]};
    }
    return out;
}

} // namespace

TEST_CASE("dimension tokens and display names follow the canonical order") {
    CHECK(dimension_token(Dimension::Physical) == "physical");
    CHECK(dimension_token(Dimension::NaturalHealth) == "natural_health");
    CHECK(dimension_display_name(Dimension::Organizational) == "Organizational");
    CHECK(dimension_display_name(Dimension::NaturalHealth) == "Natural/Health");
    CHECK(dimension_from_token("ECONOMIC") == Dimension::Economic);
    CHECK(dimension_from_token("Natural_Health") == Dimension::NaturalHealth);
    CHECK_FALSE(dimension_from_token("hydrological").has_value());
    CHECK(kDimensions.size() == 5);
}

TEST_CASE("dimension_score: constant input") {
    auto p = params({3, 3, 3, 3, 3}, {0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK(dimension_score(p) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("dimension_score: hand-summed weighted mean") {
    // 0.4*5 + 0.3*4 + 0.15*3 + 0.1*2 + 0.05*1 = 2 + 1.2 + 0.45 + 0.2 + 0.05
    auto p = params({5, 4, 3, 2, 1}, {0.4, 0.3, 0.15, 0.1, 0.05});
    CHECK(dimension_score(p) == doctest::Approx(3.9).epsilon(1e-12));
}

TEST_CASE("dimension_score: lower bound") {
    auto p = params({1, 1, 1, 1, 1}, {0.1, 0.2, 0.3, 0.25, 0.15});
    CHECK(dimension_score(p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dimension_score rejects bad input") {
    auto p = params({3, 3, 3, 3, 3}, {0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK_THROWS_AS(dimension_score(std::span<const ParameterScore>(p.data(), 4)),
                    std::invalid_argument);
    auto bad = params({3, 3, 3, 3, 3}, {0.4, 0.2, 0.2, 0.2, 0.2});
    CHECK_THROWS_AS(dimension_score(bad), std::invalid_argument);
}

TEST_CASE("dimension_score equals the arithmetic mean under equal weights") {
    Pcg32 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 5> scores{};
        double mean = 0.0;
        for (auto& s : scores) {
            s = rng.uniform(1.0, 5.0);
            mean += s;
        }
        mean /= 5.0;
        auto p = params(scores, {0.2, 0.2, 0.2, 0.2, 0.2});
        CHECK(dimension_score(p) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("dimension_score is monotone in each score") {
    Pcg32 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 5> scores{};
        std::array<double, 5> weights{};
        double wsum = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            scores[i] = rng.uniform(1.0, 4.0);
            weights[i] = rng.uniform(0.1, 1.0);
            wsum += weights[i];
        }
        for (auto& w : weights) w /= wsum;
        double base = dimension_score(params(scores, weights));
        auto bump = scores;
        std::size_t which = rng.bounded(5);
        bump[which] += rng.uniform(0.0, 1.0);
        CHECK(dimension_score(params(bump, weights)) >= base);
    }
}

TEST_CASE("dimension_score is invariant under simultaneous permutation") {
    Pcg32 rng(13);
    std::array<double, 5> scores{};
    std::array<double, 5> weights{};
    double wsum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        scores[i] = rng.uniform(1.0, 5.0);
        weights[i] = rng.uniform(0.1, 1.0);
        wsum += weights[i];
    }
    for (auto& w : weights) w /= wsum;
    double base = dimension_score(params(scores, weights));

    std::array<std::size_t, 5> perm = {2, 0, 4, 1, 3};
    std::array<double, 5> ps{};
    std::array<double, 5> pw{};
    for (std::size_t i = 0; i < 5; ++i) {
        ps[i] = scores[perm[i]];
        pw[i] = weights[perm[i]];
    }
    CHECK(dimension_score(params(ps, pw)) == doctest::Approx(base).epsilon(1e-12));

    // Reordering the list without reassigning parameter ids changes nothing at all.
    auto p = params(scores, weights);
    std::array<ParameterScore, 5> shuffled = {p[3], p[0], p[4], p[2], p[1]};
    CHECK(dimension_score(shuffled) == dimension_score(p));
}

TEST_CASE("expert_vector: uniform scores") {
    std::vector<AssessmentRecord> recs;
    for (Dimension d : kDimensions) {
        recs.push_back(uniform_record("E1", 2013, d, 4.0));
    }
    ResilienceVector v = expert_vector(recs);
    CHECK(v.provenance == Provenance::ExpertLevel);
    CHECK(v.year == 2013);
    for (double s : v.scores) {
        CHECK(s == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("expert_vector: one strong dimension lands in canonical slot") {
    std::vector<AssessmentRecord> recs;
    for (Dimension d : kDimensions) {
        recs.push_back(uniform_record("E1", 2016, d, d == Dimension::Physical ? 5.0 : 2.0));
    }
    ResilienceVector v = expert_vector(recs);
    CHECK(v.scores[0] == doctest::Approx(5.0));
    for (std::size_t i = 1; i < 5; ++i) {
        CHECK(v.scores[i] == doctest::Approx(2.0));
    }
}

TEST_CASE("expert_vector matches per-dimension dimension_score") {
    Pcg32 rng(21);
    std::vector<AssessmentRecord> recs;
    std::array<double, 5> expected{};
    for (std::size_t d = 0; d < 5; ++d) {
        std::array<double, 5> scores{};
        std::array<double, 5> weights{};
        double wsum = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            scores[i] = rng.uniform(1.0, 5.0);
            weights[i] = rng.uniform(0.2, 1.0);
            wsum += weights[i];
        }
        for (auto& w : weights) w /= wsum;
        recs.push_back(make_record("E1", 2019, kDimensions[d], scores, weights));
        expected[d] = dimension_score(recs.back().parameters);
    }
    ResilienceVector v = expert_vector(recs);
    for (std::size_t d = 0; d < 5; ++d) {
        CHECK(v.scores[d] == expected[d]);
    }
}

TEST_CASE("expert_vector rejects missing and duplicate dimensions") {
    std::vector<AssessmentRecord> recs;
    for (Dimension d : kDimensions) {
        recs.push_back(uniform_record("E1", 2013, d, 3.0));
    }
    recs.pop_back();
    CHECK_THROWS_AS(expert_vector(recs), std::invalid_argument);
    recs.push_back(uniform_record("E1", 2013, Dimension::Physical, 3.0));
    CHECK_THROWS_AS(expert_vector(recs), std::invalid_argument);
}

TEST_CASE("aggregate_experts: midpoint and identity") {
    std::vector<AssessmentRecord> recs;
    for (Dimension d : kDimensions) {
        recs.push_back(uniform_record("A", 2013, d, 3.0));
        recs.push_back(uniform_record("B", 2013, d, 5.0));
    }
    PanelDataset ds = PanelDataset::from_records(recs);
    ResilienceVector v = aggregate_experts(ds, 2013);
    CHECK(v.provenance == Provenance::Aggregate);
    for (double s : v.scores) {
        CHECK(s == doctest::Approx(4.0).epsilon(1e-12));
    }

    std::vector<AssessmentRecord> single;
    for (Dimension d : kDimensions) {
        single.push_back(uniform_record("A", 2013, d, 2.5));
    }
    PanelDataset one = PanelDataset::from_records(single);
    ResilienceVector sv = aggregate_experts(one, 2013);
    ResilienceVector ev = expert_vector(one.records());
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(sv.scores[i] == ev.scores[i]);
    }

    CHECK_THROWS_AS(aggregate_experts(ds, 1999), std::invalid_argument);
}

TEST_CASE("aggregate_experts matches an independent summation oracle") {
    Pcg32 rng(31);
    std::vector<AssessmentRecord> recs;
    for (int e = 0; e < 11; ++e) {
        for (Dimension d : kDimensions) {
            std::array<double, 5> scores{};
            std::array<double, 5> weights{};
            double wsum = 0.0;
            for (std::size_t i = 0; i < 5; ++i) {
                scores[i] = rng.uniform(1.0, 5.0);
                weights[i] = rng.uniform(0.2, 1.0);
                wsum += weights[i];
            }
            for (auto& w : weights) w /= wsum;
            recs.push_back(make_record("X" + std::to_string(e), 2013, d, scores, weights));
        }
    }
    PanelDataset ds = PanelDataset::from_records(recs);
    ResilienceVector agg = aggregate_experts(ds, 2013);

    // Oracle: recompute per dimension straight from the raw records.
    for (std::size_t d = 0; d < 5; ++d) {
        double total = 0.0;
        int count = 0;
        for (const std::string& expert : ds.experts()) {
            auto pair = ds.pair_records(expert, 2013);
            for (const AssessmentRecord& rec : pair) {
                if (rec.dimension != kDimensions[d]) continue;
                double s = 0.0;
                for (const ParameterScore& p : rec.parameters) {
                    s += p.weight * p.score;
                }
                total += s;
                ++count;
            }
        }
        CHECK(count == 11);
        CHECK(agg.scores[d] == doctest::Approx(total / 11.0).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_experts is invariant under input record order") {
    Pcg32 rng(37);
    std::vector<AssessmentRecord> recs;
    for (int e = 0; e < 5; ++e) {
        for (Dimension d : kDimensions) {
            recs.push_back(uniform_record("E" + std::to_string(e), 2013, d,
                                          1.0 + 4.0 * rng.next_double()));
        }
    }
    PanelDataset sorted_ds = PanelDataset::from_records(recs);

    // shuffle
    for (std::size_t i = recs.size(); i > 1; --i) {
        std::swap(recs[i - 1], recs[rng.bounded(static_cast<std::uint32_t>(i))]);
    }
    PanelDataset shuffled_ds = PanelDataset::from_records(recs);

    ResilienceVector a = aggregate_experts(sorted_ds, 2013);
    ResilienceVector b = aggregate_experts(shuffled_ds, 2013);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.scores[i] == b.scores[i]); // bitwise
    }
}

TEST_CASE("overall_cdri basics") {
    ResilienceVector v;
    v.scores = {4, 4, 4, 4, 4};
    CHECK(overall_cdri(v, kEqualDimensionWeights) == doctest::Approx(4.0).epsilon(1e-12));

    ResilienceVector w;
    w.scores = {5, 1, 1, 1, 1};
    CHECK(overall_cdri(w, {1, 0, 0, 0, 0}) == doctest::Approx(5.0));

    CHECK_THROWS_AS(overall_cdri(v, {0.3, 0.3, 0.3, 0.3, 0.3}), std::invalid_argument);
}

TEST_CASE("overall_cdri of the reference linear-regression row, hand-summed") {
    ResilienceVector v;
    v.scores = {4.03092, 4.47864, 2.02203, 2.85259, 2.75703};
    // (4.03092+4.47864+2.02203+2.85259+2.75703)/5 = 16.14121/5
    CHECK(overall_cdri(v, kEqualDimensionWeights) == doctest::Approx(3.228242).epsilon(1e-9));
}

TEST_CASE("overall_cdri with equal weights fixes constant vectors") {
    Pcg32 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        double c = rng.uniform(1.0, 5.0);
        ResilienceVector v;
        v.scores = {c, c, c, c, c};
        CHECK(overall_cdri(v, kEqualDimensionWeights) == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("PanelDataset validation") {
    std::vector<AssessmentRecord> recs;
    for (Dimension d : kDimensions) {
        recs.push_back(uniform_record("E1", 2013, d, 3.0));
    }

    SUBCASE("accepts a complete pair") {
        PanelDataset ds = PanelDataset::from_records(recs);
        CHECK(ds.records().size() == 5);
        CHECK(ds.experts() == std::vector<std::string>{"E1"});
        CHECK(ds.years() == std::vector<int>{2013});
        CHECK(ds.has_pair("E1", 2013));
        CHECK_FALSE(ds.has_pair("E1", 2016));
    }
    SUBCASE("rejects incomplete pairs") {
        recs.pop_back();
        CHECK_THROWS_AS(PanelDataset::from_records(recs), std::invalid_argument);
    }
    SUBCASE("rejects duplicates") {
        recs.push_back(uniform_record("E1", 2013, Dimension::Social, 3.0));
        CHECK_THROWS_AS(PanelDataset::from_records(recs), std::invalid_argument);
    }
    SUBCASE("rejects out-of-range scores") {
        recs[0].parameters[0].score = 5.5;
        CHECK_THROWS_AS(PanelDataset::from_records(recs), std::invalid_argument);
    }
    SUBCASE("rejects bad weight sums") {
        recs[0].parameters[0].weight = 0.5;
        CHECK_THROWS_AS(PanelDataset::from_records(recs), std::invalid_argument);
    }
    SUBCASE("years and experts are sorted") {
        for (Dimension d : kDimensions) {
            recs.push_back(uniform_record("A9", 2010, d, 3.0));
        }
        PanelDataset ds = PanelDataset::from_records(recs);
        CHECK(ds.years() == std::vector<int>{2010, 2013});
        CHECK(ds.experts() == std::vector<std::string>{"A9", "E1"});
    }
}
