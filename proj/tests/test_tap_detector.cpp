#include "test_util.hpp"
#include "twr/tap_detector.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace twr;

namespace {

GenParams once_params() {
    GenParams p;
    p.taps_per_window = 1;
    return p;
}

GestureTemplate once_template() {
    return build_template(tap_corpus(once_params(), 30, 101), 100, AxisRule::Mean);
}

// Writes the tap's values over the buffer samples ending at `end_t`.
AccelTrace embed(const AccelTrace& buffer, const AccelTrace& tap, Millis end_t) {
    std::vector<AccelSample> s(buffer.samples().begin(), buffer.samples().end());
    std::size_t end = 0;
    while (end < s.size() && s[end].t <= end_t)
        ++end;
    for (std::size_t k = 0; k < tap.size(); ++k) {
        auto& dst = s[end - tap.size() + k];
        dst = {dst.t, tap[k].ax, tap[k].ay, tap[k].az};
    }
    return AccelTrace(std::move(s));
}

AccelTrace fresh_tap(std::uint64_t index) {
    auto p = once_params();
    p.rng_seed = derive_seed(p.rng_seed, 77, index);
    return gen_tap_trace(p);
}

} // namespace

TEST(Pearson, KnownValues) {
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> up = {2, 4, 6, 8};
    const std::vector<double> down = {4, 3, 2, 1};
    EXPECT_NEAR(pearson(a, up), 1.0, 1e-12);
    EXPECT_NEAR(pearson(a, down), -1.0, 1e-12);
    const std::vector<double> s = {0, 1, 0, -1};
    const std::vector<double> c = {1, 0, -1, 0};
    EXPECT_NEAR(pearson(s, c), 0.0, 1e-12);
}

TEST(Pearson, ConstantSeriesScoresZero) {
    const std::vector<double> flat = {3, 3, 3, 3};
    const std::vector<double> a = {1, 2, 3, 4};
    EXPECT_EQ(pearson(flat, a), 0.0);
    EXPECT_EQ(pearson(a, flat), 0.0);
    EXPECT_EQ(pearson(flat, flat), 0.0);
}

TEST(Pearson, RejectsBadLengths) {
    const std::vector<double> a = {1, 2, 3};
    const std::vector<double> b = {1, 2};
    const std::vector<double> one = {1};
    EXPECT_THROW(pearson(a, b), std::invalid_argument);
    EXPECT_THROW(pearson(one, one), std::invalid_argument);
}

TEST(Pearson, SymmetricBoundedAndAffineInvariant) {
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto a = test::random_series(rng, 50);
        const auto b = test::random_series(rng, 50);
        const double c = pearson(a, b);
        EXPECT_LE(std::abs(c), 1.0);
        EXPECT_NEAR(c, pearson(b, a), 1e-12);
        EXPECT_NEAR(pearson(a, a), 1.0, 1e-9);
        std::vector<double> t = a;
        const double scale = rng.uniform(0.1, 10.0), shift = rng.uniform(-50.0, 50.0);
        for (auto& v : t)
            v = scale * v + shift;
        EXPECT_NEAR(pearson(t, b), c, 1e-9);
    }
}

TEST(CrossCorrelation, AxisRules) {
    const std::array<double, 3> c = {0.9, 0.3, 0.6};
    EXPECT_DOUBLE_EQ(combine_axes(c, AxisRule::Mean), (0.9 + 0.3 + 0.6) / 3.0);
    EXPECT_EQ(combine_axes(c, AxisRule::Min), 0.3);
    EXPECT_EQ(combine_axes(c, AxisRule::AllAxes), 0.3);
    EXPECT_EQ(parse_axis_rule("all-axes"), AxisRule::AllAxes);
    EXPECT_EQ(parse_axis_rule(to_string(AxisRule::Min)), AxisRule::Min);
    EXPECT_THROW(parse_axis_rule("max"), std::invalid_argument);
}

TEST(CrossCorrelation, MatchesOracle) {
    Rng rng(9);
    for (int k = 0; k < 200; ++k) {
        const auto a = test::random_trace(rng, 60);
        const auto b = test::random_trace(rng, 60);
        for (auto rule : {AxisRule::Mean, AxisRule::Min})
            EXPECT_NEAR(cross_correlation(a, b, rule), oracle::naive_cross_correlation(a, b, rule), 1e-9);
    }
}

TEST(CrossCorrelation, LengthMismatchThrows) {
    Rng rng(1);
    EXPECT_THROW(cross_correlation(test::random_trace(rng, 10), test::random_trace(rng, 11), AxisRule::Mean),
                 std::invalid_argument);
}

TEST(Threshold, MinimumPairwiseScore) {
    Rng rng(21);
    std::vector<AccelTrace> set;
    for (int k = 0; k < 6; ++k)
        set.push_back(test::random_trace(rng, 40));
    const auto m = oracle::brute_force_pair_matrix(set, AxisRule::Mean);
    double lo = 2.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j)
                lo = std::min(lo, m[i][j]);
    EXPECT_EQ(compute_threshold(set, AxisRule::Mean), lo);
    EXPECT_THROW(compute_threshold(std::span(set).first(1), AxisRule::Mean), std::invalid_argument);
}

TEST(Threshold, IdenticalTracesGiveOne) {
    Rng rng(2);
    const auto a = test::random_trace(rng, 30);
    const std::vector<AccelTrace> set = {a, a, a};
    EXPECT_NEAR(compute_threshold(set, AxisRule::Mean), 1.0, 1e-12);
}

TEST(Template, MedoidIsMostCentralTrace) {
    // Two near copies of one shape and an outlier: the medoid is one of the copies.
    Rng rng(4);
    const auto base = test::random_trace(rng, 50);
    std::vector<AccelSample> s(base.samples().begin(), base.samples().end());
    for (auto& x : s)
        x.ax += 0.01;
    const AccelTrace near(std::move(s));
    const auto outlier = test::random_trace(rng, 50);
    const std::vector<AccelTrace> set = {outlier, base, near};
    const auto t = build_template(set, 50, AxisRule::Mean);
    EXPECT_EQ(t.reference(), base);
    EXPECT_EQ(t.created_from(), 3u);
    EXPECT_EQ(t.threshold(), compute_threshold(set, AxisRule::Mean));
    EXPECT_NEAR(t.score(base), 1.0, 1e-12);
}

TEST(Template, RejectsBadConstruction) {
    Rng rng(8);
    const auto a = test::random_trace(rng, 20);
    EXPECT_THROW(GestureTemplate(a, 1.5, AxisRule::Mean, 2), std::invalid_argument);
    EXPECT_THROW(GestureTemplate(a, 0.5, AxisRule::Mean, 1), std::invalid_argument);
    const GestureTemplate t(a, 0.5, AxisRule::Mean, 2);
    EXPECT_THROW(t.score(test::random_trace(rng, 21)), std::invalid_argument);
}

TEST(Match, ThresholdIsInclusive) {
    Rng rng(12);
    const auto a = test::random_trace(rng, 40);
    const auto b = test::random_trace(rng, 40);
    const double s = cross_correlation(b, a, AxisRule::Mean);
    const GestureTemplate at(a, s, AxisRule::Mean, 2);
    EXPECT_TRUE(match(b, at).matched);
    const GestureTemplate above(a, std::nextafter(s, 2.0), AxisRule::Mean, 2);
    EXPECT_FALSE(match(b, above).matched);
}

TEST(Match, FreshTapsMatchAndNoiseDoesNot) {
    const auto t = once_template();
    int taps = 0;
    for (std::uint64_t i = 0; i < 20; ++i)
        taps += match(fresh_tap(i), t).matched ? 1 : 0;
    EXPECT_GE(taps, 18);

    // Pure noise around gravity: a sporadic false match is tolerated.
    Rng rng(99);
    int noise = 0;
    for (int k = 0; k < 100; ++k)
        noise += match(test::random_trace(rng, 101, 20), t).matched ? 1 : 0;
    EXPECT_LE(noise, 2);
}

TEST(Scan, RestStreamHasNoDetections) {
    const auto t = once_template();
    GenParams p;
    p.rng_seed = 555;
    EXPECT_TRUE(scan_stream(gen_rest_stream(10000, p), t, default_stride(t)).empty());
}

TEST(Scan, FindsOneAndTwoEmbeddedTaps) {
    const auto t = once_template();
    GenParams p;
    p.rng_seed = 556;
    const auto rest = gen_rest_stream(12000, p);

    const auto one = scan_stream(embed(rest, fresh_tap(1), 5000), t, default_stride(t));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_NEAR(static_cast<double>(rest[one[0].offset].t), 3000.0, 200.0);

    const auto two = scan_stream(embed(embed(rest, fresh_tap(2), 4000), fresh_tap(3), 10000), t, 1);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NEAR(static_cast<double>(rest[two[0].offset].t), 2000.0, 200.0);
    EXPECT_NEAR(static_cast<double>(rest[two[1].offset].t), 8000.0, 200.0);
}

TEST(Scan, WindowsIncludeTailAlignedWindow) {
    const auto t = once_template();
    GenParams p;
    const auto rest = gen_rest_stream(2500, p);
    const auto w = window_samples(rest, t);
    EXPECT_EQ(w, t.n());
    const auto scores = score_windows(rest, t, 10);
    ASSERT_FALSE(scores.empty());
    EXPECT_EQ(scores.front().offset, 0u);
    EXPECT_EQ(scores.back().offset, rest.size() - w);
    EXPECT_THROW(score_windows(gen_rest_stream(1000, p), t, 10), std::invalid_argument);
}
