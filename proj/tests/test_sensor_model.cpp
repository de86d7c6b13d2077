#include "test_util.hpp"
#include "twr/sensor_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

using namespace twr;

namespace {

AccelTrace ramp(std::size_t n, Millis dt) {
    std::vector<AccelSample> s;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i);
        s.push_back({static_cast<Millis>(i) * dt, v, 2.0 * v, -v});
    }
    return AccelTrace(std::move(s));
}

std::size_t error_line(std::string_view text) {
    try {
        parse_accel_trace(text);
    } catch (const TraceError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST(SensorModel, ParsesCommentsLabelAndBlankLines) {
    const auto t = parse_accel_trace("# label: tap\n\n0,1,2,3\n  10, +4, 5e0 ,-6 \n# trailing\n");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.label(), "tap");
    EXPECT_EQ(t[1].t, 10);
    EXPECT_EQ(t[1].ax, 4.0);
    EXPECT_EQ(t[1].ay, 5.0);
    EXPECT_EQ(t[1].az, -6.0);
    EXPECT_EQ(t.span_ms(), 10);
    EXPECT_EQ(t.axis(Axis::Z), (std::vector<double>{3.0, -6.0}));
}

TEST(SensorModel, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("0,1,2,3\n10,1,2\n"), 2u);
    EXPECT_EQ(error_line("0,1,2,3\n10,1,x,3\n"), 2u);
    EXPECT_EQ(error_line("# c\n0,1,2,3\n0,1,2,3\n"), 3u);
    EXPECT_EQ(error_line("0,1,2,3\n10,+-1,2,3\n"), 2u);
    EXPECT_EQ(error_line("0,1,2,3\n10,nan,2,3\n"), 2u);
    EXPECT_THROW(parse_accel_trace("# only a comment\n"), TraceError);
    EXPECT_THROW(parse_accel_trace("0,1,2,3\n"), TraceError);
}

TEST(SensorModel, ProxParsing) {
    const auto p = parse_prox_trace("0,5\n150,0\n300,5\n");
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[1].value, 0.0);
    try {
        parse_prox_trace("0,5\n10,-1\n");
        FAIL() << "negative value accepted";
    } catch (const TraceError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_prox_trace("0,5\n0,4\n"), TraceError);
}

TEST(SensorModel, ConstructorValidates) {
    EXPECT_THROW(AccelTrace({{0, 0, 0, 0}}), TraceError);
    EXPECT_THROW(AccelTrace({{10, 0, 0, 0}, {5, 0, 0, 0}}), TraceError);
    EXPECT_THROW(ProxTrace({}), TraceError);
}

TEST(SensorModel, FormatParseRoundTripIsExact) {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        const auto a = test::random_trace(rng, 2 + static_cast<std::size_t>(rng.uniform_int(0, 200)));
        const auto b = parse_accel_trace(format_accel_trace(a));
        EXPECT_EQ(a, b);
    }
    const ProxTrace p({{0, 5.0}, {33, 0.1 + 0.2}, {70, 0.0}}, "wave");
    const auto q = parse_prox_trace(format_prox_trace(p));
    EXPECT_EQ(q.label(), "wave");
    ASSERT_EQ(q.size(), 3u);
    EXPECT_EQ(q[1].value, 0.1 + 0.2);
}

TEST(SensorModel, SaveLoadFiles) {
    test::TempDir dir("sensor");
    Rng rng(3);
    const auto a = test::random_trace(rng, 40);
    save_accel_trace(a, dir.file("a.csv"));
    EXPECT_EQ(load_accel_trace(dir.file("a.csv")), a);
    EXPECT_THROW(load_accel_trace(dir.file("missing.csv")), TraceError);
    {
        std::ofstream(dir.file("bad.csv")) << "0,1,2,3\n10,1,2\n";
    }
    try {
        load_accel_trace(dir.file("bad.csv"));
        FAIL() << "bad file accepted";
    } catch (const TraceError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(std::string(e.what()), dir.file("bad.csv") + ":2: " + e.detail());
    }
}

TEST(SensorModel, ResampleLinearRamp) {
    // 0..100 ms at 10 ms onto 5 points: 0, 25, 50, 75, 100.
    const auto r = resample(ramp(11, 10), 5);
    ASSERT_EQ(r.size(), 5u);
    const Millis ts[] = {0, 25, 50, 75, 100};
    const double xs[] = {0.0, 2.5, 5.0, 7.5, 10.0};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(r[i].t, ts[i]);
        EXPECT_DOUBLE_EQ(r[i].ax, xs[i]);
        EXPECT_DOUBLE_EQ(r[i].ay, 2.0 * xs[i]);
    }
}

TEST(SensorModel, ResampleRoundsGridToIntegerMillis) {
    // span 10 over 3 intervals: 0, 3.33 -> 3, 6.67 -> 7, 10.
    const auto r = resample(ramp(11, 1), 4);
    EXPECT_EQ(r[1].t, 3);
    EXPECT_EQ(r[2].t, 7);
    EXPECT_EQ(r[3].t, 10);
}

TEST(SensorModel, ResampleRejectsTooShortSpan) {
    EXPECT_THROW(resample(ramp(5, 1), 10), std::invalid_argument);
    EXPECT_THROW(resample(ramp(5, 10), 1), std::invalid_argument);
}

TEST(SensorModel, ResampleStaysWithinRangeAndIsIdempotent) {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        std::vector<AccelSample> s;
        Millis t = 0;
        const auto len = static_cast<std::size_t>(rng.uniform_int(2, 300));
        for (std::size_t i = 0; i < len; ++i) {
            s.push_back({t, rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3)});
            t += rng.uniform_int(1, 40);
        }
        const AccelTrace a(std::move(s));
        const auto n = static_cast<std::size_t>(rng.uniform_int(2, std::min<Millis>(200, a.span_ms() + 1)));
        const auto r = resample(a, n);
        ASSERT_EQ(r.size(), n);
        EXPECT_EQ(r.front().t, a.front().t);
        EXPECT_EQ(r.back().t, a.back().t);
        for (auto axis : {Axis::X, Axis::Y, Axis::Z}) {
            const auto src = a.axis(axis);
            const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
            for (double v : r.axis(axis)) {
                EXPECT_GE(v, *lo);
                EXPECT_LE(v, *hi);
            }
        }
        EXPECT_EQ(resample(r, n), r);
    }
}

TEST(SensorModel, SliceIsInclusive) {
    const auto a = ramp(11, 10);
    const auto s = slice(a, 20, 50);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->front().t, 20);
    EXPECT_EQ(s->back().t, 50);
    EXPECT_EQ(s->size(), 4u);
    EXPECT_FALSE(slice(a, 21, 29));
    EXPECT_FALSE(slice(a, 95, 200));
}
