#include "test_util.hpp"
#include "twr/prox_detector.hpp"

#include <gtest/gtest.h>

using namespace twr;

namespace {

std::vector<UnlockWindow> feed(ProxDetector& d, const std::vector<Millis>& changes) {
    std::vector<UnlockWindow> out;
    for (auto t : changes)
        if (auto w = d.on_change(t))
            out.push_back(*w);
    return out;
}

std::vector<Millis> every(Millis step, int count, Millis from = 0) {
    std::vector<Millis> v;
    for (int i = 0; i < count; ++i)
        v.push_back(from + step * i);
    return v;
}

} // namespace

TEST(ProxDetector, SixFastChangesUnlock) {
    ProxDetector d;
    const auto w = feed(d, every(200, 6));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].start, 1000);
    EXPECT_EQ(w[0].end, 2000);
    EXPECT_TRUE(d.is_unlocked(1000));
    EXPECT_TRUE(d.is_unlocked(1999));
    EXPECT_FALSE(d.is_unlocked(2000));
    EXPECT_FALSE(d.is_unlocked(999));
}

TEST(ProxDetector, SlowChangesDoNotUnlock) {
    ProxDetector d;
    EXPECT_TRUE(feed(d, every(400, 6)).empty());
    EXPECT_FALSE(d.is_unlocked(2000));
}

TEST(ProxDetector, FiveChangesDoNotUnlock) {
    ProxDetector d;
    EXPECT_TRUE(feed(d, every(100, 5)).empty());
    EXPECT_EQ(d.filled(), 5u);
}

TEST(ProxDetector, SpanLimitIsStrict) {
    ProxDetector at;
    EXPECT_TRUE(feed(at, every(300, 6)).empty()); // span exactly 1500
    ProxDetector under;
    EXPECT_EQ(feed(under, every(299, 6)).size(), 1u);
}

TEST(ProxDetector, CyclicIndexAndExtension) {
    ProxDetector d;
    const auto w = feed(d, every(150, 8));
    // Changes 6, 7 and 8 each qualify; the open window keeps being extended.
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(d.index(), 8u % 6u);
    ASSERT_TRUE(d.unlocked_span());
    EXPECT_EQ(d.unlocked_span()->start, 750);
    EXPECT_EQ(d.unlocked_span()->end, 1050 + 1000);
}

TEST(ProxDetector, SlowThenFastBurst) {
    ProxDetector d;
    auto changes = every(1000, 4);
    for (auto t : every(100, 6, 10000))
        changes.push_back(t);
    const auto w = feed(d, changes);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].start, 10500);
}

TEST(ProxDetector, RejectsTimeGoingBackwards) {
    ProxDetector d;
    d.on_change(100);
    EXPECT_THROW(d.on_change(99), std::invalid_argument);
    EXPECT_NO_THROW(d.on_change(100));
}

TEST(ProxDetector, ConfigValidation) {
    EXPECT_THROW(ProxDetector(ProxConfig{1, 1500, 1000}), std::invalid_argument);
    EXPECT_THROW(ProxDetector(ProxConfig{6, 0, 1000}), std::invalid_argument);
    EXPECT_THROW(ProxDetector(ProxConfig{6, 1500, 0}), std::invalid_argument);
    ProxDetector small(ProxConfig{3, 500, 200});
    EXPECT_EQ(feed(small, {0, 100, 200}).size(), 1u);
}

TEST(DetectChanges, AlternatingStream) {
    std::vector<ProxSample> s;
    for (int i = 0; i < 12; ++i)
        s.push_back({i * 100, i % 2 ? kProxNear : kProxFar});
    const auto c = detect_changes(ProxTrace(s), 0.5);
    EXPECT_EQ(c.size(), 11u);
    EXPECT_EQ(c.front(), 100);
}

TEST(DetectChanges, EpsilonIsStrict) {
    const ProxTrace p({{0, 1.0}, {10, 1.5}, {20, 2.1}, {30, 2.1}});
    EXPECT_EQ(detect_changes(p, 0.5), (std::vector<Millis>{20}));
    EXPECT_EQ(detect_changes(p, 0.0).size(), 2u);
    EXPECT_THROW(detect_changes(p, -1.0), std::invalid_argument);
}

TEST(ProxDetector, AgreesWithSpanOracle) {
    const ProxConfig cfg;
    Rng rng(2024);
    std::size_t events = 0;
    for (int stream = 0; stream < 100; ++stream) {
        std::vector<Millis> changes;
        Millis t = 0;
        for (int i = 0; i < 100; ++i) {
            t += rng.bernoulli(0.5) ? rng.uniform_int(0, 400) : rng.uniform_int(0, 3000);
            changes.push_back(t);
        }
        events += changes.size();
        ProxDetector d(cfg);
        for (std::size_t k = 0; k < changes.size(); ++k) {
            const auto w = d.on_change(changes[k]);
            const bool expected = k + 1 >= cfg.wind_sz && changes[k] - changes[k + 1 - cfg.wind_sz] < cfg.wave_time_limit;
            ASSERT_EQ(w.has_value(), expected) << "stream " << stream << " change " << k;
            // Brute force: unlocked at t iff some qualifying change c <= t has t < c + frame.
            for (Millis q : {changes[k], changes[k] + 1, changes[k] + cfg.unlock_time_frame - 1}) {
                if (k + 1 < changes.size() && q >= changes[k + 1])
                    continue;
                bool unlocked = false;
                for (std::size_t j = 0; j <= k; ++j) {
                    const bool qualifies =
                        j + 1 >= cfg.wind_sz && changes[j] - changes[j + 1 - cfg.wind_sz] < cfg.wave_time_limit;
                    if (qualifies && changes[j] <= q && q < changes[j] + cfg.unlock_time_frame)
                        unlocked = true;
                }
                ASSERT_EQ(d.is_unlocked(q), unlocked) << "stream " << stream << " t " << q;
            }
        }
    }
    EXPECT_EQ(events, 10000u);
}

TEST(RunDetector, GeneratedWaveUnlocks) {
    GenParams p;
    p.gesture_slip_rate = 0.0;
    EXPECT_FALSE(run_detector(gen_prox_stream(ProxKind::Wave, p), ProxConfig{}, 0.5).empty());
    EXPECT_TRUE(run_detector(gen_prox_stream(ProxKind::Walking, p), ProxConfig{}, 0.5).empty());
}
