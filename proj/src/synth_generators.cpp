#include "twr/synth_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace twr {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Millis> sample_times(std::size_t n, double rate_hz) {
    std::vector<Millis> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = std::llround(static_cast<double>(i) * 1000.0 / rate_hz);
    return t;
}

/// Resting phone: gravity on y plus independent noise on every axis.
std::vector<AccelSample> rest_samples(const std::vector<Millis>& times, double sigma, Rng& rng) {
    std::vector<AccelSample> out;
    out.reserve(times.size());
    for (const auto t : times) {
        AccelSample s{t, kGravityX, kGravityY, kGravityZ};
        s.ax += rng.normal(0.0, sigma);
        s.ay += rng.normal(0.0, sigma);
        s.az += rng.normal(0.0, sigma);
        out.push_back(s);
    }
    return out;
}

/// Tap waveform at dt ms from the lobe centre: a half-sine of the given
/// width followed by an opposite rebound 1.5x as wide and 0.4x as high.
double tap_shape(double dt, double width) {
    const double half = width / 2.0;
    if (dt >= -half && dt <= half)
        return std::cos(kPi * dt / width);
    const double rebound = 1.5 * width;
    if (dt > half && dt <= half + rebound)
        return -0.4 * std::sin(kPi * (dt - half) / rebound);
    return 0.0;
}

/// Single-lobe bump used for screen touches and jerks.
double bump(double dt, double width) {
    return std::abs(dt) <= width / 2.0 ? std::cos(kPi * dt / width) : 0.0;
}

double seconds(Millis t) {
    return static_cast<double>(t) / 1000.0;
}

double exponential(Rng& rng, double mean) {
    return -mean * std::log(1.0 - rng.uniform());
}

/// Builds the event-style trace from sorted transition times.
ProxTrace transitions_to_trace(std::vector<Millis> times, double initial, Millis duration, std::string label) {
    std::sort(times.begin(), times.end());
    std::vector<ProxSample> out;
    out.push_back({0, initial});
    double value = initial;
    for (auto t : times) {
        t = std::max(t, out.back().t + 1);
        if (t >= duration)
            break;
        value = value == kProxNear ? kProxFar : kProxNear;
        out.push_back({t, value});
    }
    if (out.back().t < duration)
        out.push_back({duration, value});
    return ProxTrace(std::move(out), std::move(label));
}

/// `count` transitions starting at `start`, spaced by interval * U(0.7, 1.3).
std::vector<Millis> burst(Rng& rng, double start, std::int64_t count, double interval) {
    std::vector<Millis> out;
    double t = start;
    for (std::int64_t i = 0; i < count; ++i) {
        out.push_back(std::llround(t));
        t += interval * rng.uniform(0.7, 1.3);
    }
    return out;
}

/// A wave or rub attempt. With probability slip_rate the user is too slow
/// or gives up after too few passes.
std::vector<Millis> gesture_attempt(Rng& rng, const GenParams& p, double interval, std::int64_t min_count,
                                    std::int64_t max_count) {
    const double start = rng.uniform(1000.0, static_cast<double>(p.prox_stream_ms) - 4000.0);
    if (rng.bernoulli(p.gesture_slip_rate)) {
        if (rng.bernoulli(0.5))
            return burst(rng, start, rng.uniform_int(6, 8), rng.uniform(330.0, 450.0) / 0.7);
        return burst(rng, start, rng.uniform_int(3, 5), interval);
    }
    return burst(rng, start, rng.uniform_int(min_count, max_count), interval);
}

/// Isolated events: gaps drawn from [min_gap, max_gap], each event producing
/// `per_event` transitions `inner` ms apart.
std::vector<Millis> spaced_events(Rng& rng, Millis duration, std::int64_t events, double min_gap, double max_gap,
                                  std::int64_t per_event, double inner_lo, double inner_hi) {
    std::vector<Millis> out;
    double t = rng.uniform(200.0, min_gap);
    for (std::int64_t e = 0; e < events && t < static_cast<double>(duration); ++e) {
        double u = t;
        for (std::int64_t k = 0; k < per_event; ++k) {
            out.push_back(std::llround(u));
            u += rng.uniform(inner_lo, inner_hi);
        }
        t = u + rng.uniform(min_gap, max_gap);
    }
    return out;
}

} // namespace

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo)
        throw std::invalid_argument("uniform_int: empty range");
    const auto width = static_cast<double>(hi - lo + 1);
    return std::min(hi, lo + static_cast<std::int64_t>(std::floor(uniform() * width)));
}

double Rng::normal(double mean, double sigma) {
    if (spare_) {
        const double z = *spare_;
        spare_.reset();
        return mean + sigma * z;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    return mean + sigma * r * std::cos(2.0 * kPi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) noexcept {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ stream) ^ index);
}

void GenParams::validate() const {
    if (!(sample_rate_hz > 0.0 && sample_rate_hz <= 1000.0))
        throw std::invalid_argument("sample rate must lie in (0, 1000] Hz");
    if (window_ms <= 0 || samples_per_window() < 2)
        throw std::invalid_argument("window must hold at least 2 samples");
    if (!(noise_sigma > 0.0))
        throw std::invalid_argument("noise sigma must be positive");
    if (!(impulse_amplitude >= 0.0))
        throw std::invalid_argument("impulse amplitude must be non-negative");
    if (impulse_width_ms <= 0)
        throw std::invalid_argument("impulse width must be positive");
    if (taps_per_window < 1 || taps_per_window > 3)
        throw std::invalid_argument("taps per window must be 1, 2 or 3");
    if (tap_jitter_ms < 0)
        throw std::invalid_argument("tap jitter must be non-negative");
    if (prox_transition_period_ms <= 0)
        throw std::invalid_argument("proximity transition period must be positive");
    if (prox_stream_ms < 6000)
        throw std::invalid_argument("proximity streams must last at least 6000 ms");
    if (!(session_variation >= 0.0 && session_variation <= 2.0))
        throw std::invalid_argument("session variation must lie in [0, 2]");
    if (!(gesture_slip_rate >= 0.0 && gesture_slip_rate <= 1.0))
        throw std::invalid_argument("gesture slip rate must lie in [0, 1]");
}

std::size_t GenParams::samples_per_window() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(window_ms) * sample_rate_hz / 1000.0));
}

AccelTrace gen_tap_trace(const GenParams& p) {
    p.validate();
    // Session habits come from their own stream so every trace of a session
    // shares them.
    Rng session(derive_seed(p.session_seed, 0x5e55, static_cast<std::uint64_t>(p.taps_per_window)));
    const double var = p.session_variation;
    const double center_bias = 25.0 * var * session.uniform(-1.0, 1.0);
    const double width_scale = 1.0 + var * session.uniform(-0.1, 0.15);
    const std::array<double, 3> grip = {var * session.uniform(-0.12, 0.12), var * session.uniform(-0.12, 0.12), 0.0};

    const double width = static_cast<double>(p.impulse_width_ms) * width_scale;
    const double spacing = static_cast<double>(p.window_ms) / (p.taps_per_window + 1);
    const double jitter = static_cast<double>(p.tap_jitter_ms);
    const double footprint = 2.5 * static_cast<double>(p.impulse_width_ms) + 2.0 * jitter;
    if (footprint > spacing)
        throw std::invalid_argument("taps do not fit in the window: " + std::to_string(p.taps_per_window) +
                                    " taps of " + std::to_string(p.impulse_width_ms) + " ms in " +
                                    std::to_string(p.window_ms) + " ms");

    Rng rng(p.rng_seed);
    const auto times = sample_times(p.samples_per_window(), p.sample_rate_hz);
    const std::array<double, 3> dir = {0.3 + grip[0] + rng.uniform(-0.08, 0.08),
                                       0.45 + grip[1] + rng.uniform(-0.08, 0.08), 1.0};
    std::vector<double> centers, amps;
    for (int k = 0; k < p.taps_per_window; ++k) {
        centers.push_back(spacing * (k + 1) + center_bias + rng.uniform(-jitter, jitter));
        amps.push_back(p.impulse_amplitude * rng.uniform(0.85, 1.15));
    }

    auto samples = rest_samples(times, p.noise_sigma, rng);
    for (auto& s : samples) {
        double v = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k)
            v += amps[k] * tap_shape(static_cast<double>(s.t) - centers[k], width);
        s.ax += dir[0] * v;
        s.ay += dir[1] * v;
        s.az += dir[2] * v;
    }
    return AccelTrace(std::move(samples), std::string(tap_gesture_name(p.taps_per_window)));
}

AccelTrace gen_rest_stream(Millis duration_ms, const GenParams& p) {
    p.validate();
    const auto n = static_cast<std::size_t>(
                       std::floor(static_cast<double>(duration_ms) * p.sample_rate_hz / 1000.0)) + 1;
    Rng rng(p.rng_seed);
    return AccelTrace(rest_samples(sample_times(n, p.sample_rate_hz), p.noise_sigma, rng), "rest");
}

AccelTrace gen_activity_trace(Activity kind, const GenParams& p) {
    p.validate();
    Rng rng(p.rng_seed);
    const auto times = sample_times(p.samples_per_window(), p.sample_rate_hz);
    const double window = static_cast<double>(p.window_ms);
    std::vector<AccelSample> samples;

    switch (kind) {
    case Activity::Still:
        samples = rest_samples(times, p.noise_sigma, rng);
        break;

    case Activity::Walking:
    case Activity::Stairs: {
        const bool stairs = kind == Activity::Stairs;
        const double f = stairs ? rng.uniform(1.2, 1.7) : rng.uniform(1.7, 2.2);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double ax = rng.uniform(0.3, 0.8), ay = rng.uniform(1.5, 2.5), az = rng.uniform(0.8, 1.5);
        // Stairs: every step gets its own amplitude and a heel-strike transient.
        std::vector<double> gain(16, 1.0), strike(16, 0.0);
        if (stairs)
            for (std::size_t k = 0; k < gain.size(); ++k) {
                gain[k] = rng.uniform(0.6, 1.5);
                strike[k] = rng.uniform(1.0, 2.5);
            }
        samples = rest_samples(times, p.noise_sigma, rng);
        for (auto& s : samples) {
            const double ts = seconds(s.t);
            const double cycle = f * ts + phase / (2.0 * kPi);
            const auto step = static_cast<std::size_t>(std::floor(cycle)) % gain.size();
            const double g = gain[step];
            s.ax += g * ax * std::sin(kPi * f * ts + phase);
            s.ay += g * ay * std::sin(2.0 * kPi * f * ts + phase);
            s.az += g * az * std::sin(2.0 * kPi * f * ts + phase + kPi / 3.0);
            if (stairs) {
                const double since_step = (cycle - std::floor(cycle)) / f * 1000.0;
                const double h = strike[step] * bump(since_step - 40.0, 80.0);
                s.ay += h;
                s.az += 0.5 * h;
            }
        }
        break;
    }

    case Activity::ScreenTouch: {
        const double drift_phase = rng.uniform(0.0, 2.0 * kPi);
        const auto touches = rng.uniform_int(2, 6);
        std::vector<double> centers, amps;
        for (std::int64_t k = 0; k < touches; ++k) {
            centers.push_back(rng.uniform(0.0, window));
            amps.push_back(rng.uniform(0.05, 0.3));
        }
        samples = rest_samples(times, p.noise_sigma, rng);
        for (auto& s : samples) {
            s.ay += 0.2 * std::sin(2.0 * kPi * 0.2 * seconds(s.t) + drift_phase);
            for (std::size_t k = 0; k < centers.size(); ++k) {
                const double b = amps[k] * bump(static_cast<double>(s.t) - centers[k], 40.0);
                s.az += b;
                s.ay += 0.2 * b;
            }
        }
        break;
    }

    case Activity::PhoneMovement: {
        std::array<std::array<double, 6>, 3> waves{}; // per axis: f1, a1, ph1, f2, a2, ph2
        for (auto& w : waves)
            for (std::size_t k = 0; k < 2; ++k) {
                w[3 * k] = rng.uniform(0.2, 0.9);
                w[3 * k + 1] = rng.uniform(1.0, 4.0);
                w[3 * k + 2] = rng.uniform(0.0, 2.0 * kPi);
            }
        // Occasionally a sharp jerk, e.g. while picking up a call.
        const bool jerk = rng.bernoulli(0.04);
        const double jerk_center = rng.uniform(300.0, window - 300.0);
        const double jerk_width = rng.uniform(100.0, 250.0);
        const double jerk_amp = rng.uniform(3.0, 8.0);
        const std::array<double, 3> jerk_dir = {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(0.5, 1.0)};
        samples = rest_samples(times, p.noise_sigma, rng);
        for (auto& s : samples) {
            const double ts = seconds(s.t);
            std::array<double, 3> d{};
            for (std::size_t a = 0; a < 3; ++a) {
                const auto& w = waves[a];
                d[a] = w[1] * std::sin(2.0 * kPi * w[0] * ts + w[2]) + w[4] * std::sin(2.0 * kPi * w[3] * ts + w[5]);
                if (jerk)
                    d[a] += jerk_dir[a] * jerk_amp * tap_shape(static_cast<double>(s.t) - jerk_center, jerk_width);
            }
            s.ax += d[0];
            s.ay += d[1];
            s.az += d[2];
        }
        break;
    }
    }
    return AccelTrace(std::move(samples), std::string(to_string(kind)));
}

ProxTrace gen_prox_stream(ProxKind kind, const GenParams& p) {
    p.validate();
    Rng rng(p.rng_seed);
    const Millis duration = p.prox_stream_ms;
    const double dur = static_cast<double>(duration);
    const double period = static_cast<double>(p.prox_transition_period_ms);
    std::vector<Millis> times;
    double initial = kProxFar;

    switch (kind) {
    case ProxKind::Wave:
        times = gesture_attempt(rng, p, period, 6, 9);
        break;
    case ProxKind::TapRub:
        times = gesture_attempt(rng, p, 0.6 * period, 8, 12);
        break;
    case ProxKind::Walking:
        // In a pocket: near, with an occasional slow fabric shift.
        initial = kProxNear;
        times = spaced_events(rng, duration, rng.uniform_int(0, 3), 1500.0, 3500.0, 1, 0.0, 0.0);
        break;
    case ProxKind::DropFall: {
        const double at = rng.uniform(1000.0, dur - 2000.0);
        times = burst(rng, at, rng.uniform_int(2, 4), rng.uniform(80.0, 250.0) / 0.7);
        break;
    }
    case ProxKind::Daily: {
        initial = rng.bernoulli(0.5) ? kProxNear : kProxFar;
        double t = rng.uniform(200.0, 2000.0);
        while (t < dur) {
            times.push_back(std::llround(t));
            t += rng.uniform(400.0, 3000.0);
        }
        break;
    }
    case ProxKind::ScreenTouch:
        // A hand passing over the top of the screen now and then.
        times = spaced_events(rng, duration, 4, 2500.0, 5000.0, 2, 150.0, 400.0);
        break;
    case ProxKind::GameO1:
        // Thumb rests on the sensor; at most one lift.
        initial = kProxNear;
        times = spaced_events(rng, duration, rng.uniform_int(0, 1), 1000.0, 2000.0, 2, 300.0, 800.0);
        break;
    case ProxKind::GameO2: {
        // Thumb passes over the sensor at irregular, mostly sparse intervals.
        double t = rng.uniform(0.0, 1500.0);
        while (t < dur) {
            times.push_back(std::llround(t));
            t += rng.uniform(80.0, 250.0);
            times.push_back(std::llround(t));
            t += 250.0 + exponential(rng, 2200.0);
        }
        break;
    }
    case ProxKind::Bump:
        times = spaced_events(rng, duration, rng.uniform_int(1, 3), 2000.0, 4000.0, 2, 30.0, 100.0);
        break;
    }
    return transitions_to_trace(std::move(times), initial, duration, std::string(to_string(kind)));
}

std::string_view tap_gesture_name(int taps_per_window) {
    switch (taps_per_window) {
    case 1: return "Tapping Once";
    case 2: return "Tapping Twice";
    case 3: return "Tapping Thrice";
    }
    throw std::invalid_argument("taps per window must be 1, 2 or 3");
}

std::string_view to_string(Activity a) noexcept {
    switch (a) {
    case Activity::Walking: return "walking";
    case Activity::Stairs: return "stairs";
    case Activity::Still: return "still";
    case Activity::ScreenTouch: return "screen_touch";
    case Activity::PhoneMovement: return "phone_movement";
    }
    return "still";
}

std::string_view display_name(Activity a) noexcept {
    switch (a) {
    case Activity::Walking: return "Walking";
    case Activity::Stairs: return "Walking Stairs";
    case Activity::Still: return "Still";
    case Activity::ScreenTouch: return "Screen-touch";
    case Activity::PhoneMovement: return "Phone Movement";
    }
    return "Still";
}

Activity parse_activity(std::string_view text) {
    for (auto a : kAllActivities)
        if (to_string(a) == text)
            return a;
    throw std::invalid_argument("unknown activity '" + std::string(text) + "'");
}

std::string_view to_string(ProxKind k) noexcept {
    switch (k) {
    case ProxKind::Wave: return "wave";
    case ProxKind::TapRub: return "tap_rub";
    case ProxKind::Walking: return "prox_walking";
    case ProxKind::DropFall: return "drop_fall";
    case ProxKind::Daily: return "daily";
    case ProxKind::ScreenTouch: return "prox_screen_touch";
    case ProxKind::GameO1: return "game_o1";
    case ProxKind::GameO2: return "game_o2";
    case ProxKind::Bump: return "bump";
    }
    return "wave";
}

std::string_view display_name(ProxKind k) noexcept {
    switch (k) {
    case ProxKind::Wave: return "Hand Waving";
    case ProxKind::TapRub: return "Tapping / Rubbing";
    case ProxKind::Walking: return "Walking";
    case ProxKind::DropFall: return "Phone Drop/Fall";
    case ProxKind::Daily: return "Daily Activity";
    case ProxKind::ScreenTouch: return "Screen-touch";
    case ProxKind::GameO1: return "Game Play (O1)";
    case ProxKind::GameO2: return "Game Play (O2)";
    case ProxKind::Bump: return "Bumping";
    }
    return "Hand Waving";
}

ProxKind parse_prox_kind(std::string_view text) {
    for (auto k : kAllProxKinds)
        if (to_string(k) == text)
            return k;
    throw std::invalid_argument("unknown proximity stream kind '" + std::string(text) + "'");
}

std::vector<AccelTrace> tap_corpus(const GenParams& p, std::size_t count, std::uint64_t stream) {
    std::vector<AccelTrace> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        GenParams q = p;
        q.rng_seed = derive_seed(p.rng_seed, stream, i);
        out.push_back(gen_tap_trace(q));
    }
    return out;
}

std::vector<AccelTrace> tap_session_corpus(const GenParams& p, std::size_t sessions, std::size_t per_session,
                                           std::uint64_t stream) {
    std::vector<AccelTrace> out;
    out.reserve(sessions * per_session);
    for (std::size_t d = 0; d < sessions; ++d) {
        GenParams q = p;
        q.session_seed = derive_seed(p.rng_seed, stream, 1000 + d);
        for (auto& t : tap_corpus(q, per_session, stream * 100 + d))
            out.push_back(std::move(t));
    }
    return out;
}

std::vector<AccelTrace> activity_corpus(Activity kind, const GenParams& p, std::size_t count, std::uint64_t stream) {
    std::vector<AccelTrace> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        GenParams q = p;
        q.rng_seed = derive_seed(p.rng_seed, stream, i);
        out.push_back(gen_activity_trace(kind, q));
    }
    return out;
}

std::vector<ProxTrace> prox_corpus(ProxKind kind, const GenParams& p, std::size_t count, std::uint64_t stream) {
    std::vector<ProxTrace> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        GenParams q = p;
        q.rng_seed = derive_seed(p.rng_seed, stream, i);
        out.push_back(gen_prox_stream(kind, q));
    }
    return out;
}

} // namespace twr
