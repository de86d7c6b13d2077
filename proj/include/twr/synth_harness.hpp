#pragma once

#include "twr/permission_engine.hpp"
#include "twr/prox_detector.hpp"
#include "twr/sensor_model.hpp"
#include "twr/tap_detector.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace twr {

/// Portable seeded generator: std::mt19937_64 (fully specified by the
/// standard), uniforms from the top 53 bits, normals by Box-Muller. The
/// distributions are implemented here rather than taken from <random> so
/// corpora do not depend on the standard library vendor.
class Rng {
public:
    static constexpr std::string_view kAlgorithm = "mt19937_64/u53/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double normal(double mean, double sigma);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// SplitMix64 mix of (base, stream, index); gives every trace of every
/// corpus its own independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) noexcept;

struct GenParams {
    std::uint64_t rng_seed = 42;
    double sample_rate_hz = 50.0;
    Millis window_ms = 2000;
    double noise_sigma = 0.05;       // m/s^2
    double impulse_amplitude = 6.0;  // m/s^2, peak of the main tap lobe
    Millis impulse_width_ms = 160;
    int taps_per_window = 1;
    Millis tap_jitter_ms = 30;
    /// Traces sharing a session seed share the user's habits that day: grip
    /// angle, tap width and timing bias.
    std::uint64_t session_seed = 0;
    /// Scales how far sessions drift from one another (0 disables drift).
    double session_variation = 0.8;
    Millis prox_transition_period_ms = 150;
    Millis prox_stream_ms = 10000;
    /// Probability that a simulated wave/rub attempt is performed too
    /// slowly or with too few passes.
    double gesture_slip_rate = 0.05;

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;
    std::size_t samples_per_window() const;
};

/// Resting gravity vector (m/s^2): the phone held upright.
inline constexpr double kGravityX = 0.0, kGravityY = 9.81, kGravityZ = 0.0;
/// Binary proximity readings (cm).
inline constexpr double kProxNear = 0.0, kProxFar = 5.0;

/// One window of resting noise plus taps_per_window tap impulses: a
/// half-sine lobe strongest on z followed by a smaller rebound. Throws
/// std::invalid_argument when the taps do not fit in the window.
AccelTrace gen_tap_trace(const GenParams& p);

enum class Activity { Walking, Stairs, Still, ScreenTouch, PhoneMovement };
std::string_view to_string(Activity a) noexcept;
std::string_view display_name(Activity a) noexcept;
Activity parse_activity(std::string_view text);
inline constexpr Activity kAllActivities[] = {Activity::Walking, Activity::Stairs, Activity::Still,
                                              Activity::ScreenTouch, Activity::PhoneMovement};

AccelTrace gen_activity_trace(Activity kind, const GenParams& p);

/// Resting accelerometer recording of the given length.
AccelTrace gen_rest_stream(Millis duration_ms, const GenParams& p);

enum class ProxKind { Wave, TapRub, Walking, DropFall, Daily, ScreenTouch, GameO1, GameO2, Bump };
std::string_view to_string(ProxKind k) noexcept;
std::string_view display_name(ProxKind k) noexcept;
ProxKind parse_prox_kind(std::string_view text);
inline constexpr ProxKind kAllProxKinds[] = {ProxKind::Wave,        ProxKind::TapRub, ProxKind::Walking,
                                             ProxKind::DropFall,    ProxKind::Daily,  ProxKind::ScreenTouch,
                                             ProxKind::GameO1,      ProxKind::GameO2, ProxKind::Bump};

/// Event-style proximity stream of p.prox_stream_ms: a sample at 0, one at
/// every transition and a closing sample at the end.
ProxTrace gen_prox_stream(ProxKind kind, const GenParams& p);

std::string_view tap_gesture_name(int taps_per_window);

/// count traces whose seeds derive from (p.rng_seed, stream, i).
std::vector<AccelTrace> tap_corpus(const GenParams& p, std::size_t count, std::uint64_t stream);
/// `sessions` consecutive sessions of `per_session` taps each, every session
/// with its own derived session seed.
std::vector<AccelTrace> tap_session_corpus(const GenParams& p, std::size_t sessions, std::size_t per_session,
                                           std::uint64_t stream);
std::vector<AccelTrace> activity_corpus(Activity kind, const GenParams& p, std::size_t count, std::uint64_t stream);
std::vector<ProxTrace> prox_corpus(ProxKind kind, const GenParams& p, std::size_t count, std::uint64_t stream);

struct EvalCell {
    std::string gesture;
    std::string activity;
    std::size_t matches = 0;
    std::size_t total = 0;
    double rate = 0.0;             // matches / total
    bool expected_positive = false; // the cell measures recognition, not false triggers
};

struct EvalReport {
    std::string title;
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<EvalCell> cells;
    double runtime_ms = 0.0;

    const EvalCell* cell(std::string_view gesture, std::string_view activity) const;
    /// Pooled miss rate over expected-positive cells (0 when there are none).
    double fnr() const;
    /// Pooled trigger rate over the remaining cells (0 when there are none).
    double fpr() const;

    /// Aligned confusion-matrix table followed by summary lines.
    std::string format_table() const;
    /// `gesture,activity,matches,total,rate`, one line per cell.
    std::string format_machine() const;
};

EvalCell make_cell(std::string gesture, std::string activity, std::size_t matches, std::size_t total,
                   bool expected_positive);

using NamedTemplate = std::pair<std::string, GestureTemplate>;
using NamedAccelCorpus = std::pair<std::string, std::vector<AccelTrace>>;
using NamedProxCorpus = std::pair<std::string, std::vector<ProxTrace>>;

/// Match rate of every template against every corpus. A cell counts as
/// recognition when the template and corpus share a name.
EvalReport run_tap_evaluation(std::span<const NamedTemplate> templates, std::span<const NamedAccelCorpus> corpora);

/// Fraction of streams in each corpus that open at least one unlock window.
/// Corpora named in `gesture_columns` count as recognition cells.
EvalReport run_prox_evaluation(std::span<const NamedProxCorpus> corpora, const ProxConfig& cfg, double epsilon_cm,
                               std::span<const std::string> gesture_columns);

struct TapEvalConfig {
    GenParams params;
    std::size_t training_traces = 30;
    std::size_t traces_per_cell = 150;
    std::size_t n = 100;
    AxisRule rule = AxisRule::Mean;
};

/// Trains tapping-once/twice/thrice templates on their own seeded training
/// sets and evaluates them against fresh corpora of every gesture and activity.
EvalReport default_tap_evaluation(const TapEvalConfig& cfg);

struct ProxEvalConfig {
    GenParams params;
    std::size_t traces_per_cell = 150;
    ProxConfig detector;
    double epsilon_cm = 0.5;
};

EvalReport default_prox_evaluation(const ProxEvalConfig& cfg);

/// Independent reference implementations of the tap score, written as plain
/// loops and sharing no code with the detector.
namespace oracle {

double naive_cross_correlation(const AccelTrace& a, const AccelTrace& b, AxisRule rule);

/// Full m x m matrix of pairwise scores; traces must share a length.
std::vector<std::vector<double>> brute_force_pair_matrix(std::span<const AccelTrace> traces, AxisRule rule);

} // namespace oracle

struct ScriptedRequest {
    AccessRequest request;
    Outcome expected = Outcome::Reject;
    std::optional<Reason> expected_reason;
};

struct Scenario {
    std::string label;
    std::optional<AccelTrace> accel;
    std::optional<ProxTrace> prox;
    std::vector<ScriptedRequest> requests;

    /// Throws std::invalid_argument when requests are out of order or fall
    /// outside a recorded stream.
    void validate() const;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario text: `label:`, `accel:`, `prox:` and `request:` lines, where a
/// request is `t_ms,app_id,service,OUTCOME[,REASON]`. Stream paths resolve
/// against base_dir.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);
/// Writes the scenario file plus `<stem>.accel.csv` / `<stem>.prox.csv` beside it.
void save_scenario(const Scenario& s, const std::filesystem::path& path);

struct ScenarioResult {
    std::vector<DecisionRecord> log;
    std::vector<std::size_t> mismatches; // indices into log
    EvalReport report;

    std::string format_log() const;
};

/// Replays the streams through one PermissionEngine: before each request,
/// every proximity change at or before its time is fed to the detector.
ScenarioResult run_scenario(const Scenario& s, const GestureDatabase& db, const ProxConfig& cfg,
                            double epsilon_cm = 0.5, const EngineOptions& opts = {});

/// Scenario builders. The tap scenarios expect an "nfc" tap policy and the
/// proximity one an "sms" proximity policy (see make_demo_database).
Scenario make_pickpocket_scenario(const GenParams& p);
Scenario make_legit_nfc_scenario(const GenParams& p);
Scenario make_legit_sms_scenario(const GenParams& p);

/// Database with a tapping-once template trained on 30 seeded taps, "nfc"
/// guarded by it and "sms" guarded by the proximity gesture.
GestureDatabase make_demo_database(const GenParams& p, std::size_t n = 100, AxisRule rule = AxisRule::Mean);

} // namespace twr
