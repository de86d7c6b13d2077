#pragma once

#include "twr/sensor_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace twr {

struct ProxConfig {
    std::size_t wind_sz = 6;
    Millis wave_time_limit = 1500;
    Millis unlock_time_frame = 1000;

    /// Throws std::invalid_argument unless wind_sz >= 2 and both durations are positive.
    void validate() const;

    friend bool operator==(const ProxConfig&, const ProxConfig&) = default;
};

/// Half-open interval [start, end) on the device clock.
struct UnlockWindow {
    Millis start = 0;
    Millis end = 0;

    bool contains(Millis t) const noexcept { return start <= t && t < end; }
    friend bool operator==(const UnlockWindow&, const UnlockWindow&) = default;
};

/// Cyclic buffer of the last wind_sz proximity-change times. A change
/// unlocks when it and the wind_sz - 1 changes before it all fall within
/// wave_time_limit. Nothing unlocks until the buffer has been filled once.
///
/// Single owner; callers serialize on_change and is_unlocked.
class ProxDetector {
public:
    explicit ProxDetector(ProxConfig cfg = {});

    /// Records a change at t (must not precede the previous change). Returns
    /// the window opened by this change, if any. A qualifying change while a
    /// window is still open extends it to t + unlock_time_frame.
    std::optional<UnlockWindow> on_change(Millis t);

    bool is_unlocked(Millis t) const noexcept;

    const ProxConfig& config() const noexcept { return cfg_; }
    const std::vector<Millis>& change_times() const noexcept { return change_times_; }
    std::size_t index() const noexcept { return index_; }
    std::uint64_t filled() const noexcept { return filled_; }
    /// Current (possibly extended) unlocked interval, if any change has unlocked.
    std::optional<UnlockWindow> unlocked_span() const noexcept { return unlocked_; }

private:
    ProxConfig cfg_;
    std::vector<Millis> change_times_;
    std::size_t index_ = 0;
    std::uint64_t filled_ = 0;
    std::optional<UnlockWindow> unlocked_;
};

/// Timestamps of samples that differ from the previous sample by more than epsilon cm.
std::vector<Millis> detect_changes(const ProxTrace& trace, double epsilon_cm);

/// detect_changes fed through a fresh detector; every window it opens, in order.
std::vector<UnlockWindow> run_detector(const ProxTrace& trace, const ProxConfig& cfg, double epsilon_cm);

} // namespace twr
