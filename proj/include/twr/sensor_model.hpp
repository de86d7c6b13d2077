#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twr {

/// Milliseconds on the trace (or simulated device) clock.
using Millis = std::int64_t;

enum class Axis { X = 0, Y = 1, Z = 2 };

struct AccelSample {
    Millis t = 0;
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;

    double axis(Axis a) const noexcept {
        switch (a) {
        case Axis::X: return ax;
        case Axis::Y: return ay;
        case Axis::Z: return az;
        }
        return 0.0;
    }

    friend bool operator==(const AccelSample&, const AccelSample&) = default;
};

struct ProxSample {
    Millis t = 0;
    double value = 0.0; // cm

    friend bool operator==(const ProxSample&, const ProxSample&) = default;
};

/// Raised for any trace that violates the format or the trace invariants.
/// line() is 1-based when the error came from parsing text, 0 otherwise.
class TraceError : public std::runtime_error {
public:
    TraceError(const std::string& what, std::size_t line = 0);
    /// The same error reported against a file: "path:line: message".
    TraceError(const std::string& path, const TraceError& inner);
    std::size_t line() const noexcept { return line_; }
    /// Message without the location prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

/// Timestamped 3-axis accelerometer series. Validated on construction:
/// at least two samples, strictly increasing non-negative timestamps,
/// finite readings.
class AccelTrace {
public:
    explicit AccelTrace(std::vector<AccelSample> samples, std::string label = {});

    std::span<const AccelSample> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    const AccelSample& operator[](std::size_t i) const { return samples_[i]; }
    const AccelSample& front() const { return samples_.front(); }
    const AccelSample& back() const { return samples_.back(); }
    Millis span_ms() const noexcept { return samples_.back().t - samples_.front().t; }

    const std::string& label() const noexcept { return label_; }

    /// Copy of one axis as a contiguous series.
    std::vector<double> axis(Axis a) const;

    friend bool operator==(const AccelTrace&, const AccelTrace&) = default;

private:
    std::vector<AccelSample> samples_;
    std::string label_;
};

/// Proximity readings in cm. Timestamps strictly increasing, at least one sample.
class ProxTrace {
public:
    explicit ProxTrace(std::vector<ProxSample> samples, std::string label = {});

    std::span<const ProxSample> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    const ProxSample& operator[](std::size_t i) const { return samples_[i]; }
    const std::string& label() const noexcept { return label_; }

    friend bool operator==(const ProxTrace&, const ProxTrace&) = default;

private:
    std::vector<ProxSample> samples_;
    std::string label_;
};

AccelTrace parse_accel_trace(std::istream& in);
AccelTrace parse_accel_trace(std::string_view text);
ProxTrace parse_prox_trace(std::istream& in);
ProxTrace parse_prox_trace(std::string_view text);

AccelTrace load_accel_trace(const std::string& path);
ProxTrace load_prox_trace(const std::string& path);

/// Serializes in the trace file format. Reals use the shortest decimal form
/// that parses back to the same double, so format/parse round-trips exactly.
std::string format_accel_trace(const AccelTrace& trace);
std::string format_prox_trace(const ProxTrace& trace);

void save_accel_trace(const AccelTrace& trace, const std::string& path);
void save_prox_trace(const ProxTrace& trace, const std::string& path);

/// Shortest round-trip decimal representation of a double.
std::string format_real(double v);

/// Resamples onto n uniformly spaced integer-millisecond timestamps spanning
/// the first to the last original timestamp, interpolating each axis
/// linearly. Grid points that coincide with an original sample reproduce it
/// exactly, so resampling an already-resampled trace is the identity.
/// Throws std::invalid_argument when n < 2 or the span has fewer than n - 1 ms.
AccelTrace resample(const AccelTrace& trace, std::size_t n);

/// Samples whose timestamps fall within [from, to], keeping the label.
/// Returns nullopt when fewer than two samples remain.
std::optional<AccelTrace> slice(const AccelTrace& trace, Millis from, Millis to);

} // namespace twr
