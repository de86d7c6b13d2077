#include "twr/sensor_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace twr {

TraceError::TraceError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line),
      detail_(what) {}

TraceError::TraceError(const std::string& path, const TraceError& inner)
    : std::runtime_error(path + (inner.line() == 0 ? "" : ":" + std::to_string(inner.line())) + ": " +
                         inner.detail()),
      line_(inner.line()),
      detail_(inner.detail()) {}

namespace {

void check_label(const std::string& label) {
    if (label.empty())
        return;
    if (std::isspace(static_cast<unsigned char>(label.front())) ||
        std::isspace(static_cast<unsigned char>(label.back())))
        throw TraceError("label must not start or end with whitespace");
    if (label.find_first_of("\r\n") != std::string::npos)
        throw TraceError("label must be a single line");
}

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
    if (field.empty())
        return false;
    // from_chars rejects a leading '+', which is still valid decimal notation.
    if (field.front() == '+') {
        field.remove_prefix(1);
        if (field.empty() || field.front() == '-')
            return false;
    }
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    return ec == std::errc{} && ptr == end;
}

/// Shared line walker for both trace formats. Calls on_row(fields, line_no)
/// for every data row and returns the label from a `# label:` comment.
template <typename RowFn>
std::string walk_lines(std::istream& in, std::size_t& last_line, RowFn&& on_row) {
    std::string label;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            auto body = trim(line.substr(1));
            constexpr std::string_view key = "label:";
            if (body.starts_with(key))
                label = std::string(trim(body.substr(key.size())));
            continue;
        }
        on_row(split_fields(line), line_no);
    }
    last_line = std::max<std::size_t>(line_no, 1);
    return label;
}

Millis parse_time(std::string_view field, std::size_t line_no, std::optional<Millis> prev) {
    Millis t = 0;
    if (!parse_number(field, t))
        throw TraceError("non-numeric timestamp '" + std::string(field) + "'", line_no);
    if (t < 0)
        throw TraceError("negative timestamp", line_no);
    if (prev && t <= *prev)
        throw TraceError("non-increasing timestamp", line_no);
    return t;
}

double parse_reading(std::string_view field, std::size_t line_no) {
    double v = 0.0;
    if (!parse_number(field, v))
        throw TraceError("non-numeric field '" + std::string(field) + "'", line_no);
    if (!std::isfinite(v))
        throw TraceError("non-finite field '" + std::string(field) + "'", line_no);
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw TraceError("cannot open trace file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw TraceError("cannot write trace file '" + path + "'");
    out << text;
    if (!out)
        throw TraceError("failed writing trace file '" + path + "'");
}

// Clamped so round-off can never step outside the bracketing samples.
double lerp(double a, double b, double w) {
    const double v = a + (b - a) * w;
    return std::clamp(v, std::min(a, b), std::max(a, b));
}

} // namespace

AccelTrace::AccelTrace(std::vector<AccelSample> samples, std::string label)
    : samples_(std::move(samples)), label_(std::move(label)) {
    check_label(label_);
    if (samples_.size() < 2)
        throw TraceError("accelerometer trace needs at least 2 samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (s.t < 0)
            throw TraceError("negative timestamp at sample " + std::to_string(i));
        if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az))
            throw TraceError("non-finite reading at sample " + std::to_string(i));
        if (i > 0 && s.t <= samples_[i - 1].t)
            throw TraceError("non-increasing timestamp at sample " + std::to_string(i));
    }
}

std::vector<double> AccelTrace::axis(Axis a) const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_)
        out.push_back(s.axis(a));
    return out;
}

ProxTrace::ProxTrace(std::vector<ProxSample> samples, std::string label)
    : samples_(std::move(samples)), label_(std::move(label)) {
    check_label(label_);
    if (samples_.empty())
        throw TraceError("empty proximity trace");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (s.t < 0)
            throw TraceError("negative timestamp at sample " + std::to_string(i));
        if (!std::isfinite(s.value) || s.value < 0.0)
            throw TraceError("invalid proximity value at sample " + std::to_string(i));
        if (i > 0 && s.t <= samples_[i - 1].t)
            throw TraceError("non-increasing timestamp at sample " + std::to_string(i));
    }
}

AccelTrace parse_accel_trace(std::istream& in) {
    std::vector<AccelSample> samples;
    std::size_t last_line = 0;
    auto label = walk_lines(in, last_line, [&](const std::vector<std::string_view>& f, std::size_t ln) {
        if (f.size() != 4)
            throw TraceError("wrong column count (expected 4, got " + std::to_string(f.size()) + ")", ln);
        std::optional<Millis> prev;
        if (!samples.empty())
            prev = samples.back().t;
        AccelSample s;
        s.t = parse_time(f[0], ln, prev);
        s.ax = parse_reading(f[1], ln);
        s.ay = parse_reading(f[2], ln);
        s.az = parse_reading(f[3], ln);
        samples.push_back(s);
    });
    if (samples.empty())
        throw TraceError("empty trace", last_line);
    if (samples.size() < 2)
        throw TraceError("accelerometer trace needs at least 2 samples", last_line);
    return AccelTrace(std::move(samples), std::move(label));
}

AccelTrace parse_accel_trace(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_accel_trace(in);
}

ProxTrace parse_prox_trace(std::istream& in) {
    std::vector<ProxSample> samples;
    std::size_t last_line = 0;
    auto label = walk_lines(in, last_line, [&](const std::vector<std::string_view>& f, std::size_t ln) {
        if (f.size() != 2)
            throw TraceError("wrong column count (expected 2, got " + std::to_string(f.size()) + ")", ln);
        std::optional<Millis> prev;
        if (!samples.empty())
            prev = samples.back().t;
        ProxSample s;
        s.t = parse_time(f[0], ln, prev);
        s.value = parse_reading(f[1], ln);
        if (s.value < 0.0)
            throw TraceError("negative proximity value", ln);
        samples.push_back(s);
    });
    if (samples.empty())
        throw TraceError("empty trace", last_line);
    return ProxTrace(std::move(samples), std::move(label));
}

ProxTrace parse_prox_trace(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_prox_trace(in);
}

AccelTrace load_accel_trace(const std::string& path) {
    try {
        return parse_accel_trace(std::string_view(read_file(path)));
    } catch (const TraceError& e) {
        throw TraceError(path, e);
    }
}

ProxTrace load_prox_trace(const std::string& path) {
    try {
        return parse_prox_trace(std::string_view(read_file(path)));
    } catch (const TraceError& e) {
        throw TraceError(path, e);
    }
}

std::string format_real(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{})
        throw std::runtime_error("format_real: conversion failed");
    return std::string(buf.data(), ptr);
}

std::string format_accel_trace(const AccelTrace& trace) {
    std::string out;
    out.reserve(trace.size() * 40);
    if (!trace.label().empty())
        out += "# label: " + trace.label() + "\n";
    for (const auto& s : trace.samples()) {
        out += std::to_string(s.t);
        out += ',';
        out += format_real(s.ax);
        out += ',';
        out += format_real(s.ay);
        out += ',';
        out += format_real(s.az);
        out += '\n';
    }
    return out;
}

std::string format_prox_trace(const ProxTrace& trace) {
    std::string out;
    if (!trace.label().empty())
        out += "# label: " + trace.label() + "\n";
    for (const auto& s : trace.samples()) {
        out += std::to_string(s.t);
        out += ',';
        out += format_real(s.value);
        out += '\n';
    }
    return out;
}

void save_accel_trace(const AccelTrace& trace, const std::string& path) {
    write_file(path, format_accel_trace(trace));
}

void save_prox_trace(const ProxTrace& trace, const std::string& path) {
    write_file(path, format_prox_trace(trace));
}

AccelTrace resample(const AccelTrace& trace, std::size_t n) {
    if (n < 2)
        throw std::invalid_argument("resample: n must be at least 2");
    const Millis t0 = trace.front().t;
    const Millis span = trace.span_ms();
    if (span < static_cast<Millis>(n - 1))
        throw std::invalid_argument("resample: trace spans " + std::to_string(span) +
                                    " ms, too short for " + std::to_string(n) + " distinct points");

    const auto src = trace.samples();
    std::vector<AccelSample> out;
    out.reserve(n);
    std::size_t j = 0; // src[j].t <= t < src[j + 1].t
    const auto denom = static_cast<Millis>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        // Round-half-up of t0 + i * span / (n - 1) in integer arithmetic.
        const Millis t = t0 + (2 * static_cast<Millis>(i) * span + denom) / (2 * denom);
        while (j + 1 < src.size() && src[j + 1].t <= t)
            ++j;
        if (src[j].t == t) {
            out.push_back(src[j]);
            continue;
        }
        const auto& lo = src[j];
        const auto& hi = src[j + 1];
        const double w = static_cast<double>(t - lo.t) / static_cast<double>(hi.t - lo.t);
        out.push_back({t, lerp(lo.ax, hi.ax, w), lerp(lo.ay, hi.ay, w), lerp(lo.az, hi.az, w)});
    }
    return AccelTrace(std::move(out), trace.label());
}

std::optional<AccelTrace> slice(const AccelTrace& trace, Millis from, Millis to) {
    const auto src = trace.samples();
    const auto first = std::lower_bound(src.begin(), src.end(), from,
                                        [](const AccelSample& s, Millis t) { return s.t < t; });
    const auto last = std::upper_bound(src.begin(), src.end(), to,
                                       [](Millis t, const AccelSample& s) { return t < s.t; });
    if (first >= last || last - first < 2)
        return std::nullopt;
    return AccelTrace(std::vector<AccelSample>(first, last), trace.label());
}

} // namespace twr
