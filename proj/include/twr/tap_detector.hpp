#pragma once

#include "twr/sensor_model.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace twr {

/// How the three per-axis correlations collapse into one score.
/// AllAxes takes the minimum like Min; it names the "every axis must agree"
/// reading for callers that do not threshold axes individually.
enum class AxisRule { Mean, Min, AllAxes };

std::string_view to_string(AxisRule rule) noexcept;
/// Accepts "mean", "min", "all_axes" (also "all-axes"). Throws std::invalid_argument.
AxisRule parse_axis_rule(std::string_view text);

/// Pearson correlation of two equal-length series (n >= 2), clamped to
/// [-1, 1]. A constant series carries no evidence of similarity and scores 0.
/// Throws std::invalid_argument on length mismatch or n < 2.
double pearson(std::span<const double> a, std::span<const double> b);

double combine_axes(const std::array<double, 3>& per_axis, AxisRule rule) noexcept;

/// Per-axis Pearson scores of two traces with the same number of samples.
std::array<double, 3> axis_correlations(const AccelTrace& a, const AccelTrace& b);

/// Score of `a` against `reference`; both must have the same sample count.
double cross_correlation(const AccelTrace& a, const AccelTrace& reference, AxisRule rule);

/// A trained tap gesture: reference trace on an n-point grid and the
/// inclusive acceptance threshold derived from its training set.
class GestureTemplate {
public:
    GestureTemplate(AccelTrace reference, double threshold, AxisRule rule, std::size_t created_from);

    const AccelTrace& reference() const noexcept { return reference_; }
    std::size_t n() const noexcept { return reference_.size(); }
    double threshold() const noexcept { return threshold_; }
    AxisRule axis_rule() const noexcept { return rule_; }
    std::size_t created_from() const noexcept { return created_from_; }

    /// Score of a trace already resampled to n() points.
    double score(const AccelTrace& a) const;

    friend bool operator==(const GestureTemplate& l, const GestureTemplate& r) {
        return l.reference_ == r.reference_ && l.threshold_ == r.threshold_ &&
               l.rule_ == r.rule_ && l.created_from_ == r.created_from_;
    }

private:
    struct Centered {
        std::vector<double> dev;
        double sum_sq = 0.0;
        bool constant = false;
    };

    AccelTrace reference_;
    double threshold_;
    AxisRule rule_;
    std::size_t created_from_;
    std::array<Centered, 3> axes_;
};

double cross_correlation(const AccelTrace& a, const GestureTemplate& t);

/// Minimum pairwise score over all unordered pairs of equal-length traces.
/// Throws std::invalid_argument for fewer than two traces or unequal lengths.
double compute_threshold(std::span<const AccelTrace> traces, AxisRule rule);

/// Resamples every training trace to n points, keeps the medoid (highest
/// mean score against the others, lowest index on ties) as the reference and
/// sets the threshold to the minimum pairwise score.
GestureTemplate build_template(std::span<const AccelTrace> traces, std::size_t n, AxisRule rule);

struct MatchResult {
    double score = 0.0;
    bool matched = false;
    std::size_t offset = 0; // first buffer sample of the window

    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Resamples `a` to the template grid and compares against the threshold (inclusive).
MatchResult match(const AccelTrace& a, const GestureTemplate& t);

/// Stride used when the caller does not pick one: a tenth of the template length.
std::size_t default_stride(const GestureTemplate& t) noexcept;

/// Number of buffer samples covering the template's time span at the
/// buffer's mean sample rate.
std::size_t window_samples(const AccelTrace& buffer, const GestureTemplate& t);

/// Scores every window of the sliding scan: offsets 0, stride, 2*stride, ...
/// plus a final window aligned to the end of the buffer. Throws
/// std::invalid_argument when the buffer is shorter than one window.
std::vector<MatchResult> score_windows(const AccelTrace& buffer, const GestureTemplate& t,
                                       std::size_t stride);

/// Matched windows after non-maximum suppression: a detection survives only
/// if no higher-scoring detection starts less than one window length away.
/// Results are ordered by offset.
std::vector<MatchResult> scan_stream(const AccelTrace& buffer, const GestureTemplate& t,
                                     std::size_t stride);

} // namespace twr
