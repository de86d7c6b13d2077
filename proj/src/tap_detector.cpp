#include "twr/tap_detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace twr {

namespace {

constexpr std::array<Axis, 3> kAxes = {Axis::X, Axis::Y, Axis::Z};

bool is_constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double mean_of(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v)
        sum += x;
    return sum / static_cast<double>(v.size());
}

double finish(double cross, double sum_sq_a, double sum_sq_b) {
    const double denom = std::sqrt(sum_sq_a) * std::sqrt(sum_sq_b);
    if (!(denom > 0.0))
        return 0.0;
    return std::clamp(cross / denom, -1.0, 1.0);
}

std::vector<double> axis_of(std::span<const AccelSample> samples, Axis a) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(s.axis(a));
    return out;
}

void require_same_length(const AccelTrace& a, const AccelTrace& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("traces differ in length (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + "); resample first");
}

/// Upper triangle (i < j) of the pairwise score matrix, row-major.
std::vector<double> pair_scores(std::span<const AccelTrace> traces, AxisRule rule) {
    std::vector<double> out;
    out.reserve(traces.size() * (traces.size() - 1) / 2);
    for (std::size_t i = 0; i < traces.size(); ++i)
        for (std::size_t j = i + 1; j < traces.size(); ++j)
            out.push_back(cross_correlation(traces[i], traces[j], rule));
    return out;
}

void require_training_set(std::span<const AccelTrace> traces) {
    if (traces.size() < 2)
        throw std::invalid_argument("need at least 2 traces (got " + std::to_string(traces.size()) + ")");
}

} // namespace

std::string_view to_string(AxisRule rule) noexcept {
    switch (rule) {
    case AxisRule::Mean: return "mean";
    case AxisRule::Min: return "min";
    case AxisRule::AllAxes: return "all_axes";
    }
    return "mean";
}

AxisRule parse_axis_rule(std::string_view text) {
    if (text == "mean")
        return AxisRule::Mean;
    if (text == "min")
        return AxisRule::Min;
    if (text == "all_axes" || text == "all-axes")
        return AxisRule::AllAxes;
    throw std::invalid_argument("unknown axis rule '" + std::string(text) + "'");
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("pearson: series differ in length");
    if (a.size() < 2)
        throw std::invalid_argument("pearson: need at least 2 points");
    if (is_constant(a) || is_constant(b))
        return 0.0;
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double cross = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cross += da * db;
        saa += da * da;
        sbb += db * db;
    }
    return finish(cross, saa, sbb);
}

double combine_axes(const std::array<double, 3>& c, AxisRule rule) noexcept {
    switch (rule) {
    case AxisRule::Mean: return (c[0] + c[1] + c[2]) / 3.0;
    case AxisRule::Min:
    case AxisRule::AllAxes: return std::min({c[0], c[1], c[2]});
    }
    return 0.0;
}

std::array<double, 3> axis_correlations(const AccelTrace& a, const AccelTrace& b) {
    require_same_length(a, b);
    std::array<double, 3> out{};
    for (std::size_t k = 0; k < 3; ++k)
        out[k] = pearson(a.axis(kAxes[k]), b.axis(kAxes[k]));
    return out;
}

double cross_correlation(const AccelTrace& a, const AccelTrace& reference, AxisRule rule) {
    return combine_axes(axis_correlations(a, reference), rule);
}

GestureTemplate::GestureTemplate(AccelTrace reference, double threshold, AxisRule rule,
                                 std::size_t created_from)
    : reference_(std::move(reference)), threshold_(threshold), rule_(rule), created_from_(created_from) {
    if (!(threshold_ >= -1.0 && threshold_ <= 1.0))
        throw std::invalid_argument("template threshold must lie in [-1, 1]");
    if (created_from_ < 2)
        throw std::invalid_argument("template must be built from at least 2 traces");
    for (std::size_t k = 0; k < 3; ++k) {
        auto& c = axes_[k];
        c.dev = reference_.axis(kAxes[k]);
        c.constant = is_constant(c.dev);
        const double m = mean_of(c.dev);
        for (double& x : c.dev) {
            x -= m;
            c.sum_sq += x * x;
        }
    }
}

double GestureTemplate::score(const AccelTrace& a) const {
    if (a.size() != n())
        throw std::invalid_argument("trace has " + std::to_string(a.size()) + " samples, template expects " +
                                    std::to_string(n()));
    std::array<double, 3> per_axis{};
    const auto samples = a.samples();
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& ref = axes_[k];
        const auto series = axis_of(samples, kAxes[k]);
        if (ref.constant || is_constant(series)) {
            per_axis[k] = 0.0;
            continue;
        }
        const double ma = mean_of(series);
        double cross = 0.0, saa = 0.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double da = series[i] - ma;
            cross += da * ref.dev[i];
            saa += da * da;
        }
        per_axis[k] = finish(cross, saa, ref.sum_sq);
    }
    return combine_axes(per_axis, rule_);
}

double cross_correlation(const AccelTrace& a, const GestureTemplate& t) {
    return t.score(a);
}

double compute_threshold(std::span<const AccelTrace> traces, AxisRule rule) {
    require_training_set(traces);
    for (const auto& tr : traces)
        require_same_length(tr, traces.front());
    const auto scores = pair_scores(traces, rule);
    return *std::min_element(scores.begin(), scores.end());
}

GestureTemplate build_template(std::span<const AccelTrace> traces, std::size_t n, AxisRule rule) {
    require_training_set(traces);
    std::vector<AccelTrace> grid;
    grid.reserve(traces.size());
    for (const auto& tr : traces)
        grid.push_back(resample(tr, n));

    const std::size_t m = grid.size();
    const auto scores = pair_scores(grid, rule);
    std::vector<double> row_sum(m, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j, ++k) {
            row_sum[i] += scores[k];
            row_sum[j] += scores[k];
        }
    // Every row has m - 1 terms, so the largest sum is the largest mean.
    const auto medoid = static_cast<std::size_t>(
        std::distance(row_sum.begin(), std::max_element(row_sum.begin(), row_sum.end())));
    const double threshold = *std::min_element(scores.begin(), scores.end());
    return GestureTemplate(std::move(grid[medoid]), threshold, rule, m);
}

MatchResult match(const AccelTrace& a, const GestureTemplate& t) {
    const double score = t.score(resample(a, t.n()));
    return {score, score >= t.threshold(), 0};
}

std::size_t default_stride(const GestureTemplate& t) noexcept {
    return std::max<std::size_t>(1, t.n() / 10);
}

std::size_t window_samples(const AccelTrace& buffer, const GestureTemplate& t) {
    const double dt = static_cast<double>(buffer.span_ms()) / static_cast<double>(buffer.size() - 1);
    const double span = static_cast<double>(t.reference().span_ms());
    return static_cast<std::size_t>(std::llround(span / dt)) + 1;
}

std::vector<MatchResult> score_windows(const AccelTrace& buffer, const GestureTemplate& t,
                                       std::size_t stride) {
    if (stride == 0)
        throw std::invalid_argument("scan stride must be positive");
    const std::size_t w = window_samples(buffer, t);
    if (w > buffer.size())
        throw std::invalid_argument("buffer of " + std::to_string(buffer.size()) +
                                    " samples is shorter than one window (" + std::to_string(w) + ")");

    std::vector<std::size_t> offsets;
    for (std::size_t off = 0; off + w <= buffer.size(); off += stride)
        offsets.push_back(off);
    if (offsets.back() + w != buffer.size())
        offsets.push_back(buffer.size() - w);

    const auto all = buffer.samples();
    std::vector<MatchResult> out;
    out.reserve(offsets.size());
    for (const auto off : offsets) {
        const AccelTrace window(std::vector<AccelSample>(all.begin() + off, all.begin() + off + w));
        const double score = t.score(resample(window, t.n()));
        out.push_back({score, score >= t.threshold(), off});
    }
    return out;
}

std::vector<MatchResult> scan_stream(const AccelTrace& buffer, const GestureTemplate& t,
                                     std::size_t stride) {
    const std::size_t w = window_samples(buffer, t);
    std::vector<MatchResult> hits;
    for (const auto& r : score_windows(buffer, t, stride))
        if (r.matched)
            hits.push_back(r);

    std::stable_sort(hits.begin(), hits.end(),
                     [](const MatchResult& a, const MatchResult& b) { return a.score > b.score; });
    std::vector<MatchResult> kept;
    for (const auto& h : hits) {
        const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const MatchResult& k) {
            const auto d = h.offset > k.offset ? h.offset - k.offset : k.offset - h.offset;
            return d < w;
        });
        if (!overlaps)
            kept.push_back(h);
    }
    std::sort(kept.begin(), kept.end(),
              [](const MatchResult& a, const MatchResult& b) { return a.offset < b.offset; });
    return kept;
}

} // namespace twr
