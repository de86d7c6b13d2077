#include "twr/synth_harness.hpp"

#include <cmath>
#include <stdexcept>

// Deliberately naive: one loop per sum, no caching, no shared helpers with
// the detector. Production scores are checked against these.

namespace twr::oracle {

namespace {

double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    bool a_varies = false, b_varies = false;
    for (std::size_t i = 1; i < n; ++i) {
        if (a[i] != a[0])
            a_varies = true;
        if (b[i] != b[0])
            b_varies = true;
    }
    if (!a_varies || !b_varies)
        return 0.0;

    double sum_a = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum_a += a[i];
    double sum_b = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum_b += b[i];
    const double mean_a = sum_a / static_cast<double>(n);
    const double mean_b = sum_b / static_cast<double>(n);

    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        num += (a[i] - mean_a) * (b[i] - mean_b);
    double var_a = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        var_a += (a[i] - mean_a) * (a[i] - mean_a);
    double var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        var_b += (b[i] - mean_b) * (b[i] - mean_b);

    const double den = std::sqrt(var_a) * std::sqrt(var_b);
    if (!(den > 0.0))
        return 0.0;
    double c = num / den;
    if (c > 1.0)
        c = 1.0;
    if (c < -1.0)
        c = -1.0;
    return c;
}

} // namespace

double naive_cross_correlation(const AccelTrace& a, const AccelTrace& b, AxisRule rule) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("oracle: traces must share a length of at least 2");
    std::vector<double> ax, ay, az, bx, by, bz;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ax.push_back(a[i].ax);
        ay.push_back(a[i].ay);
        az.push_back(a[i].az);
        bx.push_back(b[i].ax);
        by.push_back(b[i].ay);
        bz.push_back(b[i].az);
    }
    const double cx = naive_pearson(ax, bx);
    const double cy = naive_pearson(ay, by);
    const double cz = naive_pearson(az, bz);
    if (rule == AxisRule::Mean)
        return (cx + cy + cz) / 3.0;
    double m = cx;
    if (cy < m)
        m = cy;
    if (cz < m)
        m = cz;
    return m;
}

std::vector<std::vector<double>> brute_force_pair_matrix(std::span<const AccelTrace> traces, AxisRule rule) {
    if (traces.size() < 2)
        throw std::invalid_argument("oracle: need at least 2 traces");
    const std::size_t m = traces.size();
    std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            out[i][j] = naive_cross_correlation(traces[i], traces[j], rule);
    return out;
}

} // namespace twr::oracle
