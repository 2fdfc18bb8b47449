#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "rsde/errors.hpp"
#include "rsde/sim/philox.hpp"

namespace rsde::ot {

struct CiEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    double level = 0.95;

    double half_width() const { return normal_quantile(0.5 + 0.5 * level) * std_error; }
    double lower() const { return mean - half_width(); }
    double upper() const { return mean + half_width(); }

    static double normal_quantile(double q) {
        return boost::math::quantile(boost::math::normal_distribution<double>(), q);
    }
};

/// Sample mean with std_error = sample std / sqrt(n) (n - 1 denominator).
inline CiEstimate ci_mean(const std::vector<double>& values, double level = 0.95) {
    if (values.size() < 2) throw StatisticsError("ci_mean: need at least 2 values");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("ci_mean: level must lie in (0, 1)");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n), values.size(), level};
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw StatisticsError("median of empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

/// Wilson score interval for a binomial proportion at normal quantile z.
struct WilsonInterval {
    double lower;
    double upper;
};

inline WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) throw StatisticsError("wilson_interval: zero trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Delta-method standard error of g(mean_a, mean_b) = ga * mean_a + gb * mean_b
/// linearised, from paired samples.
inline double paired_linear_se(const std::vector<double>& a, const std::vector<double>& b, double ga, double gb) {
    if (a.size() != b.size() || a.size() < 2) throw StatisticsError("paired_linear_se: need matched samples, n >= 2");
    const double n = static_cast<double>(a.size());
    const double ma = mean_of(a), mb = mean_of(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = ga * (a[i] - ma) + gb * (b[i] - mb);
        s += v * v;
    }
    return std::sqrt(s / (n - 1.0) / n);
}

/// Nonparametric bootstrap standard error of `stat` over `replicates`
/// resamples drawn from the counter-based stream `id`.
template <class Stat>
double bootstrap_se(std::size_t n, std::size_t replicates, sim::StreamId id, Stat&& stat) {
    if (replicates < 2) throw StatisticsError("bootstrap: need at least 2 replicates");
    std::vector<double> values;
    values.reserve(replicates);
    std::vector<std::size_t> idx(n);
    for (std::size_t r = 0; r < replicates; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double u = sim::uniform_at(id, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(i));
            idx[i] = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
        }
        values.push_back(stat(idx));
    }
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(replicates - 1));
}

}  // namespace rsde::ot
