#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"
#include "rsde/ot/assignment.hpp"
#include "rsde/sim/paths.hpp"

namespace rsde::ot {

/// n samples in R^d, one per row.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(Matrix samples) : samples_(std::move(samples)) {
        if (samples_.rows() == 0 || samples_.cols() == 0) throw ConfigError("empirical measure: need n >= 1 samples");
        for (double v : samples_.data())
            if (!std::isfinite(v)) throw ConfigError("empirical measure: non-finite sample");
    }

    static EmpiricalMeasure from_scalars(const std::vector<double>& xs) {
        Matrix m(xs.size(), 1);
        for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
        return EmpiricalMeasure(std::move(m));
    }

    std::size_t size() const noexcept { return samples_.rows(); }
    std::size_t dimension() const noexcept { return samples_.cols(); }
    const Matrix& samples() const noexcept { return samples_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = samples_(i, j);
        return out;
    }

private:
    Matrix samples_;
};

inline constexpr std::size_t kAssignmentCap = 4096;

namespace detail {

inline void check_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("wasserstein: p must be >= 1");
}

/// Empirical quantile at level u (position u (m + 1) among order statistics,
/// linear interpolation, clamped to the extreme samples).
inline double quantile_sorted(const std::vector<double>& s, double u) {
    const double h = u * static_cast<double>(s.size() + 1) - 1.0;
    if (h <= 0.0) return s.front();
    if (h >= static_cast<double>(s.size() - 1)) return s.back();
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    return s[lo] + frac * (s[lo + 1] - s[lo]);
}

/// Resamples a sorted sample to n points at levels k / (n + 1).
inline std::vector<double> resample_sorted(const std::vector<double>& s, std::size_t n) {
    if (s.size() == n) return s;
    std::vector<double> out(n);
    for (std::size_t k = 1; k <= n; ++k)
        out[k - 1] = quantile_sorted(s, static_cast<double>(k) / static_cast<double>(n + 1));
    return out;
}

}  // namespace detail

/// W_p between one-dimensional empirical measures via the sorted (comonotone)
/// coupling. Unequal sizes are matched by quantile resampling to the larger n.
inline double wasserstein_1d(std::vector<double> a, std::vector<double> b, double p) {
    detail::check_p(p);
    if (a.empty() || b.empty()) throw ConfigError("wasserstein_1d: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = std::max(a.size(), b.size());
    a = detail::resample_sorted(a, n);
    b = detail::resample_sorted(b, n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(a[i] - b[i]), p);
    return std::pow(s / static_cast<double>(n), 1.0 / p);
}

inline double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
    if (a.dimension() != 1 || b.dimension() != 1) throw ConfigError("wasserstein_1d: samples must be one-dimensional");
    return wasserstein_1d(a.column(0), b.column(0), p);
}

/// Exact W_p between equal-size empirical measures in any dimension: the
/// optimal coupling of uniform n-point measures is a permutation, found by
/// the assignment solver on costs |a_i - b_j|^p. O(n^3); n <= 4096.
inline double wasserstein_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
    detail::check_p(p);
    if (a.size() != b.size()) throw ConfigError("wasserstein_exact: sample counts differ");
    if (a.size() > kAssignmentCap) throw ConfigError("wasserstein_exact: n exceeds the assignment cap of 4096");
    if (a.dimension() != b.dimension()) throw ConfigError("wasserstein_exact: dimension mismatch");
    const Matrix& A = a.samples();
    const Matrix& B = b.samples();
    const bool squared = p == 2.0;
    const auto cost = [&](std::size_t i, std::size_t j) {
        const double d2 = distance_sq(A.row(i), B.row(j));
        return squared ? d2 : std::pow(std::sqrt(d2), p);
    };
    const Assignment sol = solve_assignment(a.size(), cost);
    return std::pow(std::max(0.0, sol.cost) / static_cast<double>(a.size()), 1.0 / p);
}

/// W_2 choosing the exact route for the dimension: sorted coupling in d = 1,
/// assignment otherwise.
inline double wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.dimension() == 1) return wasserstein_1d(a, b, 2.0);
    return wasserstein_exact(a, b, 2.0);
}

namespace detail {
inline void check_same_grid(const sim::Path& a, const sim::Path& b) {
    if (a.n_points() != b.n_points() || a.dimension() != b.dimension())
        throw ConfigError("path metric: paths live on different grids");
    if (a.n_points() < 2) throw ConfigError("path metric: need at least one step");
}
}  // namespace detail

/// (sum_{k < n} |a_k - b_k|^2 dt)^{1/2}, left-endpoint rule.
inline double path_d2(const sim::Path& a, const sim::Path& b, const sim::TimeGrid& grid) {
    detail::check_same_grid(a, b);
    if (a.n_points() != grid.n_steps() + 1) throw ConfigError("path_d2: path does not match grid");
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < a.n_points(); ++k) s += distance_sq(a.states.row(k), b.states.row(k));
    return std::sqrt(s * grid.dt());
}

/// max over grid points of |a_k - b_k|.
inline double path_dinf(const sim::Path& a, const sim::Path& b) {
    detail::check_same_grid(a, b);
    double m = 0.0;
    for (std::size_t k = 0; k < a.n_points(); ++k) m = std::max(m, distance(a.states.row(k), b.states.row(k)));
    return m;
}

}  // namespace rsde::ot
