#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/model/coefficients.hpp"
#include "rsde/model/domain.hpp"

namespace rsde::model {

struct ConeReport {
    bool satisfied = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::size_t worst_index = 0;
};

/// Evaluates <x - a, beta(x)> - c |beta(x)| over `grid`; satisfied iff every
/// margin is >= 0.
inline ConeReport check_cone_condition(const ConvexDomain& domain, std::span<const double> a, double c,
                                       const std::vector<Point>& grid) {
    if (grid.empty()) throw ConfigError("check_cone_condition: empty grid");
    if (!(c > 0.0)) throw ConfigError("check_cone_condition: c must be > 0");
    ConeReport r;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point& x = grid[i];
        const Point beta = domain.penalty(x);
        Point xa(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) xa[j] = x[j] - a[j];
        const double margin = dot(xa, beta) - c * norm(beta);
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_index = i;
        }
    }
    r.satisfied = r.worst_margin >= 0.0;
    return r;
}

using PointPair = std::pair<Point, Point>;

struct DissipativityReport {
    bool pass = true;
    double max_margin = -std::numeric_limits<double>::infinity();
    std::size_t worst_index = 0;
    /// lambda_max(A + A^T) + 2 delta, for affine drift with constant diffusion.
    std::optional<double> analytic_margin;
};

/// max over pairs of |sigma(x)-sigma(y)|_HS^2 + 2<x-y, b(x)-b(y)> + 2 delta |x-y|^2.
/// Passes iff the maximum is <= tol.
inline DissipativityReport validate_dissipativity(const CoefficientSpec& sde, const std::vector<PointPair>& pairs,
                                                  double tol = 1e-12) {
    const std::size_t d = sde.dimension();
    const double delta = sde.constants().delta;
    DissipativityReport r;
    Matrix sx(d, d), sy(d, d);
    Point bx(d), by(d);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[i];
        if (x.size() != d || y.size() != d) throw ConfigError("validate_dissipativity: pair dimension mismatch");
        sde.drift(x, bx);
        sde.drift(y, by);
        sde.diffusion(x, sx);
        sde.diffusion(y, sy);
        double inner = 0.0;
        for (std::size_t j = 0; j < d; ++j) inner += (x[j] - y[j]) * (bx[j] - by[j]);
        const double margin = frobenius_distance_sq(sx, sy) + 2.0 * inner + 2.0 * delta * distance_sq(x, y);
        if (margin > r.max_margin) {
            r.max_margin = margin;
            r.worst_index = i;
        }
    }
    if (const auto* a = std::get_if<AffineDrift>(&sde.drift_variant()); a && sde.constant_diffusion()) {
        Matrix s(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) s(i, j) = a->A(i, j) + a->A(j, i);
        r.analytic_margin = symmetric_eigenvalues(s).back() + 2.0 * delta;
    }
    r.pass = (pairs.empty() || r.max_margin <= tol) && (!r.analytic_margin || *r.analytic_margin <= tol);
    return r;
}

/// Smallest eigenvalue of sigma^T sigma over the points, compared with the
/// declared floor lambda.
struct EllipticityReport {
    bool pass = true;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    bool singular = false;
};

inline EllipticityReport validate_ellipticity(const CoefficientSpec& sde, const std::vector<Point>& points,
                                              double tol = 1e-12) {
    EllipticityReport r;
    const std::size_t d = sde.dimension();
    Matrix s(d, d);
    for (const auto& x : points) {
        sde.diffusion(x, s);
        const double ev = symmetric_eigenvalues(transpose_times_self(s)).front();
        r.min_eigenvalue = std::min(r.min_eigenvalue, ev);
    }
    r.singular = r.min_eigenvalue <= 0.0;
    r.pass = r.min_eigenvalue >= sde.constants().lambda - tol;
    return r;
}

/// max over pairs of |<sigma(x)-sigma(y), x-y>| / |x-y| (the left side of the
/// oscillation condition; the matrix acts as (sigma(x)-sigma(y))^T (x-y)).
inline double oscillation_ratio(const CoefficientSpec& sde, const std::vector<PointPair>& pairs) {
    const std::size_t d = sde.dimension();
    Matrix sx(d, d), sy(d, d);
    double worst = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dist = distance(x, y);
        if (dist == 0.0) continue;
        sde.diffusion(x, sx);
        sde.diffusion(y, sy);
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double v = 0.0;
            for (std::size_t i = 0; i < d; ++i) v += (sx(i, j) - sy(i, j)) * (x[i] - y[i]);
            s += v * v;
        }
        worst = std::max(worst, std::sqrt(s) / dist);
    }
    return worst;
}

/// max over pairs of max(|b(x)-b(y)|, |sigma(x)-sigma(y)|_HS) / |x-y|.
inline double lipschitz_ratio(const CoefficientSpec& sde, const std::vector<PointPair>& pairs) {
    const std::size_t d = sde.dimension();
    Matrix sx(d, d), sy(d, d);
    Point bx(d), by(d);
    double worst = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dist = distance(x, y);
        if (dist == 0.0) continue;
        sde.drift(x, bx);
        sde.drift(y, by);
        sde.diffusion(x, sx);
        sde.diffusion(y, sy);
        worst = std::max(worst, std::max(distance(bx, by), std::sqrt(frobenius_distance_sq(sx, sy))) / dist);
    }
    return worst;
}

/// sup over points of the operator norm of sigma.
inline double diffusion_sup(const CoefficientSpec& sde, const std::vector<Point>& points) {
    Matrix s(sde.dimension(), sde.dimension());
    double worst = 0.0;
    for (const auto& x : points) {
        sde.diffusion(x, s);
        worst = std::max(worst, operator_norm(s));
    }
    return worst;
}

namespace detail {
// splitmix64: deterministic, seed-only sampling for validation grids
inline double grid_uniform(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Deterministic sample points in the domain closure. d = 1 uses an even
/// grid (including both ends); higher dimensions draw uniformly from the
/// bounding box and project. Unbounded directions are clipped to
/// [-extent, extent].
inline std::vector<Point> sample_points(const ConvexDomain& domain, std::size_t n, double extent = 5.0,
                                        std::uint64_t seed = 0x5eed) {
    const auto [lo, hi] = domain.bounding_box(extent);
    std::vector<Point> out;
    out.reserve(n);
    if (domain.dimension() == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
            out.push_back(domain.project(Point{lo[0] + t * (hi[0] - lo[0])}));
        }
        return out;
    }
    std::uint64_t state = seed;
    for (std::size_t i = 0; i < n; ++i) {
        Point p(domain.dimension());
        for (std::size_t j = 0; j < p.size(); ++j) p[j] = lo[j] + detail::grid_uniform(state) * (hi[j] - lo[j]);
        out.push_back(domain.project(p));
    }
    return out;
}

inline std::vector<PointPair> sample_pairs(const std::vector<Point>& points, std::size_t max_pairs = 20000) {
    std::vector<PointPair> out;
    for (std::size_t i = 0; i < points.size() && out.size() < max_pairs; ++i)
        for (std::size_t j = i + 1; j < points.size() && out.size() < max_pairs; ++j)
            out.emplace_back(points[i], points[j]);
    return out;
}

}  // namespace rsde::model
