#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"
#include "rsde/model/coefficients.hpp"
#include "rsde/model/domain.hpp"
#include "rsde/model/measure.hpp"
#include "rsde/sim/paths.hpp"

namespace rsde::sim {

struct SimOptions {
    double blowup_guard = 1e12;
};

/// Extra drift term added on step k given the current state; used by the
/// Girsanov coupling. Writes into `out` (dimension d).
using ExtraDrift = std::function<void(std::size_t k, std::span<const double> x, std::span<double> out)>;

namespace detail {

/// Workspace for one explicit step; sized once per path.
struct StepBuffers {
    explicit StepBuffers(std::size_t d) : b(d), noise_term(d), extra(d), sigma(d, d) {}
    Point b, noise_term, extra;
    Matrix sigma;
};

/// out = x + b(x) dt + sigma(x) dB
inline void euler_increment(const model::CoefficientSpec& sde, std::span<const double> x,
                            std::span<const double> dB, double dt, StepBuffers& buf, std::span<double> out) {
    sde.drift(x, buf.b);
    sde.diffusion(x, buf.sigma);
    mat_vec(buf.sigma, dB, buf.noise_term);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + buf.b[j] * dt + buf.noise_term[j];
}

inline void check_start(const model::ConvexDomain& domain, std::span<const double> x0) {
    if (!domain.contains(x0)) throw ConfigError("initial point lies outside the domain closure");
}

inline void check_noise(const NoisePanel& noise, const TimeGrid& grid, std::size_t d) {
    if (noise.increments.rows() != grid.n_steps() || noise.increments.cols() != d)
        throw ConfigError("noise panel does not match grid/dimension");
}

}  // namespace detail

/// Explicit Euler-Maruyama: X_{k+1} = X_k + b(X_k) dt + sigma(X_k) dB_k.
inline Path euler_path(const model::CoefficientSpec& sde, std::span<const double> x0, const TimeGrid& grid,
                       const NoisePanel& noise, const SimOptions& opts = {}) {
    const std::size_t d = sde.dimension();
    if (x0.size() != d) throw ConfigError("euler_path: x0 dimension mismatch");
    detail::check_noise(noise, grid, d);
    check_finite(x0, 0, opts.blowup_guard);
    Path p{Matrix(grid.n_steps() + 1, d)};
    std::copy(x0.begin(), x0.end(), p.states.row(0).begin());
    detail::StepBuffers buf(d);
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        detail::euler_increment(sde, p.states.row(k), noise.increments.row(k), dt, buf, p.states.row(k + 1));
        check_finite(p.states.row(k + 1), k + 1, opts.blowup_guard);
    }
    return p;
}

/// Penalized scheme X_{k+1} = X_k + b dt + sigma dB - (dt/eps) beta(X_k),
/// eta increment (dt/eps) beta(X_k). Requires dt <= eps/2.
inline ReflectedPath penalized_path(const model::CoefficientSpec& sde, const model::ConvexDomain& domain, double eps,
                                    std::span<const double> x0, const TimeGrid& grid, const NoisePanel& noise,
                                    const SimOptions& opts = {}) {
    const std::size_t d = sde.dimension();
    if (!(eps > 0.0)) throw ConfigError("penalized_path: eps must be > 0");
    if (grid.dt() > eps / 2.0)
        throw ConfigError("penalized_path: stiffness rule violated, need dt <= eps/2 (dt = " +
                          std::to_string(grid.dt()) + ", eps = " + std::to_string(eps) + ")");
    if (domain.dimension() != d || x0.size() != d) throw ConfigError("penalized_path: dimension mismatch");
    detail::check_noise(noise, grid, d);
    detail::check_start(domain, x0);
    ReflectedPath p{Matrix(grid.n_steps() + 1, d), Matrix(grid.n_steps(), d), 0.0};
    std::copy(x0.begin(), x0.end(), p.states.row(0).begin());
    detail::StepBuffers buf(d);
    Point proj(d);
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        auto xk = p.states.row(k);
        auto next = p.states.row(k + 1);
        auto eta = p.eta_increments.row(k);
        domain.project(xk, proj);
        detail::euler_increment(sde, xk, noise.increments.row(k), dt, buf, next);
        double tv = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            eta[j] = (dt / eps) * (xk[j] - proj[j]);
            next[j] -= eta[j];
            tv += eta[j] * eta[j];
        }
        p.eta_total_variation += std::sqrt(tv);
        check_finite(next, k + 1, opts.blowup_guard);
    }
    return p;
}

/// Projected scheme: X~ = X_k + b dt + sigma dB (+ extra dt), X_{k+1} = P(X~),
/// eta increment X~ - X_{k+1}. States always lie in the closure.
inline ReflectedPath projected_path(const model::CoefficientSpec& sde, const model::ConvexDomain& domain,
                                    std::span<const double> x0, const TimeGrid& grid, const NoisePanel& noise,
                                    const SimOptions& opts = {}, const ExtraDrift& extra = {}) {
    const std::size_t d = sde.dimension();
    if (domain.dimension() != d || x0.size() != d) throw ConfigError("projected_path: dimension mismatch");
    detail::check_noise(noise, grid, d);
    detail::check_start(domain, x0);
    ReflectedPath p{Matrix(grid.n_steps() + 1, d), Matrix(grid.n_steps(), d), 0.0};
    std::copy(x0.begin(), x0.end(), p.states.row(0).begin());
    detail::StepBuffers buf(d);
    Point tilde(d);
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        auto xk = p.states.row(k);
        detail::euler_increment(sde, xk, noise.increments.row(k), dt, buf, tilde);
        if (extra) {
            extra(k, xk, buf.extra);
            for (std::size_t j = 0; j < d; ++j) tilde[j] += buf.extra[j] * dt;
        }
        check_finite(tilde, k + 1, opts.blowup_guard);
        auto next = p.states.row(k + 1);
        domain.project(tilde, next);
        auto eta = p.eta_increments.row(k);
        double tv = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            eta[j] = tilde[j] - next[j];
            tv += eta[j] * eta[j];
        }
        p.eta_total_variation += std::sqrt(tv);
    }
    return p;
}

/// Transform plus transformed coefficients of a local-time equation,
/// built once and shared by every path.
struct SdelModel {
    model::LeGallTransform transform;
    model::CoefficientSpec transformed;

    SdelModel(const model::CoefficientSpec& sde, const model::SignedMeasure& nu,
              std::optional<model::DeclaredConstants> transformed_constants = std::nullopt)
        : transform(model::build_transform(nu)),
          transformed(model::transform_coefficients(sde, transform, transformed_constants)) {}

    double to_y(double x) const { return transform.F(x); }
    double to_x(double y) const { return transform.F_inverse(y); }
};

/// Simulates Y = F(X) by Euler-Maruyama on the transformed coefficients and
/// maps back pointwise, X_k = F^{-1}(Y_k).
inline Path sdel_path(const SdelModel& m, double x0, const TimeGrid& grid, const NoisePanel& noise,
                      const SimOptions& opts = {}) {
    const double y0[1] = {m.to_y(x0)};
    Path y = euler_path(m.transformed, y0, grid, noise, opts);
    for (std::size_t k = 0; k < y.n_points(); ++k) y.states(k, 0) = m.to_x(y.states(k, 0));
    return y;
}

inline Path sdel_path(const model::CoefficientSpec& sde, const model::SignedMeasure& nu, double x0,
                      const TimeGrid& grid, const NoisePanel& noise, const SimOptions& opts = {}) {
    return sdel_path(SdelModel(sde, nu), x0, grid, noise, opts);
}

}  // namespace rsde::sim
