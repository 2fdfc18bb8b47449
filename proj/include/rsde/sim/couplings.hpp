#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"
#include "rsde/model/coefficients.hpp"
#include "rsde/model/domain.hpp"
#include "rsde/sim/paths.hpp"
#include "rsde/sim/schemes.hpp"

namespace rsde::sim {

/// Bounded drift perturbation rho(t, x) with a declared sup-norm. Evaluations
/// exceeding the declaration raise ModelError.
struct RhoSpec {
    std::string kind;
    std::function<void(double t, std::span<const double> x, std::span<double> out)> fn;
    double sup_norm = 0.0;

    static RhoSpec zero() {
        return {"zero", [](double, std::span<const double>, std::span<double> out) {
                    std::fill(out.begin(), out.end(), 0.0);
                }, 0.0};
    }

    static RhoSpec constant(Point value) {
        const double n = norm(value);
        return {"constant",
                [value](double, std::span<const double>, std::span<double> out) {
                    std::copy(value.begin(), value.end(), out.begin());
                },
                n};
    }

    /// amplitude * sin(2 pi frequency t) along the first coordinate.
    static RhoSpec sinusoid(double amplitude, double frequency) {
        return {"sinusoid",
                [amplitude, frequency](double t, std::span<const double>, std::span<double> out) {
                    std::fill(out.begin(), out.end(), 0.0);
                    out[0] = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
                },
                std::abs(amplitude)};
    }

    /// -gain * x, clipped to norm <= bound.
    static RhoSpec feedback_clamped(double gain, double bound) {
        return {"feedback_clamped",
                [gain, bound](double, std::span<const double> x, std::span<double> out) {
                    double n = 0.0;
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        out[j] = -gain * x[j];
                        n += out[j] * out[j];
                    }
                    n = std::sqrt(n);
                    if (n > bound)
                        for (auto& v : out) v *= bound / n;
                },
                bound};
    }

    RhoSpec scaled(double factor) const {
        auto f = fn;
        return {kind, [f, factor](double t, std::span<const double> x, std::span<double> out) {
                    f(t, x, out);
                    for (auto& v : out) v *= factor;
                }, sup_norm * std::abs(factor)};
    }
};

struct GirsanovCoupledPaths {
    ReflectedPath x_path;  ///< carries the extra drift sigma(X) rho
    ReflectedPath y_path;  ///< unperturbed, same noise
    double rho_energy = 0.0;  ///< sum_k |rho(t_k, X_k)|^2 dt
};

/// X with extra drift sigma(X) rho and Y without, both projected and driven by
/// the same increments. Entropy estimate: H = mean(rho_energy) / 2.
inline GirsanovCoupledPaths girsanov_coupled(const model::CoefficientSpec& sde, const model::ConvexDomain& domain,
                                             std::span<const double> x0, const RhoSpec& rho, const TimeGrid& grid,
                                             const NoisePanel& noise, const SimOptions& opts = {}) {
    const std::size_t d = sde.dimension();
    const double dt = grid.dt();
    double energy = 0.0;
    Point r(d);
    Matrix sigma(d, d);
    const double tol = rho.sup_norm * (1.0 + 1e-12) + 1e-300;
    ExtraDrift extra = [&](std::size_t k, std::span<const double> x, std::span<double> out) {
        rho.fn(grid.t(k), x, r);
        const double rn = norm_sq(r);
        if (std::sqrt(rn) > tol) throw ModelError("rho exceeds its declared sup-norm");
        energy += rn * dt;
        sde.diffusion(x, sigma);
        mat_vec(sigma, r, out);
    };
    GirsanovCoupledPaths out;
    out.x_path = projected_path(sde, domain, x0, grid, noise, opts, extra);
    out.y_path = projected_path(sde, domain, x0, grid, noise, opts);
    out.rho_energy = energy;
    return out;
}

/// xi(t) = ((2 - theta) / (2 delta)) (e^{2 delta (T - t)} - 1): positive on
/// [0, T), zero at T, with 2 + 2 delta xi + xi' = theta.
inline double xi_at(double delta, double theta, double T, double t) {
    return (2.0 - theta) / (2.0 * delta) * std::expm1(2.0 * delta * (T - t));
}

inline double xi_derivative_at(double delta, double theta, double T, double t) {
    return -(2.0 - theta) * std::exp(2.0 * delta * (T - t));
}

inline std::vector<double> xi_schedule(double delta, double theta, const TimeGrid& grid) {
    if (!(theta > 0.0 && theta < 2.0)) throw ConfigError("xi_schedule: theta must lie in (0, 2)");
    if (!(delta > 0.0)) throw ConfigError("xi_schedule: delta must be > 0");
    std::vector<double> xi(grid.n_steps());
    for (std::size_t k = 0; k < grid.n_steps(); ++k) xi[k] = xi_at(delta, theta, grid.T(), grid.t(k));
    return xi;
}

struct HarnackOptions {
    double theta = 1.0;
    double meeting_tol = 1e-6;
};

struct HarnackCoupledPaths {
    ReflectedPath x_path;
    ReflectedPath y_path;
    double log_weight = 0.0;  ///< log R_T
    bool met = false;
    std::optional<std::size_t> meeting_step;
    bool forced_glue = false;  ///< true when the pair was glued at the horizon
    double glue_gap = 0.0;     ///< |X - Y| at the glue point
};

/// Coupling under P: X is the reflected diffusion from x; Y from y carries the
/// extra drift (1/xi) sigma(Y) sigma(X)^{-1} (X - Y). log R accumulates
/// -sum (1/xi)<sigma(X)^{-1}(X - Y), dB> - (1/2) sum (1/xi^2)|sigma(X)^{-1}(X - Y)|^2 dt.
/// The pair is glued (Y := X, log R frozen) once |X - Y| <= meeting_tol, and
/// unconditionally at the terminal state.
inline HarnackCoupledPaths harnack_coupled(const model::CoefficientSpec& sde, const model::ConvexDomain& domain,
                                           std::span<const double> x, std::span<const double> y,
                                           const TimeGrid& grid, const NoisePanel& noise,
                                           const HarnackOptions& hopts, const SimOptions& opts = {}) {
    const std::size_t d = sde.dimension();
    if (domain.dimension() != d || x.size() != d || y.size() != d)
        throw ConfigError("harnack_coupled: dimension mismatch");
    detail::check_noise(noise, grid, d);
    detail::check_start(domain, x);
    detail::check_start(domain, y);
    const auto xi = xi_schedule(sde.constants().delta, hopts.theta, grid);
    const double dt = grid.dt();
    const std::size_t n = grid.n_steps();

    HarnackCoupledPaths out;
    out.x_path = ReflectedPath{Matrix(n + 1, d), Matrix(n, d), 0.0};
    out.y_path = ReflectedPath{Matrix(n + 1, d), Matrix(n, d), 0.0};
    std::copy(x.begin(), x.end(), out.x_path.states.row(0).begin());
    std::copy(y.begin(), y.end(), out.y_path.states.row(0).begin());

    detail::StepBuffers bx(d), by(d);
    Point diff(d), u(d), tilde_x(d), tilde_y(d), sig_y_u(d);
    bool glued = distance(x, y) <= hopts.meeting_tol;
    if (glued) {
        out.met = true;
        out.meeting_step = 0;
        std::copy(x.begin(), x.end(), out.y_path.states.row(0).begin());
    }

    const auto step_reflect = [&](ReflectedPath& p, std::size_t k, std::span<const double> tilde) {
        auto next = p.states.row(k + 1);
        domain.project(tilde, next);
        auto eta = p.eta_increments.row(k);
        double tv = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            eta[j] = tilde[j] - next[j];
            tv += eta[j] * eta[j];
        }
        p.eta_total_variation += std::sqrt(tv);
    };

    for (std::size_t k = 0; k < n; ++k) {
        auto X = out.x_path.states.row(k);
        auto Y = out.y_path.states.row(k);
        const auto dB = noise.increments.row(k);
        detail::euler_increment(sde, X, dB, dt, bx, tilde_x);
        check_finite(tilde_x, k + 1, opts.blowup_guard);
        step_reflect(out.x_path, k, tilde_x);
        if (glued) {
            std::copy(out.x_path.states.row(k + 1).begin(), out.x_path.states.row(k + 1).end(),
                      out.y_path.states.row(k + 1).begin());
            for (std::size_t j = 0; j < d; ++j) out.y_path.eta_increments(k, j) = out.x_path.eta_increments(k, j);
            out.y_path.eta_total_variation = out.x_path.eta_total_variation;
            continue;
        }
        for (std::size_t j = 0; j < d; ++j) diff[j] = X[j] - Y[j];
        if (!solve(bx.sigma, diff, u)) throw ModelError("singular diffusion matrix at a visited state");
        for (auto& v : u) v /= xi[k];
        out.log_weight += -dot(u, dB) - 0.5 * norm_sq(u) * dt;

        detail::euler_increment(sde, Y, dB, dt, by, tilde_y);
        mat_vec(by.sigma, u, sig_y_u);
        for (std::size_t j = 0; j < d; ++j) tilde_y[j] += sig_y_u[j] * dt;
        check_finite(tilde_y, k + 1, opts.blowup_guard);
        step_reflect(out.y_path, k, tilde_y);

        const double gap = distance(out.x_path.states.row(k + 1), out.y_path.states.row(k + 1));
        const bool last = k + 1 == n;
        if (gap <= hopts.meeting_tol || last) {
            glued = true;
            out.met = true;
            out.meeting_step = k + 1;
            out.forced_glue = gap > hopts.meeting_tol;
            out.glue_gap = gap;
            std::copy(out.x_path.states.row(k + 1).begin(), out.x_path.states.row(k + 1).end(),
                      out.y_path.states.row(k + 1).begin());
        }
    }
    return out;
}

}  // namespace rsde::sim
