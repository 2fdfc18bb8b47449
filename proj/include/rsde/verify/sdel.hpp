#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/model/validation.hpp"
#include "rsde/sim/schemes.hpp"
#include "rsde/verify/checks.hpp"

namespace rsde::verify {

/// Parameters of the local-time suite. Points are given for X; the checks
/// run on Y = F(X) and bounds for X follow from F^{-1} being 1/m-Lipschitz
/// and F being M-Lipschitz.
struct SdelParams {
    double x = 0.0;
    double y = 0.0;
    double p = 2.0;
    std::vector<double> times{1.0, 2.0, 3.0};
    TestFunction f = TestFunction::constant(1.0);
    sim::RhoSpec rho = sim::RhoSpec::zero();
    std::size_t invariant_samples = 0;
    std::size_t bootstrap_replicates = 30;
    bool harnack = true;
};

inline std::vector<ExperimentReport> check_sdel_suite_once(const CheckContext& ctx, const std::string& name,
                                                           const SdelParams& p) {
    if (ctx.sde.dimension() != 1) throw ConfigError("check_sdel_suite: local-time equations are one-dimensional");
    if (!ctx.measure) throw ConfigError("check_sdel_suite: model.measure is required");
    const sim::SdelModel m(ctx.sde, *ctx.measure, ctx.transformed_constants);
    const auto& sde_y = m.transformed;
    const auto whole = model::ConvexDomain::whole_space(1);
    const double mm = m.transform.m(), MM = m.transform.M();
    const Observe to_x = [&m](std::span<double> v) { v[0] = m.to_x(v[0]); };
    const Point y0{m.to_y(p.x)}, y1{m.to_y(p.y)};

    std::vector<ExperimentReport> out;

    // transformed coefficients: dissipativity on a grid (violations raise), Lipschitz ratio reported
    {
        auto rep = detail::start_report(ctx, "check_sdel_suite", name + "/transform");
        const auto pairs = detail::validation_pairs(ctx, whole);
        const auto diss = detail::require_dissipative(ctx, sde_y, whole, "(transformed constants)");
        rep.add_row(0.0, diss.max_margin, 0.0, 0.0);
        rep.metadata["m"] = mm;
        rep.metadata["M"] = MM;
        rep.metadata["lipschitz_ratio"] = model::lipschitz_ratio(sde_y, pairs);
        rep.metadata["exact_coefficients"] = !std::holds_alternative<model::CallbackDrift>(sde_y.drift_variant());
        rep.finalize();
        out.push_back(std::move(rep));
    }

    const auto& k = sde_y.constants();
    const double C_y = k.sigma_sup * k.sigma_sup / (k.delta * k.delta);
    {
        auto ry = detail::start_report(ctx, "check_sdel_suite", name + "/t2_d2_y");
        auto rx = detail::start_report(ctx, "check_sdel_suite", name + "/t2_d2_x");
        const auto sy = detail::witness_samples(ctx, sde_y, whole, y0, p.rho, PathMetric::d2, {});
        const auto sx = detail::witness_samples(ctx, sde_y, whole, y0, p.rho, PathMetric::d2, to_x);
        detail::witness_row(ry, 1.0, sy, C_y);
        detail::witness_row(rx, 1.0, sx, C_y / (mm * mm));
        ry.metadata["C"] = C_y;
        rx.metadata["C"] = C_y / (mm * mm);
        ry.finalize();
        rx.finalize();
        out.push_back(std::move(ry));
        out.push_back(std::move(rx));
    }

    {
        DecayParams dp;
        dp.x = y0;
        dp.times = p.times;
        dp.invariant_samples = p.invariant_samples;
        dp.bootstrap_replicates = p.bootstrap_replicates;
        auto ry = detail::start_report(ctx, "check_sdel_suite", name + "/w2_decay_y");
        auto rx = detail::start_report(ctx, "check_sdel_suite", name + "/w2_decay_x");
        detail::decay_rows(ctx, sde_y, whole, y0, {}, 1.0, dp, ry);
        detail::decay_rows(ctx, sde_y, whole, y0, to_x, MM / mm, dp, rx);
        out.push_back(std::move(ry));
        out.push_back(std::move(rx));
    }

    if (p.harnack) {
        auto rep = detail::start_report(ctx, "check_sdel_suite", name + "/harnack_x");
        if (!(k.k > 0.0) || !(k.lambda > 0.0))
            throw ConfigError("check_sdel_suite: transformed constants need k > 0 and lambda > 0");
        detail::require_elliptic(ctx, sde_y, whole);
        const double lam = std::sqrt(k.lambda);
        const double T = ctx.grid.T();
        const double dx = p.x - p.y;
        const auto h = detail::harnack_constants(k.delta, lam, k.k, p.p, MM * MM * dx * dx, std::exp(2.0 * k.delta * T));
        if (!(p.p > h.threshold))
            throw ConfigError("check_sdel_suite: p must exceed (1 + k/lambda)^2 = " + std::to_string(h.threshold));
        const auto s = detail::harnack_samples(ctx, sde_y, whole, y0, y1, h.theta, p.f, to_x);
        const bool valid = detail::martingale_ok(s, rep.z, rep);
        std::vector<double> a(s.weight.size()), b(s.weight.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = s.weight[i] * s.terminal[i];
            b[i] = std::pow(s.terminal[i], p.p);
        }
        const double ma = ot::mean_of(a), mb = ot::mean_of(b);
        const double rel = ot::paired_linear_se(a, b, p.p / ma, -1.0 / mb);
        const double lhs = std::pow(ma, p.p), rhs = mb * std::exp(h.exponent);
        rep.add_row(T, lhs, rhs, rhs * rel);
        const auto st = detail::harnack_constants(k.delta, lam, k.k, p.p, MM * dx * dx, std::exp(k.delta * T));
        const double r_st = mb * std::exp(st.exponent);
        rep.metadata["exponent"] = h.exponent;
        rep.metadata["theta_T"] = h.theta;
        rep.metadata["statement_form"] =
            Json{{"exponent", st.exponent}, {"bound", r_st}, {"pass", one_sided_pass(lhs, r_st, r_st * rel, rep.z)}};
        rep.flagged_typo = "statement carries M|x-y|^2 and e^{delta T}; M^2|x-y|^2 and e^{2 delta T} are used";
        rep.finalize(s.all_met, valid);
        out.push_back(std::move(rep));
    }
    return out;
}

inline std::vector<ExperimentReport> check_sdel_suite(const CheckContext& ctx, const std::string& name,
                                                      const SdelParams& p) {
    return with_stability(ctx, [&](const CheckContext& c) { return check_sdel_suite_once(c, name, p); });
}

}  // namespace rsde::verify
