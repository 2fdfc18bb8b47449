#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/model/coefficients.hpp"
#include "rsde/model/domain.hpp"
#include "rsde/model/measure.hpp"
#include "rsde/model/validation.hpp"
#include "rsde/sim/paths.hpp"
#include "rsde/sim/schemes.hpp"
#include "rsde/verify/report.hpp"

namespace rsde::verify {

struct MonteCarlo {
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 1;
    std::size_t workers = 1;
};

/// Every tolerance used by the checks. All of them are echoed into reports.
struct Tolerances {
    double z = 3.0;                       ///< one-sided pass rule multiplier
    double validation_tol = 1e-9;         ///< slack on grid validation of H-conditions
    std::size_t validation_points = 41;   ///< grid size for H-condition validation
    double validation_extent = 5.0;       ///< clip for unbounded directions
    double meeting_tol = 1e-6;            ///< Harnack coupling glue distance
    double blowup_guard = 1e12;           ///< |state| beyond this aborts the run
    double monotonicity_per_step = 1e-8;  ///< reflection sums must be >= -this * n_steps
    bool stability = true;                ///< rerun at dt/2 and require both verdicts to pass
};

inline Json to_json(const Tolerances& t) {
    return Json{{"z", t.z},
                {"validation_tol", t.validation_tol},
                {"validation_points", t.validation_points},
                {"validation_extent", t.validation_extent},
                {"meeting_tol", t.meeting_tol},
                {"blowup_guard", t.blowup_guard},
                {"monotonicity_per_step", t.monotonicity_per_step},
                {"stability", t.stability}};
}

/// Everything a check needs besides its own parameters.
struct CheckContext {
    model::CoefficientSpec sde;
    model::ConvexDomain domain;
    sim::TimeGrid grid;
    MonteCarlo mc;
    Tolerances tol;
    std::optional<model::SignedMeasure> measure;
    std::optional<model::DeclaredConstants> transformed_constants;
    Json echo = Json::object();  ///< configuration blocks copied into each report

    CheckContext with_grid(const sim::TimeGrid& g) const {
        CheckContext c = *this;
        c.grid = g;
        return c;
    }
    sim::SimOptions sim_options() const { return {tol.blowup_guard}; }
};

/// Maps a simulated state to the observed process in place (identity when
/// empty). Local-time equations simulate Y = F(X) and observe X = F^{-1}(Y).
using Observe = std::function<void(std::span<double>)>;

namespace detail {

inline std::string format_point(std::span<const double> p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ')';
    return os.str();
}

inline ExperimentReport start_report(const CheckContext& ctx, const std::string& check, const std::string& name) {
    if (ctx.mc.n_paths < 2) throw ConfigError("mc.n_paths must be >= 2");
    ExperimentReport r;
    r.name = name;
    r.check = check;
    r.z = ctx.tol.z;
    r.metadata["config"] = ctx.echo;
    r.metadata["grid"] = Json{{"T", ctx.grid.T()}, {"n_steps", ctx.grid.n_steps()}, {"dt", ctx.grid.dt()}};
    r.metadata["n_paths"] = ctx.mc.n_paths;
    r.metadata["master_seed"] = ctx.mc.master_seed;
    r.metadata["tolerances"] = to_json(ctx.tol);
    return r;
}

inline std::vector<model::PointPair> validation_pairs(const CheckContext& ctx, const model::ConvexDomain& domain) {
    const auto pts = model::sample_points(domain, ctx.tol.validation_points, ctx.tol.validation_extent);
    return model::sample_pairs(pts);
}

/// Dissipativity on the validation grid; a violation is a model error naming
/// the offending pair.
inline model::DissipativityReport require_dissipative(const CheckContext& ctx, const model::CoefficientSpec& sde,
                                                      const model::ConvexDomain& domain, const char* label = "(declared delta)") {
    const auto pairs = validation_pairs(ctx, domain);
    const auto r = model::validate_dissipativity(sde, pairs, ctx.tol.validation_tol);
    if (!r.pass) {
        std::string msg = std::string("dissipativity condition ") + label + " violated";
        if (!pairs.empty() && r.max_margin > ctx.tol.validation_tol)
            msg += " at x = " + format_point(pairs[r.worst_index].first) + ", y = " +
                   format_point(pairs[r.worst_index].second) + " (margin " + std::to_string(r.max_margin) + ")";
        else if (r.analytic_margin)
            msg += " (analytic margin " + std::to_string(*r.analytic_margin) + ")";
        throw ModelError(msg);
    }
    return r;
}

inline model::EllipticityReport require_elliptic(const CheckContext& ctx, const model::CoefficientSpec& sde,
                                                 const model::ConvexDomain& domain) {
    const auto pts = model::sample_points(domain, ctx.tol.validation_points, ctx.tol.validation_extent);
    const auto r = model::validate_ellipticity(sde, pts, ctx.tol.validation_tol);
    if (r.singular) throw ModelError("ellipticity: diffusion matrix is singular on the validation grid");
    if (!r.pass)
        throw ModelError("ellipticity condition violated: min eigenvalue of sigma^T sigma " +
                         std::to_string(r.min_eigenvalue) + " < declared lambda " +
                         std::to_string(sde.constants().lambda));
    return r;
}

inline void require_point(const model::ConvexDomain& domain, const Point& x, const char* what) {
    if (x.size() != domain.dimension()) throw ConfigError(std::string(what) + ": dimension mismatch");
    if (!domain.contains(x)) throw ConfigError(std::string(what) + " lies outside the domain closure");
}

/// A grid with the context step size reaching `horizon` (rounded to whole steps).
inline sim::TimeGrid grid_to(const CheckContext& ctx, double horizon) {
    const double dt = ctx.grid.dt();
    const auto n = static_cast<std::size_t>(std::max<long long>(1, std::llround(horizon / dt)));
    return sim::TimeGrid(static_cast<double>(n) * dt, n);
}

}  // namespace detail

/// Runs `fn` at the configured step and at half of it; each report passes only
/// if both runs pass. The refined run is summarized under metadata.refined.
template <class Fn>
std::vector<ExperimentReport> with_stability(const CheckContext& ctx, Fn&& fn) {
    std::vector<ExperimentReport> coarse = fn(ctx);
    if (!ctx.tol.stability) {
        for (auto& r : coarse) r.metadata["stability_run"] = false;
        return coarse;
    }
    const std::vector<ExperimentReport> fine = fn(ctx.with_grid(ctx.grid.refined()));
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        auto& r = coarse[i];
        const auto& f = fine.at(i);
        Json rows = Json::array();
        for (const auto& row : f.rows) rows.push_back(to_json(row));
        r.metadata["stability_run"] = true;
        r.metadata["refined"] = Json{{"n_steps", ctx.grid.refined().n_steps()},
                                     {"status", f.status},
                                     {"pass", f.pass},
                                     {"empirical", f.empirical},
                                     {"bound", f.bound},
                                     {"std_error", f.std_error},
                                     {"rows", rows}};
        r.metadata["verdict_stable"] = r.pass == f.pass;
        const bool valid = r.status != "invalid" && f.status != "invalid";
        r.pass = r.pass && f.pass && valid;
        r.status = !valid ? "invalid" : (r.pass ? "pass" : "fail");
    }
    return coarse;
}

}  // namespace rsde::verify
