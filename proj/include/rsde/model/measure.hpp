#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/model/coefficients.hpp"

namespace rsde::model {

struct Atom {
    double location;
    double weight;
};

/// Breakpoint (x, nu^c(]-inf, x])) of the continuous part's distribution
/// function, interpolated linearly and held constant outside the knots.
struct CdfKnot {
    double x;
    double value;
};

/// Bounded signed measure on the line: finitely many atoms of weight in
/// (-1, 1) plus a continuous part with piecewise-linear distribution function.
class SignedMeasure {
public:
    SignedMeasure() = default;

    SignedMeasure(std::vector<Atom> atoms, std::vector<CdfKnot> cdf)
        : atoms_(std::move(atoms)), cdf_(std::move(cdf)) {
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& a = atoms_[i];
            if (!std::isfinite(a.location) || !std::isfinite(a.weight))
                throw ModelError("measure: non-finite atom");
            if (!(std::abs(a.weight) < 1.0))
                throw ModelError("measure: atom weight at " + std::to_string(a.location) +
                                 " has |w| >= 1");
            if (i > 0 && !(atoms_[i - 1].location < a.location))
                throw ModelError("measure: atom locations must be strictly increasing");
        }
        for (std::size_t i = 0; i < cdf_.size(); ++i) {
            if (!std::isfinite(cdf_[i].x) || !std::isfinite(cdf_[i].value))
                throw ModelError("measure: non-finite continuous-part knot");
            if (i > 0 && !(cdf_[i - 1].x < cdf_[i].x))
                throw ModelError("measure: continuous-part knots must be strictly increasing");
        }
        if (!cdf_.empty() && cdf_.front().value != 0.0)
            throw ModelError("measure: continuous part must start from 0 (unbounded variation representation)");
    }

    static SignedMeasure zero() { return {}; }
    static SignedMeasure dirac(double location, double weight) { return SignedMeasure({{location, weight}}, {}); }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<CdfKnot>& cdf_knots() const noexcept { return cdf_; }

    bool has_continuous_part() const {
        return std::any_of(cdf_.begin(), cdf_.end(), [](const CdfKnot& k) { return k.value != 0.0; });
    }

    bool is_zero() const { return atoms_.empty() && !has_continuous_part(); }

    double continuous_cdf(double x) const {
        if (cdf_.empty() || x <= cdf_.front().x) return 0.0;
        if (x >= cdf_.back().x) return cdf_.back().value;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x, [](double v, const CdfKnot& k) { return v < k.x; });
        const auto& hi = *it;
        const auto& lo = *std::prev(it);
        return lo.value + (hi.value - lo.value) * (x - lo.x) / (hi.x - lo.x);
    }

    double total_variation() const {
        double tv = 0.0;
        for (const auto& a : atoms_) tv += std::abs(a.weight);
        for (std::size_t i = 1; i < cdf_.size(); ++i) tv += std::abs(cdf_[i].value - cdf_[i - 1].value);
        return tv;
    }

private:
    std::vector<Atom> atoms_;
    std::vector<CdfKnot> cdf_;
};

/// f_nu(x) = exp(-2 nu^c(]-inf, x])) * prod_{a <= x} (1 - nu{a}) / (1 + nu{a}),
/// evaluated directly from the definition (right-continuous).
inline double eval_f_nu(const SignedMeasure& nu, double x) {
    double v = std::exp(-2.0 * nu.continuous_cdf(x));
    for (const auto& a : nu.atoms()) {
        if (a.location > x) break;
        v *= (1.0 - a.weight) / (1.0 + a.weight);
    }
    return v;
}

/// Scale-type map F(x) = int_0^x f_nu(u) du turning a local-time equation into
/// an ordinary one. On each piece between knots f_nu = A exp(-2 g (x - anchor)),
/// so F and its inverse are closed-form.
class LeGallTransform {
public:
    struct Segment {
        double lo;        ///< left end (-inf for the first segment)
        double hi;        ///< right end (+inf for the last segment)
        double anchor;    ///< finite reference point inside [lo, hi]
        double f_anchor;  ///< f_nu at the anchor, from inside the segment
        double slope;     ///< slope g of nu^c on the segment
        double F_anchor;  ///< F(anchor)
    };

    explicit LeGallTransform(SignedMeasure nu) : nu_(std::move(nu)) {
        if (!std::isfinite(nu_.total_variation())) throw ModelError("measure: unbounded total variation");
        std::vector<double> knots;
        for (const auto& a : nu_.atoms()) knots.push_back(a.location);
        for (const auto& k : nu_.cdf_knots()) knots.push_back(k.x);
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
        knots_ = knots;

        constexpr double inf = std::numeric_limits<double>::infinity();
        if (knots.empty()) {
            segments_.push_back({-inf, inf, 0.0, 1.0, 0.0, 0.0});
        } else {
            // Left tail: no atoms and nu^c = 0 below the first knot.
            segments_.push_back({-inf, knots.front(), knots.front(), 1.0, 0.0, 0.0});
            for (std::size_t j = 0; j < knots.size(); ++j) {
                const double lo = knots[j];
                const double hi = j + 1 < knots.size() ? knots[j + 1] : inf;
                const double slope =
                    std::isfinite(hi) ? (nu_.continuous_cdf(hi) - nu_.continuous_cdf(lo)) / (hi - lo) : 0.0;
                segments_.push_back({lo, hi, lo, eval_f_nu(nu_, lo), slope, 0.0});
            }
            // Cumulative integral from the first knot, then shift so F(0) = 0.
            double acc = 0.0;
            for (std::size_t j = 1; j < segments_.size(); ++j) {
                segments_[j].F_anchor = acc;
                if (std::isfinite(segments_[j].hi))
                    acc += integral(segments_[j], segments_[j].hi - segments_[j].anchor);
            }
            const double origin = eval_F(0.0);
            for (auto& s : segments_) s.F_anchor -= origin;
        }
        knot_F_.reserve(knots_.size());
        for (std::size_t j = 0; j < knots_.size(); ++j) knot_F_.push_back(segments_[j + 1].F_anchor);

        m_ = std::numeric_limits<double>::infinity();
        M_ = 0.0;
        for (const auto& s : segments_) {
            m_ = std::min(m_, s.f_anchor);
            M_ = std::max(M_, s.f_anchor);
            if (std::isfinite(s.lo) && std::isfinite(s.hi)) {
                const double end = s.f_anchor * std::exp(-2.0 * s.slope * (s.hi - s.anchor));
                m_ = std::min(m_, end);
                M_ = std::max(M_, end);
            }
        }
        if (!(m_ > 0.0) || !std::isfinite(M_)) throw ModelError("measure: f_nu bounds degenerate");
    }

    const SignedMeasure& measure() const noexcept { return nu_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    /// inf f_nu and sup f_nu, exact over segments.
    double m() const noexcept { return m_; }
    double M() const noexcept { return M_; }

    double f(double x) const {
        const Segment& s = segment_of(x);
        return s.slope == 0.0 ? s.f_anchor : s.f_anchor * std::exp(-2.0 * s.slope * (x - s.anchor));
    }

    double F(double x) const { return eval_F(x); }

    double F_inverse(double y) const {
        const std::size_t j = static_cast<std::size_t>(std::upper_bound(knot_F_.begin(), knot_F_.end(), y) - knot_F_.begin());
        const Segment& s = segments_[knots_.empty() ? 0 : j];
        const double delta = y - s.F_anchor;
        double x;
        if (s.slope == 0.0) {
            x = s.anchor + delta / s.f_anchor;
        } else {
            const double arg = 2.0 * s.slope * delta / s.f_anchor;
            x = s.anchor - std::log1p(-arg) / (2.0 * s.slope);
        }
        const double slack = 1e-12 * (1.0 + std::abs(x));
        if (std::isfinite(x) && x >= s.lo - slack && x <= s.hi + slack) return x;
        return bisect_inverse(s, y);
    }

    /// Monotone bisection on a bracketing segment; used when the closed form
    /// loses accuracy. Absolute tolerance 1e-12.
    double bisect_inverse(const Segment& s, double y) const {
        double lo = s.lo, hi = s.hi;
        if (!std::isfinite(lo)) lo = s.anchor - (s.F_anchor - y) / m_ - 1.0;
        if (!std::isfinite(hi)) hi = s.anchor + (y - s.F_anchor) / m_ + 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (eval_F(mid) < y) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    static double integral(const Segment& s, double u) {
        if (s.slope == 0.0) return s.f_anchor * u;
        return s.f_anchor * (-std::expm1(-2.0 * s.slope * u)) / (2.0 * s.slope);
    }

    const Segment& segment_of(double x) const {
        if (knots_.empty()) return segments_.front();
        const auto j = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin());
        return segments_[j];
    }

    double eval_F(double x) const {
        const Segment& s = segment_of(x);
        return s.F_anchor + integral(s, x - s.anchor);
    }

    SignedMeasure nu_;
    std::vector<double> knots_;
    std::vector<double> knot_F_;
    std::vector<Segment> segments_;
    double m_ = 1.0;
    double M_ = 1.0;
};

inline LeGallTransform build_transform(const SignedMeasure& nu) { return LeGallTransform(nu); }

namespace detail {

inline std::optional<ScalarPiecewise> as_piecewise(const Drift& d) {
    if (const auto* p = std::get_if<ScalarPiecewise>(&d)) return *p;
    if (const auto* a = std::get_if<AffineDrift>(&d))
        return ScalarPiecewise{{{-std::numeric_limits<double>::infinity(), a->A(0, 0), a->c[0]}}};
    return std::nullopt;
}

inline std::optional<ScalarPiecewise> as_piecewise(const Diffusion& d) {
    if (const auto* p = std::get_if<ScalarPiecewise>(&d)) return *p;
    if (const auto* c = std::get_if<ConstantDiffusion>(&d))
        return ScalarPiecewise{{{-std::numeric_limits<double>::infinity(), 0.0, c->sigma(0, 0)}}};
    return std::nullopt;
}

/// (g f_nu) o F^{-1} for piecewise-affine g and piecewise-constant f_nu.
inline ScalarPiecewise compose_exact(const ScalarPiecewise& g, const LeGallTransform& t) {
    std::vector<double> breaks = t.knots();
    for (std::size_t i = 1; i < g.pieces.size(); ++i) breaks.push_back(g.pieces[i].threshold);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    ScalarPiecewise out;
    const auto emit = [&](double threshold_y, double x_ref) {
        const Piece& p = g.piece_at(x_ref);
        const double fj = t.f(x_ref);
        const double Fref = t.F(x_ref);
        out.pieces.push_back({threshold_y, p.slope, fj * (p.slope * x_ref + p.intercept) - p.slope * Fref});
    };
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (breaks.empty()) {
        emit(ninf, 0.0);
        return out;
    }
    // first interval (-inf, breaks[0]): pick its right end's left neighbourhood
    {
        const double x_ref = breaks.front();
        const Piece& p = g.piece_at(std::nextafter(x_ref, ninf));
        const double fj = t.f(std::nextafter(x_ref, ninf));
        out.pieces.push_back({ninf, p.slope, fj * (p.slope * x_ref + p.intercept) - p.slope * t.F(x_ref)});
    }
    for (double b : breaks) emit(t.F(b), b);
    return out;
}

}  // namespace detail

/// Coefficients of Y = F(X): b_bar = (b f_nu) o F^{-1}, sigma_bar = (sigma f_nu) o F^{-1}.
/// Exact piecewise-affine output when the measure is purely atomic and the
/// inputs are affine/constant/piecewise; otherwise composed callbacks.
/// `transformed_constants` declares the constants of the transformed process
/// (defaults to the input's).
inline CoefficientSpec transform_coefficients(const CoefficientSpec& sde, const LeGallTransform& t,
                                              std::optional<DeclaredConstants> transformed_constants = std::nullopt) {
    if (sde.dimension() != 1)
        throw ConfigError("transform_coefficients: local-time transform is one-dimensional only");
    const DeclaredConstants consts = transformed_constants.value_or(sde.constants());

    const auto pb = detail::as_piecewise(sde.drift_variant());
    const auto ps = detail::as_piecewise(sde.diffusion_variant());
    if (!t.measure().has_continuous_part() && pb && ps) {
        return CoefficientSpec(1, detail::compose_exact(*pb, t), detail::compose_exact(*ps, t), consts);
    }

    const CoefficientSpec base = sde;
    const auto tp = std::make_shared<const LeGallTransform>(t);
    const auto bp = std::make_shared<const CoefficientSpec>(base);
    CallbackDrift drift{"legall_drift",
                        [tp, bp](std::span<const double> y, std::span<double> out) {
                            const double x = tp->F_inverse(y[0]);
                            const double xv[1] = {x};
                            bp->drift(xv, out);
                            out[0] *= tp->f(x);
                        }};
    CallbackDiffusion diff{"legall_diffusion",
                           [tp, bp](std::span<const double> y, Matrix& out) {
                               const double x = tp->F_inverse(y[0]);
                               const double xv[1] = {x};
                               bp->diffusion(xv, out);
                               out(0, 0) *= tp->f(x);
                           }};
    return CoefficientSpec(1, std::move(drift), std::move(diff), consts);
}

}  // namespace rsde::model
