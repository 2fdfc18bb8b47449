#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"
#include "rsde/model/domain.hpp"

namespace rsde::verify {

/// Catalog of test functions used by the Harnack-type checks (f), the
/// Poincare check (g, needs a gradient) and the concentration check (V, needs
/// a Lipschitz constant). All are closed-form.
struct TestFunction {
    enum class Kind { constant, affine_plus_one, bump_plus_one, bump, coordinate, norm, sine };

    Kind kind = Kind::constant;
    double value = 1.0;      ///< constant
    double amplitude = 1.0;  ///< bump height, or scale for coordinate/norm/sine
    double width = 1.0;      ///< bump standard deviation
    Point center;            ///< bump centre
    Point weights;           ///< affine direction
    std::size_t index = 0;   ///< coordinate / sine argument
    double offset = 0.0;     ///< affine: min of <w, .> over the domain, set by bind()

    static TestFunction constant(double c) {
        TestFunction f;
        f.kind = Kind::constant;
        f.value = c;
        return f;
    }
    /// 1 + A exp(-|x - c|^2 / (2 s^2))
    static TestFunction bump_plus_one(double amplitude, Point center, double width) {
        TestFunction f;
        f.kind = Kind::bump_plus_one;
        f.amplitude = amplitude;
        f.center = std::move(center);
        f.width = width;
        f.check_width();
        return f;
    }
    /// A exp(-|x - c|^2 / (2 s^2))
    static TestFunction bump(double amplitude, Point center, double width) {
        TestFunction f = bump_plus_one(amplitude, std::move(center), width);
        f.kind = Kind::bump;
        return f;
    }
    /// 1 + <w, x> - min over the domain of <w, .>; needs a domain bounded below along w.
    static TestFunction affine_plus_one(Point weights, const model::ConvexDomain& domain) {
        TestFunction f;
        f.kind = Kind::affine_plus_one;
        f.weights = std::move(weights);
        if (f.weights.size() != domain.dimension()) throw ConfigError("affine_plus_one: weight dimension mismatch");
        const auto lo = domain.support_min(f.weights);
        if (!lo) throw ConfigError("affine_plus_one: <w, x> is unbounded below on the domain");
        f.offset = *lo;
        return f;
    }
    /// scale * x_i
    static TestFunction coordinate(std::size_t i, double scale = 1.0) {
        TestFunction f;
        f.kind = Kind::coordinate;
        f.index = i;
        f.amplitude = scale;
        return f;
    }
    /// scale * |x|
    static TestFunction norm(double scale = 1.0) {
        TestFunction f;
        f.kind = Kind::norm;
        f.amplitude = scale;
        return f;
    }
    /// scale * sin(x_i)
    static TestFunction sine(std::size_t i, double scale = 1.0) {
        TestFunction f = coordinate(i, scale);
        f.kind = Kind::sine;
        return f;
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::constant: return "constant";
            case Kind::affine_plus_one: return "affine_plus_one";
            case Kind::bump_plus_one: return "bump_plus_one";
            case Kind::bump: return "bump";
            case Kind::coordinate: return "coordinate";
            case Kind::norm: return "norm";
            case Kind::sine: return "sine";
        }
        return "?";
    }

    double operator()(std::span<const double> x) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::affine_plus_one: return 1.0 + dot(weights, x) - offset;
            case Kind::bump_plus_one: return 1.0 + gauss(x);
            case Kind::bump: return gauss(x);
            case Kind::coordinate: return amplitude * x[index];
            case Kind::norm: return amplitude * rsde::norm(x);
            case Kind::sine: return amplitude * std::sin(x[index]);
        }
        return 0.0;
    }

    /// |grad f(x)|^2
    double grad_norm_sq(std::span<const double> x) const {
        switch (kind) {
            case Kind::constant: return 0.0;
            case Kind::affine_plus_one: return norm_sq(weights);
            case Kind::bump_plus_one:
            case Kind::bump: {
                const double g = gauss(x) / (width * width);
                return g * g * distance_sq(x, center);
            }
            case Kind::coordinate: return amplitude * amplitude;
            case Kind::norm: return rsde::norm(x) > 0.0 ? amplitude * amplitude : 0.0;
            case Kind::sine: {
                const double c = amplitude * std::cos(x[index]);
                return c * c;
            }
        }
        return 0.0;
    }

    /// Global Lipschitz constant.
    double lipschitz() const {
        switch (kind) {
            case Kind::constant: return 0.0;
            case Kind::affine_plus_one: return rsde::norm(weights);
            // sup of |grad| for a Gaussian bump is A / (s sqrt(e))
            case Kind::bump_plus_one:
            case Kind::bump: return std::abs(amplitude) / (width * std::sqrt(std::exp(1.0)));
            case Kind::coordinate:
            case Kind::norm:
            case Kind::sine: return std::abs(amplitude);
        }
        return 0.0;
    }

    /// Closed-form infimum over R^d (a lower bound for any domain).
    double infimum() const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::affine_plus_one: return 1.0;
            case Kind::bump_plus_one: return 1.0 + std::min(0.0, amplitude);
            case Kind::bump: return std::min(0.0, amplitude);
            default: return -std::numeric_limits<double>::infinity();
        }
    }

    double supremum() const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::bump_plus_one: return 1.0 + std::max(0.0, amplitude);
            case Kind::bump: return std::max(0.0, amplitude);
            default: return std::numeric_limits<double>::infinity();
        }
    }

    void check_dimension(std::size_t d) const {
        const bool ok = (kind != Kind::bump_plus_one && kind != Kind::bump) || center.size() == d;
        const bool ok_w = kind != Kind::affine_plus_one || weights.size() == d;
        const bool ok_i = (kind != Kind::coordinate && kind != Kind::sine) || index < d;
        if (!ok || !ok_w || !ok_i) throw ConfigError("test function '" + kind_name() + "': dimension mismatch");
    }

private:
    double gauss(std::span<const double> x) const {
        return amplitude * std::exp(-distance_sq(x, center) / (2.0 * width * width));
    }
    void check_width() const {
        if (!(width > 0.0) || !std::isfinite(width)) throw ConfigError("bump: width must be > 0");
    }
};

}  // namespace rsde::verify
