#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"

namespace rsde::model {

/// b(x) = A x + c
struct AffineDrift {
    Matrix A;
    Point c;
};

/// One piece of a right-continuous scalar piecewise-affine function:
/// value = slope * x + intercept on [threshold, next threshold).
struct Piece {
    double threshold;
    double slope;
    double intercept;
};

/// Scalar (d = 1) piecewise-affine function. The first piece extends to -inf
/// whatever its threshold says.
struct ScalarPiecewise {
    std::vector<Piece> pieces;

    const Piece& piece_at(double x) const {
        auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                                   [](double v, const Piece& p) { return v < p.threshold; });
        if (it == pieces.begin()) return pieces.front();
        return *std::prev(it);
    }

    double operator()(double x) const {
        const Piece& p = piece_at(x);
        return p.slope * x + p.intercept;
    }

    double max_abs_slope() const {
        double s = 0.0;
        for (const auto& p : pieces) s = std::max(s, std::abs(p.slope));
        return s;
    }
};

using DriftFn = std::function<void(std::span<const double>, std::span<double>)>;
using DiffusionFn = std::function<void(std::span<const double>, Matrix&)>;

struct CallbackDrift {
    std::string id;
    DriftFn fn;
};

struct ConstantDiffusion {
    Matrix sigma;
};

struct CallbackDiffusion {
    std::string id;
    DiffusionFn fn;
};

using Drift = std::variant<AffineDrift, ScalarPiecewise, CallbackDrift>;
using Diffusion = std::variant<ConstantDiffusion, ScalarPiecewise, CallbackDiffusion>;

/// User-declared analytic constants. They are validated on sample grids,
/// never inferred.
struct DeclaredConstants {
    double delta = 0.0;      ///< dissipativity rate
    double sigma_sup = 0.0;  ///< sup_x |sigma(x)| (operator norm)
    double sigma_lip = 0.0;  ///< Lipschitz constant of sigma
    double lambda = 0.0;     ///< ellipticity floor: sigma^T sigma >= lambda I
    double k = 0.0;          ///< oscillation constant |<sigma(x)-sigma(y), x-y>| <= k|x-y|
};

class CoefficientSpec {
public:
    CoefficientSpec(std::size_t dimension, Drift drift, Diffusion diffusion, DeclaredConstants constants)
        : dim_(dimension), drift_(std::move(drift)), diffusion_(std::move(diffusion)), consts_(constants) {
        if (dim_ == 0) throw ConfigError("coefficients: dimension must be >= 1");
        for (double c : {consts_.delta, consts_.sigma_sup, consts_.sigma_lip, consts_.lambda, consts_.k})
            if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("coefficients: declared constants must be finite and >= 0");
        if (const auto* a = std::get_if<AffineDrift>(&drift_)) {
            if (a->A.rows() != dim_ || a->A.cols() != dim_ || a->c.size() != dim_)
                throw ConfigError("affine drift: A must be d x d and c a d-vector");
        } else if (const auto* p = std::get_if<ScalarPiecewise>(&drift_)) {
            check_piecewise(*p, "drift");
        } else if (!std::get<CallbackDrift>(drift_).fn) {
            throw ConfigError("callback drift: empty function");
        }
        if (const auto* c = std::get_if<ConstantDiffusion>(&diffusion_)) {
            if (c->sigma.rows() != dim_ || c->sigma.cols() != dim_)
                throw ConfigError("constant diffusion: sigma must be d x d");
        } else if (const auto* p = std::get_if<ScalarPiecewise>(&diffusion_)) {
            check_piecewise(*p, "diffusion");
        } else if (!std::get<CallbackDiffusion>(diffusion_).fn) {
            throw ConfigError("callback diffusion: empty function");
        }
    }

    std::size_t dimension() const noexcept { return dim_; }
    const Drift& drift_variant() const noexcept { return drift_; }
    const Diffusion& diffusion_variant() const noexcept { return diffusion_; }
    const DeclaredConstants& constants() const noexcept { return consts_; }
    DeclaredConstants& constants() noexcept { return consts_; }

    bool constant_diffusion() const noexcept { return std::holds_alternative<ConstantDiffusion>(diffusion_); }

    void drift(std::span<const double> x, std::span<double> out) const {
        if (const auto* a = std::get_if<AffineDrift>(&drift_)) {
            mat_vec(a->A, x, out);
            for (std::size_t i = 0; i < dim_; ++i) out[i] += a->c[i];
        } else if (const auto* p = std::get_if<ScalarPiecewise>(&drift_)) {
            out[0] = (*p)(x[0]);
        } else {
            std::get<CallbackDrift>(drift_).fn(x, out);
        }
    }

    Point drift(std::span<const double> x) const {
        Point out(dim_);
        drift(x, out);
        return out;
    }

    /// `out` must already be d x d.
    void diffusion(std::span<const double> x, Matrix& out) const {
        if (const auto* c = std::get_if<ConstantDiffusion>(&diffusion_)) {
            out = c->sigma;
        } else if (const auto* p = std::get_if<ScalarPiecewise>(&diffusion_)) {
            out(0, 0) = (*p)(x[0]);
        } else {
            std::get<CallbackDiffusion>(diffusion_).fn(x, out);
        }
    }

    Matrix diffusion(std::span<const double> x) const {
        Matrix out(dim_, dim_);
        diffusion(x, out);
        return out;
    }

private:
    void check_piecewise(const ScalarPiecewise& p, const char* what) const {
        if (dim_ != 1) throw ConfigError(std::string(what) + ": scalar_piecewise requires dimension 1");
        if (p.pieces.empty()) throw ConfigError(std::string(what) + ": scalar_piecewise needs at least one piece");
        for (std::size_t i = 1; i < p.pieces.size(); ++i)
            if (!(p.pieces[i - 1].threshold < p.pieces[i].threshold))
                throw ConfigError(std::string(what) + ": piece thresholds must be strictly increasing");
    }

    std::size_t dim_;
    Drift drift_;
    Diffusion diffusion_;
    DeclaredConstants consts_;
};

/// Ornstein-Uhlenbeck coefficients b(x) = -rate * x, sigma = scale * I.
inline CoefficientSpec ornstein_uhlenbeck(std::size_t d, double rate, double scale) {
    DeclaredConstants c;
    c.delta = rate;
    c.sigma_sup = std::abs(scale);
    c.lambda = scale * scale;
    return CoefficientSpec(d, AffineDrift{Matrix::identity(d, -rate), Point(d, 0.0)},
                           ConstantDiffusion{Matrix::identity(d, scale)}, c);
}

/// Named callbacks reachable from configuration files.
inline const std::map<std::string, DriftFn>& drift_callbacks() {
    static const std::map<std::string, DriftFn> registry = {
        // b(x) = -x - x^3 componentwise
        {"cubic_ou",
         [](std::span<const double> x, std::span<double> out) {
             for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i] - x[i] * x[i] * x[i];
         }},
        // b(x) = -x - tanh(x) componentwise
        {"tanh_ou",
         [](std::span<const double> x, std::span<double> out) {
             for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i] - std::tanh(x[i]);
         }},
    };
    return registry;
}

inline const std::map<std::string, DiffusionFn>& diffusion_callbacks() {
    static const std::map<std::string, DiffusionFn> registry = {
        // sigma(x) = diag(1 + 0.25 tanh(x_i))
        {"tanh_diag",
         [](std::span<const double> x, Matrix& out) {
             for (std::size_t i = 0; i < x.size(); ++i)
                 for (std::size_t j = 0; j < x.size(); ++j) out(i, j) = i == j ? 1.0 + 0.25 * std::tanh(x[i]) : 0.0;
         }},
    };
    return registry;
}

inline CallbackDrift lookup_drift_callback(const std::string& id) {
    const auto& r = drift_callbacks();
    auto it = r.find(id);
    if (it == r.end()) throw ConfigError("unknown drift callback id '" + id + "'");
    return {id, it->second};
}

inline CallbackDiffusion lookup_diffusion_callback(const std::string& id) {
    const auto& r = diffusion_callbacks();
    auto it = r.find(id);
    if (it == r.end()) throw ConfigError("unknown diffusion callback id '" + id + "'");
    return {id, it->second};
}

}  // namespace rsde::model
