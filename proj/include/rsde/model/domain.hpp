#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"

namespace rsde::model {

struct Ball {
    Point center;
    double radius = 1.0;
};

struct Box {
    Point lower;
    Point upper;
};

/// {x : <normal, x> >= offset}; `normal` points into the domain.
struct Halfspace {
    Point normal;
    double offset = 0.0;
};

struct WholeSpace {};

/// Closed convex region with closed-form Euclidean projection.
class ConvexDomain {
public:
    using Variant = std::variant<Ball, Box, Halfspace, WholeSpace>;

    static ConvexDomain ball(Point center, double radius) {
        if (center.empty()) throw ConfigError("ball: empty center");
        if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("ball: radius must be > 0");
        const auto d = center.size();
        return ConvexDomain(Ball{std::move(center), radius}, d);
    }

    static ConvexDomain box(Point lower, Point upper) {
        if (lower.empty() || lower.size() != upper.size())
            throw ConfigError("box: lower/upper dimension mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i])) throw ConfigError("box: lower[i] < upper[i] required");
        const auto d = lower.size();
        return ConvexDomain(Box{std::move(lower), std::move(upper)}, d);
    }

    static ConvexDomain halfspace(Point normal, double offset) {
        if (normal.empty()) throw ConfigError("halfspace: empty normal");
        if (std::abs(norm(normal) - 1.0) > 1e-12) throw ConfigError("halfspace: normal must be a unit vector");
        const auto d = normal.size();
        return ConvexDomain(Halfspace{std::move(normal), offset}, d);
    }

    static ConvexDomain whole_space(std::size_t dimension) {
        if (dimension == 0) throw ConfigError("whole_space: dimension must be >= 1");
        return ConvexDomain(WholeSpace{}, dimension);
    }

    std::size_t dimension() const noexcept { return dim_; }
    const Variant& variant() const noexcept { return shape_; }
    bool bounded() const noexcept {
        return std::holds_alternative<Ball>(shape_) || std::holds_alternative<Box>(shape_);
    }

    std::string kind() const {
        return std::visit(
            [](const auto& s) -> std::string {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ball>) return "ball";
                else if constexpr (std::is_same_v<S, Box>) return "box";
                else if constexpr (std::is_same_v<S, Halfspace>) return "halfspace";
                else return "whole_space";
            },
            shape_);
    }

    bool contains(std::span<const double> x) const {
        check_dim(x.size());
        return std::visit(
            [&](const auto& s) -> bool {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ball>) {
                    return distance(x, s.center) <= s.radius;
                } else if constexpr (std::is_same_v<S, Box>) {
                    for (std::size_t i = 0; i < x.size(); ++i)
                        if (x[i] < s.lower[i] || x[i] > s.upper[i]) return false;
                    return true;
                } else if constexpr (std::is_same_v<S, Halfspace>) {
                    return dot(s.normal, x) >= s.offset;
                } else {
                    return true;
                }
            },
            shape_);
    }

    /// Nearest point of the closure. Writes into `out` (may alias `x`).
    /// The result always satisfies contains(), so projection is idempotent
    /// bit-for-bit.
    void project(std::span<const double> x, std::span<double> out) const {
        check_dim(x.size());
        check_dim(out.size());
        if (contains(x)) {
            if (out.data() != x.data()) std::copy(x.begin(), x.end(), out.begin());
            return;
        }
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ball>) {
                    const double r = distance(x, s.center);
                    double scale = s.radius / r;
                    Point p(x.size());
                    for (int guard = 0; guard < 64; ++guard) {
                        for (std::size_t i = 0; i < x.size(); ++i)
                            p[i] = s.center[i] + (x[i] - s.center[i]) * scale;
                        if (distance(p, s.center) <= s.radius) break;
                        scale = std::nextafter(scale, 0.0);
                    }
                    std::copy(p.begin(), p.end(), out.begin());
                } else if constexpr (std::is_same_v<S, Box>) {
                    for (std::size_t i = 0; i < x.size(); ++i)
                        out[i] = std::clamp(x[i], s.lower[i], s.upper[i]);
                } else if constexpr (std::is_same_v<S, Halfspace>) {
                    double shift = s.offset - dot(s.normal, x);
                    Point p(x.size());
                    for (int guard = 0; guard < 64; ++guard) {
                        for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] + shift * s.normal[i];
                        if (dot(s.normal, p) >= s.offset) break;
                        shift = std::nextafter(shift, std::numeric_limits<double>::infinity());
                    }
                    std::copy(p.begin(), p.end(), out.begin());
                }
            },
            shape_);
    }

    Point project(std::span<const double> x) const {
        Point out(x.size());
        project(x, out);
        return out;
    }

    /// Penalty map x - P(x); zero exactly on the closure.
    Point penalty(std::span<const double> x) const {
        Point p = project(x);
        for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] - p[i];
        return p;
    }

    /// Diameter for bounded domains, nullopt otherwise.
    std::optional<double> diameter() const {
        if (const auto* b = std::get_if<Ball>(&shape_)) return 2.0 * b->radius;
        if (const auto* b = std::get_if<Box>(&shape_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < b->lower.size(); ++i) {
                const double w = b->upper[i] - b->lower[i];
                s += w * w;
            }
            return std::sqrt(s);
        }
        return std::nullopt;
    }

    /// Axis-aligned bounding box, with unbounded directions clipped to
    /// [-fallback, fallback]. Used to lay sample grids over the domain.
    std::pair<Point, Point> bounding_box(double fallback) const {
        Point lo(dim_, -fallback), hi(dim_, fallback);
        if (const auto* b = std::get_if<Ball>(&shape_)) {
            for (std::size_t i = 0; i < dim_; ++i) {
                lo[i] = b->center[i] - b->radius;
                hi[i] = b->center[i] + b->radius;
            }
        } else if (const auto* b = std::get_if<Box>(&shape_)) {
            lo = b->lower;
            hi = b->upper;
        }
        return {lo, hi};
    }

    /// min over the closure of <w, z>; nullopt when unbounded below.
    std::optional<double> support_min(std::span<const double> w) const {
        check_dim(w.size());
        if (const auto* b = std::get_if<Ball>(&shape_)) return dot(w, b->center) - b->radius * norm(w);
        if (const auto* b = std::get_if<Box>(&shape_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) s += std::min(w[i] * b->lower[i], w[i] * b->upper[i]);
            return s;
        }
        if (norm(w) == 0.0) return 0.0;
        if (const auto* h = std::get_if<Halfspace>(&shape_)) {
            // bounded below only if w is a nonnegative multiple of the normal
            const double a = dot(w, h->normal);
            Point resid(w.begin(), w.end());
            for (std::size_t i = 0; i < dim_; ++i) resid[i] -= a * h->normal[i];
            if (a >= 0.0 && norm(resid) <= 1e-12 * norm(w)) return a * h->offset;
        }
        return std::nullopt;
    }

private:
    ConvexDomain(Variant v, std::size_t d) : shape_(std::move(v)), dim_(d) {}

    void check_dim(std::size_t d) const {
        if (d != dim_)
            throw ConfigError("dimension mismatch: domain has dimension " + std::to_string(dim_) +
                              ", point has " + std::to_string(d));
    }

    Variant shape_;
    std::size_t dim_;
};

}  // namespace rsde::model
