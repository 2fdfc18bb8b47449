#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "rsde/errors.hpp"
#include "rsde/linalg.hpp"
#include "rsde/sim/philox.hpp"

namespace rsde::sim {

class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps) : T_(horizon), n_(n_steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid: T must be > 0");
        if (n_steps == 0) throw ConfigError("grid: n_steps must be >= 1");
        if (n_steps > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("grid: n_steps too large");
    }

    double T() const noexcept { return T_; }
    std::size_t n_steps() const noexcept { return n_; }
    double dt() const noexcept { return T_ / static_cast<double>(n_); }
    double t(std::size_t k) const noexcept { return static_cast<double>(k) * dt(); }

    /// Same horizon, step halved.
    TimeGrid refined() const { return TimeGrid(T_, 2 * n_); }

    /// Index of the grid point closest to time `time`.
    std::size_t index_of(double time) const {
        if (time < 0.0 || time > T_ * (1.0 + 1e-12)) throw ConfigError("time outside the grid horizon");
        return static_cast<std::size_t>(std::llround(time / dt()));
    }

    bool operator==(const TimeGrid&) const = default;

private:
    double T_;
    std::size_t n_;
};

/// n_steps x d Brownian increments, each N(0, dt), a pure function of
/// (master_seed, path_index, step, coordinate).
struct NoisePanel {
    StreamId id;
    Matrix increments;
};

inline void fill_noise(StreamId id, const TimeGrid& grid, std::size_t d, Matrix& out) {
    if (out.rows() != grid.n_steps() || out.cols() != d) out = Matrix(grid.n_steps(), d);
    const double scale = std::sqrt(grid.dt());
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        auto row = out.row(k);
        for (std::size_t j = 0; j < d; j += 2) {
            const auto z = normal_pair(id, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j / 2));
            row[j] = scale * z[0];
            if (j + 1 < d) row[j + 1] = scale * z[1];
        }
    }
}

inline NoisePanel make_noise(std::uint64_t master_seed, std::uint64_t path_index, const TimeGrid& grid,
                             std::size_t d) {
    if (d == 0) throw ConfigError("make_noise: dimension must be >= 1");
    NoisePanel p{{master_seed, path_index}, Matrix(grid.n_steps(), d)};
    fill_noise(p.id, grid, d, p.increments);
    return p;
}

/// (n_steps + 1) x d states on a time grid.
struct Path {
    Matrix states;

    std::size_t n_points() const noexcept { return states.rows(); }
    std::size_t dimension() const noexcept { return states.cols(); }
};

/// Reflected trajectory. eta_increments row k is the reflection increment
/// realized on step k -> k+1 (it acts on states row k+1).
struct ReflectedPath {
    Matrix states;
    Matrix eta_increments;
    double eta_total_variation = 0.0;

    Path path() const { return Path{states}; }

    /// Cumulative reflection term eta(t_k), k = 0..n_steps.
    Matrix eta_cumulative() const {
        Matrix out(states.rows(), states.cols());
        for (std::size_t k = 0; k < eta_increments.rows(); ++k)
            for (std::size_t j = 0; j < states.cols(); ++j) out(k + 1, j) = out(k, j) + eta_increments(k, j);
        return out;
    }
};

}  // namespace rsde::sim
