// Library walk-through without the CLI: two reflected OU paths in a ball,
// driven by the same noise, and their squared distance against e^{-2t}.

#include <cmath>
#include <cstdio>

#include "rsde/model/coefficients.hpp"
#include "rsde/model/domain.hpp"
#include "rsde/ot/stats.hpp"
#include "rsde/sim/batch.hpp"
#include "rsde/sim/schemes.hpp"

using namespace rsde;

int main() {
    const auto sde = model::ornstein_uhlenbeck(2, 1.0, 1.0);  // dX = -X dt + dB
    const auto ball = model::ConvexDomain::ball(Point{0.0, 0.0}, 2.0);
    const sim::TimeGrid grid(2.0, 2000);
    const Point x{0.5, 0.0}, y{-0.5, 0.0};
    const std::size_t checkpoints[] = {250, 500, 1000, 2000};

    // path i always sees the same noise, whatever the worker count
    const auto sq = sim::run_batch(4000, 0, [&](std::size_t i) {
        const auto noise = sim::make_noise(7, i, grid, 2);
        const auto X = sim::projected_path(sde, ball, x, grid, noise);
        const auto Y = sim::projected_path(sde, ball, y, grid, noise);
        std::vector<double> out;
        for (auto k : checkpoints) out.push_back(distance_sq(X.states.row(k), Y.states.row(k)));
        return out;
    });

    std::printf("%6s %12s %12s %12s\n", "t", "E|X-Y|^2", "std_error", "e^{-2t}");
    for (std::size_t j = 0; j < std::size(checkpoints); ++j) {
        std::vector<double> col;
        for (const auto& r : sq) col.push_back(r[j]);
        const auto ci = ot::ci_mean(col);
        const double t = grid.t(checkpoints[j]);
        std::printf("%6.2f %12.6f %12.6f %12.6f\n", t, ci.mean, ci.std_error, std::exp(-2.0 * t));
    }
}
