#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace rsde::ot {

struct Assignment {
    std::vector<std::size_t> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost perfect matching on an n x n cost given as cost(i, j), by
/// shortest augmenting paths with dual potentials (Hungarian method, O(n^3)).
/// Costs are evaluated on demand; no n x n matrix is stored.
template <class CostFn>
Assignment solve_assignment(std::size_t n, CostFn&& cost) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based: column 0 is the virtual root of each augmenting tree
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    Assignment a;
    a.row_to_col.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) a.row_to_col[match[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) a.cost += cost(i, a.row_to_col[i]);
    return a;
}

}  // namespace rsde::ot
