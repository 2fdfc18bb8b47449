#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "rsde/ot/wasserstein.hpp"

using namespace rsde;
using namespace rsde::ot;

namespace {
EmpiricalMeasure random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t d, double shift = 0.0) {
    std::normal_distribution<double> g;
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = g(rng) + shift;
    return EmpiricalMeasure(std::move(m));
}

double brute_force(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            s += std::pow(distance(a.samples().row(i), b.samples().row(perm[i])), p);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / static_cast<double>(a.size()), 1.0 / p);
}
}  // namespace

TEST(Wasserstein, ExactMatchesPermutationSearch) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 1 + trial % 6, d = 1 + trial % 3;
        const double p = trial % 2 ? 1.0 : 2.0;
        const auto a = random_cloud(rng, n, d), b = random_cloud(rng, n, d, 0.5);
        EXPECT_NEAR(wasserstein_exact(a, b, p), brute_force(a, b, p), 1e-10);
    }
}

TEST(Wasserstein, OneDimensionalAgreesWithExact) {
    std::mt19937_64 rng(8);
    for (double p : {1.0, 2.0, 3.0}) {
        const auto a = random_cloud(rng, 64, 1), b = random_cloud(rng, 64, 1, -0.3);
        EXPECT_NEAR(wasserstein_1d(a, b, p), wasserstein_exact(a, b, p), 1e-10);
    }
}

TEST(Wasserstein, ShiftedCloudIsShiftDistance) {
    std::mt19937_64 rng(9);
    const auto a = random_cloud(rng, 40, 2);
    Matrix shifted = a.samples();
    for (std::size_t i = 0; i < 40; ++i) {
        shifted(i, 0) += 0.3;
        shifted(i, 1) -= 0.4;
    }
    EXPECT_NEAR(wasserstein2(a, EmpiricalMeasure(shifted)), 0.5, 1e-12);
}

TEST(Wasserstein, MetricAxiomsAndMonotoneInP) {
    std::mt19937_64 rng(10);
    const auto a = random_cloud(rng, 30, 2), b = random_cloud(rng, 30, 2, 1.0), c = random_cloud(rng, 30, 2, -0.5);
    EXPECT_NEAR(wasserstein_exact(a, a, 2.0), 0.0, 1e-12);
    EXPECT_NEAR(wasserstein_exact(a, b, 2.0), wasserstein_exact(b, a, 2.0), 1e-12);
    EXPECT_LE(wasserstein_exact(a, c, 2.0), wasserstein_exact(a, b, 2.0) + wasserstein_exact(b, c, 2.0) + 1e-12);
    EXPECT_LE(wasserstein_exact(a, b, 1.0), wasserstein_exact(a, b, 2.0) + 1e-12);
}

TEST(Wasserstein, UnequalSizesByQuantiles) {
    // two samples of the same evenly spaced law at different resolutions
    std::vector<double> fine(999), coarse(99);
    for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = static_cast<double>(i + 1) / 1000.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = static_cast<double>(i + 1) / 100.0;
    EXPECT_LT(wasserstein_1d(fine, coarse, 2.0), 2e-3);
    std::vector<double> shifted = coarse;
    for (auto& v : shifted) v += 1.0;
    EXPECT_NEAR(wasserstein_1d(fine, shifted, 1.0), 1.0, 2e-3);
}

TEST(Wasserstein, Errors) {
    std::mt19937_64 rng(11);
    const auto a = random_cloud(rng, 5, 2), b = random_cloud(rng, 6, 2), c = random_cloud(rng, 5, 3);
    EXPECT_THROW(wasserstein_exact(a, b, 2.0), ConfigError);
    EXPECT_THROW(wasserstein_exact(a, c, 2.0), ConfigError);
    EXPECT_THROW(wasserstein_exact(a, a, 0.5), ConfigError);
    EXPECT_THROW(wasserstein_1d(a, a, 2.0), ConfigError);
    EXPECT_THROW(wasserstein_1d(std::vector<double>{}, {1.0}, 2.0), ConfigError);
    EXPECT_THROW(EmpiricalMeasure(Matrix(0, 1)), ConfigError);
    EXPECT_THROW(EmpiricalMeasure::from_scalars({1.0, std::nan("")}), ConfigError);
    const auto big = EmpiricalMeasure(Matrix(kAssignmentCap + 1, 2));
    EXPECT_THROW(wasserstein_exact(big, big, 2.0), ConfigError);
}

TEST(PathMetrics, LeftPointL2AndUniform) {
    const sim::TimeGrid g(1.0, 4);
    sim::Path a{Matrix(5, 1)}, b{Matrix(5, 1)};
    for (std::size_t k = 0; k < 5; ++k) b.states(k, 0) = static_cast<double>(k);
    // left-point sum: (0 + 1 + 4 + 9) * 0.25
    EXPECT_NEAR(path_d2(a, b, g), std::sqrt(3.5), 1e-15);
    EXPECT_EQ(path_dinf(a, b), 4.0);
    EXPECT_THROW(path_d2(a, sim::Path{Matrix(4, 1)}, g), ConfigError);
    EXPECT_THROW(path_d2(a, b, sim::TimeGrid(1.0, 5)), ConfigError);
}
