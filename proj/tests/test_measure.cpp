#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rsde/model/measure.hpp"

using namespace rsde;
using namespace rsde::model;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Composite Simpson integral of f_nu from 0 to x, split at the kinks so the
// oracle never integrates across a jump.
double F_oracle(const SignedMeasure& nu, double x, std::vector<double> kinks) {
    const double lo = std::min(0.0, x), hi = std::max(0.0, x);
    std::vector<double> cuts{lo};
    for (double k : kinks)
        if (k > lo && k < hi) cuts.push_back(k);
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t s = 1; s < cuts.size(); ++s) {
        const double a = cuts[s - 1], b = cuts[s];
        const int n = 2000;
        const double h = (b - a) / n;
        // sample strictly inside so right-continuity at a jump does not matter
        const auto g = [&](double u) { return eval_f_nu(nu, std::clamp(u, a + 1e-13, b - 1e-13)); };
        double acc = g(a) + g(b);
        for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
        total += acc * h / 3.0;
    }
    return x >= 0 ? total : -total;
}

CoefficientSpec example_model(double delta) {
    DeclaredConstants c;
    c.delta = delta;
    c.sigma_sup = 3.0;
    return CoefficientSpec(1, ScalarPiecewise{{{kNegInf, -delta, 0.0}, {0.0, -3.0 * delta, 0.0}}},
                           ScalarPiecewise{{{kNegInf, 0.0, 1.0}, {0.0, 0.0, 3.0}}}, c);
}
}  // namespace

TEST(Measure, FnuFromDefinition) {
    const auto nu = SignedMeasure({{-1.0, 0.5}, {2.0, -0.25}}, {{0.0, 0.0}, {1.0, 0.3}});
    EXPECT_DOUBLE_EQ(eval_f_nu(nu, -2.0), 1.0);
    EXPECT_DOUBLE_EQ(eval_f_nu(nu, -1.0), 1.0 / 3.0);  // right-continuous at the atom
    EXPECT_NEAR(eval_f_nu(nu, 0.5), std::exp(-0.3) / 3.0, 1e-15);
    EXPECT_NEAR(eval_f_nu(nu, 3.0), std::exp(-0.6) / 3.0 * (1.25 / 0.75), 1e-15);
    EXPECT_NEAR(nu.total_variation(), 1.05, 1e-15);
}

TEST(Measure, RejectsBadMeasures) {
    EXPECT_THROW(SignedMeasure({{0.0, 1.0}}, {}), ModelError);
    EXPECT_THROW(SignedMeasure({{0.0, -1.0}}, {}), ModelError);
    EXPECT_THROW(SignedMeasure({{1.0, 0.1}, {0.0, 0.1}}, {}), ModelError);
    EXPECT_THROW(SignedMeasure({}, {{0.0, 0.2}, {1.0, 0.3}}), ModelError);
    EXPECT_THROW(SignedMeasure({}, {{1.0, 0.0}, {0.0, 0.3}}), ModelError);
    EXPECT_THROW(SignedMeasure({{std::nan(""), 0.1}}, {}), ModelError);
}

TEST(Transform, BoundsOfSingleAtom) {
    const auto t = build_transform(SignedMeasure::dirac(0.0, 0.5));
    EXPECT_DOUBLE_EQ(t.m(), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(t.M(), 1.0);
    EXPECT_DOUBLE_EQ(t.F(-2.0), -2.0);
    EXPECT_DOUBLE_EQ(t.F(3.0), 1.0);
    EXPECT_DOUBLE_EQ(t.F_inverse(1.0), 3.0);
}

TEST(Transform, MatchesQuadratureOracle) {
    const auto nu = SignedMeasure({{-1.0, 0.5}, {2.0, -0.25}}, {{0.0, 0.0}, {1.0, 0.3}, {1.5, -0.1}});
    const auto t = build_transform(nu);
    for (double x = -4.0; x <= 4.0; x += 0.37) {
        EXPECT_NEAR(t.F(x), F_oracle(nu, x, {-1.0, 0.0, 1.0, 1.5, 2.0}), 1e-10) << x;
        EXPECT_NEAR(t.f(x), eval_f_nu(nu, x), 1e-14) << x;
    }
    // m and M bracket f_nu everywhere and are attained
    double lo = 1e300, hi = 0.0;
    for (double x = -5.0; x <= 5.0; x += 1e-3) {
        lo = std::min(lo, eval_f_nu(nu, x));
        hi = std::max(hi, eval_f_nu(nu, x));
    }
    EXPECT_LE(t.m(), lo + 1e-12);
    EXPECT_NEAR(t.m(), lo, 1e-3);
    EXPECT_GE(t.M(), hi - 1e-12);
    EXPECT_NEAR(t.M(), hi, 1e-3);
}

TEST(Transform, InverseRoundTrip) {
    const auto t = build_transform(SignedMeasure({{-1.0, 0.5}, {2.0, -0.25}}, {{0.0, 0.0}, {1.0, 0.3}}));
    for (double x = -6.0; x <= 6.0; x += 0.013) EXPECT_NEAR(t.F_inverse(t.F(x)), x, 1e-11) << x;
    EXPECT_DOUBLE_EQ(t.F(0.0), 0.0);
}

TEST(Transform, ZeroMeasureIsIdentity) {
    const auto t = build_transform(SignedMeasure::zero());
    EXPECT_DOUBLE_EQ(t.F(1.7), 1.7);
    EXPECT_DOUBLE_EQ(t.F_inverse(-0.4), -0.4);
    const auto sde = example_model(1.0);
    const auto bar = transform_coefficients(sde, t);
    for (double y = -3.0; y <= 3.0; y += 0.25) {
        EXPECT_DOUBLE_EQ(bar.drift(Point{y})[0], sde.drift(Point{y})[0]);
        EXPECT_DOUBLE_EQ(bar.diffusion(Point{y})(0, 0), sde.diffusion(Point{y})(0, 0));
    }
}

TEST(Transform, ConstantCoefficientsGiveFnuDiffusion) {
    const auto t = build_transform(SignedMeasure::dirac(0.0, 0.5));
    const CoefficientSpec sde(1, ScalarPiecewise{{{kNegInf, 0.0, 0.0}}}, ScalarPiecewise{{{kNegInf, 0.0, 1.0}}}, {});
    const auto bar = transform_coefficients(sde, t);
    EXPECT_DOUBLE_EQ(bar.drift(Point{-1.0})[0], 0.0);
    EXPECT_DOUBLE_EQ(bar.drift(Point{1.0})[0], 0.0);
    EXPECT_DOUBLE_EQ(bar.diffusion(Point{-1.0})(0, 0), 1.0);
    EXPECT_NEAR(bar.diffusion(Point{1.0})(0, 0), 1.0 / 3.0, 1e-15);
}

// The closed-form composition: for y < 0, F^{-1}(y) = y and f = 1; for y >= 0,
// F^{-1}(y) = 3y and f = 1/3. With the example coefficients this gives
// sigma_bar = 1 everywhere, and b_bar(y) = -delta y on the left but
// -3 delta y on the right.
TEST(Transform, ExampleModelComposition) {
    const double delta = 0.7;
    const auto bar = transform_coefficients(example_model(delta), build_transform(SignedMeasure::dirac(0.0, 0.5)));
    ASSERT_TRUE(std::holds_alternative<ScalarPiecewise>(bar.drift_variant()));
    for (int i = 0; i < 1000; ++i) {
        const double y = -5.0 + 10.0 * i / 999.0;
        EXPECT_NEAR(bar.diffusion(Point{y})(0, 0), 1.0, 1e-12) << y;
        const double expected = y < 0.0 ? -delta * y : -3.0 * delta * y;
        EXPECT_NEAR(bar.drift(Point{y})[0], expected, 1e-12) << y;
    }
}

TEST(Transform, ContinuousPartUsesCallbacks) {
    const auto nu = SignedMeasure({{0.5, 0.2}}, {{-1.0, 0.0}, {1.0, 0.5}});
    const auto t = build_transform(nu);
    const auto sde = example_model(1.0);
    const auto bar = transform_coefficients(sde, t);
    ASSERT_TRUE(std::holds_alternative<CallbackDrift>(bar.drift_variant()));
    for (int i = 0; i < 60; ++i) {
        const double x = -3.0 + 0.1 * i + 0.013;  // stays off the knots
        const double y = t.F(x);
        const double f = eval_f_nu(nu, x);
        EXPECT_NEAR(bar.drift(Point{y})[0], sde.drift(Point{x})[0] * f, 1e-9) << x;
        EXPECT_NEAR(bar.diffusion(Point{y})(0, 0), sde.diffusion(Point{x})(0, 0) * f, 1e-9) << x;
    }
}

TEST(Transform, RejectsMultiDimensional) {
    EXPECT_THROW(transform_coefficients(ornstein_uhlenbeck(2, 1.0, 1.0), build_transform(SignedMeasure::zero())),
                 ConfigError);
}
