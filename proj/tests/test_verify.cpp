#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rsde/verify/checks.hpp"
#include "rsde/verify/sdel.hpp"

using namespace rsde;
using namespace rsde::model;
using namespace rsde::verify;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

CheckContext make_ctx(CoefficientSpec sde, ConvexDomain dom, double T, std::size_t steps, std::size_t paths) {
    Tolerances tol;
    tol.stability = false;
    return CheckContext{std::move(sde), std::move(dom), sim::TimeGrid(T, steps), MonteCarlo{paths, 1, 1}, tol, std::nullopt, std::nullopt};
}

CheckContext ou_ball(std::size_t paths = 400) {
    return make_ctx(ornstein_uhlenbeck(2, 1.0, 1.0), ConvexDomain::ball({0, 0}, 2.0), 1.0, 100, paths);
}

CoefficientSpec clamped_sigma_model(double k) {
    DeclaredConstants c;
    c.delta = 0.995;
    c.sigma_sup = 1.1;
    c.sigma_lip = 0.1;
    c.lambda = 0.81;
    c.k = k;
    return CoefficientSpec(1, AffineDrift{Matrix::identity(1, -1.0), Point{0.0}},
                           ScalarPiecewise{{{kNegInf, 0.0, 0.9}, {-1.0, 0.1, 1.0}, {1.0, 0.0, 1.1}}}, c);
}
}  // namespace

TEST(Formulas, HandComputedConstants) {
    EXPECT_NEAR(verify::detail::log_harnack_term(1.0, 1.0, 0.25, 1.0), 0.03912941068741641, 1e-15);
    const auto h = verify::detail::harnack_constants(1.0, 1.0, 1.0, 5.0, 0.25, std::exp(2.0));
    EXPECT_DOUBLE_EQ(h.c_p, 1.0);
    EXPECT_NEAR(h.theta, 1.6180339887498947, 1e-14);
    EXPECT_NEAR(h.threshold, 4.0, 1e-15);
    EXPECT_NEAR(h.exponent, 0.22906756004339576, 1e-13);
    EXPECT_DOUBLE_EQ(dinf_constant(3.0, 1.0, 0.0, 1.0), 4.5);
    EXPECT_NEAR(dinf_constant(1.0, 1.0, 0.1, 1.0), 1.4333294145603401, 1e-14);
}

TEST(TestFunctions, ClosedForms) {
    const auto bump = TestFunction::bump_plus_one(2.0, Point{0.0}, 0.5);
    EXPECT_DOUBLE_EQ(bump(Point{0.0}), 3.0);
    EXPECT_DOUBLE_EQ(bump.infimum(), 1.0);
    EXPECT_DOUBLE_EQ(bump.supremum(), 3.0);
    // max slope of the bump is reached at one width from the centre
    const double h = 1e-6, x = 0.5;
    const double slope = (bump(Point{x + h}) - bump(Point{x - h})) / (2 * h);
    EXPECT_NEAR(std::abs(slope), bump.lipschitz(), 1e-6);
    EXPECT_NEAR(bump.grad_norm_sq(Point{x}), slope * slope, 1e-6);
    const auto aff = TestFunction::affine_plus_one({1.0, -2.0}, ConvexDomain::box({0, 0}, {1, 1}));
    EXPECT_DOUBLE_EQ(aff(Point{0.0, 1.0}), 1.0);  // minimum of x - 2y on the box
    EXPECT_THROW(TestFunction::affine_plus_one({1.0, 0.0}, ConvexDomain::whole_space(2)), ConfigError);
    EXPECT_THROW(TestFunction::bump(1.0, Point{0.0}, 0.0), ConfigError);
    EXPECT_THROW(TestFunction::coordinate(2).check_dimension(2), ConfigError);
    EXPECT_DOUBLE_EQ(TestFunction::sine(0, 2.0).grad_norm_sq(Point{0.0}), 4.0);
}

TEST(Contraction, ReflectedOuPasses) {
    const auto r = check_contraction(ou_ball(), "c", {{0.5, 0.0}, {-0.5, 0.0}, {0.0, 0.5, 1.0}});
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_NEAR(r.rows[0].bound, 1.0, 1e-15);
    EXPECT_NEAR(r.rows[2].bound, std::exp(-2.0), 1e-12);
    EXPECT_NEAR(r.rows[0].empirical, 1.0, 1e-15);
    EXPECT_EQ(r.metadata["stability_run"], false);
}

TEST(Contraction, OverstatedRateIsAModelError) {
    auto ctx = ou_ball();
    ctx.sde.constants().delta = 1.2;
    try {
        check_contraction(ctx, "c", {{0.5, 0.0}, {-0.5, 0.0}, {1.0}});
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("x = ("), std::string::npos);
    }
    EXPECT_THROW(check_contraction(ou_ball(), "c", {{5.0, 0.0}, {0.0, 0.0}, {1.0}}), ConfigError);
}

TEST(Contraction, StabilityRunRecorded) {
    auto ctx = ou_ball(200);
    ctx.tol.stability = true;
    const auto r = check_contraction(ctx, "c", {{0.5, 0.0}, {-0.5, 0.0}, {1.0}});
    EXPECT_EQ(r.metadata["refined"]["n_steps"], 200);
    EXPECT_TRUE(r.metadata["verdict_stable"].get<bool>());
}

TEST(Decay, RunsAndRecordsFloor) {
    auto ctx = make_ctx(ornstein_uhlenbeck(1, 1.0, 1.0), ConvexDomain::box({-1}, {3}), 1.0, 50, 500);
    DecayParams p;
    p.x = Point{2.5};
    p.times = {0.5, 1.0, 2.0};
    p.bootstrap_replicates = 10;
    const auto r = check_w2_decay(ctx, "d", p);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_GT(r.metadata["noise_floor"].get<double>(), 0.0);
    EXPECT_GT(r.rows[0].empirical, r.rows[2].empirical);
    p.invariant_mode = "nope";
    EXPECT_THROW(check_w2_decay(ctx, "d", p), ConfigError);
}

TEST(Concentration, PassesAndNegativeControlFails) {
    auto ctx = ou_ball(500);
    ConcentrationParams p;
    p.x0 = {0.0, 0.0};
    p.r_grid = {0.0, 0.25, 0.5, 1.0};
    p.C = 1.0;
    const auto ok = check_t1_concentration(ctx, "t1", p);
    EXPECT_TRUE(ok.pass) << to_json(ok).dump(2);
    EXPECT_EQ(ok.rows[0].bound, 1.0);
    p.C = 1e-4;
    EXPECT_FALSE(check_t1_concentration(ctx, "t1", p).pass);
    p.functional = "F_V";
    p.V = TestFunction::coordinate(0);
    p.C = 1.0;
    EXPECT_TRUE(check_t1_concentration(ctx, "t1", p).pass);
    p.functional = "F_x";
    EXPECT_THROW(check_t1_concentration(ctx, "t1", p), ConfigError);
}

TEST(Witness, ZeroRhoIsTrivialAndFlags) {
    WitnessParams p;
    p.x0 = {0.0, 0.0};
    const auto r = check_t2_witness_d2(ou_ball(100), "w", p);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.rows[0].empirical, 0.0);
    EXPECT_EQ(r.rows[0].bound, 0.0);
    ASSERT_TRUE(r.flagged_typo);
}

TEST(Witness, ConstantRhoAtTwoScales) {
    WitnessParams p;
    p.x0 = {0.0, 0.0};
    p.rho = sim::RhoSpec::constant({0.5, 0.0});
    p.scales = {1.0, 2.0};
    const auto r = check_t2_witness_d2(ou_ball(300), "w", p);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_NEAR(r.rows[1].bound, 4.0 * r.rows[0].bound, 1e-12);
    const auto u = check_t2_witness_dinf(ou_ball(300), "u", p);
    EXPECT_TRUE(u.pass) << to_json(u).dump(2);
    EXPECT_FALSE(u.flagged_typo);
    EXPECT_DOUBLE_EQ(u.metadata["C"].get<double>(), 0.5);
}

TEST(LogHarnack, EqualPointsReduceToJensen) {
    auto ctx = make_ctx(clamped_sigma_model(0.1), ConvexDomain::box({-2}, {2}), 1.0, 100, 500);
    HarnackParams p;
    p.f = TestFunction::bump_plus_one(1.0, Point{0.0}, 0.5);
    p.x = p.y = Point{0.25};
    const auto r = check_log_harnack(ctx, "lh", p);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.rows[0].empirical, r.rows[0].bound);
    EXPECT_EQ(r.metadata["mean_weight"], 1.0);
    p.f = TestFunction::bump(1.0, Point{0.0}, 0.5);
    EXPECT_THROW(check_log_harnack(ctx, "lh", p), ConfigError);
}

TEST(LogHarnack, DistinctPointsPass) {
    auto ctx = make_ctx(clamped_sigma_model(0.1), ConvexDomain::box({-2}, {2}), 1.0, 100, 2000);
    HarnackParams p;
    p.f = TestFunction::bump_plus_one(1.0, Point{0.0}, 0.5);
    p.x = Point{0.25};
    p.y = Point{-0.25};
    const auto r = check_log_harnack(ctx, "lh", p);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_TRUE(r.metadata.contains("alt_lambda_squared"));
}

TEST(Harnack, PassesAndRejectsBadParameters) {
    auto ctx = make_ctx(clamped_sigma_model(0.1), ConvexDomain::box({-2}, {2}), 1.0, 100, 2000);
    HarnackParams p;
    p.f = TestFunction::bump_plus_one(1.0, Point{0.0}, 0.5);
    p.x = Point{0.25};
    p.y = Point{-0.25};
    p.p = 1.5 * std::pow(1.0 + 0.1 / 0.9, 2);
    const auto r = check_harnack(ctx, "h", p);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_TRUE(r.metadata["all_met"].get<bool>());
    p.p = 1.1;
    EXPECT_THROW(check_harnack(ctx, "h", p), ConfigError);
    auto flat = make_ctx(clamped_sigma_model(0.0), ConvexDomain::box({-2}, {2}), 1.0, 100, 10);
    p.p = 4.0;
    EXPECT_THROW(check_harnack(flat, "h", p), ConfigError);
}

TEST(Penalization, LadderAndStiffness) {
    auto ctx = make_ctx(ornstein_uhlenbeck(1, 1.0, 1.0), ConvexDomain::box({-0.5}, {0.5}), 1.0, 1000, 100);
    PenalizationParams p;
    p.x0 = Point{0.0};
    p.eps_ladder = {0.2, 0.05, 0.01};
    p.threshold = 1.0;
    const auto r = check_penalization(ctx, "pen", p);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_TRUE(std::isnan(r.rows[0].bound));
    EXPECT_EQ(r.rows[2].bound, r.rows[1].empirical);
    p.threshold = 1e-3;
    EXPECT_FALSE(check_penalization(ctx, "pen", p).pass);
    p.eps_ladder = {0.05, 0.2};
    EXPECT_THROW(check_penalization(ctx, "pen", p), ConfigError);
    p.eps_ladder = {0.2, 0.001};
    EXPECT_THROW(check_penalization(ctx, "pen", p), ConfigError);
}

TEST(Monotonicity, BallAndBox) {
    for (const auto& dom : {ConvexDomain::ball({0, 0}, 1.0), ConvexDomain::box({-1, -1}, {1, 0.5})}) {
        auto ctx = make_ctx(ornstein_uhlenbeck(2, 0.5, 1.5), dom, 1.0, 100, 100);
        const auto r = check_reflection_monotonicity(ctx, "m", {{{Point{0.5, 0.0}, Point{-0.5, 0.0}}}});
        EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    }
}

TEST(MonotonicitySums, HandExample) {
    sim::ReflectedPath X{Matrix::from_rows({{0.0}, {1.0}}), Matrix::from_rows({{0.5}}), 0.5};
    sim::ReflectedPath Y{Matrix::from_rows({{0.0}, {-1.0}}), Matrix::from_rows({{-0.25}}), 0.25};
    const auto s = monotonicity_sums(X, Y);
    EXPECT_DOUBLE_EQ(s.own, 1.0);
    EXPECT_DOUBLE_EQ(s.mixed, 1.5);
}

TEST(Poincare, OuPassesUnderstatedSigmaFails) {
    auto ctx = make_ctx(ornstein_uhlenbeck(1, 1.0, 1.0), ConvexDomain::whole_space(1), 2.0, 100, 2000);
    PoincareParams p;
    p.x0 = Point{0.0};
    const auto r = check_poincare(ctx, "p", p);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_DOUBLE_EQ(r.rows[0].bound, 0.5);
    ctx.sde.constants().sigma_sup = 0.5;
    EXPECT_FALSE(check_poincare(ctx, "p", p).pass);
}

TEST(Sdel, ExampleSuite) {
    const double delta = 1.0;
    DeclaredConstants c;
    c.delta = delta;
    c.sigma_sup = 3.0;
    const CoefficientSpec sde(1, ScalarPiecewise{{{kNegInf, -delta, 0.0}, {0.0, -3.0 * delta, 0.0}}},
                              ScalarPiecewise{{{kNegInf, 0.0, 1.0}, {0.0, 0.0, 3.0}}}, c);
    auto ctx = make_ctx(sde, ConvexDomain::whole_space(1), 1.0, 100, 300);
    ctx.measure = SignedMeasure::dirac(0.0, 0.5);
    DeclaredConstants tc;
    tc.delta = delta;
    tc.sigma_sup = 1.0;
    tc.lambda = 1.0;
    ctx.transformed_constants = tc;
    SdelParams p;
    p.x = 1.0;
    p.y = -1.0;
    p.rho = sim::RhoSpec::constant({0.5});
    p.harnack = false;
    p.bootstrap_replicates = 10;
    const auto reps = check_sdel_suite(ctx, "s", p);
    ASSERT_EQ(reps.size(), 5u);
    EXPECT_EQ(reps[0].name, "s/transform");
    EXPECT_DOUBLE_EQ(reps[0].metadata["m"].get<double>(), 1.0 / 3.0);
    EXPECT_TRUE(reps[0].metadata["exact_coefficients"].get<bool>());
    for (const auto& r : reps) EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    // the X-side witness bound is the Y-side bound scaled by 1/m^2
    EXPECT_NEAR(reps[2].rows[0].bound, 9.0 * reps[1].rows[0].bound, 1e-9);
    p.harnack = true;
    EXPECT_THROW(check_sdel_suite(ctx, "s", p), ConfigError);  // transformed k = 0
    ctx.measure.reset();
    EXPECT_THROW(check_sdel_suite(ctx, "s", p), ConfigError);
}
