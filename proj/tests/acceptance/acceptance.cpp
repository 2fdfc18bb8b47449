// Acceptance runner: one PASS/FAIL line per criterion. With an argument N
// only criterion N runs; the exit status is nonzero iff a run criterion fails.
// Every threshold below is fixed here on purpose; none is read from a file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/cli/runner.hpp"
#include "rsde/model/measure.hpp"
#include "rsde/ot/wasserstein.hpp"

using namespace rsde;
using verify::Json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Reflected OU dX = -X dt + dB in the ball of radius 2 about the origin.
Json ou_ball() {
    return Json::parse(R"({
      "dimension": 2,
      "drift": {"type": "linear", "rate": 1.0},
      "diffusion": {"type": "scalar", "value": 1.0},
      "constants": {"delta": 1.0, "sigma_sup": 1.0, "lambda": 1.0},
      "domain": {"type": "ball", "center": [0, 0], "radius": 2.0}})");
}

// OU with sigma(x) = 1 + 0.1 clamp(x, -1, 1), reflected in [-2, 2].
Json clamped_sigma_model() {
    return Json::parse(R"({
      "dimension": 1,
      "drift": {"type": "linear", "rate": 1.0},
      "diffusion": {"type": "piecewise", "pieces": [
        {"slope": 0.0, "intercept": 0.9},
        {"threshold": -1.0, "slope": 0.1, "intercept": 1.0},
        {"threshold": 1.0, "slope": 0.0, "intercept": 1.1}]},
      "constants": {"delta": 0.995, "sigma_sup": 1.1, "sigma_lip": 0.1, "lambda": 0.81, "k": 0.1},
      "domain": {"type": "box", "lower": [-2], "upper": [2]}})");
}

// b = -delta x (x < 0), -3 delta x (x >= 0); sigma = 1 (x < 0), 3 (x >= 0); nu = delta_0 / 2.
Json example_sdel_model() {
    return Json::parse(R"({
      "dimension": 1,
      "drift": {"type": "piecewise", "pieces": [
        {"slope": -1.0, "intercept": 0.0},
        {"threshold": 0.0, "slope": -3.0, "intercept": 0.0}]},
      "diffusion": {"type": "piecewise", "pieces": [
        {"slope": 0.0, "intercept": 1.0},
        {"threshold": 0.0, "slope": 0.0, "intercept": 3.0}]},
      "constants": {"delta": 1.0, "sigma_sup": 3.0},
      "domain": {"type": "whole_space"},
      "measure": {"atoms": [{"location": 0.0, "weight": 0.5}]},
      "transformed_constants": {"delta": 1.0, "sigma_sup": 1.0, "lambda": 1.0}})");
}

std::vector<verify::ExperimentReport> run_single(Json model, Json grid, std::size_t n_paths, const std::string& check,
                                                 Json params, bool stability = true) {
    Json cfg{{"model", std::move(model)},
             {"grid", std::move(grid)},
             {"mc", {{"n_paths", n_paths}, {"master_seed", kSeed}}},
             {"tolerances", {{"z", 3.0}, {"stability", stability}}},
             {"experiments", Json::array({Json{{"name", "acceptance"}, {"check", check}, {"params", std::move(params)}}})}};
    const auto rc = cli::parse_config(cfg, std::nullopt, 0);
    return cli::run_experiment(rc.experiments.front());
}

std::string rows_text(const verify::ExperimentReport& r) {
    std::string s;
    for (const auto& row : r.rows)
        s += " [" + num(row.t_or_r) + ": " + num(row.empirical) + " vs " + num(row.bound) + "+3*" + num(row.std_error) +
             (row.pass ? "]" : " FAIL]");
    return s;
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
    const auto r = run_single(ou_ball(), {{"T", 2.0}, {"n_steps", 2000}}, 10000, "check_contraction",
                              {{"x", {0.5, 0.0}}, {"y", {-0.5, 0.0}}, {"times", {0.5, 1.0, 2.0}}})
                       .front();
    return {r.pass, "E|X^x_t - X^y_t|^2 <= e^{-2t}|x-y|^2, stable under dt/2:" + rows_text(r)};
}

Outcome criterion_2() {
    constexpr double kThreshold = 0.05;
    // dt = eps_min / 4 = 0.0125 / 4 on [0, 1]
    const auto r = run_single(Json::parse(R"({
        "dimension": 1,
        "drift": {"type": "linear", "rate": 0.0},
        "diffusion": {"type": "scalar", "value": 1.0},
        "constants": {"delta": 0.0, "sigma_sup": 1.0},
        "domain": {"type": "box", "lower": [-1], "upper": [1]}})"),
                              {{"T", 1.0}, {"n_steps", 320}}, 1000, "check_penalization",
                              {{"x0", {0.9}}, {"eps_ladder", {0.1, 0.05, 0.025, 0.0125}}, {"threshold", kThreshold}})
                       .front();
    std::string eta;
    for (const auto& e : r.metadata["eta_rows"]) eta += " " + num(e["median"].get<double>());
    return {r.pass, "medians strictly decreasing, final < " + num(kThreshold) + "; state medians:" + rows_text(r) +
                        "; eta medians:" + eta};
}

Outcome criterion_3() {
    const auto r = run_single(ou_ball(), {{"T", 1.0}, {"n_steps", 1000}}, 10000, "check_t2_witness_d2",
                              {{"x0", {0.0, 0.0}},
                               {"rho", {{"type", "constant"}, {"value", {0.5, 0.5}}}},
                               {"scales", {1.0, 2.0}}})
                       .front();
    return {r.pass, "E d2(X,Y)^2 <= (sigma^2/delta^2) E int|rho|^2, rho = 0.5 and 1:" + rows_text(r)};
}

Outcome criterion_4() {
    const double lambda = 0.81, k = 0.1;
    const double p = 1.5 * (1.0 + k / lambda) * (1.0 + k / lambda);
    const auto r = run_single(clamped_sigma_model(), {{"T", 1.0}, {"n_steps", 1000}}, 100000, "check_harnack",
                              {{"f", {{"type", "bump_plus_one"}, {"amplitude", 1.0}, {"center", {0.0}}, {"width", 0.5}}},
                               {"x", {0.25}},
                               {"y", {-0.25}},
                               {"p", p}})
                       .front();
    const auto& m = r.metadata;
    return {r.pass, "p = " + num(p) + ", (P_T f(y))^p <= P_T f^p(x) e^Phi; mean(R) = " +
                        num(m["mean_weight"].get<double>()) + " +- " + num(m["mean_weight_se"].get<double>()) +
                        ", all paths met: " + (m["all_met"].get<bool>() ? "yes" : "no") + ";" + rows_text(r)};
}

Outcome criterion_5() {
    const Json f = {{"type", "bump_plus_one"}, {"amplitude", 1.0}, {"center", {0.0}}, {"width", 0.5}};
    const Json grid = {{"T", 1.0}, {"n_steps", 500}};
    const auto r = run_single(clamped_sigma_model(), grid, 100000, "check_log_harnack",
                              {{"f", f}, {"x", {0.25}}, {"y", {-0.25}}})
                       .front();
    // x = y: the bound is log P_T f(x) and the left side E log f; Jensen's gap
    // must exceed the sampling error by a clear margin.
    const auto j = run_single(clamped_sigma_model(), grid, 100000, "check_log_harnack",
                              {{"f", f}, {"x", {0.25}}, {"y", {0.25}}})
                       .front();
    const double margin = j.bound - j.empirical;
    const bool jensen = j.pass && margin > 3.0 * j.std_error && margin > 0.0;
    return {r.pass && jensen, "P_T log f(y) <= log P_T f(x) + term:" + rows_text(r) + "; x = y Jensen margin " +
                                  num(margin) + " (3 SE = " + num(3.0 * j.std_error) + ")"};
}

Outcome criterion_6() {
    constexpr double kTol = 1e-12;
    constexpr double delta = 1.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    model::DeclaredConstants k;
    k.delta = delta;
    k.sigma_sup = 3.0;
    const model::CoefficientSpec sde(1, model::ScalarPiecewise{{{-inf, -delta, 0.0}, {0.0, -3.0 * delta, 0.0}}},
                                     model::ScalarPiecewise{{{-inf, 0.0, 1.0}, {0.0, 0.0, 3.0}}}, k);
    const auto t = model::build_transform(model::SignedMeasure::dirac(0.0, 0.5));
    const auto bar = model::transform_coefficients(sde, t);
    double sigma_err = 0.0, drift_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double y = -5.0 + 10.0 * i / 999.0;
        sigma_err = std::max(sigma_err, std::abs(bar.diffusion(Point{y})(0, 0) - 1.0));
        drift_err = std::max(drift_err, std::abs(bar.drift(Point{y})[0] - (-delta * y)));
    }
    const bool mM = t.m() == 1.0 / 3.0 && t.M() == 1.0;
    const bool pass = sigma_err < kTol && drift_err < kTol && mM;
    return {pass, "sigma_bar = 1 (max err " + num(sigma_err) + "), b_bar = -delta y (max err " + num(drift_err) +
                      "), m = " + num(t.m()) + ", M = " + num(t.M()) + ", tolerance " + num(kTol)};
}

Outcome criterion_7() {
    auto reps = run_single(example_sdel_model(), {{"T", 3.0}, {"n_steps", 600}}, 10000, "check_sdel_suite",
                           {{"x", 1.0},
                            {"y", -1.0},
                            {"p", 2.0},
                            {"f", {{"type", "constant"}, {"value", 1.0}}},
                            {"times", {1.0, 2.0, 3.0}},
                            {"invariant_samples", 10000},
                            {"harnack", false}});
    const auto it = std::find_if(reps.begin(), reps.end(),
                                 [](const auto& r) { return r.name.ends_with("/w2_decay_x"); });
    if (it == reps.end()) return {false, "no W2 decay report for X"};
    return {it->pass, "W2(P_t(x,.), mu) <= (M/m) e^{-t} (int|x-y|^2 dmu)^{1/2} + floor:" + rows_text(*it)};
}

double brute_force(const ot::EmpiricalMeasure& a, const ot::EmpiricalMeasure& b, double p) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            s += std::pow(distance(a.samples().row(i), b.samples().row(perm[i])), p);
        best = std::min(best, s / static_cast<double>(perm.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best, 1.0 / p);
}

Outcome criterion_8() {
    constexpr double kExactTol = 1e-12;  // relative, for "equals"
    constexpr double kOneDimTol = 1e-10;
    std::mt19937_64 rng(kSeed);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<std::size_t> size(1, 7), dim(1, 3);
    const auto cloud = [&](std::size_t n, std::size_t d) {
        Matrix m(n, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) m(i, j) = normal(rng);
        return ot::EmpiricalMeasure(std::move(m));
    };
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = size(rng), d = dim(rng);
        const double p = trial % 2 ? 2.0 : 1.0;
        const auto a = cloud(n, d), b = cloud(n, d);
        const double exact = ot::wasserstein_exact(a, b, p), brute = brute_force(a, b, p);
        worst = std::max(worst, std::abs(exact - brute) / std::max(1.0, brute));
    }
    double worst_1d = 0.0;
    for (double p : {1.0, 2.0}) {
        const auto a = cloud(64, 1), b = cloud(64, 1);
        worst_1d = std::max(worst_1d, std::abs(ot::wasserstein_exact(a, b, p) - ot::wasserstein_1d(a, b, p)));
    }
    return {worst <= kExactTol && worst_1d <= kOneDimTol,
            "1000 trials n <= 7: max rel diff " + num(worst) + " (<= " + num(kExactTol) + "); n = 64 1-D: " +
                num(worst_1d) + " (<= " + num(kOneDimTol) + ")"};
}

Outcome criterion_9() {
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // 10 start pairs x 100 noise paths = 10^3 path pairs per domain
    const auto pairs_in = [&](double scale) {
        Json pairs = Json::array();
        for (int i = 0; i < 10; ++i) {
            Json x = {scale * u(rng), scale * u(rng)}, y = {scale * u(rng), scale * u(rng)};
            pairs.push_back({{"x", x}, {"y", y}});
        }
        return pairs;
    };
    const Json grid = {{"T", 1.0}, {"n_steps", 500}};
    auto box = ou_ball();
    box["domain"] = {{"type", "box"}, {"lower", {-1.0, -1.0}}, {"upper", {1.0, 1.0}}};
    // scale 1.4 keeps starts inside the radius-2 ball
    const auto rb = run_single(ou_ball(), grid, 100, "check_reflection_monotonicity", {{"pairs", pairs_in(1.4)}}).front();
    const auto rx = run_single(box, grid, 100, "check_reflection_monotonicity", {{"pairs", pairs_in(1.0)}}).front();
    double worst_b = 0.0, worst_x = 0.0;
    for (const auto& r : rb.rows) worst_b = std::max(worst_b, r.empirical);
    for (const auto& r : rx.rows) worst_x = std::max(worst_x, r.empirical);
    return {rb.pass && rx.pass, "discrete sums >= -1e-8 * n_steps (" + num(1e-8 * 500) +
                                    "); worst negative part ball " + num(worst_b) + ", box " + num(worst_x)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

Outcome criterion_10() {
    const fs::path config = fs::path(RSDE_SOURCE_DIR) / "configs/smoke.json";
    const fs::path dir = fs::temp_directory_path() / "rsde_acceptance_determinism";
    const auto suite = [&](const std::string& workers) {
        fs::remove_all(dir);
        const std::string c = config.string(), o = dir.string();
        const char* argv[] = {"rsde", "-c", c.c_str(), "-o", o.c_str(), "-j", workers.c_str()};
        std::ostringstream sink;
        const int code = cli::run_cli(7, argv, sink, sink);
        return std::make_pair(code, snapshot(dir));
    };
    const auto a = suite("1"), b = suite("1"), c = suite("4");
    fs::remove_all(dir);
    const bool ran = a.first <= 1 && !a.second.empty();
    const bool same = a == b, workers = a == c;
    return {ran && same && workers, std::to_string(a.second.size()) + " output files; rerun byte-identical: " +
                                        (same ? "yes" : "no") + "; 1 vs 4 workers identical: " +
                                        (workers ? "yes" : "no")};
}

const std::vector<std::function<Outcome()>> kCriteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                         criterion_5, criterion_6, criterion_7, criterion_8,
                                                         criterion_9, criterion_10};

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> which;
    if (argc > 1) {
        const int n = std::atoi(argv[1]);
        if (n < 1 || n > static_cast<int>(kCriteria.size())) {
            std::fprintf(stderr, "usage: acceptance [1-%zu]\n", kCriteria.size());
            return 2;
        }
        which.push_back(static_cast<std::size_t>(n));
    } else {
        for (std::size_t i = 1; i <= kCriteria.size(); ++i) which.push_back(i);
    }
    bool all = true;
    for (auto n : which) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = kCriteria[n - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu: %s  %s  (%.1f s)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
