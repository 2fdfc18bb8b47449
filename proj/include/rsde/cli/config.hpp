#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rsde/errors.hpp"
#include "rsde/model/coefficients.hpp"
#include "rsde/model/domain.hpp"
#include "rsde/model/measure.hpp"
#include "rsde/sim/couplings.hpp"
#include "rsde/verify/checks.hpp"
#include "rsde/verify/context.hpp"
#include "rsde/verify/sdel.hpp"

namespace rsde::cli {

using verify::Json;

// Strict reading: every object is checked against its allowed keys and every
// access names the full key path in its error.
namespace detail {

inline void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + path + "." + k + "'");
}

inline const Json& need(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError("missing key '" + path + "." + key + "'");
    return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError("'" + path + "' must be a number");
    return j.get<double>();
}

inline double number(const Json& j, const std::string& path, const char* key) {
    return number(need(j, path, key), path + "." + key);
}

inline double number_or(const Json& j, const std::string& path, const char* key, double def) {
    return j.contains(key) ? number(j.at(key), path + "." + key) : def;
}

inline std::uint64_t count(const Json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError("'" + path + "' must be a non-negative integer");
    return j.get<std::uint64_t>();
}

inline std::uint64_t count(const Json& j, const std::string& path, const char* key) {
    return count(need(j, path, key), path + "." + key);
}

inline std::uint64_t count_or(const Json& j, const std::string& path, const char* key, std::uint64_t def) {
    return j.contains(key) ? count(j.at(key), path + "." + key) : def;
}

inline std::string text(const Json& j, const std::string& path, const char* key) {
    const Json& v = need(j, path, key);
    if (!v.is_string()) throw ConfigError("'" + path + "." + key + "' must be a string");
    return v.get<std::string>();
}

inline bool flag_or(const Json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) throw ConfigError("'" + path + "." + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

inline std::vector<double> numbers(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError("'" + path + "' must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<double> numbers(const Json& j, const std::string& path, const char* key) {
    return numbers(need(j, path, key), path + "." + key);
}

inline Matrix matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError("'" + path + "' must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        rows.push_back(numbers(j[i], path + "[" + std::to_string(i) + "]"));
        if (rows.back().size() != rows.front().size()) throw ConfigError("'" + path + "' rows differ in length");
    }
    return Matrix::from_rows(rows);
}

inline Point point(const Json& j, const std::string& path, const char* key, std::size_t d) {
    Point p = numbers(j, path, key);
    if (p.size() != d) throw ConfigError("'" + path + "." + key + "' must have dimension " + std::to_string(d));
    return p;
}

inline model::ScalarPiecewise piecewise(const Json& j, const std::string& path) {
    const Json& arr = need(j, path, "pieces");
    if (!arr.is_array() || arr.empty()) throw ConfigError("'" + path + ".pieces' must be a non-empty array");
    model::ScalarPiecewise out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + ".pieces[" + std::to_string(i) + "]";
        allow_keys(arr[i], p, {"threshold", "slope", "intercept"});
        const double th = i == 0 ? number_or(arr[i], p, "threshold", -std::numeric_limits<double>::infinity())
                                 : number(arr[i], p, "threshold");
        out.pieces.push_back({th, number(arr[i], p, "slope"), number(arr[i], p, "intercept")});
        if (i > 0 && !(out.pieces[i].threshold > out.pieces[i - 1].threshold))
            throw ConfigError("'" + path + ".pieces' thresholds must be increasing");
    }
    return out;
}

inline model::Drift drift(const Json& j, std::size_t d) {
    const std::string path = "model.drift";
    const std::string type = text(j, path, "type");
    if (type == "affine") {
        allow_keys(j, path, {"type", "A", "c"});
        Point c = j.contains("c") ? numbers(j.at("c"), path + ".c") : Point(d, 0.0);
        return model::AffineDrift{matrix(need(j, path, "A"), path + ".A"), std::move(c)};
    }
    if (type == "linear") {  // b(x) = -rate x
        allow_keys(j, path, {"type", "rate"});
        return model::AffineDrift{Matrix::identity(d, -number(j, path, "rate")), Point(d, 0.0)};
    }
    if (type == "piecewise") {
        allow_keys(j, path, {"type", "pieces"});
        return piecewise(j, path);
    }
    if (type == "callback") {
        allow_keys(j, path, {"type", "id"});
        return model::lookup_drift_callback(text(j, path, "id"));
    }
    throw ConfigError("model.drift.type: unknown type '" + type + "'");
}

inline model::Diffusion diffusion(const Json& j, std::size_t d) {
    const std::string path = "model.diffusion";
    const std::string type = text(j, path, "type");
    if (type == "constant") {
        allow_keys(j, path, {"type", "sigma"});
        return model::ConstantDiffusion{matrix(need(j, path, "sigma"), path + ".sigma")};
    }
    if (type == "scalar") {  // sigma = value * I
        allow_keys(j, path, {"type", "value"});
        return model::ConstantDiffusion{Matrix::identity(d, number(j, path, "value"))};
    }
    if (type == "piecewise") {
        allow_keys(j, path, {"type", "pieces"});
        return piecewise(j, path);
    }
    if (type == "callback") {
        allow_keys(j, path, {"type", "id"});
        return model::lookup_diffusion_callback(text(j, path, "id"));
    }
    throw ConfigError("model.diffusion.type: unknown type '" + type + "'");
}

inline model::DeclaredConstants constants(const Json& j, const std::string& path) {
    allow_keys(j, path, {"delta", "sigma_sup", "sigma_lip", "lambda", "k"});
    model::DeclaredConstants c;
    c.delta = number(j, path, "delta");
    c.sigma_sup = number(j, path, "sigma_sup");
    c.sigma_lip = number_or(j, path, "sigma_lip", 0.0);
    c.lambda = number_or(j, path, "lambda", 0.0);
    c.k = number_or(j, path, "k", 0.0);
    return c;
}

inline Json to_json(const model::DeclaredConstants& c) {
    return Json{{"delta", c.delta}, {"sigma_sup", c.sigma_sup}, {"sigma_lip", c.sigma_lip}, {"lambda", c.lambda}, {"k", c.k}};
}

inline model::ConvexDomain domain(const Json& j, std::size_t d) {
    const std::string path = "model.domain";
    const std::string type = text(j, path, "type");
    if (type == "ball") {
        allow_keys(j, path, {"type", "center", "radius"});
        return model::ConvexDomain::ball(point(j, path, "center", d), number(j, path, "radius"));
    }
    if (type == "box") {
        allow_keys(j, path, {"type", "lower", "upper"});
        return model::ConvexDomain::box(point(j, path, "lower", d), point(j, path, "upper", d));
    }
    if (type == "halfspace") {
        allow_keys(j, path, {"type", "normal", "offset"});
        return model::ConvexDomain::halfspace(point(j, path, "normal", d), number(j, path, "offset"));
    }
    if (type == "whole_space") {
        allow_keys(j, path, {"type"});
        return model::ConvexDomain::whole_space(d);
    }
    throw ConfigError("model.domain.type: unknown type '" + type + "'");
}

inline model::SignedMeasure measure(const Json& j) {
    const std::string path = "model.measure";
    allow_keys(j, path, {"atoms", "cdf"});
    std::vector<model::Atom> atoms;
    std::vector<model::CdfKnot> cdf;
    if (j.contains("atoms")) {
        const Json& a = j.at("atoms");
        if (!a.is_array()) throw ConfigError("'model.measure.atoms' must be an array");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string p = path + ".atoms[" + std::to_string(i) + "]";
            allow_keys(a[i], p, {"location", "weight"});
            atoms.push_back({number(a[i], p, "location"), number(a[i], p, "weight")});
        }
    }
    if (j.contains("cdf")) {
        const Json& c = j.at("cdf");
        if (!c.is_array()) throw ConfigError("'model.measure.cdf' must be an array");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::string p = path + ".cdf[" + std::to_string(i) + "]";
            allow_keys(c[i], p, {"x", "value"});
            cdf.push_back({number(c[i], p, "x"), number(c[i], p, "value")});
        }
    }
    try {
        return model::SignedMeasure(std::move(atoms), std::move(cdf));
    } catch (const ModelError& e) {
        throw ConfigError(std::string("model.measure: ") + e.what());
    }
}

inline verify::TestFunction test_function(const Json& j, const std::string& path, const model::ConvexDomain& dom) {
    const std::string type = text(j, path, "type");
    const std::size_t d = dom.dimension();
    if (type == "constant") {
        allow_keys(j, path, {"type", "value"});
        return verify::TestFunction::constant(number(j, path, "value"));
    }
    if (type == "bump_plus_one" || type == "bump") {
        allow_keys(j, path, {"type", "amplitude", "center", "width"});
        auto f = verify::TestFunction::bump_plus_one(number(j, path, "amplitude"), point(j, path, "center", d),
                                                     number(j, path, "width"));
        if (type == "bump") f.kind = verify::TestFunction::Kind::bump;
        return f;
    }
    if (type == "affine_plus_one") {
        allow_keys(j, path, {"type", "weights"});
        return verify::TestFunction::affine_plus_one(point(j, path, "weights", d), dom);
    }
    if (type == "coordinate" || type == "sine") {
        allow_keys(j, path, {"type", "index", "scale"});
        const auto i = static_cast<std::size_t>(count_or(j, path, "index", 0));
        const double s = number_or(j, path, "scale", 1.0);
        auto f = type == "coordinate" ? verify::TestFunction::coordinate(i, s) : verify::TestFunction::sine(i, s);
        f.check_dimension(d);
        return f;
    }
    if (type == "norm") {
        allow_keys(j, path, {"type", "scale"});
        return verify::TestFunction::norm(number_or(j, path, "scale", 1.0));
    }
    throw ConfigError(path + ".type: unknown function '" + type + "'");
}

inline sim::RhoSpec rho(const Json& j, const std::string& path, std::size_t d) {
    const std::string type = text(j, path, "type");
    if (type == "zero") {
        allow_keys(j, path, {"type"});
        return sim::RhoSpec::zero();
    }
    if (type == "constant") {
        allow_keys(j, path, {"type", "value"});
        return sim::RhoSpec::constant(point(j, path, "value", d));
    }
    if (type == "sinusoid") {
        allow_keys(j, path, {"type", "amplitude", "frequency"});
        return sim::RhoSpec::sinusoid(number(j, path, "amplitude"), number(j, path, "frequency"));
    }
    if (type == "feedback_clamped") {
        allow_keys(j, path, {"type", "gain", "bound"});
        return sim::RhoSpec::feedback_clamped(number(j, path, "gain"), number(j, path, "bound"));
    }
    throw ConfigError(path + ".type: unknown rho '" + type + "'");
}

}  // namespace detail

using CheckParams =
    std::variant<verify::ContractionParams, verify::DecayParams, verify::ConcentrationParams, verify::WitnessParams,
                 verify::HarnackParams, verify::PenalizationParams, verify::MonotonicityParams, verify::SdelParams,
                 verify::PoincareParams>;

struct Experiment {
    std::string name;
    std::string check;
    CheckParams params;
    verify::CheckContext context;
};

struct OutputSpec {
    std::string directory = "rsde_out";
    std::vector<std::string> formats{"json", "jsonl", "summary", "csv"};
};

struct RunConfig {
    std::vector<Experiment> experiments;
    OutputSpec output;
    Json normalized;  ///< the validated configuration with every default filled in
};

namespace detail {

struct Blocks {
    Json model, grid, mc, tolerances;
};

inline verify::CheckContext build_context(const Blocks& b, Json& echo_model, Json& echo_grid, Json& echo_mc,
                                          Json& echo_tol, std::size_t workers) {
    const Json& m = b.model;
    allow_keys(m, "model", {"dimension", "drift", "diffusion", "constants", "domain", "measure", "transformed_constants"});
    const auto d = static_cast<std::size_t>(count(m, "model", "dimension"));
    if (d == 0) throw ConfigError("model.dimension must be >= 1");
    auto consts = constants(need(m, "model", "constants"), "model.constants");
    model::CoefficientSpec sde(d, drift(need(m, "model", "drift"), d), diffusion(need(m, "model", "diffusion"), d),
                               consts);
    auto dom = domain(need(m, "model", "domain"), d);
    std::optional<model::SignedMeasure> nu;
    if (m.contains("measure")) nu = measure(m.at("measure"));
    std::optional<model::DeclaredConstants> tc;
    if (m.contains("transformed_constants"))
        tc = constants(m.at("transformed_constants"), "model.transformed_constants");
    echo_model = m;
    echo_model["constants"] = to_json(consts);
    if (tc) echo_model["transformed_constants"] = to_json(*tc);

    allow_keys(b.grid, "grid", {"T", "n_steps"});
    sim::TimeGrid grid(number(b.grid, "grid", "T"), static_cast<std::size_t>(count(b.grid, "grid", "n_steps")));
    echo_grid = Json{{"T", grid.T()}, {"n_steps", grid.n_steps()}};

    allow_keys(b.mc, "mc", {"n_paths", "master_seed", "workers"});
    verify::MonteCarlo mc;
    mc.n_paths = static_cast<std::size_t>(count(b.mc, "mc", "n_paths"));
    mc.master_seed = count_or(b.mc, "mc", "master_seed", 1);
    mc.workers = workers ? workers : static_cast<std::size_t>(count_or(b.mc, "mc", "workers", 1));
    if (mc.n_paths < 2) throw ConfigError("mc.n_paths must be >= 2");
    // worker count does not influence results and is not echoed
    echo_mc = Json{{"n_paths", mc.n_paths}, {"master_seed", mc.master_seed}};

    const Json& t = b.tolerances;
    allow_keys(t, "tolerances",
               {"z", "validation_tol", "validation_points", "validation_extent", "meeting_tol", "blowup_guard",
                "monotonicity_per_step", "stability"});
    verify::Tolerances tol;
    tol.z = number_or(t, "tolerances", "z", tol.z);
    tol.validation_tol = number_or(t, "tolerances", "validation_tol", tol.validation_tol);
    tol.validation_points =
        static_cast<std::size_t>(count_or(t, "tolerances", "validation_points", tol.validation_points));
    tol.validation_extent = number_or(t, "tolerances", "validation_extent", tol.validation_extent);
    tol.meeting_tol = number_or(t, "tolerances", "meeting_tol", tol.meeting_tol);
    tol.blowup_guard = number_or(t, "tolerances", "blowup_guard", tol.blowup_guard);
    tol.monotonicity_per_step = number_or(t, "tolerances", "monotonicity_per_step", tol.monotonicity_per_step);
    tol.stability = flag_or(t, "tolerances", "stability", tol.stability);
    if (!(tol.z > 0.0)) throw ConfigError("tolerances.z must be > 0");
    echo_tol = verify::to_json(tol);

    verify::CheckContext ctx{std::move(sde), std::move(dom), grid, mc, tol, std::move(nu), tc, Json::object()};
    ctx.echo = Json{{"model", echo_model}, {"grid", echo_grid}, {"mc", echo_mc}, {"tolerances", echo_tol}};
    return ctx;
}

inline CheckParams parse_params(const std::string& check, const Json& j, const std::string& path,
                                const verify::CheckContext& ctx) {
    const std::size_t d = ctx.sde.dimension();
    const auto& dom = ctx.domain;
    if (check == "check_contraction") {
        allow_keys(j, path, {"x", "y", "times"});
        return verify::ContractionParams{point(j, path, "x", d), point(j, path, "y", d), numbers(j, path, "times")};
    }
    if (check == "check_w2_decay") {
        allow_keys(j, path, {"x", "times", "invariant_samples", "invariant_mode", "bootstrap_replicates"});
        verify::DecayParams p;
        p.x = point(j, path, "x", d);
        p.times = numbers(j, path, "times");
        p.invariant_samples = count_or(j, path, "invariant_samples", 0);
        if (j.contains("invariant_mode")) p.invariant_mode = text(j, path, "invariant_mode");
        p.bootstrap_replicates = count_or(j, path, "bootstrap_replicates", p.bootstrap_replicates);
        return p;
    }
    if (check == "check_t1_concentration") {
        allow_keys(j, path, {"x0", "functional", "V", "r_grid", "C"});
        verify::ConcentrationParams p;
        p.x0 = point(j, path, "x0", d);
        p.functional = text(j, path, "functional");
        if (p.functional != "F_inf" && p.functional != "F_V")
            throw ConfigError(path + ".functional: unknown functional id '" + p.functional + "'");
        if (p.functional == "F_V") p.V = test_function(need(j, path, "V"), path + ".V", dom);
        p.r_grid = numbers(j, path, "r_grid");
        p.C = number(j, path, "C");
        return p;
    }
    if (check == "check_t2_witness_d2" || check == "check_t2_witness_dinf") {
        allow_keys(j, path, {"x0", "rho", "scales"});
        verify::WitnessParams p;
        p.x0 = point(j, path, "x0", d);
        p.rho = rho(need(j, path, "rho"), path + ".rho", d);
        if (j.contains("scales")) p.scales = numbers(j, path, "scales");
        return p;
    }
    if (check == "check_log_harnack" || check == "check_harnack") {
        if (check == "check_harnack") allow_keys(j, path, {"f", "x", "y", "p"});
        else allow_keys(j, path, {"f", "x", "y"});
        verify::HarnackParams p;
        p.f = test_function(need(j, path, "f"), path + ".f", dom);
        p.x = point(j, path, "x", d);
        p.y = point(j, path, "y", d);
        if (check == "check_harnack") p.p = number(j, path, "p");
        return p;
    }
    if (check == "check_penalization") {
        allow_keys(j, path, {"x0", "eps_ladder", "threshold"});
        verify::PenalizationParams p{point(j, path, "x0", d), numbers(j, path, "eps_ladder"),
                                     number(j, path, "threshold")};
        if (p.eps_ladder.empty()) throw ConfigError(path + ".eps_ladder must be non-empty");
        const double eps_min = *std::min_element(p.eps_ladder.begin(), p.eps_ladder.end());
        if (ctx.grid.dt() > eps_min / 2.0)
            throw ConfigError(path + ": stiffness constraint dt <= min(eps)/2 violated (dt = " +
                              std::to_string(ctx.grid.dt()) + ", min eps = " + std::to_string(eps_min) + ")");
        return p;
    }
    if (check == "check_reflection_monotonicity") {
        allow_keys(j, path, {"pairs"});
        const Json& arr = need(j, path, "pairs");
        if (!arr.is_array() || arr.empty()) throw ConfigError(path + ".pairs must be a non-empty array");
        verify::MonotonicityParams p;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string pp = path + ".pairs[" + std::to_string(i) + "]";
            allow_keys(arr[i], pp, {"x", "y"});
            p.pairs.emplace_back(point(arr[i], pp, "x", d), point(arr[i], pp, "y", d));
        }
        return p;
    }
    if (check == "check_sdel_suite") {
        allow_keys(j, path,
                   {"x", "y", "p", "f", "times", "rho", "invariant_samples", "bootstrap_replicates", "harnack"});
        if (d != 1) throw ConfigError(path + ": check_sdel_suite needs model.dimension = 1");
        if (!ctx.measure) throw ConfigError(path + ": check_sdel_suite needs model.measure");
        verify::SdelParams p;
        p.x = number(j, path, "x");
        p.y = number(j, path, "y");
        p.p = number(j, path, "p");
        p.f = test_function(need(j, path, "f"), path + ".f", model::ConvexDomain::whole_space(1));
        if (j.contains("times")) p.times = numbers(j, path, "times");
        if (j.contains("rho")) p.rho = rho(j.at("rho"), path + ".rho", 1);
        p.invariant_samples = count_or(j, path, "invariant_samples", 0);
        p.bootstrap_replicates = count_or(j, path, "bootstrap_replicates", p.bootstrap_replicates);
        p.harnack = flag_or(j, path, "harnack", true);
        return p;
    }
    if (check == "check_poincare") {
        allow_keys(j, path, {"g", "x0"});
        return verify::PoincareParams{test_function(need(j, path, "g"), path + ".g", dom), point(j, path, "x0", d)};
    }
    throw ConfigError(path + ": unknown check '" + check + "'");
}

}  // namespace detail

/// Validates a configuration document and builds one context per experiment.
/// `seed_override` and `workers_override` come from the command line.
inline RunConfig parse_config(const Json& doc, std::optional<std::uint64_t> seed_override = std::nullopt,
                              std::size_t workers_override = 0) {
    using namespace detail;
    allow_keys(doc, "config", {"model", "grid", "mc", "tolerances", "experiments", "output"});
    Blocks base{need(doc, "config", "model"), need(doc, "config", "grid"), need(doc, "config", "mc"),
                doc.value("tolerances", Json::object())};
    if (seed_override) {
        if (!base.mc.is_object()) throw ConfigError("mc: expected an object");
        base.mc["master_seed"] = *seed_override;
    }

    RunConfig cfg;
    if (doc.contains("output")) {
        const Json& o = doc.at("output");
        allow_keys(o, "output", {"directory", "formats"});
        if (o.contains("directory")) cfg.output.directory = text(o, "output", "directory");
        if (o.contains("formats")) {
            const Json& f = o.at("formats");
            if (!f.is_array()) throw ConfigError("output.formats must be an array");
            cfg.output.formats.clear();
            for (const auto& v : f) {
                if (!v.is_string()) throw ConfigError("output.formats entries must be strings");
                const auto s = v.get<std::string>();
                if (s != "json" && s != "jsonl" && s != "summary" && s != "csv")
                    throw ConfigError("output.formats: unknown format '" + s + "'");
                cfg.output.formats.push_back(s);
            }
        }
    }

    Json em, eg, emc, et;
    build_context(base, em, eg, emc, et, workers_override);  // validates the shared blocks even with no experiments
    cfg.normalized = Json{{"model", em}, {"grid", eg}, {"mc", emc}, {"tolerances", et}};
    cfg.normalized["output"] = Json{{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};

    const Json exps = doc.value("experiments", Json::array());
    if (!exps.is_array()) throw ConfigError("experiments must be an array");
    Json norm_exps = Json::array();
    std::set<std::string> names;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        const std::string path = "experiments[" + std::to_string(i) + "]";
        const Json& e = exps[i];
        allow_keys(e, path, {"name", "check", "params", "overrides"});
        const std::string name = text(e, path, "name"), check = text(e, path, "check");
        if (name.empty() || name.find_first_of("/\\ ") != std::string::npos)
            throw ConfigError(path + ".name must be non-empty without '/', '\\' or spaces");
        if (!names.insert(name).second) throw ConfigError(path + ".name '" + name + "' is duplicated");
        Blocks b = base;
        if (e.contains("overrides")) {
            const Json& o = e.at("overrides");
            allow_keys(o, path + ".overrides", {"model", "grid", "mc", "tolerances"});
            if (o.contains("model")) b.model = o.at("model");  // replaces the model block
            if (o.contains("grid")) b.grid.merge_patch(o.at("grid"));
            if (o.contains("mc")) {
                b.mc.merge_patch(o.at("mc"));
                if (seed_override) b.mc["master_seed"] = *seed_override;
            }
            if (o.contains("tolerances")) b.tolerances.merge_patch(o.at("tolerances"));
        }
        Json xm, xg, xmc, xt;
        auto ctx = [&] {
            try {
                return build_context(b, xm, xg, xmc, xt, workers_override);
            } catch (const ConfigError& err) {
                throw ConfigError(path + ": " + err.what());
            }
        }();
        auto params = parse_params(check, need(e, path, "params"), path + ".params", ctx);
        Json ne{{"name", name}, {"check", check}, {"params", e.at("params")}};
        ne["context"] = ctx.echo;
        norm_exps.push_back(ne);
        cfg.experiments.push_back(Experiment{name, check, std::move(params), std::move(ctx)});
    }
    cfg.normalized["experiments"] = norm_exps;
    return cfg;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
}

}  // namespace rsde::cli
