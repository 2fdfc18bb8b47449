#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsde/cli/catalog.hpp"
#include "rsde/cli/config.hpp"
#include "rsde/errors.hpp"
#include "rsde/verify/checks.hpp"
#include "rsde/verify/report.hpp"
#include "rsde/verify/sdel.hpp"

namespace rsde::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kConfigError = 2, kBlowup = 3 };

inline std::vector<verify::ExperimentReport> run_experiment(const Experiment& e) {
    return std::visit(
        [&](const auto& p) -> std::vector<verify::ExperimentReport> {
            using P = std::decay_t<decltype(p)>;
            const auto& c = e.context;
            if constexpr (std::is_same_v<P, verify::ContractionParams>) return {verify::check_contraction(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::DecayParams>) return {verify::check_w2_decay(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::ConcentrationParams>)
                return {verify::check_t1_concentration(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::WitnessParams>)
                return {e.check == "check_t2_witness_d2" ? verify::check_t2_witness_d2(c, e.name, p)
                                                         : verify::check_t2_witness_dinf(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::HarnackParams>)
                return {e.check == "check_harnack" ? verify::check_harnack(c, e.name, p)
                                                   : verify::check_log_harnack(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::PenalizationParams>)
                return {verify::check_penalization(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::MonotonicityParams>)
                return {verify::check_reflection_monotonicity(c, e.name, p)};
            else if constexpr (std::is_same_v<P, verify::SdelParams>) return verify::check_sdel_suite(c, e.name, p);
            else return {verify::check_poincare(c, e.name, p)};
        },
        e.params);
}

/// Number formatting shared by every output file (shortest round-trip form).
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    return verify::Json(v).dump();
}

inline std::string plot_data_csv(const std::vector<verify::ExperimentReport>& reports) {
    std::string out = "experiment,t_or_r,empirical,bound,std_error,pass\n";
    for (const auto& r : reports)
        for (const auto& row : r.rows)
            out += r.name + "," + fmt(row.t_or_r) + "," + fmt(row.empirical) + "," + fmt(row.bound) + "," +
                   fmt(row.std_error) + "," + (row.pass ? "true" : "false") + "\n";
    return out;
}

inline std::string summary_text(const RunConfig& cfg, const std::vector<verify::ExperimentReport>& reports) {
    std::ostringstream os;
    std::size_t passed = 0;
    for (const auto& r : reports) passed += r.pass ? 1 : 0;
    os << "checks: " << reports.size() << "  passed: " << passed << "  failed: " << reports.size() - passed << "\n\n";
    for (const auto& r : reports) {
        os << (r.status == "pass" ? "PASS   " : r.status == "fail" ? "FAIL   " : "INVALID") << "  " << r.name << "  ["
           << r.check << "]  empirical=" << fmt(r.empirical) << "  bound=" << fmt(r.bound)
           << "  std_error=" << fmt(r.std_error) << "  z=" << fmt(r.z) << "\n";
        if (r.flagged_typo) os << "         flagged: " << *r.flagged_typo << "\n";
    }
    os << "\nconfiguration (defaults filled in):\n" << cfg.normalized.dump(2) << "\n";
    return os.str();
}

inline bool wants(const RunConfig& cfg, const char* format) {
    return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), format) != cfg.output.formats.end();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + p.string() + "'");
    out << content;
    if (!out) throw ConfigError("failed writing output file '" + p.string() + "'");
}

/// Runs every experiment, then writes all outputs after aggregation.
/// Returns kPass iff every report passes.
inline int run(const RunConfig& cfg, std::ostream& log) {
    std::vector<std::vector<verify::ExperimentReport>> per_experiment;
    for (const auto& e : cfg.experiments) {
        log << "running " << e.name << " (" << e.check << ")\n";
        per_experiment.push_back(run_experiment(e));
    }
    std::vector<verify::ExperimentReport> all;
    for (const auto& v : per_experiment) all.insert(all.end(), v.begin(), v.end());

    const std::filesystem::path dir(cfg.output.directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ConfigError("output directory '" + dir.string() + "' cannot be created");

    if (wants(cfg, "json")) {
        for (std::size_t i = 0; i < cfg.experiments.size(); ++i) {
            const auto& reps = per_experiment[i];
            verify::Json j;
            if (reps.size() == 1) {
                j = verify::to_json(reps.front());
            } else {
                j = verify::Json::array();
                for (const auto& r : reps) j.push_back(verify::to_json(r));
            }
            write_file(dir / (cfg.experiments[i].name + ".json"), j.dump(2) + "\n");
        }
    }
    if (wants(cfg, "jsonl")) {
        std::string lines;
        for (const auto& r : all) lines += verify::to_json(r).dump() + "\n";
        write_file(dir / "reports.jsonl", lines);
    }
    if (wants(cfg, "summary")) write_file(dir / "summary.txt", summary_text(cfg, all));
    if (wants(cfg, "csv")) write_file(dir / "plot_data.csv", plot_data_csv(all));

    bool ok = true;
    for (const auto& r : all) {
        ok = ok && r.pass;
        log << (r.status == "pass" ? "PASS " : r.status == "fail" ? "FAIL " : "INVALID ") << r.name << "\n";
    }
    return ok ? kPass : kFail;
}

/// Command-line entry point; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Monte Carlo verification of functional inequalities for reflected diffusions"};
    std::string config_path, output_dir;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    bool list = false, dry_run = false;
    auto* config_opt = app.add_option("-c,--config", config_path, "path to the JSON run configuration");
    auto* seed_opt = app.add_option("--seed", seed, "override mc.master_seed");
    app.add_option("-o,--output", output_dir, "override output.directory");
    app.add_option("-j,--workers", workers, "worker threads (results do not depend on it)");
    app.add_flag("--list", list, "print the experiment catalog and exit");
    app.add_flag("--dry-run", dry_run, "validate the configuration without simulating");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    if (list) {
        out << catalog_text();
        return kPass;
    }
    if (config_opt->count() == 0) {
        err << "error: --config is required\n";
        return kConfigError;
    }
    try {
        const auto doc = read_json_file(config_path);
        std::optional<std::uint64_t> seed_override;
        if (seed_opt->count()) seed_override = seed;
        RunConfig cfg = parse_config(doc, seed_override, workers);
        if (!output_dir.empty()) {
            cfg.output.directory = output_dir;
            cfg.normalized["output"]["directory"] = output_dir;
        }
        if (dry_run) {
            out << "configuration valid: " << cfg.experiments.size() << " experiment(s)\n";
            return kPass;
        }
        return run(cfg, out);
    } catch (const SimulationBlowup& e) {
        err << "simulation blowup: " << e.what() << "\n";
        return kBlowup;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << "\n";
        return kConfigError;
    } catch (const StatisticsError& e) {
        err << "statistics error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace rsde::cli
