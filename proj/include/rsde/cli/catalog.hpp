#pragma once

#include <string>
#include <vector>

namespace rsde::cli {

struct CatalogEntry {
    std::string check;
    std::string anchor;
    std::string required;
    std::string optional;
};

/// One entry per verification check, in a fixed order.
inline const std::vector<CatalogEntry>& experiment_catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"check_contraction", "shared-noise contraction estimate in the exponential ergodicity proof",
         "x, y, times", ""},
        {"check_w2_decay", "exponential W2 convergence to the invariant measure", "x, times",
         "invariant_samples, invariant_mode, bootstrap_replicates"},
        {"check_t1_concentration", "Gaussian concentration remark after the T1 inequality", "x0, functional, r_grid, C",
         "V"},
        {"check_t2_witness_d2", "T2 inequality under the L2 path metric (Girsanov coupling)", "x0, rho", "scales"},
        {"check_t2_witness_dinf", "T2 inequality under the uniform path metric", "x0, rho", "scales"},
        {"check_log_harnack", "log-Harnack inequality for the reflected semigroup", "f, x, y", ""},
        {"check_harnack", "Harnack inequality with power p for the reflected semigroup", "f, x, y, p", ""},
        {"check_penalization", "convergence of the penalization scheme to the reflected solution",
         "x0, eps_ladder, threshold", ""},
        {"check_reflection_monotonicity", "monotonicity of the reflection term in the Skorokhod formulation",
         "pairs", ""},
        {"check_sdel_suite", "T2, W2 decay and Harnack for equations with local time via the scale transform",
         "x, y, p, f", "times, rho, invariant_samples, bootstrap_replicates, harnack"},
        {"check_poincare", "Poincare inequality remark after the ergodicity result", "g, x0", ""},
    };
    return entries;
}

inline std::string catalog_text() {
    std::string out;
    for (const auto& e : experiment_catalog()) {
        out += e.check + "\n";
        out += "  anchor:   " + e.anchor + "\n";
        out += "  required: " + e.required + "\n";
        if (!e.optional.empty()) out += "  optional: " + e.optional + "\n";
    }
    return out;
}

}  // namespace rsde::cli
