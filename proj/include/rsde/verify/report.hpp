#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rsde::verify {

using Json = nlohmann::ordered_json;

/// One evaluated point of an inequality (a time, a radius, a scale, ...).
/// pass = empirical <= bound + z * std_error unless the check documents a
/// different comparison (penalization ladder rows compare strictly).
struct ReportRow {
    double t_or_r = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double std_error = 0.0;
    bool pass = true;
};

inline bool one_sided_pass(double empirical, double bound, double std_error, double z) {
    return empirical <= bound + z * std_error;
}

struct ExperimentReport {
    std::string name;
    std::string check;
    std::string status = "pass";  ///< pass | fail | invalid
    bool pass = true;
    double empirical = 0.0;
    double bound = 0.0;
    double std_error = 0.0;
    double z = 3.0;
    std::vector<ReportRow> rows;
    std::optional<std::string> flagged_typo;
    Json metadata = Json::object();

    void add_row(double t_or_r, double empirical_value, double bound_value, double se) {
        rows.push_back({t_or_r, empirical_value, bound_value, se, one_sided_pass(empirical_value, bound_value, se, z)});
    }

    /// Sets the headline fields from the row with the least slack and derives
    /// pass/status. `extra_ok` carries check-specific conditions; `valid`
    /// false marks the run invalid (e.g. a failed martingale normalization).
    void finalize(bool extra_ok = true, bool valid = true) {
        bool rows_ok = true;
        double best_slack = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) {
            rows_ok = rows_ok && r.pass;
            const double slack = std::isnan(r.bound) ? std::numeric_limits<double>::infinity()
                                                     : r.bound + z * r.std_error - r.empirical;
            if (&r == &rows.front() || slack < best_slack) {
                best_slack = slack;
                empirical = r.empirical;
                bound = r.bound;
                std_error = r.std_error;
            }
        }
        pass = rows_ok && extra_ok && valid;
        status = !valid ? "invalid" : (pass ? "pass" : "fail");
    }
};

/// NaN (e.g. a rung without a bound) is written as null.
inline Json json_value(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

inline Json to_json(const ReportRow& r) {
    return Json{{"t_or_r", json_value(r.t_or_r)}, {"empirical", json_value(r.empirical)}, {"bound", json_value(r.bound)},
                {"std_error", json_value(r.std_error)}, {"pass", r.pass}};
}

inline Json to_json(const ExperimentReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    Json j{{"name", r.name},
           {"check", r.check},
           {"status", r.status},
           {"pass", r.pass},
           {"empirical", json_value(r.empirical)},
           {"bound", json_value(r.bound)},
           {"std_error", json_value(r.std_error)},
           {"z", r.z},
           {"rows", rows}};
    j["flagged_typo"] = r.flagged_typo ? Json(*r.flagged_typo) : Json(nullptr);
    j["metadata"] = r.metadata;
    return j;
}

inline double json_number(const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline ExperimentReport report_from_json(const Json& j) {
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.check = j.at("check").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.empirical = json_number(j.at("empirical"));
    r.bound = json_number(j.at("bound"));
    r.std_error = json_number(j.at("std_error"));
    r.z = j.at("z").get<double>();
    for (const auto& row : j.at("rows"))
        r.rows.push_back({json_number(row.at("t_or_r")), json_number(row.at("empirical")),
                          json_number(row.at("bound")), json_number(row.at("std_error")),
                          row.at("pass").get<bool>()});
    if (!j.at("flagged_typo").is_null()) r.flagged_typo = j.at("flagged_typo").get<std::string>();
    r.metadata = j.at("metadata");
    return r;
}

}  // namespace rsde::verify
