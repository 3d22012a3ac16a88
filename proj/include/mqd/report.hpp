#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqd/analysis.hpp"
#include "mqd/continuum.hpp"
#include "mqd/integrator.hpp"

// RunReport: everything a run measured, serialized as report.json. The config
// echo carries every resolved setting, so a report is a complete recipe for
// reproducing its own run.

namespace mqd {

struct RunDiagnostics {
    std::string scenario;  // label, e.g. "box-n1" or "double-slit"
    std::int64_t steps = 0;
    std::int64_t rejections = 0;
    std::int64_t wall_bounces = 0;
    double min_dt = 0.0;  // ps
    double max_dt = 0.0;  // ps
    double max_energy_drift = 0.0;
    bool drift_warning = false;
    double runtime_seconds = 0.0;

    static RunDiagnostics from(const Trajectory& t, std::string label, double seconds) {
        RunDiagnostics d;
        d.scenario = std::move(label);
        d.steps = t.total_steps;
        d.rejections = t.total_rejections;
        d.wall_bounces = t.total_wall_bounces;
        d.min_dt = t.min_accepted_dt;
        d.max_dt = t.max_accepted_dt;
        d.max_energy_drift = t.max_energy_drift;
        d.drift_warning = t.drift_warning;
        d.runtime_seconds = seconds;
        return d;
    }
};

struct BoxStateReport {
    int state = 0;
    PeriodEstimate estimate;              // detected period and depth
    double expected_period = 0.0;         // continuum reference m L^2 / (pi hbar n^2)
    double e_micro = 0.0;                 // hbar pi / (2 T_detected)
    double e_box = 0.0;                   // eigenstate reference energy
    double velocity_recurrence = 0.0;     // logged, never gated
    std::string detection_error;          // nonempty if detection failed
};

struct FringeReport {
    std::vector<double> ensemble_minima_nm;  // KDE minima of the final ensemble
    std::vector<double> oracle_minima_nm;    // oracle minima inside the match window
    double kde_bandwidth_nm = 0.0;
    double match_window_nm = 0.0;            // |x| range the comparison covers
};

struct RunReport {
    nlohmann::ordered_json config;  // full resolved configuration echo
    std::vector<BoxStateReport> box_states;
    std::optional<DistanceResult> distances;   // slit ensemble vs oracle
    std::optional<FringeReport> fringes;       // slit fringe comparison
    std::optional<ConvergenceReport> convergence;
    std::vector<RunDiagnostics> diagnostics;
    std::vector<std::string> notes;  // human-readable caveats (threshold misses etc.)
};

inline nlohmann::ordered_json to_json(const RunReport& r) {
    using json = nlohmann::ordered_json;
    json j;
    j["config"] = r.config.is_null() ? json::object() : r.config;

    json periods = json::array();
    json e_micro = json::array();
    json e_box = json::array();
    for (const BoxStateReport& b : r.box_states) {
        json p;
        p["state"] = b.state;
        if (b.detection_error.empty()) {
            p["period_ps"] = b.estimate.period;
            p["recurrence_depth"] = b.estimate.recurrence_depth;
            p["confidence"] = b.estimate.confidence == PeriodConfidence::ok ? "ok" : "weak";
            p["velocity_recurrence_depth"] = b.velocity_recurrence;
        } else {
            p["detection_error"] = b.detection_error;
        }
        p["expected_period_ps"] = b.expected_period;
        periods.push_back(p);

        if (b.detection_error.empty()) {
            // Period provenance rides along with every derived energy.
            e_micro.push_back({{"state", b.state},
                               {"value", b.e_micro},
                               {"from_period_ps", b.estimate.period}});
        }
        e_box.push_back({{"state", b.state}, {"value", b.e_box}});
    }
    j["periods"] = periods;
    j["energies_micro"] = e_micro;
    j["energies_box"] = e_box;

    if (r.distances) {
        j["distances"] = {{"ks", r.distances->ks}, {"l1", r.distances->l1}};
    } else {
        j["distances"] = nullptr;
    }

    if (r.fringes) {
        j["fringe_minima_nm"] = {{"ensemble", r.fringes->ensemble_minima_nm},
                                 {"oracle", r.fringes->oracle_minima_nm},
                                 {"kde_bandwidth_nm", r.fringes->kde_bandwidth_nm},
                                 {"match_window_nm", r.fringes->match_window_nm}};
    } else {
        j["fringe_minima_nm"] = nullptr;
    }

    if (r.convergence) {
        j["convergence"] = {{"sizes", r.convergence->sizes},
                            {"max_errors", r.convergence->max_errors},
                            {"fitted_order", r.convergence->fitted_order},
                            {"monotone", r.convergence->monotone},
                            {"pass", r.convergence->pass}};
    } else {
        j["convergence"] = nullptr;
    }

    json diags = json::array();
    for (const RunDiagnostics& d : r.diagnostics) {
        diags.push_back({{"scenario", d.scenario},
                         {"steps", d.steps},
                         {"rejections", d.rejections},
                         {"wall_bounces", d.wall_bounces},
                         {"min_dt_ps", d.min_dt},
                         {"max_dt_ps", d.max_dt},
                         {"max_energy_drift", d.max_energy_drift},
                         {"drift_warning", d.drift_warning},
                         {"runtime_seconds", d.runtime_seconds}});
    }
    j["diagnostics"] = diags;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline void write_report(const std::filesystem::path& path, const RunReport& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << to_json(r).dump(2) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mqd
