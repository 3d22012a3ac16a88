#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mqd/analysis.hpp"
#include "mqd/continuum.hpp"
#include "mqd/density.hpp"
#include "mqd/integrator.hpp"
#include "mqd/io.hpp"
#include "mqd/plot.hpp"
#include "mqd/quantum.hpp"
#include "mqd/report.hpp"
#include "mqd/scenario.hpp"

// Batch front-end: resolve a configuration (defaults, then config file, then
// flags), run the requested experiment, and write trajectory.csv,
// report.json, and optional SVG figures into a timestamped directory.
//
// Exit codes: 0 all thresholds met, 1 threshold failure (outputs still
// written), 2 usage or configuration error.

namespace mqd {

// Pass/fail bounds evaluated by every run. Pinned here so the CLI and the
// test suite agree on what "pass" means.
struct Thresholds {
    double period_rel_tol = 0.10;      // detected period vs continuum reference
    double ratio_rel_tol = 0.10;       // T1/Tn vs n^2 spectrum structure
    double slit_ks_max = 0.10;         // final ensemble vs oracle CDF distance
    double fringe_window_nm = 150.0;   // |x| range whose oracle minima must match
    double fringe_match_nm = 8.0;      // max |ensemble minimum - oracle minimum|
    double fringe_kde_bandwidth = 8.0; // nm; fringe-scale (Silverman oversmooths)
    double continuum_n400_max = 0.05;  // Gaussian force error bound at N = 400
    double continuum_min_order = 1.0;  // fitted convergence order lower bound
};

struct CliConfig {
    std::string scenario = "box";  // box | double-slit | continuum-check | all
    int state = 1;                 // box eigenstate index n
    double length = 100.0;         // box length, nm
    std::size_t particles = 0;     // 0 = scenario default (101 box, 1000 slit)
    double separation = 50.0;      // packet center offset X, nm (packets at +-X)
    double width = 10.0;           // packet width sigma, nm
    double duration = 0.0;         // ps, 0 = scenario default
    double sample_every = 0.0;     // ps, 0 = scenario default
    std::string boundary = "mirror";     // interior | mirror
    std::string sigma_mode = "density";  // density | amplitude
    std::string out;                     // output root; empty -> $MQD_OUT -> "."
    bool plots = false;
    std::vector<std::size_t> sizes = {50, 100, 200, 400};  // continuum-check chain sizes
    double dt_max = 1e-3;          // ps
    double dt_safety = 0.05;
    double detect_threshold = 0.9;   // box recurrence minima must dip below this
    double detect_weak_above = 0.02; // depth above this flags weak confidence

    BoundaryMode boundary_mode() const {
        if (boundary == "mirror") return BoundaryMode::mirror_image;
        if (boundary == "interior") return BoundaryMode::interior_only;
        throw std::invalid_argument("boundary must be 'interior' or 'mirror'");
    }
    SigmaMode sigma_mode_value() const {
        if (sigma_mode == "density") return SigmaMode::density_std;
        if (sigma_mode == "amplitude") return SigmaMode::amplitude_width;
        throw std::invalid_argument("sigma-mode must be 'density' or 'amplitude'");
    }
    IntegratorConfig integrator_base() const {
        IntegratorConfig c;
        c.dt_max = dt_max;
        c.dt_safety = dt_safety;
        return c;
    }
    PeriodDetectConfig detect_config() const {
        PeriodDetectConfig c;
        c.threshold = detect_threshold;
        c.weak_above = detect_weak_above;
        return c;
    }
};

namespace detail_cli {

// Continuum recurrence reference: T_n = m L^2 / (pi hbar n^2), the period a
// state of energy E_n = hbar^2 n^2 pi^2 / (2 m L^2) maps to via E = hbar pi / (2T).
inline double reference_period(int n, double L, double mass, const UnitSystem& us) {
    return mass * L * L / (std::numbers::pi * us.hbar * n * n);
}

inline void apply_config_map(const ConfigMap& m, CliConfig& c, const std::string& subcommand) {
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = m.find(key);
        if (it == m.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("scenario"); v && *v != subcommand)
        throw std::invalid_argument("config scenario '" + *v + "' does not match subcommand '" +
                                    subcommand + "'");
    if (auto v = get("state")) c.state = static_cast<int>(parse_quantity(*v, ""));
    if (auto v = get("length_nm")) c.length = parse_quantity(*v, "nm");
    if (auto v = get("particles")) c.particles = static_cast<std::size_t>(parse_quantity(*v, ""));
    if (auto v = get("separation_nm")) c.separation = parse_quantity(*v, "nm");
    if (auto v = get("width_nm")) c.width = parse_quantity(*v, "nm");
    if (auto v = get("duration_ps")) c.duration = parse_quantity(*v, "ps");
    if (auto v = get("sample_every_ps")) c.sample_every = parse_quantity(*v, "ps");
    if (auto v = get("boundary")) c.boundary = *v;
    if (auto v = get("sigma_mode")) c.sigma_mode = *v;
    if (auto v = get("out")) c.out = *v;
    if (auto v = get("plots")) c.plots = (*v == "true" || *v == "1" || *v == "yes");
    if (auto v = get("dt_max_ps")) c.dt_max = parse_quantity(*v, "ps");
    if (auto v = get("dt_safety")) c.dt_safety = parse_quantity(*v, "");
    if (auto v = get("detect_threshold")) c.detect_threshold = parse_quantity(*v, "");
    if (auto v = get("detect_weak_above")) c.detect_weak_above = parse_quantity(*v, "");
    if (auto v = get("sizes")) {
        std::vector<std::size_t> sizes;
        std::stringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ','))
            sizes.push_back(static_cast<std::size_t>(parse_quantity(tok, "")));
        if (sizes.empty()) throw std::invalid_argument("sizes list is empty");
        c.sizes = sizes;
    }
}

// The full resolved configuration, echoed into every report. Re-running with
// this object as --config reproduces the run.
inline nlohmann::ordered_json config_echo(const CliConfig& c, const std::string& subcommand) {
    nlohmann::ordered_json j;
    j["scenario"] = subcommand;
    j["state"] = c.state;
    j["length_nm"] = c.length;
    j["particles"] = c.particles;
    j["separation_nm"] = c.separation;
    j["width_nm"] = c.width;
    j["duration_ps"] = c.duration;
    j["sample_every_ps"] = c.sample_every;
    j["boundary"] = c.boundary;
    j["sigma_mode"] = c.sigma_mode;
    j["out"] = c.out;
    j["plots"] = c.plots;
    j["sizes"] = c.sizes;
    j["dt_max_ps"] = c.dt_max;
    j["dt_safety"] = c.dt_safety;
    j["detect_threshold"] = c.detect_threshold;
    j["detect_weak_above"] = c.detect_weak_above;
    return j;
}

struct BoxRunResult {
    BoxStateReport report;
    RunDiagnostics diag;
    Trajectory trajectory;
    bool pass = false;
};

inline BoxRunResult run_box_state(const CliConfig& c, int n) {
    const UnitSystem us = make_unit_system();
    const std::size_t N = c.particles ? c.particles : 101;
    const double t_ref = reference_period(n, c.length, 1.0, us);
    const double duration = c.duration > 0.0 ? c.duration : 2.6 * t_ref;
    const double sample_every = c.sample_every > 0.0 ? c.sample_every : t_ref / 500.0;

    Scenario s = build_box_scenario(n, c.length, N, c.boundary_mode(), c.integrator_base());
    const auto t0 = std::chrono::steady_clock::now();
    Trajectory tr = run(s.ensemble, s.field, s.integrator, duration, sample_every);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    BoxRunResult r;
    r.report.state = n;
    r.report.expected_period = t_ref;
    r.report.e_box = box_energy(n, c.length, 1.0, us);
    r.diag = RunDiagnostics::from(tr, "box-n" + std::to_string(n), seconds);
    try {
        r.report.estimate = detect_period(tr, c.detect_config());
        r.report.e_micro = energy_from_period(r.report.estimate, us);
        r.report.velocity_recurrence = velocity_recurrence_depth(
            tr, tr.times.front() + r.report.estimate.period);
        const Thresholds th;
        r.pass = std::abs(r.report.estimate.period - t_ref) <= th.period_rel_tol * t_ref;
    } catch (const std::exception& e) {
        r.report.detection_error = e.what();
        r.pass = false;
    }
    r.trajectory = std::move(tr);
    return r;
}

struct SlitRunResult {
    DistanceResult distances;
    FringeReport fringes;
    RunDiagnostics diag;
    Trajectory trajectory;
    SlitGeometry geometry{50.0, 10.0};
    bool pass = false;
    std::vector<std::string> notes;
};

inline SlitRunResult run_slit(const CliConfig& c) {
    const UnitSystem us = make_unit_system();
    const std::size_t N = c.particles ? c.particles : 1000;
    const double duration = c.duration > 0.0 ? c.duration : 20.0;
    const double sample_every = c.sample_every > 0.0 ? c.sample_every : duration / 40.0;
    const SlitGeometry g(c.separation, c.width);
    const SigmaMode mode = c.sigma_mode_value();

    Scenario s = build_double_slit_scenario(g, N, duration, mode, c.integrator_base());
    const auto t0 = std::chrono::steady_clock::now();
    Trajectory tr = run(s.ensemble, s.field, s.integrator, duration, sample_every);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    SlitRunResult r;
    r.geometry = g;
    r.diag = RunDiagnostics::from(tr, "double-slit", seconds);

    // Reference density at the final time, wide enough to hold the spread
    // packets and their tails.
    const double t_final = tr.times.back();
    const double sigma_t = packet_sigma_t(GaussianPacket(0.0, effective_sigma(c.width, mode)),
                                          t_final, us);
    const double span = c.separation + 8.0 * sigma_t + 50.0;
    auto dens = [=](double x) { return two_packet_density(g, 1.0, t_final, x, us, mode); };
    const DensityProfile prof = make_profile_numeric(-span, span, dens, 8192);

    r.distances = distribution_distance(tr.positions.back(), prof);

    const Thresholds th;
    // Oracle fringe minima inside the match window.
    std::vector<double> gx, gy;
    const int gn = static_cast<int>(2.0 * th.fringe_window_nm / 0.1);
    for (int i = 0; i <= gn; ++i) {
        gx.push_back(-th.fringe_window_nm + 0.1 * i);
        gy.push_back(dens(gx.back()));
    }
    const FringeExtrema oracle = find_fringe_extrema(gx, gy);
    r.fringes.oracle_minima_nm = oracle.minima;
    r.fringes.kde_bandwidth_nm = th.fringe_kde_bandwidth;
    r.fringes.match_window_nm = th.fringe_window_nm;

    // Ensemble KDE minima over a slightly wider window so edge minima are
    // not clipped.
    std::vector<double> kx;
    const double kw = th.fringe_window_nm + 50.0;
    const int kn = static_cast<int>(2.0 * kw / 0.1);
    for (int i = 0; i <= kn; ++i) kx.push_back(-kw + 0.1 * i);
    try {
        const std::vector<double> ky =
            kde_density(tr.positions.back(), kx, th.fringe_kde_bandwidth);
        r.fringes.ensemble_minima_nm = find_fringe_extrema(kx, ky).minima;
    } catch (const std::exception& e) {
        r.notes.push_back(std::string("ensemble fringe extraction failed: ") + e.what());
    }

    bool fringes_ok = true;
    for (double om : oracle.minima) {
        double best = std::numeric_limits<double>::infinity();
        for (double km : r.fringes.ensemble_minima_nm)
            best = std::min(best, std::abs(km - om));
        if (!(best <= th.fringe_match_nm)) {
            fringes_ok = false;
            std::ostringstream msg;
            msg << "oracle fringe minimum at " << om << " nm has no ensemble KDE minimum within "
                << th.fringe_match_nm << " nm (nearest offset ";
            if (std::isfinite(best))
                msg << best << " nm)";
            else
                msg << "n/a)";
            r.notes.push_back(msg.str());
        }
    }
    const bool ks_ok = r.distances.ks < th.slit_ks_max;
    if (!ks_ok) {
        std::ostringstream msg;
        msg << "KS distance " << r.distances.ks << " exceeds bound " << th.slit_ks_max;
        r.notes.push_back(msg.str());
    }
    r.pass = ks_ok && fringes_ok;
    r.trajectory = std::move(tr);
    return r;
}

struct ContinuumRunResult {
    ConvergenceReport report;
    double n_last_error = 0.0;
    double runtime_seconds = 0.0;
    bool pass = false;
    std::vector<std::string> notes;
};

inline ContinuumRunResult run_continuum(const CliConfig& c) {
    const DensityProfile p = gaussian_profile(c.width);
    const auto force = gaussian_quantum_force(c.width);
    const auto t0 = std::chrono::steady_clock::now();
    ContinuumRunResult r;
    r.report = convergence_study(p, c.sizes, 0.2, force);
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.n_last_error = r.report.max_errors.back();
    const Thresholds th;
    const bool last_ok = r.n_last_error < th.continuum_n400_max;
    if (!r.report.monotone) r.notes.push_back("force errors are not monotonically decreasing");
    if (r.report.fitted_order < th.continuum_min_order)
        r.notes.push_back("fitted convergence order below 1");
    if (!last_ok) {
        std::ostringstream msg;
        msg << "largest-chain force error " << r.n_last_error << " exceeds bound "
            << th.continuum_n400_max;
        r.notes.push_back(msg.str());
    }
    r.pass = r.report.pass && last_ok;
    return r;
}

inline void write_box_outputs(const std::filesystem::path& dir, const CliConfig& c,
                              const BoxRunResult& r, const std::string& subcommand) {
    write_trajectory_csv(dir / "trajectory.csv", r.trajectory);
    RunReport rep;
    rep.config = config_echo(c, subcommand);
    rep.config["state"] = r.report.state;
    rep.box_states.push_back(r.report);
    rep.diagnostics.push_back(r.diag);
    if (!r.pass && r.report.detection_error.empty()) {
        std::ostringstream msg;
        msg << "detected period " << r.report.estimate.period
            << " ps misses the continuum reference " << r.report.expected_period
            << " ps by more than 10%";
        rep.notes.push_back(msg.str());
    }
    write_report(dir / "report.json", rep);
    if (c.plots) {
        try {
            plot_box_figure(dir / "fig1.svg", r.trajectory, r.report, c.length);
        } catch (const std::exception& e) {
            std::cerr << "plotting failed (run unaffected): " << e.what() << '\n';
        }
    }
}

inline void write_slit_outputs(const std::filesystem::path& dir, const CliConfig& c,
                               const SlitRunResult& r) {
    write_trajectory_csv(dir / "trajectory.csv", r.trajectory);
    RunReport rep;
    rep.config = config_echo(c, "double-slit");
    rep.distances = r.distances;
    rep.fringes = r.fringes;
    rep.diagnostics.push_back(r.diag);
    rep.notes = r.notes;
    write_report(dir / "report.json", rep);
    if (c.plots) {
        try {
            const UnitSystem us = make_unit_system();
            const SigmaMode mode = c.sigma_mode_value();
            const SlitGeometry g = r.geometry;
            const double t_final = r.trajectory.times.back();
            const double sigma_t = packet_sigma_t(
                GaussianPacket(0.0, effective_sigma(c.width, mode)), t_final, us);
            plot_slit_triptych(
                dir / "fig3.svg", r.trajectory,
                [=](double x) { return two_packet_density(g, 1.0, 0.0, x, us, mode); },
                [=](double x) { return two_packet_density(g, 1.0, t_final, x, us, mode); },
                Thresholds{}.fringe_kde_bandwidth, c.separation + 5.0 * sigma_t);
        } catch (const std::exception& e) {
            std::cerr << "plotting failed (run unaffected): " << e.what() << '\n';
        }
    }
}

inline void write_continuum_outputs(const std::filesystem::path& dir, const CliConfig& c,
                                    const ContinuumRunResult& r) {
    RunReport rep;
    rep.config = config_echo(c, "continuum-check");
    rep.convergence = r.report;
    RunDiagnostics d;
    d.scenario = "continuum-check";
    d.runtime_seconds = r.runtime_seconds;
    rep.diagnostics.push_back(d);
    rep.notes = r.notes;
    write_report(dir / "report.json", rep);
}

// Run every scenario: box n = 1..3, the double slit, and the continuum
// check, each in its own subdirectory, concurrently where the hardware
// allows. The aggregate report adds the period-ratio checks that need all
// three box states at once.
inline bool run_all(const CliConfig& c, const std::filesystem::path& dir) {
    std::vector<std::future<BoxRunResult>> box_futs;
    for (int n = 1; n <= 3; ++n)
        box_futs.push_back(std::async(std::launch::async,
                                      [&c, n] { return run_box_state(c, n); }));
    auto slit_fut = std::async(std::launch::async, [&c] { return run_slit(c); });
    auto cont_fut = std::async(std::launch::async, [&c] { return run_continuum(c); });

    RunReport agg;
    agg.config = config_echo(c, "all");
    bool pass = true;

    std::vector<BoxRunResult> boxes;
    for (int n = 1; n <= 3; ++n) {
        BoxRunResult r = box_futs[static_cast<std::size_t>(n - 1)].get();
        const std::filesystem::path sub = dir / ("box-n" + std::to_string(n));
        std::filesystem::create_directories(sub);
        CliConfig cn = c;
        cn.state = n;
        write_box_outputs(sub, cn, r, "box");
        agg.box_states.push_back(r.report);
        agg.diagnostics.push_back(r.diag);
        if (!r.pass) {
            pass = false;
            if (r.report.detection_error.empty()) {
                std::ostringstream msg;
                msg << "box n=" << n << ": detected period " << r.report.estimate.period
                    << " ps misses reference " << r.report.expected_period << " ps by more than 10%";
                agg.notes.push_back(msg.str());
            } else {
                agg.notes.push_back("box n=" + std::to_string(n) + ": " +
                                    r.report.detection_error);
            }
        }
        boxes.push_back(std::move(r));
    }

    // Spectrum structure: T_n scales as 1/n^2, so T1/T2 = 4 and T1/T3 = 9.
    const Thresholds th;
    const bool detected = boxes[0].report.detection_error.empty() &&
                          boxes[1].report.detection_error.empty() &&
                          boxes[2].report.detection_error.empty();
    if (detected) {
        const double t1 = boxes[0].report.estimate.period;
        auto ratio_check = [&](double tn, double target, const char* label) {
            const double ratio = t1 / tn;
            if (std::abs(ratio - target) > th.ratio_rel_tol * target) {
                pass = false;
                std::ostringstream msg;
                msg << label << " = " << ratio << " outside " << target << " +- "
                    << 100.0 * th.ratio_rel_tol << "%";
                agg.notes.push_back(msg.str());
            }
        };
        ratio_check(boxes[1].report.estimate.period, 4.0, "T1/T2");
        ratio_check(boxes[2].report.estimate.period, 9.0, "T1/T3");
    } else {
        pass = false;
        agg.notes.push_back("period ratios skipped: not every box state produced a period");
    }

    {
        SlitRunResult r = slit_fut.get();
        const std::filesystem::path sub = dir / "double-slit";
        std::filesystem::create_directories(sub);
        write_slit_outputs(sub, c, r);
        agg.distances = r.distances;
        agg.fringes = r.fringes;
        agg.diagnostics.push_back(r.diag);
        for (const std::string& note : r.notes) agg.notes.push_back("double-slit: " + note);
        pass = pass && r.pass;
    }
    {
        ContinuumRunResult r = cont_fut.get();
        const std::filesystem::path sub = dir / "continuum-check";
        std::filesystem::create_directories(sub);
        write_continuum_outputs(sub, c, r);
        agg.convergence = r.report;
        RunDiagnostics d;
        d.scenario = "continuum-check";
        d.runtime_seconds = r.runtime_seconds;
        agg.diagnostics.push_back(d);
        for (const std::string& note : r.notes) agg.notes.push_back("continuum-check: " + note);
        pass = pass && r.pass;
    }

    write_report(dir / "report.json", agg);
    if (c.plots) {
        try {
            plot_energy_bars(dir / "fig2.svg", agg.box_states);
        } catch (const std::exception& e) {
            std::cerr << "plotting failed (run unaffected): " << e.what() << '\n';
        }
    }
    return pass;
}

inline std::filesystem::path output_root(const CliConfig& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("MQD_OUT"); env && *env) return env;
    return ".";
}

inline std::tm now_local() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    return tm;
}

}  // namespace detail_cli

// Parse argv and run. Never calls exit(); returns the process exit code.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"deterministic 1-D interacting-chain simulator"};
    app.require_subcommand(1);

    CliConfig c;
    std::string config_path;

    auto add_common = [&](CLI::App* sub, bool dynamics) {
        sub->add_option("--config", config_path,
                        "config file (key = value lines, or a report.json)");
        sub->add_option("--particles", c.particles, "chain size N");
        sub->add_option("--out", c.out, "output root directory (default $MQD_OUT or .)");
        sub->add_flag("--plots", c.plots, "write SVG figures");
        if (!dynamics) return;
        sub->add_option("--duration", c.duration, "run length, ps (accepts '60ps')")
            ->transform([](std::string s) { return format_double(parse_quantity(s, "ps")); });
        sub->add_option("--sample-every", c.sample_every, "snapshot interval, ps")
            ->transform([](std::string s) { return format_double(parse_quantity(s, "ps")); });
        sub->add_option("--dt-max", c.dt_max, "timestep ceiling, ps")
            ->transform([](std::string s) { return format_double(parse_quantity(s, "ps")); });
        sub->add_option("--dt-safety", c.dt_safety, "adaptive timestep safety factor");
    };

    CLI::App* box = app.add_subcommand("box", "eigenstate chain in a box");
    box->add_option("--state", c.state, "eigenstate index n (>= 1)")
        ->check(CLI::PositiveNumber);
    box->add_option("--length", c.length, "box length, nm (accepts '100nm')")
        ->transform([](std::string s) { return format_double(parse_quantity(s, "nm")); });
    box->add_option("--boundary", c.boundary, "interior | mirror")
        ->check(CLI::IsMember({"interior", "mirror"}));
    box->add_option("--detect-threshold", c.detect_threshold,
                    "recurrence minima must dip below this");
    add_common(box, true);

    CLI::App* slit = app.add_subcommand("double-slit", "two expanding packets in free space");
    slit->add_option("--separation", c.separation,
                     "packet center offset X, nm (packets at +-X)")
        ->transform([](std::string s) { return format_double(parse_quantity(s, "nm")); });
    slit->add_option("--width", c.width, "packet width sigma, nm")
        ->transform([](std::string s) { return format_double(parse_quantity(s, "nm")); });
    slit->add_option("--sigma-mode", c.sigma_mode, "density | amplitude")
        ->check(CLI::IsMember({"density", "amplitude"}));
    add_common(slit, true);

    CLI::App* cont = app.add_subcommand("continuum-check",
                                        "discrete force vs quantum force convergence");
    cont->add_option("--sizes",
                     [&c](const std::vector<std::string>& vals) {
                         c.sizes.clear();
                         for (const std::string& v : vals) {
                             std::stringstream ss(v);
                             std::string tok;
                             while (std::getline(ss, tok, ','))
                                 c.sizes.push_back(
                                     static_cast<std::size_t>(parse_quantity(tok, "")));
                         }
                         return !c.sizes.empty();
                     },
                     "comma-separated chain sizes, e.g. 50,100,200,400");
    cont->add_option("--width", c.width, "Gaussian sigma, nm")
        ->transform([](std::string s) { return format_double(parse_quantity(s, "nm")); });
    add_common(cont, false);

    CLI::App* all = app.add_subcommand("all", "box n=1..3, double slit, continuum check");
    all->add_option("--length", c.length, "box length, nm")
        ->transform([](std::string s) { return format_double(parse_quantity(s, "nm")); });
    all->add_option("--boundary", c.boundary, "interior | mirror")
        ->check(CLI::IsMember({"interior", "mirror"}));
    add_common(all, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {  // bad unit suffix in a transform
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    try {
        // Config file fills in everything the command line did not set.
        if (!config_path.empty()) {
            const ConfigMap file = read_config_file(config_path);
            CliConfig from_file;  // defaults
            detail_cli::apply_config_map(file, from_file, name);
            // Command-line wins: re-apply flag values over the file values.
            CliConfig merged = from_file;
            auto flag_given = [&](const char* flag) {
                const CLI::Option* o = sub->get_option_no_throw(flag);
                return o != nullptr && o->count() > 0;
            };
            auto keep = [&](auto CliConfig::*field, const char* flag) {
                if (flag_given(flag)) merged.*field = c.*field;
            };
            keep(&CliConfig::state, "--state");
            keep(&CliConfig::length, "--length");
            keep(&CliConfig::particles, "--particles");
            keep(&CliConfig::separation, "--separation");
            keep(&CliConfig::width, "--width");
            keep(&CliConfig::duration, "--duration");
            keep(&CliConfig::sample_every, "--sample-every");
            keep(&CliConfig::boundary, "--boundary");
            keep(&CliConfig::sigma_mode, "--sigma-mode");
            keep(&CliConfig::out, "--out");
            keep(&CliConfig::plots, "--plots");
            keep(&CliConfig::dt_max, "--dt-max");
            keep(&CliConfig::dt_safety, "--dt-safety");
            keep(&CliConfig::detect_threshold, "--detect-threshold");
            merged.sizes = flag_given("--sizes") ? c.sizes : from_file.sizes;
            c = merged;
        }
        c.boundary_mode();      // validate before any run starts
        c.sigma_mode_value();
        if (c.state < 1) throw std::invalid_argument("state must be >= 1");

        // Pre-flight: construct everything this subcommand will run, so a
        // config that cannot be built fails before any output exists. (The
        // `all` subcommand would otherwise abort halfway with partial output.)
        if (name == "box" || name == "all") {
            const std::vector<int> states =
                name == "all" ? std::vector<int>{1, 2, 3} : std::vector<int>{c.state};
            for (int n : states)
                (void)build_box_scenario(n, c.length, c.particles ? c.particles : 101,
                                         c.boundary_mode(), c.integrator_base());
        }
        if (name == "double-slit" || name == "all")
            (void)build_double_slit_scenario(SlitGeometry(c.separation, c.width),
                                             c.particles ? c.particles : 1000,
                                             c.duration > 0.0 ? c.duration : 20.0,
                                             c.sigma_mode_value(), c.integrator_base());
        if (name == "continuum-check" || name == "all") validate_convergence_sizes(c.sizes);

        const std::filesystem::path root = detail_cli::output_root(c);
        const std::filesystem::path dir =
            make_run_directory(root, name, detail_cli::now_local());
        std::cout << "writing outputs to " << dir.string() << '\n';

        bool pass = true;
        if (name == "box") {
            const detail_cli::BoxRunResult r = detail_cli::run_box_state(c, c.state);
            detail_cli::write_box_outputs(dir, c, r, "box");
            if (r.report.detection_error.empty())
                std::cout << "n=" << c.state << ": T = " << r.report.estimate.period
                          << " ps (reference " << r.report.expected_period << " ps), depth "
                          << r.report.estimate.recurrence_depth << '\n';
            else
                std::cout << "n=" << c.state << ": " << r.report.detection_error << '\n';
            pass = r.pass;
        } else if (name == "double-slit") {
            const detail_cli::SlitRunResult r = detail_cli::run_slit(c);
            detail_cli::write_slit_outputs(dir, c, r);
            std::cout << "KS = " << r.distances.ks << ", ensemble fringe minima: "
                      << r.fringes.ensemble_minima_nm.size() << ", oracle minima: "
                      << r.fringes.oracle_minima_nm.size() << '\n';
            for (const std::string& nmsg : r.notes) std::cout << "note: " << nmsg << '\n';
            pass = r.pass;
        } else if (name == "continuum-check") {
            const detail_cli::ContinuumRunResult r = detail_cli::run_continuum(c);
            detail_cli::write_continuum_outputs(dir, c, r);
            std::cout << "sizes:";
            for (std::size_t s : r.report.sizes) std::cout << ' ' << s;
            std::cout << "\nerrors:";
            for (double e : r.report.max_errors) std::cout << ' ' << e;
            std::cout << "\nfitted order " << r.report.fitted_order << '\n';
            pass = r.pass;
        } else {  // all
            pass = detail_cli::run_all(c, dir);
        }
        std::cout << (pass ? "all thresholds met\n" : "threshold failure (see report.json)\n");
        return pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mqd
