// Acceptance gate: seven go/no-go criteria for the simulator, one printed
// line each, exit code = number of failures. Every numeric bound is pinned
// in `Bounds` below; the measurement recipes match the CLI defaults exactly
// (same builders, same detectors, same bandwidths), so a criterion here
// passes if and only if the shipped tool reproduces the claimed physics.
//
// Criteria 2 and 4 are currently expected to FAIL; README.md documents the
// measurements behind that in "Validation status".

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mqd/cli.hpp"

using namespace mqd;
using detail_cli::BoxRunResult;
using detail_cli::ContinuumRunResult;
using detail_cli::SlitRunResult;

namespace {

struct Bounds {
    // 1: detected box periods vs the quantized reference values.
    static constexpr double t_ref_ps[3] = {27.5, 6.88, 3.05};
    static constexpr double period_rel_tol = 0.10;
    // 2: period ratios vs the 1/n^2 spectrum.
    static constexpr double ratio_12 = 4.0;
    static constexpr double ratio_13 = 9.0;
    static constexpr double ratio_rel_tol = 0.10;
    // 3: E = hbar pi / (2 T) at T = 27.5 ps vs the n=1 box energy.
    static constexpr double energy_rel_tol = 0.002;
    // 4: double-slit ensemble vs the dispersed two-packet density.
    static constexpr double ks_max = 0.10;
    static constexpr double fringe_match_nm = 8.0;  // per oracle minimum, |x| <= 150
    // 5: discrete force -> quantum force convergence on a Gaussian.
    static constexpr double min_fitted_order = 1.0;
    static constexpr double largest_chain_max_err = 0.05;  // N = 400
    // 6: interaction + integrator hygiene.
    static constexpr double fd_force_tol = 1e-6;       // vs finite differences
    static constexpr double momentum_tol = 1e-12;      // residual net force
    static constexpr double homogeneity_tol = 1e-12;   // F(a x) = F(x) / a^3
    static constexpr double drift_tol = 1e-6;          // 10 periods, dt_safety 1e-3
    static constexpr double reversibility_nm = 1e-6;   // fixed-dt there-and-back
    // 7: quantum oracle health.
    static constexpr double norm_drift_tol = 1e-9;     // 1e4 split-step hops
    static constexpr double sigma_rel_tol = 1e-6;      // grid vs dispersion law
    static constexpr double two_packet_tol = 1e-4;     // of the density peak
};

int failures = 0;

void report(int k, const char* label, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s - %s\n", ok ? "PASS" : "FAIL", k, label,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v, const char* spec = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

Ensemble make_chain(std::vector<double> x) {
    Ensemble e;
    e.velocities.assign(x.size(), 0.0);
    e.positions = std::move(x);
    return e;
}

Ensemble random_chain(std::mt19937& rng, std::size_t n, double lo_gap, double hi_gap) {
    std::uniform_real_distribution<double> logspacing(std::log(lo_gap), std::log(hi_gap));
    std::vector<double> x(n);
    x[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + std::exp(logspacing(rng));
    return make_chain(std::move(x));
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

// --- criterion 6 sub-measurements -----------------------------------------

struct HygieneResult {
    double fd_err = 0.0;
    double momentum = 0.0;
    double homogeneity = 0.0;
    double reversibility_nm = 0.0;
    bool rerun_identical = false;
    bool dt_stayed_fixed = true;
};

HygieneResult measure_hygiene() {
    HygieneResult h;
    std::mt19937 rng(20260819);
    std::uniform_int_distribution<std::size_t> size_dist(3, 50);

    // Force vs central differences, both boundary modes; net force and
    // cubic homogeneity on the interior chains.
    const ForceField interior;
    ForceField mirrored;
    mirrored.mode = BoundaryMode::mirror_image;
    for (int trial = 0; trial < 1000; ++trial) {
        const bool use_mirror = trial % 10 == 9;
        Ensemble e = random_chain(rng, size_dist(rng), 0.1, 10.0);
        const ForceField* f = &interior;
        if (use_mirror) {
            // Walls half a mean gap beyond the end particles.
            const double span = e.positions.back();
            const double pad = 0.5 * span / static_cast<double>(e.size());
            for (double& x : e.positions) x += pad;
            mirrored.geometry = BoxGeometry(span + 2.0 * pad);
            f = &mirrored;
        }
        const std::vector<double> fa = force(e, *f);
        const std::vector<double> fd = force_fd_oracle(e, *f, 1e-6);
        const double scale = std::max(max_abs(fa), 1.0);
        for (std::size_t j = 0; j < e.size(); ++j)
            h.fd_err = std::max(h.fd_err, std::abs(fa[j] - fd[j]) / scale);

        if (!use_mirror) {
            double net = 0.0;
            for (double fj : fa) net += fj;
            h.momentum = std::max(h.momentum, std::abs(net) / scale);

            if (trial % 20 == 0) {
                const double a = 3.7;
                Ensemble scaled = e;
                for (double& x : scaled.positions) x *= a;
                const std::vector<double> fs = force(scaled, *f);
                for (std::size_t j = 0; j < e.size(); ++j)
                    h.homogeneity = std::max(
                        h.homogeneity, std::abs(fs[j] * a * a * a - fa[j]) / scale);
            }
        }
    }

    // Fixed-dt reversibility: expand a Gaussian chain, flip velocities,
    // return. dt_safety = 1 with a tiny dt_max keeps the ladder on one rung.
    {
        Ensemble e = quantile_init(gaussian_profile(10.0), 31);
        const std::vector<double> x0 = e.positions;
        const ForceField f;  // free space
        IntegratorConfig c;
        c.dt_max = 1e-4;
        c.dt_safety = 1.0;
        c.wall_mode = WallMode::none;
        const int steps = 5000;  // 0.5 ps out, 0.5 ps back
        for (int i = 0; i < steps; ++i)
            if (step(e, f, c).accepted_dt != c.dt_max) h.dt_stayed_fixed = false;
        for (double& v : e.velocities) v = -v;
        for (int i = 0; i < steps; ++i)
            if (step(e, f, c).accepted_dt != c.dt_max) h.dt_stayed_fixed = false;
        for (std::size_t j = 0; j < e.size(); ++j)
            h.reversibility_nm =
                std::max(h.reversibility_nm, std::abs(e.positions[j] - x0[j]));
    }

    // Determinism: the same short box run twice must agree to the last bit.
    {
        auto once = [] {
            Scenario s = build_box_scenario(1, 100.0, 101);
            return run(s.ensemble, s.field, s.integrator, 1.0, 0.25);
        };
        const Trajectory a = once();
        const Trajectory b = once();
        h.rerun_identical = a.positions == b.positions && a.velocities == b.velocities &&
                            a.energies == b.energies && a.times == b.times;
    }
    return h;
}

// --- criterion 7 sub-measurements ------------------------------------------

struct OracleResult {
    double norm_drift = 0.0;
    double sigma_rel_err = 0.0;
    double two_packet_err = 0.0;  // fraction of the density peak
};

OracleResult measure_oracle() {
    OracleResult o;
    const UnitSystem us = make_unit_system();
    const GaussianPacket p(0.0, 10.0);

    {  // 1e4 split-step hops must conserve the norm.
        GridState s = make_grid_state(-500.0, 500.0, 512,
                                      [&](double x) { return packet_amplitude(p, 0.0, x, us); });
        s = propagate_grid(std::move(s), 10.0, 1e-3, GridPotential::free_space, 1.0, us);
        o.norm_drift = std::abs(grid_norm(s) - 1.0);
    }
    {  // Grid dispersion vs the closed-form sigma(t).
        GridState s = make_grid_state(-1000.0, 1000.0, 2048,
                                      [&](double x) { return packet_amplitude(p, 0.0, x, us); });
        s = propagate_grid(std::move(s), 20.0, 0.01, GridPotential::free_space, 1.0, us);
        const std::vector<double> rho = grid_density(s);
        double m2 = 0.0;
        for (std::size_t i = 0; i < s.x.size(); ++i) m2 += s.x[i] * s.x[i] * rho[i] * s.dx;
        o.sigma_rel_err =
            std::abs(std::sqrt(m2) - packet_sigma_t(p, 20.0, us)) / packet_sigma_t(p, 20.0, us);
    }
    {  // Two-packet closed form vs grid propagation of the summed amplitudes.
        const SlitGeometry g(50.0, 10.0);
        GridState s = make_grid_state(-1000.0, 1000.0, 2048, [&](double x) {
            return packet_amplitude({50.0, 10.0}, 0.0, x, us) +
                   packet_amplitude({-50.0, 10.0}, 0.0, x, us);
        });
        s = propagate_grid(std::move(s), 20.0, 0.01, GridPotential::free_space, 1.0, us);
        const std::vector<double> rho = grid_density(s);
        double peak = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double ref = two_packet_density(g, 1.0, 20.0, s.x[i], us);
            peak = std::max(peak, ref);
            worst = std::max(worst, std::abs(rho[i] - ref));
        }
        o.two_packet_err = worst / peak;
    }
    return o;
}

}  // namespace

int main() {
    std::printf("acceptance: box L = 100 nm, N = 101; slit X = 50 nm, sigma = 10 nm, "
                "N = 1000, t = 20 ps\n");
    std::fflush(stdout);

    const CliConfig defaults;  // the shipped defaults are the tested recipe

    // Heavy runs in parallel: three box states, the slit ensemble, and the
    // long drift integration.
    std::vector<std::future<BoxRunResult>> box_futs;
    for (int n = 1; n <= 3; ++n)
        box_futs.push_back(std::async(std::launch::async, [&defaults, n] {
            return detail_cli::run_box_state(defaults, n);
        }));
    auto slit_fut = std::async(std::launch::async,
                               [&defaults] { return detail_cli::run_slit(defaults); });
    auto drift_fut = std::async(std::launch::async, [] {
        Scenario s = build_box_scenario(1, 100.0, 101);
        s.integrator.dt_safety = 1e-3;
        const double t_ref = detail_cli::reference_period(1, 100.0, 1.0, make_unit_system());
        const Trajectory t = run(s.ensemble, s.field, s.integrator, 10.0 * t_ref, t_ref);
        return t.max_energy_drift;
    });
    auto hygiene_fut = std::async(std::launch::async, measure_hygiene);
    auto oracle_fut = std::async(std::launch::async, measure_oracle);

    // Criteria 1 and 2: periods and their ratios.
    double t_meas[3] = {0.0, 0.0, 0.0};
    {
        bool ok = true;
        std::ostringstream d;
        for (int n = 1; n <= 3; ++n) {
            const BoxRunResult r = box_futs[static_cast<std::size_t>(n - 1)].get();
            if (n > 1) d << ", ";
            if (!r.report.detection_error.empty()) {
                ok = false;
                d << "T" << n << " undetected (" << r.report.detection_error << ")";
                continue;
            }
            t_meas[n - 1] = r.report.estimate.period;
            const double ref = Bounds::t_ref_ps[n - 1];
            const double dev = std::abs(t_meas[n - 1] - ref) / ref;
            ok = ok && dev <= Bounds::period_rel_tol;
            d << "T" << n << " = " << fmt(t_meas[n - 1], "%.5g") << " ps vs " << fmt(ref)
              << " (dev " << fmt(100.0 * dev, "%.2g") << "%)";
        }
        d << "; tol " << fmt(100.0 * Bounds::period_rel_tol, "%.3g") << "%";
        report(1, "quantized box periods", ok, d.str());
    }
    {
        bool ok = t_meas[0] > 0.0 && t_meas[1] > 0.0 && t_meas[2] > 0.0;
        std::ostringstream d;
        if (ok) {
            const double r12 = t_meas[0] / t_meas[1];
            const double r13 = t_meas[0] / t_meas[2];
            const double dev12 = std::abs(r12 - Bounds::ratio_12) / Bounds::ratio_12;
            const double dev13 = std::abs(r13 - Bounds::ratio_13) / Bounds::ratio_13;
            ok = dev12 <= Bounds::ratio_rel_tol && dev13 <= Bounds::ratio_rel_tol;
            d << "T1/T2 = " << fmt(r12, "%.5g") << " vs 4 (dev " << fmt(100.0 * dev12, "%.2g")
              << "%), T1/T3 = " << fmt(r13, "%.5g") << " vs 9 (dev "
              << fmt(100.0 * dev13, "%.3g") << "%); tol "
              << fmt(100.0 * Bounds::ratio_rel_tol, "%.3g") << "%";
        } else {
            d << "skipped: not every period was detected";
        }
        report(2, "1/n^2 period ratios", ok, d.str());
    }

    // Criterion 3: the period-energy bridge at the quoted fundamental period.
    {
        const UnitSystem us = make_unit_system();
        const double e_micro = energy_from_period(Bounds::t_ref_ps[0], us);
        const double e_box = box_energy(1, 100.0, 1.0, us);
        const double dev = std::abs(e_micro - e_box) / e_box;
        std::ostringstream d;
        d << "hbar pi / (2 * 27.5 ps) = " << fmt(e_micro, "%.6g") << " vs E1 = "
          << fmt(e_box, "%.6g") << " (dev " << fmt(100.0 * dev, "%.2g") << "%); tol "
          << fmt(100.0 * Bounds::energy_rel_tol, "%.2g") << "%";
        report(3, "period-energy correspondence", dev <= Bounds::energy_rel_tol, d.str());
    }

    // Criterion 4: slit ensemble vs the dispersed two-packet oracle.
    {
        const SlitRunResult r = slit_fut.get();
        const bool ks_ok = r.distances.ks < Bounds::ks_max;
        double worst_offset = 0.0;
        bool fringe_ok = !r.fringes.oracle_minima_nm.empty();
        for (double om : r.fringes.oracle_minima_nm) {
            double best = std::numeric_limits<double>::infinity();
            for (double km : r.fringes.ensemble_minima_nm)
                best = std::min(best, std::abs(km - om));
            worst_offset = std::max(worst_offset, best);
            fringe_ok = fringe_ok && best <= Bounds::fringe_match_nm;
        }
        std::ostringstream d;
        d << "KS = " << fmt(r.distances.ks, "%.4g") << " (bound < " << fmt(Bounds::ks_max)
          << "); " << r.fringes.oracle_minima_nm.size()
          << " oracle minima in |x| <= 150 nm, worst ensemble offset "
          << fmt(worst_offset, "%.3g") << " nm (bound " << fmt(Bounds::fringe_match_nm)
          << " nm, KDE bw " << fmt(r.fringes.kde_bandwidth_nm) << " nm)";
        report(4, "double-slit interference", ks_ok && fringe_ok, d.str());
    }

    // Criterion 5: continuum limit of the discrete force on a Gaussian.
    {
        const ContinuumRunResult r = detail_cli::run_continuum(CliConfig{});
        const bool ok = r.report.monotone &&
                        r.report.fitted_order >= Bounds::min_fitted_order &&
                        r.n_last_error < Bounds::largest_chain_max_err;
        std::ostringstream d;
        d << "errors";
        for (double e : r.report.max_errors) d << ' ' << fmt(e, "%.3g");
        d << " over N";
        for (std::size_t n : r.report.sizes) d << ' ' << n;
        d << "; fitted order " << fmt(r.report.fitted_order, "%.4g") << " (>= "
          << fmt(Bounds::min_fitted_order) << "), N400 err " << fmt(r.n_last_error, "%.3g")
          << " (< " << fmt(Bounds::largest_chain_max_err) << "), monotone "
          << (r.report.monotone ? "yes" : "no");
        report(5, "continuum force convergence", ok, d.str());
    }

    // Criterion 6: interaction and integrator hygiene.
    {
        const HygieneResult h = hygiene_fut.get();
        const double drift = drift_fut.get();
        const bool ok = h.fd_err < Bounds::fd_force_tol && h.momentum < Bounds::momentum_tol &&
                        h.homogeneity < Bounds::homogeneity_tol &&
                        drift < Bounds::drift_tol &&
                        h.reversibility_nm < Bounds::reversibility_nm &&
                        h.rerun_identical && h.dt_stayed_fixed;
        std::ostringstream d;
        d << "fd " << fmt(h.fd_err, "%.2g") << " (<1e-6), net force " << fmt(h.momentum, "%.2g")
          << " (<1e-12), homogeneity " << fmt(h.homogeneity, "%.2g")
          << " (<1e-12), drift/10T " << fmt(drift, "%.3g") << " (<1e-6), reversal "
          << fmt(h.reversibility_nm, "%.2g") << " nm (<1e-6), rerun identical "
          << (h.rerun_identical ? "yes" : "NO") << (h.dt_stayed_fixed ? "" : ", dt slipped");
        report(6, "force and integrator hygiene", ok, d.str());
    }

    // Criterion 7: the quantum oracle itself.
    {
        const OracleResult o = oracle_fut.get();
        const bool ok = o.norm_drift < Bounds::norm_drift_tol &&
                        o.sigma_rel_err < Bounds::sigma_rel_tol &&
                        o.two_packet_err < Bounds::two_packet_tol;
        std::ostringstream d;
        d << "norm drift " << fmt(o.norm_drift, "%.2g") << " (<1e-9) over 1e4 steps, sigma(t) "
          << fmt(o.sigma_rel_err, "%.2g") << " (<1e-6), two-packet grid vs closed form "
          << fmt(o.two_packet_err, "%.2g") << " of peak (<1e-4)";
        report(7, "quantum oracle health", ok, d.str());
    }

    std::printf("acceptance: %d of 7 criteria pass\n", 7 - failures);
    return failures;
}
