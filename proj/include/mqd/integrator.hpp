#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqd/ensemble.hpp"
#include "mqd/interaction.hpp"
#include "mqd/units.hpp"

// Velocity-Verlet advance of the particle chain.
//
// The timestep adapts to the closest pair: dt = min(dt_max, dt_safety *
// dx_min^2 / (hbar/m)), the diffusive time scale of the 1/dx^2 forces. The
// accepted dt is then snapped down to dt_max * 2^-k so the integrator reuses
// a small set of step sizes instead of a continuously sliding one; a
// symplectic scheme keeps its bounded-energy behavior only while dt is
// constant, and the ladder confines dt changes to rare rung switches.
//
// A trial step that produces a particle crossing (non-increasing positions)
// or an unrecoverable wall violation is rejected and retried at dt/2, up to
// 40 halvings. Walls, when enabled, reflect elastically: x < 0 maps to -x
// with the velocity sign flipped, and likewise at L.

namespace mqd {

enum class WallMode { reflect, none };

struct IntegratorConfig {
    double dt_max = 1e-3;          // ps
    double dt_safety = 0.05;       // in (0, 1]
    double energy_drift_tol = 1e-6;
    WallMode wall_mode = WallMode::reflect;
};

struct StepDiagnostics {
    double accepted_dt = 0.0;
    double total_energy = 0.0;
    int rejections = 0;
    int wall_bounces = 0;
};

struct Trajectory {
    std::vector<double> times;                    // ps
    std::vector<std::vector<double>> positions;   // one snapshot per time
    std::vector<std::vector<double>> velocities;  // aligned with positions
    std::vector<double> energies;                 // total energy per snapshot
    std::int64_t total_steps = 0;
    std::int64_t total_rejections = 0;
    std::int64_t total_wall_bounces = 0;
    double min_accepted_dt = std::numeric_limits<double>::infinity();
    double max_accepted_dt = 0.0;
    double max_energy_drift = 0.0;  // max |E(t)-E(0)| / |E(0)| over all steps
    bool drift_warning = false;

    std::size_t frames() const { return times.size(); }
};

inline double kinetic_energy(const Ensemble& e) {
    double sum = 0.0;
    for (double v : e.velocities) sum += v * v;
    return 0.5 * e.mass * sum;
}

inline double total_energy(const Ensemble& e, const ForceField& f) {
    return kinetic_energy(e) + potential(e, f);
}

namespace detail {

inline void check_config(const IntegratorConfig& c) {
    if (!(c.dt_max > 0.0)) throw std::invalid_argument("dt_max must be positive");
    if (!(c.dt_safety > 0.0) || c.dt_safety > 1.0)
        throw std::invalid_argument("dt_safety must be in (0, 1]");
}

// Minimum spacing that bounds the force scale: adjacent gaps, plus the
// ghost gaps (twice the wall distance) in mirror-image mode.
inline double min_spacing(const Ensemble& e, const ForceField& f) {
    double dmin = std::numeric_limits<double>::infinity();
    const std::vector<double>& x = e.positions;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) dmin = std::min(dmin, x[i + 1] - x[i]);
    if (f.mode == BoundaryMode::mirror_image && f.geometry) {
        dmin = std::min(dmin, 2.0 * x.front());
        dmin = std::min(dmin, 2.0 * (f.geometry->length - x.back()));
    }
    return dmin;
}

// Largest dt_max * 2^-k not exceeding the adaptive target.
inline double ladder_dt(const Ensemble& e, const ForceField& f, const IntegratorConfig& c) {
    const double dmin = min_spacing(e, f);
    const double target = c.dt_safety * dmin * dmin / f.units.hbar_over_m;
    double dt = c.dt_max;
    int guard = 0;
    while (dt > target) {
        dt *= 0.5;
        if (++guard > 2000) throw std::runtime_error("adaptive dt underflow: chain nearly singular");
    }
    return dt;
}

inline void require_finite(const std::vector<double>& forces) {
    for (double fj : forces)
        if (!std::isfinite(fj)) throw std::runtime_error("non-finite force");
}

inline bool strictly_increasing(const std::vector<double>& x) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1])) return false;
    return true;
}

// One velocity-Verlet step with rejection, reflection, and an optional cap on
// dt (used by run() to land exactly on sample times). `acc` caches the
// acceleration at the current positions across calls; `acc_valid` tracks it.
inline StepDiagnostics step_impl(Ensemble& e, const ForceField& f, const IntegratorConfig& c,
                                 double dt_cap, std::vector<double>& acc, bool& acc_valid) {
    check_config(c);
    require_valid(e);
    const std::size_t n = e.size();

    if (!acc_valid) {
        acc = force(e, f);
        require_finite(acc);
        for (double& a : acc) a /= e.mass;
        acc_valid = true;
    }

    double dt = std::min(ladder_dt(e, f, c), dt_cap);
    const std::vector<double> x0 = e.positions;
    const std::vector<double> v0 = e.velocities;

    StepDiagnostics diag;
    for (int attempt = 0;; ++attempt) {
        // Drift.
        for (std::size_t j = 0; j < n; ++j)
            e.positions[j] = x0[j] + v0[j] * dt + 0.5 * acc[j] * dt * dt;

        // Elastic walls. Bounced particles get their velocity flipped after
        // the full velocity update below.
        std::vector<std::size_t> bounced;
        bool wall_ok = true;
        if (f.geometry && c.wall_mode == WallMode::reflect) {
            const double L = f.geometry->length;
            for (std::size_t j = 0; j < n; ++j) {
                double& xj = e.positions[j];
                if (xj < 0.0) {
                    xj = -xj;
                    bounced.push_back(j);
                } else if (xj > L) {
                    xj = 2.0 * L - xj;
                    bounced.push_back(j);
                }
                if (xj < 0.0 || xj > L) wall_ok = false;  // beyond one reflection
            }
        }

        if (wall_ok && strictly_increasing(e.positions) &&
            (f.mode != BoundaryMode::mirror_image ||
             (e.positions.front() > 0.0 && e.positions.back() < f.geometry->length))) {
            // Kick: v' = v + (a(x0) + a(x'))/2 * dt.
            std::vector<double> f_new = force(e, f);
            require_finite(f_new);
            for (std::size_t j = 0; j < n; ++j) {
                e.velocities[j] = v0[j] + 0.5 * (acc[j] + f_new[j] / e.mass) * dt;
            }
            for (std::size_t j : bounced) e.velocities[j] = -e.velocities[j];
            // Cache the new acceleration unless a bounce made the final
            // velocity inconsistent with a plain Verlet step (positions are
            // still the ones f_new was computed at, so the cache stays valid).
            for (std::size_t j = 0; j < n; ++j) acc[j] = f_new[j] / e.mass;
            acc_valid = true;
            diag.accepted_dt = dt;
            diag.wall_bounces = static_cast<int>(bounced.size());
            e.time += dt;
            diag.total_energy = total_energy(e, f);
            return diag;
        }

        // Reject: restore and retry at half the step.
        e.positions = x0;
        e.velocities = v0;
        ++diag.rejections;
        if (attempt >= 40)
            throw std::runtime_error("crossing unresolvable after 40 dt halvings at t = " +
                                     std::to_string(e.time) + " ps");
        dt *= 0.5;
    }
}

}  // namespace detail

// Single step (standalone form; run() below reuses cached forces).
inline StepDiagnostics step(Ensemble& e, const ForceField& f, const IntegratorConfig& c) {
    std::vector<double> acc;
    bool acc_valid = false;
    return detail::step_impl(e, f, c, std::numeric_limits<double>::infinity(), acc, acc_valid);
}

// Advance for `duration`, recording snapshots at t = 0, sample_every,
// 2*sample_every, ... and always at `duration`. Steps are capped so snapshot
// times are hit exactly. Total-energy drift is monitored every step against
// c.energy_drift_tol; exceeding it sets drift_warning rather than aborting.
inline Trajectory run(Ensemble& e, const ForceField& f, const IntegratorConfig& c,
                      double duration, double sample_every) {
    detail::check_config(c);
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(sample_every > 0.0)) throw std::invalid_argument("sample_every must be positive");
    require_valid(e);

    Trajectory traj;
    const double e0 = total_energy(e, f);
    const double escale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
    traj.times.push_back(e.time);
    traj.positions.push_back(e.positions);
    traj.velocities.push_back(e.velocities);
    traj.energies.push_back(e0);

    const double t_start = e.time;
    const double t_end = t_start + duration;
    std::size_t sample_index = 1;
    double next_sample = std::min(t_start + sample_every, t_end);

    std::vector<double> acc;
    bool acc_valid = false;
    while (e.time < t_end) {
        const double cap = next_sample - e.time;
        StepDiagnostics diag;
        try {
            diag = detail::step_impl(e, f, c, cap, acc, acc_valid);
        } catch (const std::runtime_error& err) {
            throw std::runtime_error(std::string(err.what()) + " (run failed at t = " +
                                     std::to_string(e.time) + " ps)");
        }
        ++traj.total_steps;
        traj.total_rejections += diag.rejections;
        traj.total_wall_bounces += diag.wall_bounces;
        traj.min_accepted_dt = std::min(traj.min_accepted_dt, diag.accepted_dt);
        traj.max_accepted_dt = std::max(traj.max_accepted_dt, diag.accepted_dt);
        const double drift = std::abs(diag.total_energy - e0) / escale;
        traj.max_energy_drift = std::max(traj.max_energy_drift, drift);

        if (e.time >= next_sample - 1e-12 * sample_every) {
            e.time = next_sample;  // the step was capped to land here
            traj.times.push_back(e.time);
            traj.positions.push_back(e.positions);
            traj.velocities.push_back(e.velocities);
            traj.energies.push_back(diag.total_energy);
            ++sample_index;
            next_sample = std::min(t_start + static_cast<double>(sample_index) * sample_every,
                                   t_end);
            if (next_sample <= e.time) next_sample = t_end;
        }
    }
    traj.drift_warning = traj.max_energy_drift >= c.energy_drift_tol;
    return traj;
}

}  // namespace mqd
