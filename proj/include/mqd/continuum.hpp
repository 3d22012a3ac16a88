#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mqd/density.hpp"
#include "mqd/ensemble.hpp"
#include "mqd/interaction.hpp"
#include "mqd/quantum.hpp"

// Continuum-limit validation: the exact discrete interaction force on a
// quantile-spaced chain is compared against the Bohm quantum force of the
// underlying density, particle by particle, and the error is shown to vanish
// as the chain is refined.

namespace mqd {

struct ForceComparison {
    std::vector<double> positions;  // interior particle positions, nm
    std::vector<double> discrete;   // exact chain force at each particle
    std::vector<double> analytic;   // quantum force of the density there
    std::vector<double> errors;     // (discrete - analytic) / force_scale
    double force_scale = 0.0;       // max |analytic| over the interior
    double max_error = 0.0;         // max |errors|
};

struct ConvergenceReport {
    std::vector<std::size_t> sizes;
    std::vector<double> max_errors;  // per size, normalized
    double fitted_order = 0.0;       // -slope of log(error) vs log(N)
    bool monotone = false;
    bool pass = false;  // monotone decrease and fitted_order >= 1
};

// Closed-form quantum force of a Gaussian density: hbar^2 (x - center) /
// (4 m sigma^4). The reference oracle for the Gaussian convergence study.
inline std::function<double(double)> gaussian_quantum_force(
    double sigma, double center = 0.0, double mass = 1.0,
    const UnitSystem& us = make_unit_system()) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    const double coeff = us.hbar * us.hbar / (4.0 * mass * sigma * sigma * sigma * sigma);
    return [coeff, center](double x) { return coeff * (x - center); };
}

namespace detail {

// Quantum force field of a density profile, sampled by 4th-order stencils on
// a uniform grid and linearly interpolated. Resolution-independent of the
// chain under test, so it serves as the analytic reference whenever no
// closed form is supplied. The point count balances stencil truncation
// against roundoff: repeated-difference noise grows as 1/h^3, so an overly
// fine grid is *less* accurate.
inline std::function<double(double)> grid_quantum_force(const DensityProfile& p, double xl,
                                                        double xr, double mass,
                                                        const UnitSystem& us,
                                                        std::size_t grid_points = 1025) {
    const double pad = 0.05 * (xr - xl);
    const double gl = std::max(p.lo + 1e-9, xl - pad);
    const double gr = std::min(p.hi - 1e-9, xr + pad);
    if (!(gr > gl)) throw std::invalid_argument("degenerate force-evaluation window");
    const double dx = (gr - gl) / static_cast<double>(grid_points - 1);

    std::vector<double> rho(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i)
        rho[i] = p.density(gl + dx * static_cast<double>(i));
    const QuantumForce qf = quantum_force(rho, dx, mass, us);

    auto values = std::make_shared<std::vector<double>>(std::move(qf.values));
    const std::size_t lo = qf.reliable_begin, hi = qf.reliable_end;
    return [values, gl, dx, lo, hi](double x) {
        double fi = (x - gl) / dx;
        fi = std::clamp(fi, static_cast<double>(lo), static_cast<double>(hi - 1));
        const std::size_t i = std::min(static_cast<std::size_t>(fi), hi - 2);
        const double w = fi - static_cast<double>(i);
        return (1.0 - w) * (*values)[i] + w * (*values)[i + 1];
    };
}

}  // namespace detail

// Per-particle comparison on the central (1 - 2 margin) fraction of a
// quantile chain. Signed differences are normalized by the maximum analytic
// force over the interior, since the pointwise force crosses zero. Pass an
// analytic force callback when the density has a closed form; otherwise the
// reference is computed from a high-resolution grid of the density itself.
inline ForceComparison discrete_vs_quantum_force(
    const DensityProfile& p, std::size_t N, double margin = 0.2,
    std::function<double(double)> analytic_force = {}) {
    if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("margin must be in [0, 0.5)");
    if (N < 9) throw std::invalid_argument("chain too short for a continuum comparison");

    const Ensemble e = quantile_init(p, N);
    const std::size_t lo = static_cast<std::size_t>(
        std::floor(margin * static_cast<double>(N)));
    const std::size_t hi = N - lo;
    if (hi <= lo + 2) throw std::invalid_argument("margin leaves no interior particles");
    for (std::size_t j = lo; j < hi; ++j) {
        if (!(p.density(e.positions[j]) > 0.0))
            throw std::invalid_argument("density not strictly positive on interior");
    }

    ForceField field;
    field.mode = BoundaryMode::interior_only;
    field.units = make_unit_system();
    const std::vector<double> f = force(e, field);

    if (!analytic_force) {
        analytic_force = detail::grid_quantum_force(p, e.positions[lo], e.positions[hi - 1],
                                                    e.mass, field.units);
    }

    ForceComparison out;
    out.positions.reserve(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) {
        out.positions.push_back(e.positions[j]);
        out.discrete.push_back(f[j]);
        out.analytic.push_back(analytic_force(e.positions[j]));
        out.force_scale = std::max(out.force_scale, std::abs(out.analytic.back()));
    }
    const double scale = std::max(out.force_scale, std::numeric_limits<double>::min());
    out.errors.reserve(out.positions.size());
    for (std::size_t j = 0; j < out.positions.size(); ++j) {
        out.errors.push_back((out.discrete[j] - out.analytic[j]) / scale);
        out.max_error = std::max(out.max_error, std::abs(out.errors.back()));
    }
    return out;
}

inline void validate_convergence_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 3) throw std::invalid_argument("need at least 3 chain sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 50) throw std::invalid_argument("chain sizes must be at least 50");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            throw std::invalid_argument("chain sizes must be strictly increasing");
    }
}

// Refinement study: per-size normalized maximum error and the empirical
// order from a least-squares fit of log(error) against log(N).
inline ConvergenceReport convergence_study(const DensityProfile& p,
                                           const std::vector<std::size_t>& sizes,
                                           double margin = 0.2,
                                           std::function<double(double)> analytic_force = {}) {
    validate_convergence_sizes(sizes);

    ConvergenceReport r;
    r.sizes = sizes;
    for (std::size_t n : sizes)
        r.max_errors.push_back(discrete_vs_quantum_force(p, n, margin, analytic_force).max_error);

    r.monotone = true;
    for (std::size_t i = 1; i < r.max_errors.size(); ++i)
        if (!(r.max_errors[i] < r.max_errors[i - 1])) r.monotone = false;

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double x = std::log(static_cast<double>(sizes[i]));
        const double y = std::log(std::max(r.max_errors[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    r.fitted_order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    r.pass = r.monotone && r.fitted_order >= 1.0;
    return r;
}

}  // namespace mqd
