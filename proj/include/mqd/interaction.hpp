#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqd/ensemble.hpp"
#include "mqd/units.hpp"

// Pairwise-spacing repulsion
//
//   V = (hbar^2 / 8m) * sum_k ( 1/(x_{k+1}-x_k) - 1/(x_k-x_{k-1}) )^2
//
// summed over every particle k that has both neighbors. V is zero exactly on
// uniformly spaced chains, scales as 1/lambda^2 under x -> lambda*x, and
// depends only on coordinate differences.
//
// Boundary handling is the one thing the sum leaves open:
//   interior_only : drop summands that reference a nonexistent neighbor.
//   mirror_image  : extend the chain with the reflection of the nearest
//                   particle across each wall before summing. One ghost per
//                   wall; deeper reflections only duplicate mirror-symmetric
//                   summands already present. Ghosts move with their source
//                   particle, and the force includes that dependence, so
//                   F = -dV/dx holds exactly in both modes.

namespace mqd {

enum class BoundaryMode { interior_only, mirror_image };

struct ForceField {
    BoundaryMode mode = BoundaryMode::interior_only;
    std::optional<BoxGeometry> geometry;
    UnitSystem units = make_unit_system();
};

namespace detail {

// Chain positions extended per boundary mode. `offset` maps a real particle
// index j to extended index j + offset.
inline std::vector<double> extend_chain(const Ensemble& e, const ForceField& f,
                                        std::size_t* offset) {
    const std::vector<double>& x = e.positions;
    if (f.mode == BoundaryMode::interior_only) {
        *offset = 0;
        return x;
    }
    if (!f.geometry)
        throw std::invalid_argument("mirror-image mode requires a box geometry");
    const double L = f.geometry->length;
    if (!(x.front() > 0.0) || !(x.back() < L))
        throw std::invalid_argument("mirror-image mode requires all positions inside (0, L)");
    std::vector<double> ext;
    ext.reserve(x.size() + 2);
    ext.push_back(-x.front());
    ext.insert(ext.end(), x.begin(), x.end());
    ext.push_back(2.0 * L - x.back());
    *offset = 1;
    return ext;
}

// Inverse spacings g_i = 1/(ext[i+1]-ext[i]) and summand terms
// s_k = g_k - g_{k-1} for every interior k of the extended chain.
struct ChainTerms {
    std::vector<double> g;  // size M-1
    std::vector<double> s;  // size M, s[0] = s[M-1] = 0 (not summands)
};

inline ChainTerms chain_terms(const std::vector<double>& ext) {
    const std::size_t m = ext.size();
    ChainTerms t;
    t.g.resize(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) t.g[i] = 1.0 / (ext[i + 1] - ext[i]);
    t.s.assign(m, 0.0);
    for (std::size_t k = 1; k + 1 < m; ++k) t.s[k] = t.g[k] - t.g[k - 1];
    return t;
}

}  // namespace detail

// Interaction energy, in mass_unit * nm^2 / ps^2.
inline double potential(const Ensemble& e, const ForceField& f) {
    require_valid(e);
    std::size_t offset = 0;
    const std::vector<double> ext = detail::extend_chain(e, f, &offset);
    const detail::ChainTerms t = detail::chain_terms(ext);
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 < ext.size(); ++k) sum += t.s[k] * t.s[k];
    const double hbar = f.units.hbar;
    return hbar * hbar / (8.0 * e.mass) * sum;
}

// Exact gradient -dV/dx_j for every particle, in mass_unit * nm / ps^2.
// Expanding the derivative gives a five-point expression in x_{j-2}..x_{j+2}:
//
//   F_j = (hbar^2/4m) [ g_j^2 (s_{j+1} - s_j) + g_{j-1}^2 (s_{j-1} - s_j) ]
//
// with g the inverse spacings and s the summand terms above; s-terms outside
// the summed index set are zero. Each entry is an independent closed-form
// expression, so entries may be evaluated in any order or in parallel.
inline std::vector<double> force(const Ensemble& e, const ForceField& f) {
    require_valid(e);
    std::size_t offset = 0;
    const std::vector<double> ext = detail::extend_chain(e, f, &offset);
    const detail::ChainTerms t = detail::chain_terms(ext);
    const std::size_t m = ext.size();

    // -dV/d(ext[p]) treating every extended coordinate as independent.
    auto grad_at = [&](std::size_t p) {
        double acc = 0.0;
        if (p + 1 < m) {
            const double sp1 = (p + 2 < m) ? t.s[p + 1] : 0.0;
            acc += t.g[p] * t.g[p] * (sp1 - t.s[p]);
        }
        if (p >= 1) {
            const double sm1 = t.s[p - 1];
            acc += t.g[p - 1] * t.g[p - 1] * (sm1 - t.s[p]);
        }
        return acc;
    };

    const double hbar = f.units.hbar;
    const double c4 = hbar * hbar / (4.0 * e.mass);
    const std::size_t n = e.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c4 * grad_at(j + offset);
    if (offset == 1) {
        // Ghost positions are -x_0 and 2L - x_{n-1}; chain rule adds
        // -(gradient at the ghost) to the source particle.
        out[0] -= c4 * grad_at(0);
        out[n - 1] -= c4 * grad_at(m - 1);
    }
    return out;
}

// Test oracle: central finite difference of the potential, -[V(x_j + h) -
// V(x_j - h)]/(2h) per particle. O(N^2); the analytic stencil above is the
// production path.
inline std::vector<double> force_fd_oracle(const Ensemble& e, const ForceField& f, double h) {
    require_valid(e);
    if (!(h > 0.0)) throw std::invalid_argument("fd step must be positive");
    if (f.mode == BoundaryMode::mirror_image && !f.geometry)
        throw std::invalid_argument("mirror-image mode requires a box geometry");
    const std::size_t n = e.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double left = (j == 0) ? (f.mode == BoundaryMode::mirror_image
                                            ? 2.0 * e.positions[0]
                                            : std::numeric_limits<double>::infinity())
                                     : e.positions[j] - e.positions[j - 1];
        const double right = (j + 1 == n) ? (f.mode == BoundaryMode::mirror_image
                                                 ? 2.0 * (f.geometry->length - e.positions[n - 1])
                                                 : std::numeric_limits<double>::infinity())
                                          : e.positions[j + 1] - e.positions[j];
        if (h >= left || h >= right)
            throw std::invalid_argument("fd step would cross a neighbor at index " +
                                        std::to_string(j));
    }
    std::vector<double> out(n);
    Ensemble probe = e;
    for (std::size_t j = 0; j < n; ++j) {
        const double x0 = e.positions[j];
        probe.positions[j] = x0 + h;
        const double vp = potential(probe, f);
        probe.positions[j] = x0 - h;
        const double vm = potential(probe, f);
        probe.positions[j] = x0;
        out[j] = -(vp - vm) / (2.0 * h);
    }
    return out;
}

}  // namespace mqd
