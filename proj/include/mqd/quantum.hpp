#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "mqd/ensemble.hpp"
#include "mqd/units.hpp"

// Quantum-mechanical reference solutions. Everything here is independent of
// the particle simulator: closed-form box eigenstates and free Gaussian
// packets, plus a grid propagator (split-step spectral in free space,
// Crank-Nicolson with Dirichlet walls in a box) used to cross-validate the
// closed forms before either is trusted as a comparison target.

namespace mqd {

// ---------------------------------------------------------------------------
// Box eigenstates.

struct BoxEigenstate {
    int n;
    double L;  // nm

    BoxEigenstate(int n_, double L_) : n(n_), L(L_) {
        if (n < 1) throw std::invalid_argument("quantum number must be >= 1");
        if (!(L > 0.0)) throw std::invalid_argument("box length must be positive");
    }
};

inline double box_wavefunction(const BoxEigenstate& s, double x) {
    if (x < 0.0 || x > s.L) throw std::invalid_argument("x outside [0, L]");
    return std::sqrt(2.0 / s.L) * std::sin(static_cast<double>(s.n) * std::numbers::pi * x / s.L);
}

// |psi_n|^2 = (2/L) sin^2(n pi x / L), in 1/nm.
inline double box_density(const BoxEigenstate& s, double x) {
    const double a = box_wavefunction(s, x);
    return a * a;
}

// Cumulative integral of box_density from 0 to x.
inline double box_density_cdf(const BoxEigenstate& s, double x) {
    if (x < 0.0 || x > s.L) throw std::invalid_argument("x outside [0, L]");
    const double w = 2.0 * static_cast<double>(s.n) * std::numbers::pi / s.L;
    return x / s.L - std::sin(w * x) / (w * s.L);
}

// E_n = n^2 pi^2 hbar^2 / (2 m L^2).
inline double box_energy(int n, double L, double mass, const UnitSystem& us = make_unit_system()) {
    if (n < 1) throw std::invalid_argument("quantum number must be >= 1");
    if (!(L > 0.0) || !(mass > 0.0)) throw std::invalid_argument("L and mass must be positive");
    const double k = static_cast<double>(n) * std::numbers::pi / L;
    return us.hbar * us.hbar * k * k / (2.0 * mass);
}

// ---------------------------------------------------------------------------
// Free Gaussian packets.
//
// sigma is the standard deviation of the initial DENSITY |psi|^2, so
// psi(x,0) ~ exp(-(x-c)^2 / (4 sigma^2)). An alternative reading of a "slit
// width" treats sigma as the amplitude width, which narrows the density by
// sqrt(2); both interpretations are supported via SigmaMode.

enum class SigmaMode { density_std, amplitude_width };

inline double effective_sigma(double sigma, SigmaMode mode) {
    return mode == SigmaMode::density_std ? sigma : sigma / std::numbers::sqrt2;
}

struct GaussianPacket {
    double center;      // nm
    double sigma;       // nm, std of |psi|^2 at t = 0
    double mass = 1.0;  // electron masses

    GaussianPacket(double center_, double sigma_, double mass_ = 1.0)
        : center(center_), sigma(sigma_), mass(mass_) {
        if (!(sigma > 0.0)) throw std::invalid_argument("packet width must be positive");
        if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    }
};

// Dimensionless spreading parameter tau = hbar t / (2 m sigma^2).
inline double packet_tau(const GaussianPacket& p, double t,
                         const UnitSystem& us = make_unit_system()) {
    return us.hbar * t / (2.0 * p.mass * p.sigma * p.sigma);
}

// sigma_t = sigma sqrt(1 + tau^2): analytic dispersion of the density width.
inline double packet_sigma_t(const GaussianPacket& p, double t,
                             const UnitSystem& us = make_unit_system()) {
    const double tau = packet_tau(p, t, us);
    return p.sigma * std::sqrt(1.0 + tau * tau);
}

// Unit-norm free-particle amplitude with zero mean momentum.
inline std::complex<double> packet_amplitude(const GaussianPacket& p, double t, double x,
                                             const UnitSystem& us = make_unit_system()) {
    using namespace std::complex_literals;
    const double tau = packet_tau(p, t, us);
    const std::complex<double> z = 1.0 + 1.0i * tau;
    const double d = x - p.center;
    const double s2 = p.sigma * p.sigma;
    return std::pow(2.0 * std::numbers::pi * s2, -0.25) / std::sqrt(z) *
           std::exp(-d * d / (4.0 * s2 * z));
}

inline double packet_density(const GaussianPacket& p, double t, double x,
                             const UnitSystem& us = make_unit_system()) {
    const double st = packet_sigma_t(p, t, us);
    const double d = x - p.center;
    return std::exp(-d * d / (2.0 * st * st)) / (std::sqrt(2.0 * std::numbers::pi) * st);
}

// ---------------------------------------------------------------------------
// Two-packet (double slit) superposition.

// Time-independent norm of psi_+ + psi_- for unit-norm packets at +-X.
inline double two_packet_norm(const SlitGeometry& g, SigmaMode mode = SigmaMode::density_std) {
    const double s = effective_sigma(g.packet_width, mode);
    const double X = g.half_separation;
    return 2.0 * (1.0 + std::exp(-X * X / (2.0 * s * s)));
}

// |psi_+ + psi_-|^2 / norm: normalized transverse density at time t.
inline double two_packet_density(const SlitGeometry& g, double mass, double t, double x,
                                 const UnitSystem& us = make_unit_system(),
                                 SigmaMode mode = SigmaMode::density_std) {
    if (t < 0.0) throw std::invalid_argument("time must be non-negative");
    const double s = effective_sigma(g.packet_width, mode);
    const GaussianPacket plus(g.half_separation, s, mass);
    const GaussianPacket minus(-g.half_separation, s, mass);
    const std::complex<double> a = packet_amplitude(plus, t, x, us) +
                                   packet_amplitude(minus, t, x, us);
    return std::norm(a) / two_packet_norm(g, mode);
}

// ---------------------------------------------------------------------------
// Grid propagator.

struct GridState {
    std::vector<double> x;                  // uniform, nm
    std::vector<std::complex<double>> psi;  // same length as x
    double dx = 0.0;
    double time = 0.0;  // ps
};

inline double grid_norm(const GridState& s) {
    double sum = 0.0;
    for (const auto& a : s.psi) sum += std::norm(a);
    return sum * s.dx;
}

inline std::vector<double> grid_density(const GridState& s) {
    std::vector<double> d(s.psi.size());
    for (std::size_t i = 0; i < s.psi.size(); ++i) d[i] = std::norm(s.psi[i]);
    return d;
}

inline void validate_grid_state(const GridState& s) {
    if (s.x.size() != s.psi.size() || s.x.size() < 16)
        throw std::invalid_argument("grid state needs >= 16 matching samples");
    if (!(s.dx > 0.0)) throw std::invalid_argument("dx must be positive");
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
        if (std::abs(s.x[i + 1] - s.x[i] - s.dx) > 1e-9 * s.dx)
            throw std::invalid_argument("grid is not uniform");
    if (std::abs(grid_norm(s) - 1.0) > 1e-9)
        throw std::invalid_argument("grid state is not normalized");
}

// Sample psi0 on the periodic grid [a, b) with n points and normalize.
inline GridState make_grid_state(double a, double b, std::size_t n,
                                 const std::function<std::complex<double>(double)>& psi0) {
    if (!(b > a) || n < 16) throw std::invalid_argument("need b > a and n >= 16");
    GridState s;
    s.dx = (b - a) / static_cast<double>(n);
    s.x.resize(n);
    s.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.x[i] = a + s.dx * static_cast<double>(i);
        s.psi[i] = psi0(s.x[i]);
    }
    const double norm = grid_norm(s);
    if (!(norm > 0.0)) throw std::invalid_argument("initial state has zero norm");
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& p : s.psi) p *= scale;
    return s;
}

// Sample psi0 on the closed box grid [0, L] with n points (walls included and
// pinned to zero) and normalize.
inline GridState make_box_grid_state(double L, std::size_t n,
                                     const std::function<std::complex<double>(double)>& psi0) {
    if (!(L > 0.0) || n < 16) throw std::invalid_argument("need L > 0 and n >= 16");
    GridState s;
    s.dx = L / static_cast<double>(n - 1);
    s.x.resize(n);
    s.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.x[i] = s.dx * static_cast<double>(i);
        s.psi[i] = psi0(s.x[i]);
    }
    s.psi.front() = 0.0;
    s.psi.back() = 0.0;
    const double norm = grid_norm(s);
    if (!(norm > 0.0)) throw std::invalid_argument("initial state has zero norm");
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& p : s.psi) p *= scale;
    return s;
}

enum class GridPotential { free_space, hard_wall_box };

namespace detail {

// Split-step spectral propagation. The potential is zero, so each step is the
// exact kinetic phase applied in momentum space; the step loop is kept so the
// cost and roundoff behavior match a genuine repeated propagator.
inline void propagate_free(GridState& s, long long steps, double dt, double mass,
                           const UnitSystem& us) {
    const std::size_t n = s.psi.size();
    auto* data = reinterpret_cast<fftw_complex*>(s.psi.data());
    fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);

    // Kinetic phase per step at each discrete momentum, with the 1/n inverse
    // FFT normalization folded in.
    std::vector<std::complex<double>> phase(n);
    const double dk = 2.0 * std::numbers::pi / (s.dx * static_cast<double>(n));
    const double invn = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double m = (j < (n + 1) / 2)  // signed mode index
                             ? static_cast<double>(j)
                             : static_cast<double>(j) - static_cast<double>(n);
        const double k = dk * m;
        const double theta = 0.5 * (us.hbar / mass) * k * k * dt;
        phase[j] = std::polar(invn, -theta);
    }

    for (long long step = 0; step < steps; ++step) {
        fftw_execute(fwd);
        if (step == 0) {
            // Resolution check: essentially no momentum content may sit near
            // the grid Nyquist, or the dynamics are not resolved.
            double total = 0.0, tail = 0.0;
            const double knyq = dk * static_cast<double>(n) / 2.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double m = (j < (n + 1) / 2)
                                     ? static_cast<double>(j)
                                     : static_cast<double>(j) - static_cast<double>(n);
                const double w = std::norm(s.psi[j]);
                total += w;
                if (std::abs(dk * m) >= 0.9 * knyq) tail += w;
            }
            if (tail > 1e-10 * total) {
                fftw_destroy_plan(fwd);
                fftw_destroy_plan(bwd);
                throw std::runtime_error("grid does not resolve the state's momentum content");
            }
        }
        for (std::size_t j = 0; j < n; ++j) s.psi[j] *= phase[j];
        fftw_execute(bwd);
    }
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
}

// Crank-Nicolson with Dirichlet walls: (1 + i dt H / 2 hbar) psi' =
// (1 - i dt H / 2 hbar) psi, H = -(hbar^2/2m) d^2/dx^2 on the interior.
// The Cayley form is exactly unitary; the tridiagonal solve is a constant-
// coefficient Thomas algorithm.
inline void propagate_box(GridState& s, long long steps, double dt, double mass,
                          const UnitSystem& us) {
    using namespace std::complex_literals;
    const std::size_t n = s.psi.size();
    if (std::abs(s.psi.front()) > 1e-12 || std::abs(s.psi.back()) > 1e-12)
        throw std::invalid_argument("hard-wall propagation requires zero wall amplitudes");
    s.psi.front() = 0.0;
    s.psi.back() = 0.0;

    const double c = us.hbar * us.hbar / (2.0 * mass * s.dx * s.dx);  // hop energy scale
    // Accuracy guard: phase advance of the stiffest grid mode per step.
    if (dt * 4.0 * c / us.hbar > std::numbers::pi)
        throw std::runtime_error("time step too large for this grid spacing");

    const double beta = 0.5 * dt * c / us.hbar;
    const std::complex<double> diag = 1.0 + 2.0i * beta;
    const std::complex<double> off = -1.0i * beta;
    const std::size_t m = n - 2;  // interior unknowns

    // Forward-elimination coefficients are constant; precompute once.
    std::vector<std::complex<double>> cp(m);
    cp[0] = off / diag;
    for (std::size_t i = 1; i < m; ++i) cp[i] = off / (diag - off * cp[i - 1]);

    std::vector<std::complex<double>> rhs(m), dp(m);
    for (long long step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::complex<double> left = s.psi[i];       // psi[i+1-1]
            const std::complex<double> mid = s.psi[i + 1];
            const std::complex<double> right = s.psi[i + 2];
            rhs[i] = (1.0 - 2.0i * beta) * mid + 1.0i * beta * (left + right);
        }
        dp[0] = rhs[0] / diag;
        for (std::size_t i = 1; i < m; ++i)
            dp[i] = (rhs[i] - off * dp[i - 1]) / (diag - off * cp[i - 1]);
        s.psi[m] = dp[m - 1];
        for (std::size_t i = m - 1; i-- > 0;) s.psi[i + 1] = dp[i] - cp[i] * s.psi[i + 2];
    }
}

}  // namespace detail

// Propagate for `duration` in uniform steps of `dt`. duration must be an
// integer multiple of dt. Norm drift beyond 1e-6 aborts: an oracle that has
// lost unitarity must never be compared against.
inline GridState propagate_grid(GridState s, double duration, double dt, GridPotential pot,
                                double mass, const UnitSystem& us = make_unit_system()) {
    validate_grid_state(s);
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (duration < 0.0) throw std::invalid_argument("duration must be non-negative");
    if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    const long long steps = std::llround(duration / dt);
    if (std::abs(static_cast<double>(steps) * dt - duration) > 1e-9 * std::max(duration, dt))
        throw std::invalid_argument("duration must be an integer number of dt steps");
    if (steps == 0) return s;

    const double norm0 = grid_norm(s);
    if (pot == GridPotential::free_space)
        detail::propagate_free(s, steps, dt, mass, us);
    else
        detail::propagate_box(s, steps, dt, mass, us);
    s.time += duration;

    const double drift = std::abs(grid_norm(s) - norm0);
    if (drift > 1e-6)
        throw std::runtime_error("propagator lost unitarity: norm drift " + std::to_string(drift));
    return s;
}

// ---------------------------------------------------------------------------
// Bohm quantum force from a sampled density.
//
// F = (hbar^2 / 2m) d/dx [ (1/R) d^2R/dx^2 ],  R = sqrt(density).
//
// Interior samples use fourth-order central stencils for both derivatives;
// near the edges the stencils degrade to one-sided second order, and
// [reliable_begin, reliable_end) marks where the full fourth-order result is
// available.

struct QuantumForce {
    std::vector<double> values;
    std::size_t reliable_begin = 0;
    std::size_t reliable_end = 0;
};

inline QuantumForce quantum_force(const std::vector<double>& density, double dx, double mass,
                                  const UnitSystem& us = make_unit_system()) {
    const std::size_t n = density.size();
    if (n < 9) throw std::invalid_argument("quantum_force needs at least 9 samples");
    if (!(dx > 0.0)) throw std::invalid_argument("dx must be positive");
    if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(density[i] > 0.0))
            throw std::invalid_argument("density must be strictly positive at sample " +
                                        std::to_string(i));
        r[i] = std::sqrt(density[i]);
    }

    const double inv_dx2 = 1.0 / (dx * dx);
    std::vector<double> w(n);  // (1/R) R''
    for (std::size_t i = 0; i < n; ++i) {
        double d2;
        if (i == 0) {
            d2 = (2.0 * r[0] - 5.0 * r[1] + 4.0 * r[2] - r[3]) * inv_dx2;
        } else if (i == 1 || i + 2 == n) {
            d2 = (r[i - 1] - 2.0 * r[i] + r[i + 1]) * inv_dx2;
        } else if (i + 1 == n) {
            d2 = (2.0 * r[n - 1] - 5.0 * r[n - 2] + 4.0 * r[n - 3] - r[n - 4]) * inv_dx2;
        } else {
            d2 = (-r[i - 2] + 16.0 * r[i - 1] - 30.0 * r[i] + 16.0 * r[i + 1] - r[i + 2]) *
                 inv_dx2 / 12.0;
        }
        w[i] = d2 / r[i];
    }

    QuantumForce out;
    out.values.resize(n);
    const double pref = us.hbar * us.hbar / (2.0 * mass);
    for (std::size_t i = 0; i < n; ++i) {
        double d1;
        if (i == 0) {
            d1 = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
        } else if (i == 1 || i + 2 == n) {
            d1 = (w[i + 1] - w[i - 1]) / (2.0 * dx);
        } else if (i + 1 == n) {
            d1 = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * dx);
        } else {
            d1 = (w[i - 2] - 8.0 * w[i - 1] + 8.0 * w[i + 1] - w[i + 2]) / (12.0 * dx);
        }
        out.values[i] = pref * d1;
    }
    out.reliable_begin = 4;
    out.reliable_end = n - 4;
    return out;
}

}  // namespace mqd
