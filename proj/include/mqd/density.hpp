#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mqd/ensemble.hpp"
#include "mqd/quantum.hpp"

// Probability densities as initialization targets. A DensityProfile carries a
// normalized density on [lo, hi] together with its CDF; chains are placed at
// the CDF quantiles x_k = CDF^-1((k - 1/2) / N), the deterministic
// low-discrepancy discretization in which local spacing carries the density
// (spacing ~ 1 / (N rho)).

namespace mqd {

struct DensityProfile {
    double lo = 0.0;
    double hi = 1.0;
    std::function<double(double)> density;  // 1/nm, normalized over [lo, hi]
    std::function<double(double)> cdf;      // cdf(lo) = 0, cdf(hi) = 1, non-decreasing
};

// Wrap closed forms; the CDF is affinely renormalized so truncating an
// infinite-support density to [lo, hi] still yields cdf(lo) = 0, cdf(hi) = 1.
inline DensityProfile make_profile(double lo, double hi, std::function<double(double)> density,
                                   std::function<double(double)> cdf) {
    if (!(hi > lo)) throw std::invalid_argument("profile needs hi > lo");
    const double c0 = cdf(lo);
    const double c1 = cdf(hi);
    if (!(c1 > c0)) throw std::invalid_argument("cdf must increase over the domain");
    const double scale = 1.0 / (c1 - c0);
    DensityProfile p;
    p.lo = lo;
    p.hi = hi;
    p.density = [density = std::move(density), scale](double x) { return density(x) * scale; };
    p.cdf = [cdf = std::move(cdf), c0, scale](double x) { return (cdf(x) - c0) * scale; };
    return p;
}

// Numeric profile for densities with no closed-form integral: a cumulative
// Simpson table over `cells` uniform cells, refined inside the target cell by
// a short Simpson rule, so the CDF is smooth and deterministic.
inline DensityProfile make_profile_numeric(double lo, double hi,
                                           std::function<double(double)> density,
                                           std::size_t cells = 4096) {
    if (!(hi > lo)) throw std::invalid_argument("profile needs hi > lo");
    if (cells < 16) throw std::invalid_argument("too few integration cells");
    const double h = (hi - lo) / static_cast<double>(cells);
    auto cumulative = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo + h * static_cast<double>(i);
        const double fa = density(a), fm = density(a + 0.5 * h), fb = density(a + h);
        if (!(fa >= 0.0) || !(fm >= 0.0) || !(fb >= 0.0))
            throw std::invalid_argument("density must be non-negative");
        (*cumulative)[i + 1] = (*cumulative)[i] + h / 6.0 * (fa + 4.0 * fm + fb);
    }
    const double total = cumulative->back();
    if (!(total > 0.0)) throw std::invalid_argument("density integrates to zero");

    auto raw_cdf = [lo, hi, h, cells, density, cumulative](double x) {
        x = std::clamp(x, lo, hi);
        const double fi = std::floor((x - lo) / h);
        const std::size_t i =
            static_cast<std::size_t>(std::max(0.0, std::min(fi, static_cast<double>(cells - 1))));
        const double a = lo + h * static_cast<double>(i);
        const double d = x - a;  // in [0, h]
        const double fa = density(a), fm = density(a + 0.5 * d), fb = density(x);
        return (*cumulative)[i] + d / 6.0 * (fa + 4.0 * fm + fb);
    };
    DensityProfile p;
    p.lo = lo;
    p.hi = hi;
    p.density = [density, total](double x) { return density(x) / total; };
    p.cdf = [raw_cdf, total](double x) { return raw_cdf(x) / total; };
    return p;
}

inline DensityProfile uniform_profile(double lo, double hi) {
    const double w = hi - lo;
    return make_profile(
        lo, hi, [w](double) { return 1.0 / w; }, [lo, w](double x) { return (x - lo) / w; });
}

// Gaussian density truncated at +-trunc_sigmas and renormalized. The erf CDF
// keeps quantile placement at closed-form accuracy.
inline DensityProfile gaussian_profile(double sigma, double center = 0.0,
                                       double trunc_sigmas = 4.0) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(trunc_sigmas > 0.0)) throw std::invalid_argument("truncation must be positive");
    const double lo = center - trunc_sigmas * sigma;
    const double hi = center + trunc_sigmas * sigma;
    const double inv = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    return make_profile(
        lo, hi,
        [=](double x) {
            const double z = (x - center) / sigma;
            return inv * std::exp(-0.5 * z * z);
        },
        [=](double x) { return 0.5 * std::erfc(-(x - center) / (sigma * std::numbers::sqrt2)); });
}

inline DensityProfile box_profile(const BoxEigenstate& s) {
    return make_profile(
        0.0, s.L, [s](double x) { return box_density(s, x); },
        [s](double x) { return box_density_cdf(s, x); });
}

// Two-packet transverse density at t = 0. |psi_+ + psi_-|^2 is a sum of three
// Gaussians (the two slits plus the exponentially small overlap term at the
// center), so the CDF is a weighted sum of error functions.
inline DensityProfile slit_profile(const SlitGeometry& g,
                                   SigmaMode mode = SigmaMode::density_std) {
    const double s = effective_sigma(g.packet_width, mode);
    const double X = g.half_separation;
    const double overlap = std::exp(-X * X / (2.0 * s * s));
    const double norm = 2.0 * (1.0 + overlap);
    const double span = X + 10.0 * s;

    auto phi = [](double z) { return 0.5 * (1.0 + std::erf(z / std::numbers::sqrt2)); };
    auto density = [=](double x) {
        const double gp = std::exp(-(x - X) * (x - X) / (2.0 * s * s));
        const double gm = std::exp(-(x + X) * (x + X) / (2.0 * s * s));
        const double gc = std::exp(-x * x / (2.0 * s * s));
        return (gp + gm + 2.0 * overlap * gc) /
               (std::sqrt(2.0 * std::numbers::pi) * s * norm);
    };
    auto cdf = [=](double x) {
        return (phi((x - X) / s) + phi((x + X) / s) + 2.0 * overlap * phi(x / s)) / norm;
    };
    return make_profile(-span, span, density, cdf);
}

// CDF^-1: bisection to 1e-9 nm, then Newton polish. The polish matters:
// chain forces amplify placement noise by ~hbar^2/(4 m spacing^4), so the
// raw bisection residue would dominate fine-chain force comparisons, while a
// few Newton steps push it to machine precision.
inline double quantile(const DensityProfile& p, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    double lo = p.lo, hi = p.hi;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (p.cdf(mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double rho = p.density(x);
        if (!(rho > 0.0) || !std::isfinite(rho)) break;
        const double next = std::clamp(x - (p.cdf(x) - q) / rho, p.lo, p.hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

// Deterministic chain placement at the (k - 1/2)/N quantiles, velocities zero.
inline Ensemble quantile_init(const DensityProfile& p, std::size_t N) {
    if (N < 3) throw std::invalid_argument("need at least 3 particles");
    Ensemble e;
    e.positions.resize(N);
    e.velocities.assign(N, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(N);
        e.positions[k] = quantile(p, q);
    }
    for (std::size_t k = 1; k < N; ++k) {
        if (!(e.positions[k - 1] < e.positions[k]))
            throw std::invalid_argument(
                "quantile placement collapsed at index " + std::to_string(k) +
                ": density support gap breaks CDF inversion");
    }
    return e;
}

}  // namespace mqd
