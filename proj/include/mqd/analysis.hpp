#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqd/density.hpp"
#include "mqd/integrator.hpp"
#include "mqd/units.hpp"

// Trajectory and ensemble analysis: recurrence periods, period-derived
// energies, distribution distances against reference densities, and fringe
// extraction from interference patterns.

namespace mqd {

enum class PeriodConfidence { ok, weak };

struct PeriodEstimate {
    double period = 0.0;            // ps
    double recurrence_depth = 0.0;  // metric value at the detected minimum
    PeriodConfidence confidence = PeriodConfidence::ok;
};

struct PeriodDetectConfig {
    double threshold = 0.1;        // qualifying minima must dip below this
    double weak_above = 0.02;      // depth above this flags weak confidence
    double exclusion_fraction = 0.05;  // skip this fraction of the span up front
};

struct DistanceResult {
    double ks = 0.0;  // sup |empirical CDF - reference CDF|
    double l1 = 0.0;  // integrated |KDE - reference density| (advisory)
};

struct FringeExtrema {
    std::vector<double> minima;  // nm, ascending
    std::vector<double> maxima;  // nm, ascending
};

namespace detail {

inline void check_snapshot(const Trajectory& t, std::size_t i) {
    if (t.frames() < 2) throw std::invalid_argument("trajectory needs at least 2 snapshots");
    if (i >= t.frames()) throw std::out_of_range("snapshot index out of range");
    if (t.positions[i].size() != t.positions[0].size())
        throw std::invalid_argument("snapshot length mismatch at index " + std::to_string(i));
}

}  // namespace detail

// Distance of snapshot i from the initial configuration: RMS position
// difference, normalized by how far the initial snapshot deviates from a
// uniform chain with its own mean and mean spacing. The normalizer is the
// size of the structure that can recur, so 0 means exact recurrence and
// O(1) means the structure is fully scrambled.
inline double recurrence_metric(const Trajectory& t, std::size_t i) {
    detail::check_snapshot(t, i);
    const std::vector<double>& x0 = t.positions[0];
    const std::vector<double>& xi = t.positions[i];
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("empty snapshot");

    double num = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = xi[k] - x0[k];
        num += d * d;
    }
    num = std::sqrt(num / static_cast<double>(n));

    double mean = 0.0;
    for (double x : x0) mean += x;
    mean /= static_cast<double>(n);
    const double spacing = (n > 1) ? (x0.back() - x0.front()) / static_cast<double>(n - 1) : 0.0;
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double u =
            mean + (static_cast<double>(k) - 0.5 * static_cast<double>(n - 1)) * spacing;
        const double d = x0[k] - u;
        denom += d * d;
    }
    denom = std::sqrt(denom / static_cast<double>(n));

    if (denom == 0.0) {
        // Initial snapshot is exactly uniform: no density structure to recur.
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / denom;
}

// First qualifying local minimum of the recurrence metric, refined by a
// parabola through the three bracketing samples. The initial exclusion
// window suppresses the trivial near-zero values around snapshot 0.
inline PeriodEstimate detect_period(const Trajectory& t, const PeriodDetectConfig& cfg = {}) {
    if (t.frames() < 4) throw std::invalid_argument("trajectory too short for period detection");
    const std::size_t n = t.frames();
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = recurrence_metric(t, i);

    const double t0 = t.times.front();
    const double span = t.times.back() - t0;
    const double t_min = t0 + cfg.exclusion_fraction * span;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (t.times[i] < t_min) continue;
        const bool is_min = m[i] <= m[i - 1] && m[i] <= m[i + 1] &&
                            (m[i] < m[i - 1] || m[i] < m[i + 1]);
        if (!is_min || !(m[i] < cfg.threshold)) continue;

        // Parabolic vertex through (t_{i-1}, m_{i-1}), (t_i, m_i), (t_{i+1}, m_{i+1}).
        const double ta = t.times[i - 1], tb = t.times[i], tc = t.times[i + 1];
        const double fa = m[i - 1], fb = m[i], fc = m[i + 1];
        double tv = tb;
        double fv = fb;
        const double num =
            (tb - ta) * (tb - ta) * (fb - fc) - (tb - tc) * (tb - tc) * (fb - fa);
        const double den = (tb - ta) * (fb - fc) - (tb - tc) * (fb - fa);
        if (den != 0.0) {
            tv = std::clamp(tb - 0.5 * num / den, ta, tc);
            const double la = (tv - tb) * (tv - tc) / ((ta - tb) * (ta - tc));
            const double lb = (tv - ta) * (tv - tc) / ((tb - ta) * (tb - tc));
            const double lc = (tv - ta) * (tv - tb) / ((tc - ta) * (tc - tb));
            fv = std::clamp(fa * la + fb * lb + fc * lc, 0.0, fb);
        }
        PeriodEstimate est;
        est.period = tv - t0;
        est.recurrence_depth = fv;
        est.confidence = fv > cfg.weak_above ? PeriodConfidence::weak : PeriodConfidence::ok;
        if (!(est.period > 0.0)) continue;
        return est;
    }
    throw std::runtime_error("no qualifying minimum found in recurrence metric");
}

// Velocity recurrence at the snapshot nearest `at_time`: RMS deviation of the
// velocity field from its initial values, normalized by the largest such
// deviation over the whole trajectory. Logged alongside position recurrence
// but never gated: position recurrence is the stationarity criterion, and
// half-period mirror recurrences legitimately flip the velocity field.
inline double velocity_recurrence_depth(const Trajectory& t, double at_time) {
    if (t.frames() < 2) throw std::invalid_argument("trajectory needs at least 2 snapshots");
    if (t.velocities.size() != t.frames())
        throw std::invalid_argument("trajectory carries no velocity snapshots");
    const std::vector<double>& v0 = t.velocities[0];
    auto rms_dev = [&](std::size_t i) {
        const std::vector<double>& vi = t.velocities[i];
        if (vi.size() != v0.size())
            throw std::invalid_argument("snapshot length mismatch at index " + std::to_string(i));
        double sum = 0.0;
        for (std::size_t k = 0; k < v0.size(); ++k) {
            const double d = vi[k] - v0[k];
            sum += d * d;
        }
        return std::sqrt(sum / static_cast<double>(v0.size()));
    };
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    double peak = 0.0;
    for (std::size_t i = 0; i < t.frames(); ++i) {
        peak = std::max(peak, rms_dev(i));
        const double gap = std::abs(t.times[i] - at_time);
        if (gap < best) {
            best = gap;
            nearest = i;
        }
    }
    if (peak == 0.0) return 0.0;  // no motion at all
    return rms_dev(nearest) / peak;
}

// E = hbar pi / (2 T): the energy whose quantum phase advances by pi over one
// density recurrence.
inline double energy_from_period(double period,
                                 const UnitSystem& units = make_unit_system()) {
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    return units.hbar * std::numbers::pi / (2.0 * period);
}

inline double energy_from_period(const PeriodEstimate& p,
                                 const UnitSystem& units = make_unit_system()) {
    return energy_from_period(p.period, units);
}

// Gaussian kernel density estimate on an explicit grid. bandwidth <= 0 means
// Silverman's rule 1.06 std N^(-1/5).
inline double silverman_bandwidth(const std::vector<double>& positions) {
    const std::size_t n = positions.size();
    if (n < 2) throw std::invalid_argument("need at least 2 positions for a bandwidth");
    double mean = 0.0;
    for (double x : positions) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : positions) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    return 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
}

inline std::vector<double> kde_density(const std::vector<double>& positions,
                                       const std::vector<double>& grid, double bandwidth = 0.0) {
    if (positions.empty()) throw std::invalid_argument("empty ensemble");
    const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(positions);
    if (!(h > 0.0)) throw std::invalid_argument("degenerate bandwidth");
    const double norm =
        1.0 / (static_cast<double>(positions.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (double x : positions) {
            const double z = (grid[g] - x) / h;
            sum += std::exp(-0.5 * z * z);
        }
        out[g] = sum * norm;
    }
    return out;
}

// KS (sup-norm CDF distance, the primary metric) and an advisory L1 density
// distance from a Silverman-bandwidth KDE on a shared grid over the
// reference domain.
inline DistanceResult distribution_distance(std::vector<double> positions,
                                            const DensityProfile& ref,
                                            std::size_t l1_grid_points = 2001) {
    if (positions.size() < 10) throw std::invalid_argument("need at least 10 particles");
    std::sort(positions.begin(), positions.end());
    const double n = static_cast<double>(positions.size());

    DistanceResult r;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const double f = ref.cdf(std::clamp(positions[k], ref.lo, ref.hi));
        const double lo_gap = f - static_cast<double>(k) / n;
        const double hi_gap = static_cast<double>(k + 1) / n - f;
        r.ks = std::max({r.ks, lo_gap, hi_gap});
    }

    std::vector<double> grid(l1_grid_points);
    const double dx = (ref.hi - ref.lo) / static_cast<double>(l1_grid_points - 1);
    for (std::size_t g = 0; g < l1_grid_points; ++g)
        grid[g] = ref.lo + dx * static_cast<double>(g);
    const std::vector<double> kde = kde_density(positions, grid);
    double l1 = 0.0;
    for (std::size_t g = 0; g < l1_grid_points; ++g) {
        const double w = (g == 0 || g + 1 == l1_grid_points) ? 0.5 : 1.0;  // trapezoid
        l1 += w * std::abs(kde[g] - ref.density(grid[g]));
    }
    r.l1 = l1 * dx;
    return r;
}

// Local extrema of a sampled pattern by derivative sign change, refined by a
// parabola through the three neighboring samples. Extrema whose height
// difference from both neighboring opposite extrema (or pattern ends) stays
// below 1% of the global maximum are discarded as ripple.
inline FringeExtrema find_fringe_extrema(const std::vector<double>& x,
                                         const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("grid/sample length mismatch");
    if (x.size() < 5) throw std::invalid_argument("too few samples for extremum detection");
    const std::size_t n = x.size();

    struct RawExtremum {
        double pos;
        double value;
        bool is_max;
    };
    std::vector<RawExtremum> raw;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = y[i] - y[i - 1];
        const double dr = y[i + 1] - y[i];
        const bool is_max = dl > 0.0 && dr <= 0.0;
        const bool is_min = dl < 0.0 && dr >= 0.0;
        if (!is_max && !is_min) continue;
        // Parabolic refinement around the sample triple.
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double pos = x[i];
        double val = y[i];
        if (std::abs(denom) > 0.0) {
            const double shift = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            const double h = 0.5 * (x[i + 1] - x[i - 1]);
            if (std::abs(shift) <= 1.0) {
                pos = x[i] + shift * h;
                val = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift;
            }
        }
        raw.push_back({pos, val, is_max});
    }

    double global_max = 0.0;
    for (double v : y) global_max = std::max(global_max, std::abs(v));
    const double min_prominence = 0.01 * global_max;

    FringeExtrema out;
    for (std::size_t e = 0; e < raw.size(); ++e) {
        const double left = (e == 0) ? y.front() : raw[e - 1].value;
        const double right = (e + 1 == raw.size()) ? y.back() : raw[e + 1].value;
        const double prominence =
            std::max(std::abs(raw[e].value - left), std::abs(raw[e].value - right));
        if (prominence < min_prominence) continue;
        (raw[e].is_max ? out.maxima : out.minima).push_back(raw[e].pos);
    }
    if (out.minima.size() + out.maxima.size() < 2)
        throw std::runtime_error("fewer than 2 extrema found");
    return out;
}

}  // namespace mqd
