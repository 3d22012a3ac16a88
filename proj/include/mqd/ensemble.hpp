#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqd {

// Ordered chain of particles on the line. Positions in nm, velocities in
// nm/ps, mass in electron masses. The strict ordering x_{k-1} < x_k is an
// invariant of the whole simulation: a violated ordering is a physical
// error (particle crossing), never something to re-sort away.
struct Ensemble {
    std::vector<double> positions;
    std::vector<double> velocities;
    double mass = 1.0;
    double time = 0.0;

    std::size_t size() const { return positions.size(); }
};

struct ValidationResult {
    bool ok = true;
    std::size_t index = 0;   // first offending index when !ok
    std::string message;
};

// Total function: reports the first invariant violation instead of throwing.
inline ValidationResult validate_ensemble(const Ensemble& e) {
    if (e.positions.size() != e.velocities.size())
        return {false, 0, "positions and velocities differ in length"};
    if (e.positions.size() < 3)
        return {false, 0, "ensemble needs at least 3 particles"};
    if (!(e.mass > 0.0))
        return {false, 0, "mass must be positive"};
    for (std::size_t k = 1; k < e.positions.size(); ++k) {
        if (!(e.positions[k - 1] < e.positions[k]))
            return {false, k, "positions not strictly increasing at index " + std::to_string(k)};
    }
    return {};
}

inline void require_valid(const Ensemble& e) {
    const ValidationResult r = validate_ensemble(e);
    if (!r.ok) throw std::invalid_argument("invalid ensemble: " + r.message);
}

// Infinite well [0, L].
struct BoxGeometry {
    double length = 100.0;  // nm

    explicit BoxGeometry(double L) : length(L) {
        if (!(L > 0.0)) throw std::invalid_argument("box length must be positive");
    }
    bool contains(double x) const { return x > 0.0 && x < length; }
};

// Two-slit transverse geometry: packet centers at +-half_separation.
struct SlitGeometry {
    double half_separation;  // X, nm
    double packet_width;     // sigma, nm

    SlitGeometry(double X, double sigma) : half_separation(X), packet_width(sigma) {
        if (!(X > 0.0)) throw std::invalid_argument("slit half separation must be positive");
        if (!(sigma > 0.0)) throw std::invalid_argument("packet width must be positive");
        if (!(sigma < X)) throw std::invalid_argument("packets must be distinguishable (sigma < X)");
    }
};

}  // namespace mqd
