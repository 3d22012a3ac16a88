#pragma once

#include <cstddef>
#include <stdexcept>

#include "mqd/density.hpp"
#include "mqd/ensemble.hpp"
#include "mqd/integrator.hpp"
#include "mqd/interaction.hpp"
#include "mqd/quantum.hpp"

// Prepared experiments: an initial chain, the force field acting on it, and
// integrator settings tuned for the configuration. Builders are pure
// functions of their arguments, so runs are reproducible bit-for-bit.

namespace mqd {

struct Scenario {
    Ensemble ensemble;
    ForceField field;
    IntegratorConfig integrator;
    double duration = 0.0;  // suggested run length, ps (0 = caller's choice)
};

// Eigenstate-of-the-box preparation: chain at the quantiles of
// rho_n = (2/L) sin^2(n pi x / L), at rest, with reflecting walls. The
// mirror-image boundary couples edge particles to their wall reflections,
// which is the discrete analogue of the density pinned to zero at the walls.
inline Scenario build_box_scenario(int n, double L, std::size_t N,
                                   BoundaryMode boundary = BoundaryMode::mirror_image,
                                   IntegratorConfig base = {}) {
    if (N < 3) throw std::invalid_argument("box scenario needs at least 3 particles");
    const BoxEigenstate state{n, L};  // validates n >= 1, L > 0
    Scenario s;
    s.ensemble = quantile_init(box_profile(state), N);
    s.field.mode = boundary;
    s.field.geometry = BoxGeometry(L);
    s.field.units = make_unit_system();
    s.integrator = base;
    s.integrator.wall_mode = WallMode::reflect;
    return s;
}

// Double-slit preparation: chain at the quantiles of the symmetric two-packet
// density, at rest, in free space (no walls, interior-only forces). The
// interference pattern forms as the packets expand through each other.
inline Scenario build_double_slit_scenario(const SlitGeometry& g, std::size_t N,
                                           double duration = 20.0,
                                           SigmaMode sigma_mode = SigmaMode::density_std,
                                           IntegratorConfig base = {}) {
    if (N < 100)
        throw std::invalid_argument(
            "double-slit scenario needs at least 100 particles to resolve fringes");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    Scenario s;
    s.ensemble = quantile_init(slit_profile(g, sigma_mode), N);
    s.field.mode = BoundaryMode::interior_only;
    s.field.geometry.reset();
    s.field.units = make_unit_system();
    s.integrator = base;
    s.integrator.wall_mode = WallMode::none;
    s.duration = duration;
    return s;
}

}  // namespace mqd
