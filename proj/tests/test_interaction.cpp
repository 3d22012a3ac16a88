#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "mqd/ensemble.hpp"
#include "mqd/interaction.hpp"
#include "mqd/units.hpp"

using namespace mqd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Ensemble make_chain(std::vector<double> x) {
    Ensemble e;
    e.velocities.assign(x.size(), 0.0);
    e.positions = std::move(x);
    return e;
}

// Ordered random chain with log-uniform spacings in [0.1, 10] nm.
Ensemble random_chain(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> logspacing(std::log(0.1), std::log(10.0));
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

}  // namespace

TEST_CASE("uniform chain has zero energy and zero force") {
    const Ensemble e = make_chain({0.0, 1.0, 2.0, 3.0, 4.0});
    const ForceField f;
    CHECK(potential(e, f) == 0.0);
    for (double fj : force(e, f)) CHECK(fj == 0.0);
}

TEST_CASE("uniform chain centered in a box is also a mirror-mode fixed point") {
    // Spacing a with walls a/2 beyond the end particles: the ghost gaps equal
    // a, so the extended chain is uniform too.
    ForceField f;
    f.mode = BoundaryMode::mirror_image;
    f.geometry = BoxGeometry(5.0);
    const Ensemble e = make_chain({0.5, 1.5, 2.5, 3.5, 4.5});
    CHECK(potential(e, f) == 0.0);
    for (double fj : force(e, f)) CHECK(fj == 0.0);
}

TEST_CASE("three-particle closed form") {
    // Spacings 1 and 2 nm: V = (hbar^2/8m) (1/2 - 1)^2 = hbar^2/(32 m).
    const Ensemble e = make_chain({0.0, 1.0, 3.0});
    const ForceField f;
    const UnitSystem us = make_unit_system();
    const double v = potential(e, f);
    CHECK_THAT(v, WithinRel(us.hbar * us.hbar / 32.0, 1e-14));
    CHECK_THAT(v, WithinRel(418.81704864784304, 1e-12));
}

TEST_CASE("potential properties on random chains") {
    std::mt19937 rng(20260819);
    const ForceField f;
    for (int trial = 0; trial < 50; ++trial) {
        Ensemble e = random_chain(rng, 3 + trial % 30);
        const double v = potential(e, f);
        CHECK(v >= 0.0);

        // Translation invariance.
        Ensemble shifted = e;
        for (double& x : shifted.positions) x += 17.25;
        CHECK_THAT(potential(shifted, f), WithinRel(v, 1e-12));

        // Scaling x -> lambda x sends V -> V / lambda^2.
        const double lambda = 2.0;
        Ensemble scaled = e;
        for (double& x : scaled.positions) x *= lambda;
        CHECK_THAT(potential(scaled, f), WithinRel(v / (lambda * lambda), 1e-12));
    }
}

TEST_CASE("potential vanishes only on equal spacings") {
    const ForceField f;
    CHECK(potential(make_chain({0.0, 2.0, 4.0, 6.0}), f) == 0.0);
    CHECK(potential(make_chain({0.0, 2.0, 4.0, 6.1}), f) > 0.0);
}

TEST_CASE("analytic force matches the finite-difference oracle") {
    std::mt19937 rng(987654321);
    const ForceField f;
    const double h = 1e-6;  // nm
    std::uniform_int_distribution<std::size_t> size_dist(3, 50);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Ensemble e = random_chain(rng, size_dist(rng));
        const std::vector<double> fa = force(e, f);
        const std::vector<double> fd = force_fd_oracle(e, f, h);
        const double scale = std::max(max_abs(fa), 1.0);
        for (std::size_t j = 0; j < e.size(); ++j)
            worst = std::max(worst, std::abs(fa[j] - fd[j]) / scale);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("mirror-image force matches the oracle near walls") {
    std::mt19937 rng(13572468);
    ForceField f;
    f.mode = BoundaryMode::mirror_image;
    f.geometry = BoxGeometry(60.0);
    std::uniform_int_distribution<std::size_t> size_dist(3, 30);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = size_dist(rng);
        // Strictly ordered positions inside (0, 60).
        std::vector<double> x(n);
        std::uniform_real_distribution<double> u(0.3, 1.0);
        double acc = 0.2 + u(rng);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = acc;
            acc += u(rng) * 58.0 / static_cast<double>(n);
        }
        for (double& xi : x) xi *= 59.5 / acc;  // keep the chain inside the box
        const Ensemble e = make_chain(std::move(x));
        const std::vector<double> fa = force(e, f);
        const std::vector<double> fd = force_fd_oracle(e, f, 1e-6);
        const double scale = std::max(max_abs(fa), 1.0);
        for (std::size_t j = 0; j < e.size(); ++j)
            worst = std::max(worst, std::abs(fa[j] - fd[j]) / scale);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("interior-only forces sum to zero") {
    std::mt19937 rng(24681357);
    const ForceField f;
    for (int trial = 0; trial < 100; ++trial) {
        const Ensemble e = random_chain(rng, 3 + trial % 40);
        const std::vector<double> fo = force(e, f);
        double sum = 0.0;
        for (double fj : fo) sum += fj;
        CHECK_THAT(sum, WithinAbs(0.0, 1e-10 * std::max(max_abs(fo), 1.0)));
    }
}

TEST_CASE("mirror-mode force is antisymmetric on a symmetric chain") {
    ForceField f;
    f.mode = BoundaryMode::mirror_image;
    f.geometry = BoxGeometry(10.0);
    const Ensemble e = make_chain({2.0, 4.5, 5.5, 8.0});
    const std::vector<double> fo = force(e, f);
    const std::size_t n = e.size();
    for (std::size_t j = 0; j < n; ++j)
        CHECK_THAT(fo[j], WithinAbs(-fo[n - 1 - j], 1e-12 * std::max(max_abs(fo), 1.0)));
}

TEST_CASE("error handling") {
    const ForceField interior;
    ForceField mirror;
    mirror.mode = BoundaryMode::mirror_image;

    CHECK_THROWS_AS(potential(make_chain({0.0, 2.0, 1.0}), interior), std::invalid_argument);
    CHECK_THROWS_AS(potential(make_chain({0.0, 1.0}), interior), std::invalid_argument);

    // Mirror mode needs a geometry, and all positions inside the open box.
    CHECK_THROWS_AS(potential(make_chain({1.0, 2.0, 3.0}), mirror), std::invalid_argument);
    mirror.geometry = BoxGeometry(10.0);
    CHECK_NOTHROW(potential(make_chain({1.0, 2.0, 3.0}), mirror));
    CHECK_THROWS_AS(potential(make_chain({-1.0, 2.0, 3.0}), mirror), std::invalid_argument);
    CHECK_THROWS_AS(potential(make_chain({1.0, 2.0, 10.0}), mirror), std::invalid_argument);

    // FD oracle refuses steps big enough to cross a neighbor.
    const Ensemble tight = make_chain({0.0, 1e-7, 1.0});
    CHECK_THROWS_AS(force_fd_oracle(tight, interior, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(force_fd_oracle(tight, interior, 0.0), std::invalid_argument);
}
