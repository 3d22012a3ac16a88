#pragma once

// Internal unit system: lengths in nanometers, times in picoseconds,
// masses in electron masses. Typical box quantities are then O(1)-O(1e4),
// which keeps the 1/dx^2 interaction terms well inside double range.

namespace mqd {

struct UnitSystem {
    // hbar / m_e expressed in nm^2/ps.
    double hbar_over_m;
    // hbar in internal units (m_e * nm^2 / ps). Numerically equal to
    // hbar_over_m because the mass unit is one electron mass.
    double hbar;

    // SI anchors for conversions.
    double mass_unit_kg;
    double length_unit_m;
    double time_unit_s;

    // One internal energy unit (m_e * nm^2 / ps^2) in joules.
    double energy_unit_joule() const {
        const double v = length_unit_m / time_unit_s;
        return mass_unit_kg * v * v;
    }
    double energy_to_joule(double e) const { return e * energy_unit_joule(); }
    double energy_from_joule(double j) const { return j / energy_unit_joule(); }
    double energy_to_ev(double e) const { return energy_to_joule(e) / kElementaryChargeC; }

    static constexpr double kElementaryChargeC = 1.602176634e-19;
};

// CODATA 2018. The only place these literals appear in the library.
inline UnitSystem make_unit_system() {
    constexpr double hbar_si = 1.054571817e-34;    // J s
    constexpr double electron_mass_kg = 9.1093837015e-31;
    constexpr double nm = 1e-9;
    constexpr double ps = 1e-12;
    UnitSystem us;
    us.mass_unit_kg = electron_mass_kg;
    us.length_unit_m = nm;
    us.time_unit_s = ps;
    // m^2/s -> nm^2/ps is a factor 1e6.
    us.hbar_over_m = hbar_si / electron_mass_kg * (ps / (nm * nm));
    us.hbar = us.hbar_over_m;
    return us;
}

}  // namespace mqd
