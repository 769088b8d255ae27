#pragma once

#include <array>
#include <cmath>

#include "l1rx/constants.hpp"
#include "l1rx/navdata.hpp"

namespace l1rx::testsupport {

// Independent orbital evaluator: bisection Kepler solver and explicit
// rotation matrices instead of the receiver's Newton iteration and inline
// trigonometry. Shares only the interface-standard formulas.
inline std::array<double, 3> oracle_sat_position(const Ephemeris& e,
                                                 double t) {
    using namespace constants;
    const double a = e.sqrt_a * e.sqrt_a;
    double tk = t - e.toe_s;
    if (tk > 302400) tk -= 604800;
    if (tk < -302400) tk += 604800;

    const double n = std::sqrt(earth_mu_m3s2 / (a * a * a)) + e.delta_n_rad_s;
    double m = std::fmod(e.m0_rad + n * tk, 2 * pi);
    if (m < 0)
        m += 2 * pi;

    // bisection on f(E) = E - ecc sin E - m over [m - 1, m + 1]
    double lo = m - 1.0, hi = m + 1.0;
    auto f = [&](double x) { return x - e.ecc * std::sin(x) - m; };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0)
            hi = mid;
        else
            lo = mid;
    }
    const double ecc_anom = 0.5 * (lo + hi);

    const double nu =
        2.0 * std::atan2(std::sqrt(1 + e.ecc) * std::sin(ecc_anom / 2),
                         std::sqrt(1 - e.ecc) * std::cos(ecc_anom / 2));
    const double phi = nu + e.omega_rad;
    const double du = e.cus_rad * std::sin(2 * phi) +
                      e.cuc_rad * std::cos(2 * phi);
    const double dr = e.crs_m * std::sin(2 * phi) +
                      e.crc_m * std::cos(2 * phi);
    const double di = e.cis_rad * std::sin(2 * phi) +
                      e.cic_rad * std::cos(2 * phi);
    const double u = phi + du;
    const double r = a * (1 - e.ecc * std::cos(ecc_anom)) + dr;
    const double incl = e.i0_rad + di + e.idot_rad_s * tk;
    const double node = e.omega0_rad +
                        (e.omegadot_rad_s - earth_rotation_rate_rads) * tk -
                        earth_rotation_rate_rads * e.toe_s;

    // r * Rz(-node) Rx(-incl) Rz(-u) applied to x-axis, via matrices
    auto rz = [](double ang) {
        return std::array<std::array<double, 3>, 3>{{
            {std::cos(ang), -std::sin(ang), 0},
            {std::sin(ang), std::cos(ang), 0},
            {0, 0, 1},
        }};
    };
    auto rx = [](double ang) {
        return std::array<std::array<double, 3>, 3>{{
            {1, 0, 0},
            {0, std::cos(ang), -std::sin(ang)},
            {0, std::sin(ang), std::cos(ang)},
        }};
    };
    auto matvec = [](const std::array<std::array<double, 3>, 3>& m,
                     const std::array<double, 3>& v) {
        std::array<double, 3> out{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out[i] += m[i][j] * v[j];
        return out;
    };
    std::array<double, 3> p = {r, 0, 0};
    p = matvec(rz(u), p);
    p = matvec(rx(incl), p);
    p = matvec(rz(node), p);
    return p;
}

} // namespace l1rx::testsupport
