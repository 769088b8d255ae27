#pragma once

#include <cmath>
#include <random>

#include "l1rx/navdata.hpp"

namespace l1rx::testsupport {

// A plausible broadcast ephemeris with every field exercising its signed
// range, for round-trip and orbit tests.
inline Ephemeris make_test_ephemeris(std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    auto urand = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    const double pi = constants::pi;
    Ephemeris e;
    e.prn = 11;
    e.week_number = 212;
    e.sv_accuracy = 1;
    e.sv_health = 0;
    e.iode = 91;
    e.iodc = 91;
    e.tgd_s = urand(-1e-8, 1e-8);
    e.toc_s = 259200.0 + 16.0 * std::floor(urand(0, 100));
    e.af2_s_s2 = 0.0;
    e.af1_s_s = urand(-1e-11, 1e-11);
    e.af0_s = urand(-1e-4, 1e-4);
    e.crs_m = urand(-120, 120);
    e.delta_n_rad_s = urand(-4e-9, 4e-9);
    e.m0_rad = urand(-pi, pi);
    e.cuc_rad = urand(-8e-6, 8e-6);
    e.ecc = urand(0.001, 0.02);
    e.cus_rad = urand(-8e-6, 8e-6);
    e.sqrt_a = 5153.7 + urand(-4, 4);
    e.toe_s = e.toc_s;
    e.cic_rad = urand(-3e-7, 3e-7);
    e.omega0_rad = urand(-pi, pi);
    e.cis_rad = urand(-3e-7, 3e-7);
    e.i0_rad = urand(0.93, 0.99);
    e.crc_m = urand(-250, 250);
    e.omega_rad = urand(-pi, pi);
    e.omegadot_rad_s = urand(-9e-9, -7e-9);
    e.idot_rad_s = urand(-4e-10, 4e-10);
    return e;
}

inline double quantize(double v, double scale) {
    return static_cast<double>(std::llround(v / scale)) * scale;
}

// asserts |decoded - original| within half of the field's scale factor
inline bool within_quantum(double decoded, double original, double scale) {
    return std::abs(decoded - original) <= 0.5000001 * scale;
}

} // namespace l1rx::testsupport
