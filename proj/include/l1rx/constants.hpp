#pragma once

namespace l1rx::constants {

inline constexpr double f_l1_hz = 1.57542e9;
inline constexpr double chip_rate_hz = 1.023e6;
inline constexpr int code_length_chips = 1023;
inline constexpr int nav_bit_rate_bps = 50;
inline constexpr int code_periods_per_bit = 20;
inline constexpr double speed_of_light_mps = 299792458.0;

// WGS-84 / GPS system constants used by orbit and position math
inline constexpr double earth_mu_m3s2 = 3.986005e14;
inline constexpr double earth_rotation_rate_rads = 7.2921151467e-5;
inline constexpr double wgs84_a_m = 6378137.0;
inline constexpr double wgs84_f = 1.0 / 298.257223563;
inline constexpr double pi = 3.14159265358979323846;

// Relativistic clock correction constant F = -2*sqrt(mu)/c^2 (s / m^1/2)
inline constexpr double rel_clock_f = -4.442807633e-10;

static_assert(chip_rate_hz * 1e-3 == code_length_chips, "one code period is 1 ms");

} // namespace l1rx::constants
