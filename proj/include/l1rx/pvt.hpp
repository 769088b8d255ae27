#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "l1rx/constants.hpp"
#include "l1rx/navdata.hpp"

namespace l1rx {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 sub(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 add(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

// One channel's contribution to a navigation solution.
struct Measurement {
    int prn = 0;
    double transmit_time_s = 0;     // satellite-clock time of transmission
    std::int64_t sample_offset = 0; // receiver timestamp of the epoch
    double cn0_dbhz = 0;
};

struct PvtSolution {
    Vec3 ecef_m{};
    double lat_deg = 0;
    double lon_deg = 0;
    double height_m = 0;
    double clock_bias_s = 0;
    double gdop = 0;
    double rms_residual_m = 0;
    bool valid = false;
    int n_sats_used = 0;
    double solve_time_s = 0; // receiver time of the measurement epoch
    std::string diagnostic;
};

struct SatState {
    Vec3 ecef_m{};
    double clock_correction_s = 0;
};

namespace detail {

// Kepler's equation by Newton iteration; |E - e sinE - M| < 1e-12 at
// return or the measurement is rejected.
inline double solve_kepler(double mk, double ecc) {
    double ek = mk;
    for (int i = 0; i < 30; ++i) {
        const double f = ek - ecc * std::sin(ek) - mk;
        const double fp = 1.0 - ecc * std::cos(ek);
        const double step = f / fp;
        ek -= step;
        if (std::abs(step) < 1e-14)
            return ek;
    }
    if (std::abs(ek - ecc * std::sin(ek) - mk) > 1e-12)
        throw std::runtime_error("Kepler iteration did not converge");
    return ek;
}

} // namespace detail

// Satellite antenna position and clock correction at transmit time from
// the broadcast ephemeris (Keplerian elements, harmonic corrections,
// relativistic term, group delay).
inline SatState sat_position(const Ephemeris& eph, double t_transmit_s) {
    using namespace constants;
    const double a = eph.sqrt_a * eph.sqrt_a;
    if (a <= 0)
        throw std::invalid_argument("ephemeris sqrt_a must be positive");

    auto wrap_week = [](double dt) {
        if (dt > 302400.0)
            dt -= 604800.0;
        else if (dt < -302400.0)
            dt += 604800.0;
        return dt;
    };

    const double tk = wrap_week(t_transmit_s - eph.toe_s);
    if (std::abs(tk) >= 7200.0)
        throw std::domain_error("ephemeris stale: |t - toe| >= 7200 s");

    const double n0 = std::sqrt(earth_mu_m3s2 / (a * a * a));
    const double n = n0 + eph.delta_n_rad_s;
    const double mk = eph.m0_rad + n * tk;
    const double ek = detail::solve_kepler(mk, eph.ecc);

    const double sin_ek = std::sin(ek);
    const double cos_ek = std::cos(ek);
    const double nu = std::atan2(std::sqrt(1.0 - eph.ecc * eph.ecc) * sin_ek,
                                 cos_ek - eph.ecc);
    const double phi = nu + eph.omega_rad;
    const double sin_2phi = std::sin(2.0 * phi);
    const double cos_2phi = std::cos(2.0 * phi);

    const double du = eph.cus_rad * sin_2phi + eph.cuc_rad * cos_2phi;
    const double dr = eph.crs_m * sin_2phi + eph.crc_m * cos_2phi;
    const double di = eph.cis_rad * sin_2phi + eph.cic_rad * cos_2phi;

    const double u = phi + du;
    const double r = a * (1.0 - eph.ecc * cos_ek) + dr;
    const double i = eph.i0_rad + di + eph.idot_rad_s * tk;

    const double x_orb = r * std::cos(u);
    const double y_orb = r * std::sin(u);

    const double omega =
        eph.omega0_rad +
        (eph.omegadot_rad_s - earth_rotation_rate_rads) * tk -
        earth_rotation_rate_rads * eph.toe_s;
    const double sin_om = std::sin(omega);
    const double cos_om = std::cos(omega);
    const double sin_i = std::sin(i);
    const double cos_i = std::cos(i);

    SatState out;
    out.ecef_m = {x_orb * cos_om - y_orb * cos_i * sin_om,
                  x_orb * sin_om + y_orb * cos_i * cos_om,
                  y_orb * sin_i};

    const double dt_clock = wrap_week(t_transmit_s - eph.toc_s);
    out.clock_correction_s =
        eph.af0_s + eph.af1_s_s * dt_clock +
        eph.af2_s_s2 * dt_clock * dt_clock +
        rel_clock_f * eph.ecc * eph.sqrt_a * sin_ek - eph.tgd_s;
    return out;
}

// rho_i = c * (t_reception - t_transmit_i); on the first fix the reception
// time is bootstrapped as earliest transmit time + 68.802 ms nominal
// travel time, afterwards the caller passes the clock-corrected epoch.
inline std::vector<std::pair<int, double>> compute_pseudoranges(
    const std::vector<Measurement>& measurements,
    double common_reception_time_s) {
    std::vector<std::pair<int, double>> out;
    if (measurements.empty())
        return out;
    const std::int64_t epoch = measurements.front().sample_offset;
    for (const auto& m : measurements)
        if (m.sample_offset != epoch)
            throw std::invalid_argument(
                "measurements span different receiver epochs");
    out.reserve(measurements.size());
    for (const auto& m : measurements)
        out.emplace_back(m.prn,
                         constants::speed_of_light_mps *
                             (common_reception_time_s - m.transmit_time_s));
    return out;
}

inline double bootstrap_reception_time(
    const std::vector<Measurement>& measurements) {
    double earliest = std::numeric_limits<double>::infinity();
    for (const auto& m : measurements)
        earliest = std::min(earliest, m.transmit_time_s);
    return earliest + 0.068802;
}

namespace detail {

// Gauss-Jordan inverse of a 4x4; returns false on (near-)singularity.
inline bool invert4(std::array<std::array<double, 4>, 4>& m) {
    std::array<std::array<double, 4>, 4> inv{};
    for (int i = 0; i < 4; ++i)
        inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col]))
                pivot = r;
        if (std::abs(m[pivot][col]) < 1e-12)
            return false;
        std::swap(m[col], m[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = m[col][col];
        for (int c = 0; c < 4; ++c) {
            m[col][c] /= d;
            inv[col][c] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col)
                continue;
            const double f = m[r][col];
            for (int c = 0; c < 4; ++c) {
                m[r][c] -= f * m[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    m = inv;
    return true;
}

} // namespace detail

// GDOP of a geometry matrix whose rows are [-ux -uy -uz 1].
inline double gdop_of(const std::vector<std::array<double, 4>>& h) {
    if (h.size() < 4)
        throw std::invalid_argument("geometry needs >= 4 rows");
    std::array<std::array<double, 4>, 4> hth{};
    for (const auto& row : h) {
        const double un =
            std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
        if (std::abs(un - 1.0) > 1e-9)
            throw std::invalid_argument("geometry rows must be unit + 1");
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                hth[i][j] += row[i] * row[j];
    }
    if (!detail::invert4(hth))
        throw std::runtime_error("singular geometry");
    return std::sqrt(hth[0][0] + hth[1][1] + hth[2][2] + hth[3][3]);
}

// WGS-84 ECEF -> geodetic, Bowring-style fixed-point iteration.
inline std::array<double, 3> ecef_to_geodetic(const Vec3& ecef) {
    using namespace constants;
    const double a = wgs84_a_m;
    const double e2 = wgs84_f * (2.0 - wgs84_f);
    const double x = ecef[0], y = ecef[1], z = ecef[2];
    const double lon = std::atan2(y, x);
    const double p = std::sqrt(x * x + y * y);
    if (p < 1e-9) { // polar axis
        const double b = a * (1.0 - wgs84_f);
        return {z >= 0 ? 90.0 : -90.0, lon * 180.0 / pi, std::abs(z) - b};
    }
    double lat = std::atan2(z, p * (1.0 - e2));
    double h = 0;
    for (int i = 0; i < 100; ++i) {
        const double sin_lat = std::sin(lat);
        const double nn = a / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
        h = p / std::cos(lat) - nn;
        const double next =
            std::atan2(z, p * (1.0 - e2 * nn / (nn + h)));
        if (std::abs(next - lat) < 1e-12) {
            lat = next;
            break;
        }
        lat = next;
    }
    return {lat * 180.0 / pi, lon * 180.0 / pi, h};
}

inline Vec3 geodetic_to_ecef(double lat_deg, double lon_deg, double h) {
    using namespace constants;
    const double e2 = wgs84_f * (2.0 - wgs84_f);
    const double lat = lat_deg * pi / 180.0, lon = lon_deg * pi / 180.0;
    const double sin_lat = std::sin(lat);
    const double nn = wgs84_a_m / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
    return {(nn + h) * std::cos(lat) * std::cos(lon),
            (nn + h) * std::cos(lat) * std::sin(lon),
            (nn * (1.0 - e2) + h) * sin_lat};
}

// Iterated linearized least squares for position and clock bias, with the
// Sagnac correction applied to satellite positions per signal flight time.
inline PvtSolution lms_solve(
    const std::vector<std::pair<int, double>>& pseudoranges,
    const std::vector<SatState>& sats, const Vec3& initial_pos,
    double initial_bias_m = 0.0) {
    PvtSolution sol;
    if (pseudoranges.size() != sats.size())
        throw std::invalid_argument("pseudorange/satellite count mismatch");
    if (pseudoranges.size() < 4) {
        sol.diagnostic = "needs >= 4 satellites";
        return sol;
    }
    using namespace constants;
    const std::size_t n = pseudoranges.size();

    Vec3 pos = initial_pos;
    double bias_m = initial_bias_m;
    std::vector<std::array<double, 4>> h(n);
    std::vector<double> resid(n);

    bool converged = false;
    for (int iter = 0; iter < 10 && !converged; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            // apply satellite clock correction to the modeled range
            const double pr = pseudoranges[i].second +
                              sats[i].clock_correction_s *
                                  speed_of_light_mps;
            // Sagnac: rotate satellite into the reception-time frame
            const double tau =
                std::max(pr - bias_m, 1e-3) / speed_of_light_mps;
            const double ang = earth_rotation_rate_rads * tau;
            const Vec3& s = sats[i].ecef_m;
            const Vec3 s_rot = {s[0] * std::cos(ang) + s[1] * std::sin(ang),
                                -s[0] * std::sin(ang) + s[1] * std::cos(ang),
                                s[2]};
            const Vec3 d = sub(s_rot, pos);
            const double range = norm(d);
            h[i] = {-d[0] / range, -d[1] / range, -d[2] / range, 1.0};
            resid[i] = pr - (range + bias_m);
        }
        // normal equations H^T H dx = H^T r
        std::array<std::array<double, 4>, 4> hth{};
        std::array<double, 4> htr{};
        for (std::size_t i = 0; i < n; ++i)
            for (int r = 0; r < 4; ++r) {
                htr[r] += h[i][r] * resid[i];
                for (int c = 0; c < 4; ++c)
                    hth[r][c] += h[i][r] * h[i][c];
            }
        if (!detail::invert4(hth)) {
            sol.diagnostic = "singular geometry";
            return sol;
        }
        std::array<double, 4> dx{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                dx[r] += hth[r][c] * htr[c];
        pos = {pos[0] + dx[0], pos[1] + dx[1], pos[2] + dx[2]};
        bias_m += dx[3];
        if (std::sqrt(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]) < 1e-4)
            converged = true;
    }
    if (!converged) {
        sol.diagnostic = "did not converge";
        return sol;
    }

    double rss = 0;
    for (std::size_t i = 0; i < n; ++i)
        rss += resid[i] * resid[i];
    sol.ecef_m = pos;
    sol.clock_bias_s = bias_m / speed_of_light_mps;
    sol.gdop = gdop_of(h);
    sol.rms_residual_m = std::sqrt(rss / static_cast<double>(n));
    sol.n_sats_used = static_cast<int>(n);
    const auto geo = ecef_to_geodetic(pos);
    sol.lat_deg = geo[0];
    sol.lon_deg = geo[1];
    sol.height_m = geo[2];
    sol.valid = true;
    return sol;
}

} // namespace l1rx
