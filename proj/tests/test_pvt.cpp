#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "l1rx/pvt.hpp"
#include "l1rx/simsource.hpp"
#include "support/kepler_oracle.hpp"
#include "support/test_eph.hpp"

using namespace l1rx;
using namespace l1rx::testsupport;

namespace {

const Vec3 kRxEcef = geodetic_to_ecef(29.47, -98.62, 230.0);

// forward model: pseudoranges seen by a receiver at truth position with a
// given clock bias, from satellites at their broadcast positions
struct ForwardModel {
    std::vector<SatState> sats;
    std::vector<std::pair<int, double>> pseudoranges;
};

ForwardModel forward_model(const std::vector<SimSatellite>& svs,
                           double t_reception, const Vec3& truth_pos,
                           double bias_s) {
    using namespace constants;
    ForwardModel fm;
    int prn = 0;
    for (const auto& sv : svs) {
        double tau = 0.07;
        SatState st{};
        for (int it = 0; it < 6; ++it) {
            st = sat_position(*sv.ephemeris, t_reception - tau);
            const double ang = earth_rotation_rate_rads * tau;
            const Vec3 rot = {
                st.ecef_m[0] * std::cos(ang) + st.ecef_m[1] * std::sin(ang),
                -st.ecef_m[0] * std::sin(ang) + st.ecef_m[1] * std::cos(ang),
                st.ecef_m[2]};
            tau = norm(sub(rot, truth_pos)) / speed_of_light_mps;
        }
        fm.sats.push_back(st);
        fm.pseudoranges.emplace_back(
            ++prn, speed_of_light_mps *
                       (tau + bias_s - st.clock_correction_s));
    }
    return fm;
}

} // namespace

TEST_CASE("circular orbit degenerate case: radius equals a, E equals M") {
    Ephemeris e;
    e.sqrt_a = 5153.7;
    e.ecc = 0.0;
    e.m0_rad = 0.7;
    e.i0_rad = 0.96;
    e.omega0_rad = 1.1;
    e.omega_rad = 0.0;
    e.toe_s = 0.0;
    e.toc_s = 0.0;
    const auto st = sat_position(e, 1000.0);
    CHECK(norm(st.ecef_m) == Catch::Approx(5153.7 * 5153.7).epsilon(1e-12));
    // with zero eccentricity the relativistic term vanishes
    CHECK(st.clock_correction_s == 0.0);
}

TEST_CASE("Kepler solver residual below 1e-12") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 5000; ++i) {
        const double m = (static_cast<double>(rng() >> 11) * 0x1.0p-53) *
                             2 * constants::pi -
                         constants::pi;
        const double ecc =
            0.03 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        const double ek = detail::solve_kepler(m, ecc);
        REQUIRE(std::abs(ek - ecc * std::sin(ek) - m) < 1e-12);
    }
}

TEST_CASE("satellite position magnitude stays on the GPS shell") {
    const auto svs = make_geometric_constellation(12, kRxEcef, 259200, 17);
    for (const auto& sv : svs) {
        for (double dt : {-1800.0, -600.0, 0.0, 600.0, 1800.0}) {
            const auto st =
                sat_position(*sv.ephemeris, sv.ephemeris->toe_s + dt);
            const double r = norm(st.ecef_m);
            INFO("prn " << sv.prn << " dt " << dt);
            CHECK(r > 26.4e6);
            CHECK(r < 26.8e6);
        }
    }
}

TEST_CASE("matches the independent bisection/matrix orbital evaluator") {
    for (std::uint64_t seed : {1ull, 5ull, 9ull}) {
        const auto e = make_test_ephemeris(seed);
        for (double dt : {-3600.0, -100.0, 0.0, 500.0, 3599.0}) {
            const auto mine = sat_position(e, e.toe_s + dt);
            const auto oracle = oracle_sat_position(e, e.toe_s + dt);
            for (int i = 0; i < 3; ++i)
                CHECK(std::abs(mine.ecef_m[static_cast<std::size_t>(i)] -
                               oracle[static_cast<std::size_t>(i)]) < 1e-3);
        }
    }
}

TEST_CASE("stale ephemeris and non-positive axis are rejected") {
    auto e = make_test_ephemeris(30);
    CHECK_THROWS_AS(sat_position(e, e.toe_s + 7200.0), std::domain_error);
    e.sqrt_a = 0.0;
    CHECK_THROWS_AS(sat_position(e, e.toe_s), std::invalid_argument);
}

TEST_CASE("pseudorange arithmetic") {
    std::vector<Measurement> ms(2);
    ms[0] = {7, 100.000, 5000, 45.0};
    ms[1] = {9, 100.001, 5000, 45.0};
    const auto pr = compute_pseudoranges(ms, 100.070);
    REQUIRE(pr.size() == 2);
    CHECK(pr[0].second - pr[1].second ==
          Catch::Approx(constants::speed_of_light_mps * 1e-3));

    CHECK(compute_pseudoranges({}, 0.0).empty());

    ms[1].sample_offset = 6000;
    CHECK_THROWS_AS(compute_pseudoranges(ms, 100.070),
                    std::invalid_argument);
}

TEST_CASE("LMS inverts a noiseless forward model from Earth-center start") {
    const auto svs = make_geometric_constellation(8, kRxEcef, 259200, 3);
    const double bias_s = 1.7e-4;
    const double t_rec = 259300.0;
    const auto fm = forward_model(svs, t_rec, kRxEcef, bias_s);

    const auto sol = lms_solve(fm.pseudoranges, fm.sats, {0, 0, 0}, 0.0);
    REQUIRE(sol.valid);
    CHECK(norm(sub(sol.ecef_m, kRxEcef)) < 1e-3);
    CHECK(std::abs(sol.clock_bias_s - bias_s) < 1e-12);
    CHECK(sol.rms_residual_m < 1e-3);
    CHECK(sol.gdop > 0);
    CHECK(sol.n_sats_used == 8);
}

TEST_CASE("three satellites are not enough") {
    const auto svs = make_geometric_constellation(3, kRxEcef, 259200, 4);
    const auto fm = forward_model(svs, 259300.0, kRxEcef, 0.0);
    const auto sol = lms_solve(fm.pseudoranges, fm.sats, {0, 0, 0});
    CHECK(!sol.valid);
    CHECK(sol.diagnostic == "needs >= 4 satellites");
}

TEST_CASE("translation equivariance of the noiseless solution") {
    const auto svs = make_geometric_constellation(7, kRxEcef, 259200, 5);
    const Vec3 shift = {1500.0, -2200.0, 900.0};
    const Vec3 moved = add(kRxEcef, shift);
    const auto fm0 = forward_model(svs, 259300.0, kRxEcef, 5e-5);
    const auto fm1 = forward_model(svs, 259300.0, moved, 5e-5);
    const auto s0 = lms_solve(fm0.pseudoranges, fm0.sats, {0, 0, 0});
    const auto s1 = lms_solve(fm1.pseudoranges, fm1.sats, {0, 0, 0});
    REQUIRE(s0.valid);
    REQUIRE(s1.valid);
    CHECK(norm(sub(sub(s1.ecef_m, s0.ecef_m), shift)) < 1e-3);
}

TEST_CASE("adding a common offset moves only the clock bias") {
    const auto svs = make_geometric_constellation(6, kRxEcef, 259200, 6);
    const auto fm = forward_model(svs, 259300.0, kRxEcef, 0.0);
    auto shifted = fm.pseudoranges;
    const double delta_s = 3.3e-5;
    for (auto& p : shifted)
        p.second += constants::speed_of_light_mps * delta_s;
    const auto s0 = lms_solve(fm.pseudoranges, fm.sats, {0, 0, 0});
    const auto s1 = lms_solve(shifted, fm.sats, {0, 0, 0});
    REQUIRE(s0.valid);
    REQUIRE(s1.valid);
    CHECK(norm(sub(s1.ecef_m, s0.ecef_m)) < 1e-3);
    CHECK(s1.clock_bias_s - s0.clock_bias_s ==
          Catch::Approx(delta_s).margin(1e-12));
}

namespace {

// independent GDOP oracle: explicit cofactor-expansion inverse of H^T H
double gdop_cofactor(const std::vector<std::array<double, 4>>& h) {
    double a[4][4] = {};
    for (const auto& row : h)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                a[i][j] += row[i] * row[j];

    auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
        return a[r0][c0] * (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) -
               a[r0][c1] * (a[r1][c0] * a[r2][c2] - a[r1][c2] * a[r2][c0]) +
               a[r0][c2] * (a[r1][c0] * a[r2][c1] - a[r1][c1] * a[r2][c0]);
    };
    double det = 0;
    const int rows[3] = {1, 2, 3};
    for (int c = 0; c < 4; ++c) {
        int cols[3], k = 0;
        for (int cc = 0; cc < 4; ++cc)
            if (cc != c)
                cols[k++] = cc;
        const double minor =
            det3(rows[0], rows[1], rows[2], cols[0], cols[1], cols[2]);
        det += ((c % 2) ? -1.0 : 1.0) * a[0][c] * minor;
    }
    REQUIRE(std::abs(det) > 1e-9);

    // trace of the inverse: sum of diagonal cofactors / det
    double trace = 0;
    for (int d = 0; d < 4; ++d) {
        int rr[3], cc[3], k = 0;
        for (int i = 0; i < 4; ++i)
            if (i != d)
                rr[k++] = i;
        k = 0;
        for (int i = 0; i < 4; ++i)
            if (i != d)
                cc[k++] = i;
        trace += det3(rr[0], rr[1], rr[2], cc[0], cc[1], cc[2]) / det;
    }
    return std::sqrt(trace);
}

std::vector<std::array<double, 4>> random_geometry(std::mt19937_64& rng,
                                                   int n) {
    std::vector<std::array<double, 4>> h;
    for (int i = 0; i < n; ++i) {
        const double el = 0.1 + 1.4 * (static_cast<double>(rng() >> 11) *
                                       0x1.0p-53);
        const double az = 2 * constants::pi *
                          (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        h.push_back({-std::cos(el) * std::cos(az),
                     -std::cos(el) * std::sin(az), -std::sin(el), 1.0});
    }
    return h;
}

} // namespace

TEST_CASE("GDOP matches the cofactor-inverse oracle") {
    // tetrahedral-ish overhead geometry
    std::vector<std::array<double, 4>> h = {
        {0, 0, -1, 1},
        {-0.9428, 0, 0.3333, 1},
        {0.4714, -0.8165, 0.3333, 1},
        {0.4714, 0.8165, 0.3333, 1},
    };
    for (auto& row : h) {
        const double n =
            std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
        for (int i = 0; i < 3; ++i)
            row[static_cast<std::size_t>(i)] /= n;
    }
    CHECK(gdop_of(h) == Catch::Approx(gdop_cofactor(h)).margin(1e-9));

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_geometry(rng, 5 + static_cast<int>(rng() % 5));
        CHECK(gdop_of(g) == Catch::Approx(gdop_cofactor(g)).margin(1e-9));
    }
}

TEST_CASE("GDOP rejects degenerate and malformed geometry") {
    std::vector<std::array<double, 4>> dup(4, {0, 0, -1, 1});
    CHECK_THROWS(gdop_of(dup));

    std::vector<std::array<double, 4>> bad = {
        {0, 0, -2, 1}, {0, 0, -1, 1}, {0, -1, 0, 1}, {1, 0, 0, 1}};
    CHECK_THROWS_AS(gdop_of(bad), std::invalid_argument); // non-unit row
}

TEST_CASE("GDOP never increases when a satellite is added") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = random_geometry(rng, 5);
        const double before = gdop_of(g);
        g.push_back(random_geometry(rng, 1)[0]);
        const double after = gdop_of(g);
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("geodetic conversions") {
    const auto eq = ecef_to_geodetic({6378137.0, 0, 0});
    CHECK(eq[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(eq[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(eq[2] == Catch::Approx(0.0).margin(1e-6));

    const auto pole = ecef_to_geodetic({0, 0, 6356752.3142});
    CHECK(pole[0] == Catch::Approx(90.0).margin(1e-9));
    CHECK(pole[2] == Catch::Approx(0.0).margin(1e-3));

    std::mt19937_64 rng(14);
    for (int i = 0; i < 500; ++i) {
        const double lat = -85.0 + 170.0 * (static_cast<double>(rng() >> 11) *
                                            0x1.0p-53);
        const double lon = -180.0 + 360.0 * (static_cast<double>(rng() >> 11) *
                                             0x1.0p-53);
        const double h = -1000.0 + 30000.0 *
                                       (static_cast<double>(rng() >> 11) *
                                        0x1.0p-53);
        const auto back = ecef_to_geodetic(geodetic_to_ecef(lat, lon, h));
        CHECK(std::abs(back[0] - lat) < 1e-9);
        CHECK(std::abs(back[1] - lon) < 1e-9);
        CHECK(std::abs(back[2] - h) < 1e-4);
    }
}
