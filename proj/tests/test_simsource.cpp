#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "l1rx/cacode.hpp"
#include "l1rx/samples.hpp"
#include "l1rx/simsource.hpp"
#include "support/test_eph.hpp"

using namespace l1rx;
using namespace l1rx::testsupport;
namespace fs = std::filesystem;

namespace {

SimScenario raw_scenario_1sv(double cn0, bool noise, double doppler = 0,
                             double delay_chips = 0,
                             double duration_s = 0.05) {
    SimScenario sc;
    SimSatellite sv;
    sv.prn = 7;
    sv.cn0_dbhz = cn0;
    sv.doppler_hz = doppler;
    sv.code_delay_chips = delay_chips;
    sc.satellites.push_back(sv);
    sc.mode = SimMode::Raw;
    sc.duration_s = duration_s;
    sc.sample_rate_hz = 5e6;
    sc.noise_enabled = noise;
    sc.seed = 99;
    return sc;
}

} // namespace

TEST_CASE("scenario validation") {
    auto sc = raw_scenario_1sv(48, false);
    CHECK_NOTHROW(validate(sc));
    sc.satellites[0].cn0_dbhz = 70;
    CHECK_THROWS_AS(validate(sc), std::invalid_argument);
    sc = raw_scenario_1sv(48, false);
    sc.satellites[0].doppler_hz = 20000;
    CHECK_THROWS_AS(validate(sc), std::invalid_argument);
    sc = raw_scenario_1sv(48, false);
    sc.satellites.push_back(sc.satellites[0]); // duplicate PRN
    CHECK_THROWS_AS(validate(sc), std::invalid_argument);
    sc = raw_scenario_1sv(48, false);
    sc.mode = SimMode::Geometric; // no ephemeris supplied
    CHECK_THROWS_AS(validate(sc), std::invalid_argument);
}

TEST_CASE("noiseless single SV: magnitude equals A, signs follow d*c") {
    auto sc = raw_scenario_1sv(48, false, 0.0, 0.0, 0.01);
    SimStream stream(sc);
    const double amp = std::sqrt(std::pow(10.0, 4.8) / 5e6);
    const auto& code = ca_code_table()[7];

    std::int64_t i_global = 0;
    while (auto block = stream.next_block()) {
        for (const auto& s : *block) {
            REQUIRE(std::abs(std::abs(s) - amp) < 1e-12);
            // zero delay, zero Doppler, zero phase, all-zero nav bits:
            // sample sign = chip at floor(i * chip_rate / fs) mod 1023
            const auto chip_idx = static_cast<std::size_t>(
                static_cast<std::int64_t>(std::floor(
                    static_cast<double>(i_global) * 1.023e6 / 5e6)) %
                1023);
            REQUIRE(s.real() * code.chips[chip_idx] > 0);
            REQUIRE(std::abs(s.imag()) < 1e-12);
            ++i_global;
        }
    }
    CHECK(i_global == 50000);
}

TEST_CASE("superposition: two-SV block equals sum of single-SV blocks") {
    auto sc2 = raw_scenario_1sv(48, false, 1200.0, 61.38, 0.02);
    SimSatellite second;
    second.prn = 12;
    second.cn0_dbhz = 44;
    second.doppler_hz = -2600;
    second.code_delay_chips = 500.25;
    second.initial_carrier_phase_rad = 1.1;
    sc2.satellites.push_back(second);

    auto sc_a = sc2;
    sc_a.satellites.resize(1);
    auto sc_b = sc2;
    sc_b.satellites.erase(sc_b.satellites.begin());

    SimStream both(sc2), a(sc_a), b(sc_b);
    while (auto blk = both.next_block()) {
        auto blk_a = a.next_block();
        auto blk_b = b.next_block();
        REQUIRE(blk_a.has_value());
        REQUIRE(blk_b.has_value());
        for (std::size_t i = 0; i < blk->size(); ++i)
            REQUIRE((*blk)[i] == (*blk_a)[i] + (*blk_b)[i]);
    }
}

TEST_CASE("recording is bit-reproducible for a fixed seed") {
    auto sc = raw_scenario_1sv(45, true, 800.0, 100.0, 0.03);
    const auto p1 = fs::temp_directory_path() / "l1rx_sim_rep1.bin";
    const auto p2 = fs::temp_directory_path() / "l1rx_sim_rep2.bin";
    generate_recording(sc, p1.string());
    generate_recording(sc, p2.string());
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::vector<char> b1((std::istreambuf_iterator<char>(f1)), {});
    std::vector<char> b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1.size() == 2 * 150000);
    CHECK(b1 == b2);
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("quantized recording reloads within one LSB of the float stream") {
    auto sc = raw_scenario_1sv(50, true, 500.0, 10.0, 0.02);
    const auto p = fs::temp_directory_path() / "l1rx_sim_q.bin";
    generate_recording(sc, p.string());

    SourceConfig cfg;
    cfg.locator = p.string();
    cfg.sample_rate_hz = sc.sample_rate_hz;
    auto src = open_source(cfg);

    SimStream stream(sc);
    std::size_t checked = 0;
    while (auto truth_block = stream.next_block()) {
        auto file_block = src.read_block(1);
        REQUIRE(file_block.has_value());
        REQUIRE(file_block->count() == truth_block->size());
        for (std::size_t i = 0; i < truth_block->size(); ++i) {
            CHECK(std::abs((*truth_block)[i].real() -
                           (*file_block).samples[i].real()) <= 1.0 / 128.0);
            CHECK(std::abs((*truth_block)[i].imag() -
                           (*file_block).samples[i].imag()) <= 1.0 / 128.0);
            ++checked;
        }
    }
    CHECK(checked == 100000);
    fs::remove(p);
}

TEST_CASE("post-correlation SNR over 1 ms matches C/N0 - 30 dB") {
    const double cn0 = 45.0;
    auto sc = raw_scenario_1sv(cn0, true, 0.0, 0.0, 1.2);
    sc.seed = 2024;
    SimStream stream(sc);
    const auto replica = resample_code(ca_code_table()[7], 5e6, 0.0, 1.023e6,
                                       5000);

    // default scenario has constant nav data, zero Doppler and phase, so
    // the clean correlator output is N*A every epoch
    std::vector<cplx> corrs;
    while (auto block = stream.next_block()) {
        cplx acc{0, 0};
        for (std::size_t i = 0; i < block->size(); ++i)
            acc += (*block)[i] * static_cast<double>(replica[i]);
        corrs.push_back(acc);
    }
    REQUIRE(corrs.size() >= 1000);

    cplx mean{0, 0};
    for (const auto& c : corrs)
        mean += c;
    mean /= static_cast<double>(corrs.size());
    double noise_power = 0;
    for (const auto& c : corrs)
        noise_power += std::norm(c - mean);
    noise_power /= static_cast<double>(corrs.size() - 1);

    const double snr_db = 10.0 * std::log10(std::norm(mean) / noise_power);
    CHECK(snr_db == Catch::Approx(cn0 - 30.0).margin(1.0));
}

TEST_CASE("geometric truth delays match ranges recomputed via sat_position") {
    const Vec3 rx = geodetic_to_ecef(29.47, -98.62, 230.0);
    SimScenario sc;
    sc.mode = SimMode::Geometric;
    sc.truth_receiver_ecef_m = rx;
    sc.satellites = make_geometric_constellation(8, rx, 259200, 42);
    sc.duration_s = 0.2;
    sc.sample_rate_hz = 5e6;
    sc.noise_enabled = false;
    sc.tow_start_s = 259200;

    SimStream stream(sc);
    while (stream.next_block()) {
    }
    const auto& truth = stream.truth();
    REQUIRE(truth.records.size() == 200 * 8);

    const double chips_per_sample = 1.023e6 / 5e6;
    for (std::size_t i = 0; i < truth.records.size(); i += 97) {
        const auto& rec = truth.records[i];
        const auto& sv = sc.satellites[static_cast<std::size_t>(
            rec.prn - 1)];
        const double t_gps = static_cast<double>(sc.tow_start_s) + rec.t_s;
        double tau = 0.07;
        SatState st{};
        for (int it = 0; it < 6; ++it) {
            st = sat_position(*sv.ephemeris, t_gps - tau);
            const double ang = constants::earth_rotation_rate_rads * tau;
            const Vec3 rot = {
                st.ecef_m[0] * std::cos(ang) + st.ecef_m[1] * std::sin(ang),
                -st.ecef_m[0] * std::sin(ang) + st.ecef_m[1] * std::cos(ang),
                st.ecef_m[2]};
            tau = norm(sub(rot, rx)) / constants::speed_of_light_mps;
        }
        double expect = std::fmod(
            (tau - st.clock_correction_s) * constants::chip_rate_hz, 1023.0);
        if (expect < 0)
            expect += 1023.0;
        double diff = std::abs(expect - rec.delay_chips);
        diff = std::min(diff, 1023.0 - diff);
        INFO("prn " << rec.prn << " t " << rec.t_s);
        CHECK(diff <= chips_per_sample);
        CHECK(std::abs(rec.doppler_hz) < 5000.0);
    }
}

TEST_CASE("geometric constellation has sane orbital elements") {
    const Vec3 rx = geodetic_to_ecef(29.47, -98.62, 230.0);
    const auto svs = make_geometric_constellation(12, rx, 259200, 7);
    REQUIRE(svs.size() == 12);
    for (const auto& sv : svs) {
        REQUIRE(sv.ephemeris.has_value());
        CHECK(sv.ephemeris->ecc < 0.03);
        CHECK(std::abs(sv.ephemeris->sqrt_a - 5153.7) < 10.0);
        // every field must survive nav encoding
        CHECK_NOTHROW(encode_nav_message(*sv.ephemeris, 259200, 5, 1));
    }
}

TEST_CASE("simulator rejects real-IF output format") {
    auto sc = raw_scenario_1sv(48, false);
    sc.format.kind = SampleKind::Int8RealIF;
    sc.format.if_frequency_hz = 4e6;
    CHECK_THROWS_AS(generate_recording(sc, "/tmp/l1rx_should_not_exist.bin"),
                    std::invalid_argument);
}
