#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "l1rx/cacode.hpp"
#include "l1rx/constants.hpp"
#include "l1rx/navdata.hpp"
#include "l1rx/pvt.hpp"
#include "l1rx/samples.hpp"

namespace l1rx {

struct SimSatellite {
    int prn = 1;
    // raw-mode motion
    double code_delay_chips = 0;
    double doppler_hz = 0;
    double doppler_rate_hz_per_s = 0;

    double cn0_dbhz = 45;
    double initial_carrier_phase_rad = 0;

    // navigation data: explicit logical bits, or encoded from an ephemeris
    std::vector<int> nav_bits;
    std::optional<Ephemeris> ephemeris; // required in geometric mode
};

enum class SimMode { Raw, Geometric };

struct SimScenario {
    std::vector<SimSatellite> satellites;
    SimMode mode = SimMode::Raw;
    Vec3 truth_receiver_ecef_m{};
    double duration_s = 1.0;
    double sample_rate_hz = 5e6;
    SampleFormat format;
    bool noise_enabled = true;
    std::uint64_t seed = 1;
    std::int64_t tow_start_s = 259200; // GPS time of receiver sample 0
};

inline void validate(const SimScenario& sc) {
    if (sc.satellites.empty() || sc.satellites.size() > 12)
        throw std::invalid_argument("scenario needs 1..12 satellites");
    for (std::size_t i = 0; i < sc.satellites.size(); ++i) {
        const auto& sv = sc.satellites[i];
        if (sv.prn < 1 || sv.prn > 32)
            throw std::invalid_argument("PRN out of range");
        for (std::size_t j = i + 1; j < sc.satellites.size(); ++j)
            if (sc.satellites[j].prn == sv.prn)
                throw std::invalid_argument("duplicate PRN in scenario");
        if (sv.code_delay_chips < 0 || sv.code_delay_chips >= 1023)
            throw std::invalid_argument("code_delay_chips out of [0,1023)");
        if (std::abs(sv.doppler_hz) > 10000)
            throw std::invalid_argument("|doppler_hz| must be <= 10 kHz");
        if (sv.cn0_dbhz < 20 || sv.cn0_dbhz > 60)
            throw std::invalid_argument("cn0_dbhz must be in [20,60]");
        if (sc.mode == SimMode::Geometric && !sv.ephemeris)
            throw std::invalid_argument(
                "geometric mode requires per-SV ephemerides");
    }
    if (sc.duration_s <= 0)
        throw std::invalid_argument("duration_s must be positive");
    if (sc.tow_start_s % 6 != 0)
        throw std::invalid_argument("tow_start_s must be a multiple of 6 s");
    if (sc.sample_rate_hz < 2.046e6)
        throw std::invalid_argument("sample_rate_hz too low for C/A");
}

// 300-bit subframes carrying the ephemeris in subframes 1-3 and
// parity-valid filler in 4/5; every HOW names the start time of the next
// subframe. Returns logical bits (0/1).
inline std::vector<int> encode_nav_message(const Ephemeris& eph,
                                           std::int64_t tow_start_s,
                                           int n_subframes = 5,
                                           int first_subframe_id = 1) {
    if (tow_start_s % 6 != 0)
        throw std::invalid_argument("tow_start_s must be a multiple of 6");
    std::vector<int> bits;
    bits.reserve(static_cast<std::size_t>(n_subframes) * 300);
    bool d29 = false, d30 = false;
    for (int sf = 0; sf < n_subframes; ++sf) {
        const int id = (first_subframe_id - 1 + sf) % 5 + 1;
        const auto tow_count = static_cast<std::uint32_t>(
            ((tow_start_s / 6 + sf + 1) % 100800) & 0x1FFFF);

        std::array<std::uint32_t, 10> words{};
        // TLM: preamble, zero message, reserved
        words[0] = static_cast<std::uint32_t>(nav::preamble_bits) << 16;
        // HOW: TOW(17) alert(1) AS(1) id(3) t23 t24
        words[1] = (tow_count << 7) |
                   (static_cast<std::uint32_t>(id) << 2);
        std::array<std::uint32_t, 8> data{};
        if (id <= 3) {
            data = nav::pack_subframe_data(eph, id);
        } else {
            data.fill(0x5A5A5A); // placeholder payload
            data[7] &= 0xFFFFFC;
        }
        for (int w = 0; w < 8; ++w)
            words[static_cast<std::size_t>(w + 2)] = data[
                static_cast<std::size_t>(w)];

        for (int w = 0; w < 10; ++w) {
            std::uint32_t src = words[static_cast<std::size_t>(w)];
            if (w == 1 || w == 9)
                src = nav::solve_trailing_bits(src, d29, d30);
            const std::uint32_t tx = nav::encode_word(src, d29, d30);
            for (int b = 29; b >= 0; --b)
                bits.push_back(static_cast<int>((tx >> b) & 1));
            d29 = (tx >> 1) & 1;
            d30 = tx & 1;
        }
    }
    return bits;
}

struct TruthRecord {
    double t_s = 0; // receiver time since stream start
    int prn = 0;
    double delay_chips = 0;
    double doppler_hz = 0;
};

struct TruthLog {
    Vec3 receiver_ecef_m{};
    std::int64_t tow_start_s = 0;
    std::vector<TruthRecord> records;
    std::map<int, std::vector<int>> nav_bits; // logical bits per PRN
    std::int64_t nav_encode_start_s = 0;      // GPS time of nav_bits[0]
};

inline void write_truth_log(const TruthLog& log, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write truth log: " + path);
    f << "# truth_ecef_m " << log.receiver_ecef_m[0] << " "
      << log.receiver_ecef_m[1] << " " << log.receiver_ecef_m[2] << "\n";
    f << "# tow_start_s " << log.tow_start_s << "\n";
    f << "t_s,prn,delay_chips,doppler_hz\n";
    char line[128];
    for (const auto& r : log.records) {
        std::snprintf(line, sizeof line, "%.6f,%d,%.9f,%.6f\n", r.t_s, r.prn,
                      r.delay_chips, r.doppler_hz);
        f << line;
    }
}

namespace detail {

// Deterministic standard-normal generator (explicit Box-Muller over
// mt19937_64) so recordings are bit-reproducible for a fixed seed.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * constants::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    double uniform() {
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    }
    std::mt19937_64 rng_;
    double spare_ = 0;
    bool have_spare_ = false;
};

} // namespace detail

// Complex-baseband scenario synthesizer. Carrier wipe-off is pre-applied;
// each satellite contributes A * d(t-tau) * c(t-tau) * exp(j theta(t)) with
// theta driven by the same delay timeline as the code, so code and carrier
// Doppler stay consistent.
class SimStream {
public:
    explicit SimStream(SimScenario scenario)
        : sc_(std::move(scenario)), noise_(sc_.seed) {
        validate(sc_);
        samples_per_ms_ =
            static_cast<std::size_t>(std::llround(sc_.sample_rate_hz / 1e3));
        if (std::abs(sc_.sample_rate_hz / 1e3 -
                     static_cast<double>(samples_per_ms_)) > 1e-9)
            throw std::invalid_argument(
                "simulator requires an integer number of samples per ms");
        total_ms_ = static_cast<std::int64_t>(
            std::llround(sc_.duration_s * 1000.0));

        truth_.receiver_ecef_m = sc_.truth_receiver_ecef_m;
        truth_.tow_start_s = sc_.tow_start_s;
        truth_.nav_encode_start_s = sc_.tow_start_s - 6;

        const int n_subframes =
            static_cast<int>(std::ceil((sc_.duration_s + 0.4) / 6.0)) + 2;
        const int first_id =
            static_cast<int>(((truth_.nav_encode_start_s / 6) % 5 + 5) % 5) +
            1;

        for (const auto& sv : sc_.satellites) {
            PerSv p;
            p.sv = sv;
            p.code = &ca_code_table()[static_cast<std::size_t>(sv.prn)];
            if (!sv.nav_bits.empty()) {
                p.bits = sv.nav_bits;
                p.bits_cycle = true; // explicit streams repeat
            } else if (sv.ephemeris) {
                p.bits = encode_nav_message(*sv.ephemeris,
                                            truth_.nav_encode_start_s,
                                            n_subframes, first_id);
            } else {
                p.bits.assign(16, 0); // unmodulated data
            }
            truth_.nav_bits[sv.prn] = p.bits;
            const double lin = std::pow(10.0, sv.cn0_dbhz / 10.0);
            const double sigma = sc_.noise_enabled ? noise_sigma : 1.0;
            p.amp = sigma * std::sqrt(lin / sc_.sample_rate_hz);
            p.tau_valid = false;
            svs_.push_back(std::move(p));
        }
    }

    // committed noise amplitude per complex sample when noise is enabled
    static constexpr double noise_sigma = 0.25;

    std::size_t samples_per_ms() const { return samples_per_ms_; }
    std::int64_t total_ms() const { return total_ms_; }
    const TruthLog& truth() const { return truth_; }

    // One 1 ms block of float samples, or nullopt at end of scenario.
    std::optional<std::vector<cplx>> next_block() {
        if (ms_index_ >= total_ms_)
            return std::nullopt;
        const double t0 = static_cast<double>(ms_index_) * 1e-3;
        const double t1 = t0 + 1e-3;
        const auto n = samples_per_ms_;
        std::vector<cplx> block(n, cplx{0, 0});
        scratch_.resize(n);

        for (auto& p : svs_) {
            if (!p.tau_valid) {
                p.tau0 = effective_delay_s(p, t0);
                p.tau_valid = true;
            }
            const double tau1 = effective_delay_s(p, t1);

            // transmit-stream chip count at block edges
            const double off =
                static_cast<double>(sc_.tow_start_s -
                                    truth_.nav_encode_start_s);
            const double c0 =
                (t0 + off - p.tau0) * constants::chip_rate_hz;
            const double c1 = (t1 + off - tau1) * constants::chip_rate_hz;
            const double dc = (c1 - c0) / static_cast<double>(n);

            const double th0 = p.sv.initial_carrier_phase_rad -
                               2.0 * constants::pi * constants::f_l1_hz *
                                   p.tau0;
            const double th1 = p.sv.initial_carrier_phase_rad -
                               2.0 * constants::pi * constants::f_l1_hz *
                                   tau1;
            const double dth = (th1 - th0) / static_cast<double>(n);

            cplx cur(std::cos(th0), std::sin(th0));
            const cplx rot(std::cos(dth), std::sin(dth));
            const auto n_bits = static_cast<std::int64_t>(p.bits.size());
            for (std::size_t i = 0; i < n; ++i) {
                const double chips = c0 + static_cast<double>(i) * dc;
                const auto ic = static_cast<std::int64_t>(chips);
                const auto bit_idx =
                    p.bits_cycle
                        ? (ic / 20460) % n_bits
                        : std::clamp<std::int64_t>(ic / 20460, 0,
                                                   n_bits - 1);
                const double d =
                    p.bits[static_cast<std::size_t>(bit_idx)] ? -1.0 : 1.0;
                const double chip = p.code->chips[
                    static_cast<std::size_t>(ic % 1023)];
                scratch_[i] = p.amp * d * chip * cur;
                cur *= rot;
                if ((i & 1023) == 1023)
                    cur /= std::abs(cur);
            }
            // sum per-SV waveforms in a separate pass so superposition is
            // exact in floating point
            for (std::size_t i = 0; i < n; ++i)
                block[i] += scratch_[i];

            TruthRecord rec;
            rec.t_s = t0;
            rec.prn = p.sv.prn;
            rec.delay_chips = std::fmod(
                p.tau0 * constants::chip_rate_hz, 1023.0);
            if (rec.delay_chips < 0)
                rec.delay_chips += 1023.0;
            rec.doppler_hz = -constants::f_l1_hz * (tau1 - p.tau0) / 1e-3;
            truth_.records.push_back(rec);

            p.tau0 = tau1;
        }

        if (sc_.noise_enabled)
            for (auto& s : block)
                s += cplx(noise_sigma / std::sqrt(2.0) * noise_.next(),
                          noise_sigma / std::sqrt(2.0) * noise_.next());

        ++ms_index_;
        return block;
    }

private:
    struct PerSv {
        SimSatellite sv;
        const CaCode* code = nullptr;
        std::vector<int> bits;
        bool bits_cycle = false;
        double amp = 0;
        double tau0 = 0;
        bool tau_valid = false;
    };

    // effective signal delay in seconds: code/carrier timeline offset as
    // seen by the receiver, satellite clock error folded in
    double effective_delay_s(const PerSv& p, double t) const {
        if (sc_.mode == SimMode::Raw) {
            const double cycles = p.sv.doppler_hz * t +
                                  0.5 * p.sv.doppler_rate_hz_per_s * t * t;
            return p.sv.code_delay_chips / constants::chip_rate_hz -
                   cycles / constants::f_l1_hz;
        }
        // geometric: light-time iteration at receiver GPS time
        const double t_gps = static_cast<double>(sc_.tow_start_s) + t;
        double tau = 0.07;
        SatState st{};
        for (int it = 0; it < 4; ++it) {
            st = sat_position(*p.sv.ephemeris, t_gps - tau);
            const double ang = constants::earth_rotation_rate_rads * tau;
            const Vec3 rot = {
                st.ecef_m[0] * std::cos(ang) + st.ecef_m[1] * std::sin(ang),
                -st.ecef_m[0] * std::sin(ang) + st.ecef_m[1] * std::cos(ang),
                st.ecef_m[2]};
            tau = norm(sub(rot, sc_.truth_receiver_ecef_m)) /
                  constants::speed_of_light_mps;
        }
        return tau - st.clock_correction_s;
    }

    SimScenario sc_;
    std::vector<PerSv> svs_;
    TruthLog truth_;
    detail::GaussianSource noise_;
    std::vector<cplx> scratch_;
    std::size_t samples_per_ms_ = 0;
    std::int64_t total_ms_ = 0;
    std::int64_t ms_index_ = 0;
};

// Renders a scenario to a recording file in the samples-module format and
// returns the truth log.
inline TruthLog generate_recording(const SimScenario& scenario,
                                   const std::string& output_path) {
    SimStream stream(scenario);
    std::ofstream f(output_path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write recording: " + output_path);

    std::vector<std::int8_t> buf8;
    std::vector<std::int16_t> buf16;
    while (auto block = stream.next_block()) {
        switch (scenario.format.kind) {
        case SampleKind::Int8ComplexInterleaved: {
            buf8.resize(block->size() * 2);
            for (std::size_t i = 0; i < block->size(); ++i) {
                const auto q = [](double v) {
                    return static_cast<std::int8_t>(std::clamp(
                        std::lround(v * 128.0), -127L, 127L));
                };
                buf8[2 * i] = q((*block)[i].real());
                buf8[2 * i + 1] = q((*block)[i].imag());
            }
            f.write(reinterpret_cast<const char*>(buf8.data()),
                    static_cast<std::streamsize>(buf8.size()));
            break;
        }
        case SampleKind::Int16ComplexInterleaved: {
            buf16.resize(block->size() * 2);
            for (std::size_t i = 0; i < block->size(); ++i) {
                const auto q = [](double v) {
                    return static_cast<std::int16_t>(std::clamp(
                        std::lround(v * 32768.0), -32767L, 32767L));
                };
                buf16[2 * i] = q((*block)[i].real());
                buf16[2 * i + 1] = q((*block)[i].imag());
            }
            f.write(reinterpret_cast<const char*>(buf16.data()),
                    static_cast<std::streamsize>(buf16.size()));
            break;
        }
        case SampleKind::Int8RealIF:
            throw std::invalid_argument(
                "simulator emits complex-baseband recordings only");
        }
    }
    return stream.truth();
}

// Places n satellites on a GPS-radius shell spread in azimuth/elevation
// above a static receiver and derives broadcast ephemerides that pass
// through those points at toe. Used for self-contained geometric tests.
inline std::vector<SimSatellite> make_geometric_constellation(
    int n_svs, const Vec3& rx_ecef, std::int64_t tow_start_s,
    std::uint64_t seed, double cn0_dbhz = 48.0) {
    using namespace constants;
    if (n_svs < 1 || n_svs > 12)
        throw std::invalid_argument("n_svs must be 1..12");
    std::mt19937_64 rng(seed ^ 0x5eedbeef);
    auto urand = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };

    const auto geo = ecef_to_geodetic(rx_ecef);
    const double lat = geo[0] * pi / 180.0, lon = geo[1] * pi / 180.0;
    const Vec3 up = {std::cos(lat) * std::cos(lon),
                     std::cos(lat) * std::sin(lon), std::sin(lat)};
    const Vec3 east = {-std::sin(lon), std::cos(lon), 0.0};
    const Vec3 north = {-std::sin(lat) * std::cos(lon),
                        -std::sin(lat) * std::sin(lon), std::cos(lat)};

    static constexpr double elevations[12] = {75, 55, 55, 45, 45, 35,
                                              35, 28, 28, 22, 60, 40};
    // keep toe/toc on the 16 s field grid so the broadcast ephemeris is
    // exactly representable in the nav message
    const double toe =
        16.0 * std::round((static_cast<double>(tow_start_s) + 32.0) / 16.0);

    std::vector<SimSatellite> svs;
    for (int k = 0; k < n_svs; ++k) {
        const double el = elevations[k] * pi / 180.0;
        const double az =
            (2.0 * pi * k) / n_svs + urand(-0.15, 0.15);
        Vec3 los{};
        for (int i = 0; i < 3; ++i)
            los[i] = std::cos(el) * (std::sin(az) * east[i] +
                                     std::cos(az) * north[i]) +
                     std::sin(el) * up[i];
        // point on the orbit shell along the line of sight
        const double r_orbit = 26560e3;
        const double b = dot(rx_ecef, los);
        const double c = dot(rx_ecef, rx_ecef) - r_orbit * r_orbit;
        const double s = -b + std::sqrt(b * b - c);
        const Vec3 sat = add(rx_ecef, {los[0] * s, los[1] * s, los[2] * s});

        const double sat_lat = std::asin(sat[2] / norm(sat));
        const double sat_lon = std::atan2(sat[1], sat[0]);
        double incl = 55.0 * pi / 180.0;
        if (std::abs(sat_lat) > incl - 0.05)
            incl = std::abs(sat_lat) + 0.1;

        const double arg_lat = std::asin(
            std::clamp(std::sin(sat_lat) / std::sin(incl), -1.0, 1.0));
        const double node_lon =
            sat_lon - std::atan2(std::cos(incl) * std::sin(arg_lat),
                                 std::cos(arg_lat));

        Ephemeris e;
        e.prn = k + 1;
        e.week_number = 212;
        e.iode = static_cast<int>((seed + static_cast<std::uint64_t>(k)) %
                                  200) + 10;
        e.iodc = e.iode;
        e.sqrt_a = 5153.7;
        e.ecc = urand(0.001, 0.005);
        e.omega_rad = urand(-pi, pi);
        const double nu = arg_lat - e.omega_rad;
        const double ecc_anom =
            2.0 * std::atan(std::tan(nu / 2.0) *
                            std::sqrt((1.0 - e.ecc) / (1.0 + e.ecc)));
        e.m0_rad = ecc_anom - e.ecc * std::sin(ecc_anom);
        e.i0_rad = incl;
        e.omega0_rad = node_lon + earth_rotation_rate_rads * toe;
        // wrap into the field range
        e.omega0_rad = std::remainder(e.omega0_rad, 2.0 * pi);
        e.m0_rad = std::remainder(e.m0_rad, 2.0 * pi);
        e.toe_s = toe;
        e.toc_s = toe;
        e.delta_n_rad_s = urand(-3e-9, 3e-9);
        e.omegadot_rad_s = urand(-9e-9, -7e-9);
        e.idot_rad_s = urand(-3e-10, 3e-10);
        e.crs_m = urand(-80, 80);
        e.crc_m = urand(-200, 200);
        e.cuc_rad = urand(-6e-6, 6e-6);
        e.cus_rad = urand(-6e-6, 6e-6);
        e.cic_rad = urand(-2e-7, 2e-7);
        e.cis_rad = urand(-2e-7, 2e-7);
        e.af0_s = urand(-2e-5, 2e-5);
        e.af1_s_s = urand(-1e-11, 1e-11);
        e.af2_s_s2 = 0.0;
        e.tgd_s = urand(-8e-9, 8e-9);

        SimSatellite sv;
        sv.prn = e.prn;
        sv.cn0_dbhz = cn0_dbhz;
        sv.initial_carrier_phase_rad = urand(-pi, pi);
        sv.ephemeris = e;
        svs.push_back(std::move(sv));
    }
    return svs;
}

} // namespace l1rx
