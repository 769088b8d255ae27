#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "l1rx/constants.hpp"

namespace l1rx {

// One satellite's 1023-chip ranging sequence in +/-1 form.
struct CaCode {
    int prn = 0;
    std::array<std::int8_t, 1023> chips{};
};

namespace detail {

// G2 phase-select taps (1-based register stages) per PRN 1..32,
// IS-GPS-200 Table 3-I.
inline constexpr int g2_taps[33][2] = {
    {0, 0},
    {2, 6}, {3, 7}, {4, 8}, {5, 9}, {1, 9}, {2, 10}, {1, 8}, {2, 9},
    {3, 10}, {2, 3}, {3, 4}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 10},
    {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8}, {6, 9}, {1, 3}, {4, 6},
    {5, 7}, {6, 8}, {7, 9}, {8, 10}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
};

} // namespace detail

// Gold code from two 10-stage LFSRs: G1 (x^10+x^3+1) and G2
// (x^10+x^9+x^8+x^6+x^3+x^2+1), G2 output taken from the per-PRN
// phase-select taps. Chip mapping: XOR 0 -> +1, 1 -> -1.
inline CaCode generate_ca_code(int prn) {
    if (prn < 1 || prn > 32)
        throw std::out_of_range("PRN must be in 1..32");

    std::array<int, 10> g1, g2;
    g1.fill(1);
    g2.fill(1);
    const int t1 = detail::g2_taps[prn][0] - 1;
    const int t2 = detail::g2_taps[prn][1] - 1;

    CaCode code;
    code.prn = prn;
    for (int i = 0; i < 1023; ++i) {
        const int g1_out = g1[9];
        const int g2_out = g2[t1] ^ g2[t2];
        code.chips[i] = static_cast<std::int8_t>(1 - 2 * (g1_out ^ g2_out));

        const int g1_fb = g1[2] ^ g1[9];
        const int g2_fb = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
        for (int j = 9; j > 0; --j) {
            g1[j] = g1[j - 1];
            g2[j] = g2[j - 1];
        }
        g1[0] = g1_fb;
        g2[0] = g2_fb;
    }
    return code;
}

// Zero-order-hold resampling: out[i] = chips[floor(phase + i*rate) mod 1023],
// rate = code_freq / sample_rate in chips per sample.
inline void resample_code_into(const CaCode& code, double sample_rate_hz,
                               double code_phase_chips, double code_freq_hz,
                               std::span<std::int8_t> out) {
    if (code_freq_hz <= 0.0)
        throw std::invalid_argument("code_freq_hz must be positive");
    const double rate = code_freq_hz / sample_rate_hz;
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto idx = static_cast<std::int64_t>(
            std::floor(code_phase_chips + static_cast<double>(i) * rate));
        idx %= 1023;
        if (idx < 0)
            idx += 1023;
        out[i] = code.chips[static_cast<std::size_t>(idx)];
    }
}

inline std::vector<std::int8_t> resample_code(const CaCode& code,
                                              double sample_rate_hz,
                                              double code_phase_chips,
                                              double code_freq_hz,
                                              int n_samples) {
    if (n_samples <= 0)
        throw std::invalid_argument("n_samples must be positive");
    std::vector<std::int8_t> out(static_cast<std::size_t>(n_samples));
    resample_code_into(code, sample_rate_hz, code_phase_chips, code_freq_hz,
                       out);
    return out;
}

// All 32 codes, generated once and shared read-only.
inline const std::array<CaCode, 33>& ca_code_table() {
    static const std::array<CaCode, 33> table = [] {
        std::array<CaCode, 33> t{};
        for (int prn = 1; prn <= 32; ++prn)
            t[static_cast<std::size_t>(prn)] = generate_ca_code(prn);
        return t;
    }();
    return table;
}

} // namespace l1rx
