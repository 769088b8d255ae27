#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "l1rx/constants.hpp"

namespace l1rx {

// Broadcast orbital and clock parameters from subframes 1-3. Angles are
// stored in radians (converted from the semicircle fields on decode).
struct Ephemeris {
    int prn = 0;
    // subframe 1
    int week_number = 0;
    int sv_accuracy = 0;
    int sv_health = 0;
    int iodc = 0;
    double tgd_s = 0;
    double toc_s = 0;
    double af2_s_s2 = 0;
    double af1_s_s = 0;
    double af0_s = 0;
    // subframe 2
    int iode = 0;
    double crs_m = 0;
    double delta_n_rad_s = 0;
    double m0_rad = 0;
    double cuc_rad = 0;
    double ecc = 0;
    double cus_rad = 0;
    double sqrt_a = 0;
    double toe_s = 0;
    // subframe 3
    double cic_rad = 0;
    double omega0_rad = 0;
    double cis_rad = 0;
    double i0_rad = 0;
    double crc_m = 0;
    double omega_rad = 0;
    double omegadot_rad_s = 0;
    double idot_rad_s = 0;
};

enum class NavState { Null, Tow, Eph };

namespace nav {

inline constexpr std::uint8_t preamble_bits = 0b10001011;

namespace detail {

constexpr std::uint32_t tap_mask(std::initializer_list<int> bits) {
    std::uint32_t m = 0;
    for (int b : bits)
        m |= 1u << (24 - b);
    return m;
}

// Parity coverage of source data bits b1..b24 for D25..D30 and whether the
// equation folds in D29* or D30* of the previous word.
inline constexpr std::uint32_t parity_taps[6] = {
    tap_mask({1, 2, 3, 5, 6, 10, 11, 12, 13, 14, 17, 18, 20, 23}),
    tap_mask({2, 3, 4, 6, 7, 11, 12, 13, 14, 15, 18, 19, 21, 24}),
    tap_mask({1, 3, 4, 5, 7, 8, 12, 13, 14, 15, 16, 19, 20, 22}),
    tap_mask({2, 4, 5, 6, 8, 9, 13, 14, 15, 16, 17, 20, 21, 23}),
    tap_mask({1, 3, 5, 6, 7, 9, 10, 14, 15, 16, 17, 18, 21, 22, 24}),
    tap_mask({3, 5, 6, 8, 9, 10, 11, 13, 15, 19, 22, 23, 24}),
};
inline constexpr bool parity_uses_d29[6] = {true, false, true,
                                            false, false, true};

inline int parity32(std::uint32_t v) {
    return std::popcount(v) & 1;
}

} // namespace detail

// Encodes 24 source data bits into a transmitted 30-bit word given the last
// two transmitted bits of the previous word.
inline std::uint32_t encode_word(std::uint32_t data24, bool prev_d29,
                                 bool prev_d30) {
    data24 &= 0xFFFFFF;
    std::uint32_t word = (prev_d30 ? ~data24 : data24) & 0xFFFFFF;
    word <<= 6;
    for (int k = 0; k < 6; ++k) {
        int p = detail::parity32(data24 & detail::parity_taps[k]);
        p ^= (detail::parity_uses_d29[k] ? prev_d29 : prev_d30) ? 1 : 0;
        word |= static_cast<std::uint32_t>(p) << (5 - k);
    }
    return word;
}

// Standard six-equation parity check; returns the 24 decoded source data
// bits (complemented back when prev_d30 is set) or nullopt on failure.
inline std::optional<std::uint32_t> parity_check(std::uint32_t word30,
                                                 bool prev_d29,
                                                 bool prev_d30) {
    const std::uint32_t data24 =
        ((prev_d30 ? ~word30 : word30) >> 6) & 0xFFFFFF;
    for (int k = 0; k < 6; ++k) {
        int p = detail::parity32(data24 & detail::parity_taps[k]);
        p ^= (detail::parity_uses_d29[k] ? prev_d29 : prev_d30) ? 1 : 0;
        if (p != static_cast<int>((word30 >> (5 - k)) & 1))
            return std::nullopt;
    }
    return data24;
}

// Chooses the two non-information bits b23/b24 (HOW and word 10) so the
// transmitted word ends in D29 = D30 = 0.
inline std::uint32_t solve_trailing_bits(std::uint32_t data24, bool prev_d29,
                                         bool prev_d30) {
    data24 &= 0xFFFFFC; // clear b23, b24
    for (std::uint32_t b24 : {0u, 1u})
        for (std::uint32_t b23 : {0u, 1u}) {
            const std::uint32_t candidate = data24 | (b23 << 1) | b24;
            if ((encode_word(candidate, prev_d29, prev_d30) & 3u) == 0)
                return candidate;
        }
    throw std::logic_error("trailing-bit solve failed"); // unreachable
}

namespace detail {

inline std::uint32_t field_unsigned(double value, double scale, int bits,
                                    const char* name) {
    const double scaled = value / scale;
    const auto raw = static_cast<std::int64_t>(std::llround(scaled));
    if (raw < 0 || raw >= (std::int64_t{1} << bits))
        throw std::range_error(std::string("nav field overflow: ") + name);
    return static_cast<std::uint32_t>(raw);
}

inline std::uint32_t field_signed(double value, double scale, int bits,
                                  const char* name) {
    const double scaled = value / scale;
    const auto raw = static_cast<std::int64_t>(std::llround(scaled));
    const std::int64_t lim = std::int64_t{1} << (bits - 1);
    if (raw < -lim || raw >= lim)
        throw std::range_error(std::string("nav field overflow: ") + name);
    return static_cast<std::uint32_t>(raw & ((std::int64_t{1} << bits) - 1));
}

inline double unfield_unsigned(std::uint64_t raw, double scale) {
    return static_cast<double>(raw) * scale;
}

inline double unfield_signed(std::uint64_t raw, double scale, int bits) {
    auto v = static_cast<std::int64_t>(raw);
    if (v >= (std::int64_t{1} << (bits - 1)))
        v -= std::int64_t{1} << bits;
    return static_cast<double>(v) * scale;
}

// bit extraction from a 24-bit data word, MSB-first positions 1..24
inline std::uint32_t bits_of(std::uint32_t data24, int first, int count) {
    return (data24 >> (24 - (first + count - 1))) &
           ((1u << count) - 1u);
}

inline constexpr double sc = constants::pi; // semicircles -> radians

} // namespace detail

// Packs the eight data words (words 3..10, 24 bits each, trailing bits of
// word 10 left zero for the solver) of subframes 1..3.
inline std::array<std::uint32_t, 8> pack_subframe_data(const Ephemeris& e,
                                                       int subframe_id) {
    using namespace detail;
    std::array<std::uint32_t, 8> w{};
    switch (subframe_id) {
    case 1: {
        const auto iodc = static_cast<std::uint32_t>(e.iodc) & 0x3FF;
        w[0] = (field_unsigned(e.week_number, 1, 10, "week") << 14) |
               (1u << 12) | // codes-on-L2: C/A
               ((static_cast<std::uint32_t>(e.sv_accuracy) & 0xF) << 8) |
               ((static_cast<std::uint32_t>(e.sv_health) & 0x3F) << 2) |
               (iodc >> 8);
        w[1] = 0;
        w[2] = 0;
        w[3] = 0;
        w[4] = (0xFFFFu << 8) |
               field_signed(e.tgd_s, std::pow(2.0, -31), 8, "tgd");
        w[5] = ((iodc & 0xFF) << 16) |
               field_unsigned(e.toc_s, 16.0, 16, "toc");
        w[6] = (field_signed(e.af2_s_s2, std::pow(2.0, -55), 8, "af2")
                << 16) |
               field_signed(e.af1_s_s, std::pow(2.0, -43), 16, "af1");
        w[7] = field_signed(e.af0_s, std::pow(2.0, -31), 22, "af0") << 2;
        break;
    }
    case 2: {
        const auto m0 =
            field_signed(e.m0_rad, std::pow(2.0, -31) * sc, 32, "m0");
        const auto ecc = field_unsigned(e.ecc, std::pow(2.0, -33), 32, "e");
        const auto sqa =
            field_unsigned(e.sqrt_a, std::pow(2.0, -19), 32, "sqrt_a");
        w[0] = ((static_cast<std::uint32_t>(e.iode) & 0xFF) << 16) |
               field_signed(e.crs_m, std::pow(2.0, -5), 16, "crs");
        w[1] = (field_signed(e.delta_n_rad_s, std::pow(2.0, -43) * sc, 16,
                             "delta_n")
                << 8) |
               (m0 >> 24);
        w[2] = m0 & 0xFFFFFF;
        w[3] = (field_signed(e.cuc_rad, std::pow(2.0, -29), 16, "cuc")
                << 8) |
               (ecc >> 24);
        w[4] = ecc & 0xFFFFFF;
        w[5] = (field_signed(e.cus_rad, std::pow(2.0, -29), 16, "cus")
                << 8) |
               (sqa >> 24);
        w[6] = sqa & 0xFFFFFF;
        w[7] = (field_unsigned(e.toe_s, 16.0, 16, "toe") << 8) | 0;
        break;
    }
    case 3: {
        const auto om0 =
            field_signed(e.omega0_rad, std::pow(2.0, -31) * sc, 32, "omega0");
        const auto i0 =
            field_signed(e.i0_rad, std::pow(2.0, -31) * sc, 32, "i0");
        const auto om =
            field_signed(e.omega_rad, std::pow(2.0, -31) * sc, 32, "omega");
        w[0] = (field_signed(e.cic_rad, std::pow(2.0, -29), 16, "cic")
                << 8) |
               (om0 >> 24);
        w[1] = om0 & 0xFFFFFF;
        w[2] = (field_signed(e.cis_rad, std::pow(2.0, -29), 16, "cis")
                << 8) |
               (i0 >> 24);
        w[3] = i0 & 0xFFFFFF;
        w[4] = (field_signed(e.crc_m, std::pow(2.0, -5), 16, "crc") << 8) |
               (om >> 24);
        w[5] = om & 0xFFFFFF;
        w[6] = field_signed(e.omegadot_rad_s, std::pow(2.0, -43) * sc, 24,
                            "omegadot");
        w[7] = ((static_cast<std::uint32_t>(e.iode) & 0xFF) << 16) |
               (field_signed(e.idot_rad_s, std::pow(2.0, -43) * sc, 14,
                             "idot")
                << 2);
        break;
    }
    default:
        throw std::invalid_argument("subframe_id must be 1..3");
    }
    return w;
}

struct SubframeFields {
    int subframe_id = 0;
    std::uint32_t tow_count = 0; // 17-bit truncated TOW from the HOW
    Ephemeris partial;           // only the fields of this subframe are set
};

// Unpacks words 3..10 (24-bit source data) of a parity-checked subframe.
inline SubframeFields unpack_subframe(
    const std::array<std::uint32_t, 10>& data) {
    using namespace detail;
    SubframeFields out;
    out.tow_count = bits_of(data[1], 1, 17);
    out.subframe_id = static_cast<int>(bits_of(data[1], 20, 3));
    Ephemeris& e = out.partial;
    switch (out.subframe_id) {
    case 1:
        e.week_number = static_cast<int>(bits_of(data[2], 1, 10));
        e.sv_accuracy = static_cast<int>(bits_of(data[2], 13, 4));
        e.sv_health = static_cast<int>(bits_of(data[2], 17, 6));
        e.iodc = static_cast<int>((bits_of(data[2], 23, 2) << 8) |
                                  bits_of(data[7], 1, 8));
        e.tgd_s = unfield_signed(bits_of(data[6], 17, 8),
                                 std::pow(2.0, -31), 8);
        e.toc_s = unfield_unsigned(bits_of(data[7], 9, 16), 16.0);
        e.af2_s_s2 = unfield_signed(bits_of(data[8], 1, 8),
                                    std::pow(2.0, -55), 8);
        e.af1_s_s = unfield_signed(bits_of(data[8], 9, 16),
                                   std::pow(2.0, -43), 16);
        e.af0_s = unfield_signed(bits_of(data[9], 1, 22),
                                 std::pow(2.0, -31), 22);
        break;
    case 2:
        e.iode = static_cast<int>(bits_of(data[2], 1, 8));
        e.crs_m = unfield_signed(bits_of(data[2], 9, 16),
                                 std::pow(2.0, -5), 16);
        e.delta_n_rad_s = unfield_signed(bits_of(data[3], 1, 16),
                                         std::pow(2.0, -43) * sc, 16);
        e.m0_rad = unfield_signed(
            (static_cast<std::uint64_t>(bits_of(data[3], 17, 8)) << 24) |
                bits_of(data[4], 1, 24),
            std::pow(2.0, -31) * sc, 32);
        e.cuc_rad = unfield_signed(bits_of(data[5], 1, 16),
                                   std::pow(2.0, -29), 16);
        e.ecc = unfield_unsigned(
            (static_cast<std::uint64_t>(bits_of(data[5], 17, 8)) << 24) |
                bits_of(data[6], 1, 24),
            std::pow(2.0, -33));
        e.cus_rad = unfield_signed(bits_of(data[7], 1, 16),
                                   std::pow(2.0, -29), 16);
        e.sqrt_a = unfield_unsigned(
            (static_cast<std::uint64_t>(bits_of(data[7], 17, 8)) << 24) |
                bits_of(data[8], 1, 24),
            std::pow(2.0, -19));
        e.toe_s = unfield_unsigned(bits_of(data[9], 1, 16), 16.0);
        break;
    case 3:
        e.cic_rad = unfield_signed(bits_of(data[2], 1, 16),
                                   std::pow(2.0, -29), 16);
        e.omega0_rad = unfield_signed(
            (static_cast<std::uint64_t>(bits_of(data[2], 17, 8)) << 24) |
                bits_of(data[3], 1, 24),
            std::pow(2.0, -31) * sc, 32);
        e.cis_rad = unfield_signed(bits_of(data[4], 1, 16),
                                   std::pow(2.0, -29), 16);
        e.i0_rad = unfield_signed(
            (static_cast<std::uint64_t>(bits_of(data[4], 17, 8)) << 24) |
                bits_of(data[5], 1, 24),
            std::pow(2.0, -31) * sc, 32);
        e.crc_m = unfield_signed(bits_of(data[6], 1, 16),
                                 std::pow(2.0, -5), 16);
        e.omega_rad = unfield_signed(
            (static_cast<std::uint64_t>(bits_of(data[6], 17, 8)) << 24) |
                bits_of(data[7], 1, 24),
            std::pow(2.0, -31) * sc, 32);
        e.omegadot_rad_s = unfield_signed(bits_of(data[8], 1, 24),
                                          std::pow(2.0, -43) * sc, 24);
        e.iode = static_cast<int>(bits_of(data[9], 1, 8));
        e.idot_rad_s = unfield_signed(bits_of(data[9], 9, 14),
                                      std::pow(2.0, -43) * sc, 14);
        break;
    default:
        break; // subframes 4/5 carry no fields we use
    }
    return out;
}

} // namespace nav

// One demodulated 50 bps bit with the receiver-side metadata needed to
// anchor transmit time to the code phase accumulator.
struct NavBit {
    int value = 0;          // +/-1, polarity not yet applied
    double confidence = 0;  // |sum of the 20 prompt values|
    std::int64_t start_epoch = 0;
    double start_chi_chips = 0; // unwrapped code phase at the bit start
};

struct NavDecodeState {
    NavState nav_state = NavState::Null;

    // bit synchronization
    std::array<int, 20> bit_sync_histogram{};
    int transition_count = 0;
    int bit_phase_ms = -1;
    int prev_prompt_sign = 0;

    // 20 ms accumulation
    double prompt_sum = 0;
    int prompt_count = 0;
    std::int64_t bit_start_epoch = 0;
    double bit_start_chi = 0;

    // demodulated bit history (oldest first)
    std::deque<NavBit> bit_buffer;

    int polarity = 0; // +/-1 once fixed by the preamble
    std::int64_t last_tow_s = -1;

    // transmit-time anchor: the code-phase accumulator value at the first
    // bit edge of the subframe starting at last_tow
    bool anchored = false;
    double anchor_chi_chips = 0;
    double anchor_tx_time_s = 0;

    // subframe assembly after TOW lock: polarity-applied logical bits,
    // starting two bits before the anchored subframe for parity carry-in
    std::vector<int> aligned_bits;
    int subframes_decoded = 0;

    std::optional<Ephemeris> sub1, sub2, sub3;
    std::optional<Ephemeris> eph;

    // epoch metadata for the prompt being processed (set by on_prompt)
    std::int64_t current_epoch = 0;
    double current_chi = 0;
};

namespace nav {

inline constexpr std::size_t bit_buffer_cap = 720; // > 2 subframes + slack

// Histogram of prompt sign-transition positions mod 20; declares the bit
// phase once >= 40 transitions agree 4:1 over the runner-up bin.
inline void bit_sync(NavDecodeState& st, int prompt_sign,
                     std::int64_t epoch_ms_index) {
    if (st.bit_phase_ms >= 0)
        return;
    if (st.prev_prompt_sign != 0 && prompt_sign != st.prev_prompt_sign) {
        st.bit_sync_histogram[static_cast<std::size_t>(epoch_ms_index % 20)]++;
        st.transition_count++;
    }
    if (st.transition_count >= 40) {
        int best = 0, second = 0, arg = 0;
        for (int i = 0; i < 20; ++i) {
            const int v = st.bit_sync_histogram[static_cast<std::size_t>(i)];
            if (v > best) {
                second = best;
                best = v;
                arg = i;
            } else if (v > second) {
                second = v;
            }
        }
        if (best >= 4 * std::max(second, 1))
            st.bit_phase_ms = arg;
    }
}

// Sums 20 bit-aligned prompts; emits the hard decision with |sum| as
// confidence.
inline std::optional<NavBit> accumulate_bit(NavDecodeState& st, double ip) {
    if (st.bit_phase_ms < 0)
        return std::nullopt;
    if (st.current_epoch % 20 == st.bit_phase_ms) {
        st.prompt_sum = 0;
        st.prompt_count = 0;
        st.bit_start_epoch = st.current_epoch;
        st.bit_start_chi = st.current_chi;
    } else if (st.prompt_count == 0) {
        return std::nullopt; // wait for the first aligned boundary
    }
    st.prompt_sum += ip;
    st.prompt_count++;
    if (st.prompt_count < 20)
        return std::nullopt;
    NavBit bit;
    bit.value = st.prompt_sum >= 0 ? 1 : -1;
    bit.confidence = std::abs(st.prompt_sum);
    bit.start_epoch = st.bit_start_epoch;
    bit.start_chi_chips = st.bit_start_chi;
    st.prompt_count = 0;
    return bit;
}

namespace detail {

// maps +/-1 stream (polarity applied) to a 30-bit word, bits MSB-first
inline std::uint32_t word_from_bits(const std::deque<NavBit>& bits,
                                    std::size_t start, int polarity) {
    std::uint32_t w = 0;
    for (std::size_t i = 0; i < 30; ++i) {
        const int logical = (bits[start + i].value * polarity) > 0 ? 0 : 1;
        w = (w << 1) | static_cast<std::uint32_t>(logical);
    }
    return w;
}

inline bool matches_preamble(const std::deque<NavBit>& bits,
                             std::size_t start, int polarity) {
    for (int i = 0; i < 8; ++i) {
        const int expect =
            ((preamble_bits >> (7 - i)) & 1) ? -1 : 1; // 0 -> +1, 1 -> -1
        if (bits[start + static_cast<std::size_t>(i)].value * polarity !=
            expect)
            return false;
    }
    return true;
}

} // namespace detail

// Searches the bit buffer for a preamble confirmed by two parity-valid
// words and a second preamble 300 bits later. On success fixes polarity,
// sets last_tow from the HOW, and anchors transmit time at the bit edge of
// the following subframe (whose start time the HOW names).
inline void find_preamble_and_tow(NavDecodeState& st) {
    if (st.nav_state != NavState::Null)
        return;
    const auto& bits = st.bit_buffer;
    if (bits.size() < 310)
        return;
    for (std::size_t k = 2; k + 308 <= bits.size(); ++k) {
        for (int pol : {1, -1}) {
            if (!detail::matches_preamble(bits, k, pol))
                continue;
            if (!detail::matches_preamble(bits, k + 300, pol))
                continue;
            const int d29 = (bits[k - 2].value * pol) > 0 ? 0 : 1;
            const int d30 = (bits[k - 1].value * pol) > 0 ? 0 : 1;
            const auto w1 = detail::word_from_bits(bits, k, pol);
            const auto d1 = parity_check(w1, d29 != 0, d30 != 0);
            if (!d1)
                continue;
            const auto w2 = detail::word_from_bits(bits, k + 30, pol);
            const auto d2 =
                parity_check(w2, (w1 >> 1) & 1, w1 & 1);
            if (!d2)
                continue;

            const std::uint32_t tow_count = (*d2 >> 7) & 0x1FFFF;
            st.polarity = pol;
            st.last_tow_s = static_cast<std::int64_t>(tow_count) * 6;
            st.nav_state = NavState::Tow;
            st.anchored = true;
            st.anchor_tx_time_s = static_cast<double>(st.last_tow_s);
            // the bit edge sits at the nearest code-period wrap of the
            // bit's first epoch
            const auto& anchor_bit = bits[k + 300];
            st.anchor_chi_chips =
                1023.0 * std::round(anchor_bit.start_chi_chips / 1023.0);

            // seed the aligned stream from two bits before the anchored
            // subframe onward
            st.aligned_bits.clear();
            st.subframes_decoded = 0;
            for (std::size_t i = k + 298; i < bits.size(); ++i)
                st.aligned_bits.push_back(bits[i].value * pol > 0 ? 0 : 1);
            return;
        }
    }
}

namespace detail {

inline std::optional<std::array<std::uint32_t, 10>> checked_subframe(
    const std::vector<int>& aligned, std::size_t start) {
    // start indexes the first bit of the subframe; aligned[start-2],[start-1]
    // are the carry-in bits
    std::array<std::uint32_t, 10> data{};
    bool d29 = aligned[start - 2] != 0;
    bool d30 = aligned[start - 1] != 0;
    for (int w = 0; w < 10; ++w) {
        std::uint32_t word = 0;
        for (int i = 0; i < 30; ++i)
            word = (word << 1) |
                   static_cast<std::uint32_t>(
                       aligned[start + static_cast<std::size_t>(30 * w + i)]);
        const auto decoded = parity_check(word, d29, d30);
        if (!decoded)
            return std::nullopt;
        data[static_cast<std::size_t>(w)] = *decoded;
        d29 = (word >> 1) & 1;
        d30 = word & 1;
    }
    return data;
}

} // namespace detail

// Consumes complete 300-bit subframes from the aligned stream, assembling
// an Ephemeris once subframes 1-3 agree on the issue of data.
inline void decode_subframes(NavDecodeState& st) {
    if (st.nav_state == NavState::Null || !st.anchored)
        return;
    while (st.aligned_bits.size() >=
           2 + 300 * static_cast<std::size_t>(st.subframes_decoded + 1)) {
        const std::size_t start =
            2 + 300 * static_cast<std::size_t>(st.subframes_decoded);
        st.subframes_decoded++;
        const auto data = detail::checked_subframe(st.aligned_bits, start);
        if (!data)
            continue; // parity noise; alignment is kept
        if (((*data)[0] >> 16) != preamble_bits)
            continue;
        const auto sf = unpack_subframe(*data);
        st.last_tow_s = static_cast<std::int64_t>(sf.tow_count) * 6;
        switch (sf.subframe_id) {
        case 1: st.sub1 = sf.partial; break;
        case 2: st.sub2 = sf.partial; break;
        case 3: st.sub3 = sf.partial; break;
        default: break;
        }
        if (st.sub1 && st.sub2 && st.sub3 &&
            st.sub2->iode == st.sub3->iode &&
            (st.sub1->iodc & 0xFF) == st.sub2->iode) {
            Ephemeris e = *st.sub1;
            const Ephemeris& s2 = *st.sub2;
            e.iode = s2.iode;
            e.crs_m = s2.crs_m;
            e.delta_n_rad_s = s2.delta_n_rad_s;
            e.m0_rad = s2.m0_rad;
            e.cuc_rad = s2.cuc_rad;
            e.ecc = s2.ecc;
            e.cus_rad = s2.cus_rad;
            e.sqrt_a = s2.sqrt_a;
            e.toe_s = s2.toe_s;
            const Ephemeris& s3 = *st.sub3;
            e.cic_rad = s3.cic_rad;
            e.omega0_rad = s3.omega0_rad;
            e.cis_rad = s3.cis_rad;
            e.i0_rad = s3.i0_rad;
            e.crc_m = s3.crc_m;
            e.omega_rad = s3.omega_rad;
            e.omegadot_rad_s = s3.omegadot_rad_s;
            e.idot_rad_s = s3.idot_rad_s;
            st.eph = e;
            st.nav_state = NavState::Eph;
        }
    }
}

// Per-epoch entry point driven by the tracking loop: runs bit sync, bit
// accumulation, preamble search, and subframe decoding.
inline void on_prompt(NavDecodeState& st, double ip, std::int64_t epoch_index,
                      double chi_chips) {
    st.current_epoch = epoch_index;
    st.current_chi = chi_chips;
    const int sign = ip >= 0 ? 1 : -1;
    bit_sync(st, sign, epoch_index);
    if (auto bit = accumulate_bit(st, ip)) {
        st.bit_buffer.push_back(*bit);
        if (st.bit_buffer.size() > bit_buffer_cap)
            st.bit_buffer.pop_front();
        if (st.nav_state == NavState::Null) {
            find_preamble_and_tow(st);
        } else if (st.anchored) {
            st.aligned_bits.push_back(bit->value * st.polarity > 0 ? 0 : 1);
            decode_subframes(st);
        }
    }
    st.prev_prompt_sign = sign;
}

} // namespace nav

} // namespace l1rx
