#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "l1rx/cacode.hpp"
#include "l1rx/constants.hpp"
#include "l1rx/navdata.hpp"
#include "l1rx/samples.hpp"

namespace l1rx {

// Early/prompt/late in-phase and quadrature accumulations over one epoch.
// The prompt is also split into half-epoch sums: their pair drives the
// FLL at twice the unambiguous frequency range of whole-epoch pairs.
struct CorrelatorOutputs {
    double ie = 0, qe = 0, ip = 0, qp = 0, il = 0, ql = 0;
    double ip_h1 = 0, qp_h1 = 0, ip_h2 = 0, qp_h2 = 0;
    int n_samples = 0;
};

struct TrackingConfig {
    int epoch_ms = 1;
    double el_spacing_chips = 0.5;
    double dll_bandwidth_hz = 2.0;
    double dll_damping = 0.707;
    double pll_bandwidth_hz = 25.0;
    double pll_damping = 0.707;
    // 15 Hz keeps the pull-in frequency jitter well inside the PLL
    // capture range at 1 kHz updates; larger values leave the carrier
    // unlocked at the FLL hand-over
    double fll_bandwidth_hz = 15.0;
    int fll_pull_in_ms = 400;
    // half-epoch prompt pairs (wide +/-500 Hz range, noisier) for this
    // long, then consecutive-epoch pairs
    int fll_coarse_ms = 100;
    int cn0_window_ms = 20;
    int lock_fail_limit = 50;
    // channel-drop thresholds evaluated once metrics settle
    double cn0_drop_dbhz = 28.0;
    double carrier_lock_drop = 0.6;
};

inline void validate(const TrackingConfig& cfg) {
    if (cfg.el_spacing_chips <= 0 || cfg.el_spacing_chips > 1)
        throw std::invalid_argument("el_spacing_chips must be in (0,1]");
    if (cfg.dll_bandwidth_hz <= 0 || cfg.pll_bandwidth_hz <= 0 ||
        cfg.fll_bandwidth_hz <= 0)
        throw std::invalid_argument("loop bandwidths must be positive");
    if (cfg.epoch_ms != 1)
        throw std::invalid_argument("only 1 ms epochs are supported");
    if (cfg.cn0_window_ms < 2)
        throw std::invalid_argument("cn0_window_ms must be >= 2");
}

enum class ChannelRunState { Idle, Acquired, Tracking };
enum class KernelKind { Scalar, Batched, Noop };

// Second-order proportional-plus-integrator loop filter with bilinear
// integrator discretization; the FLL assist feeds the same integrator as a
// first-order branch during pull-in.
struct LoopFilterState {
    double integrator = 0;
    double prev_error = 0;
    bool primed = false;
};

inline double natural_frequency(double bandwidth_hz, double damping) {
    return 8.0 * damping * bandwidth_hz / (4.0 * damping * damping + 1.0);
}

inline double loop_filter_update(LoopFilterState& st, double error,
                                 double bandwidth_hz, double damping,
                                 double dt_s) {
    const double wn = natural_frequency(bandwidth_hz, damping);
    const double prev = st.primed ? st.prev_error : error;
    st.integrator += wn * wn * dt_s * 0.5 * (error + prev);
    st.prev_error = error;
    st.primed = true;
    return st.integrator + 2.0 * damping * wn * error;
}

// 1st-order FLL branch entering the PLL integrator (rad/s per Hz of
// frequency error).
inline void fll_assist(LoopFilterState& pll, double freq_error_hz,
                       double fll_bandwidth_hz, double dt_s) {
    pll.integrator += 4.0 * fll_bandwidth_hz * 2.0 * constants::pi *
                      freq_error_hz * dt_s;
}

// Normalized early-minus-late envelope, 1/2 * (E - L) / (E + L).
inline double dll_discriminator(const CorrelatorOutputs& out) {
    const double e = std::sqrt(out.ie * out.ie + out.qe * out.qe);
    const double l = std::sqrt(out.il * out.il + out.ql * out.ql);
    if (e + l == 0.0)
        return 0.0; // dead channel; caller counts the lock-fail
    return 0.5 * (e - l) / (e + l);
}

// Costas two-quadrant atan, insensitive to nav-bit sign flips.
inline double pll_discriminator(const CorrelatorOutputs& out) {
    if (out.ip == 0.0) {
        if (out.qp == 0.0)
            return 0.0;
        return out.qp > 0 ? constants::pi / 2.0 : -constants::pi / 2.0;
    }
    return std::atan(out.qp / out.ip);
}

inline double fll_discriminator(double prev_ip, double prev_qp, double cur_ip,
                                double cur_qp, double dt_s) {
    const double cross = prev_ip * cur_qp - prev_qp * cur_ip;
    const double dot = prev_ip * cur_ip + prev_qp * cur_qp;
    if (cross == 0.0 && dot == 0.0)
        return 0.0;
    return std::atan2(cross, dot) / (2.0 * constants::pi * dt_s);
}

// Pull-in variant used inside the tracking loop: folding the vector into
// the right half plane strips nav-bit sign flips, which otherwise read as
// +/-500 Hz impulses at 1 ms spacing.
inline double fll_discriminator_data_insensitive(double prev_ip,
                                                 double prev_qp,
                                                 double cur_ip, double cur_qp,
                                                 double dt_s) {
    double cross = prev_ip * cur_qp - prev_qp * cur_ip;
    double dot = prev_ip * cur_ip + prev_qp * cur_qp;
    if (dot < 0) {
        cross = -cross;
        dot = -dot;
    }
    if (cross == 0.0 && dot == 0.0)
        return 0.0;
    return std::atan2(cross, dot) / (2.0 * constants::pi * dt_s);
}

// Code NCO steering: chip rate scaled by carrier Doppler (1/1540 for L1)
// plus the DLL filter output.
inline double carrier_aid_code_freq(double doppler_hz,
                                    double dll_filter_output_hz = 0.0) {
    return constants::chip_rate_hz *
               (1.0 + doppler_hz / constants::f_l1_hz) +
           dll_filter_output_hz;
}

// Reusable per-channel workspace for the batched kernel; sized once,
// no per-epoch allocation.
struct KernelScratch {
    std::vector<double> xr, xi;         // deinterleaved input
    std::vector<double> carrier_re, carrier_im;
    std::vector<double> early, prompt, late;
    std::vector<double> code_ext;       // chips tripled for mod-free lookup
    int code_ext_prn = 0;

    void ensure(std::size_t n, const CaCode& code) {
        if (xr.size() < n) {
            xr.resize(n);
            xi.resize(n);
            carrier_re.resize(n);
            carrier_im.resize(n);
            early.resize(n);
            prompt.resize(n);
            late.resize(n);
        }
        if (code_ext_prn != code.prn) {
            code_ext.resize(3 * 1023 + 2);
            for (std::size_t i = 0; i < code_ext.size(); ++i)
                code_ext[i] = code.chips[i % 1023];
            code_ext_prn = code.prn;
        }
    }
};

struct ChannelState {
    int prn = 0;
    ChannelRunState state = ChannelRunState::Idle;

    double code_phase_chips = 0; // replica phase at the next epoch start
    double code_freq_hz = constants::chip_rate_hz;
    double carrier_doppler_hz = 0;
    double carrier_phase_rad = 0;
    double chi_chips = 0; // unwrapped code phase accumulator

    LoopFilterState dll_filter, pll_filter;
    bool fll_enabled = true;
    double last_ip = 0, last_qp = 0;
    bool have_last_prompt = false;

    std::int64_t epoch_ms_count = 0;
    std::int64_t epochs_since_handoff = 0;
    double cn0_dbhz = 0;
    double carrier_lock_ratio = 0;
    int lock_fail_count = 0;
    bool metrics_valid = false;

    NavDecodeState nav;
    std::int64_t sample_offset_next_epoch = 0;

    // C/N0 narrowband/wideband accumulation window
    std::vector<double> win_ip, win_qp;
    double mu_smoothed = 0;

    KernelScratch scratch;
};

struct TrackingEpochOutput {
    int prn = 0;
    double ip = 0, qp = 0;
    std::int64_t epoch_index = 0;
    std::int64_t sample_offset_end = 0;
    double carrier_doppler_hz = 0;
    double code_freq_hz = 0;
    double code_phase_chips = 0;
    double chi_chips = 0;
    double cn0_dbhz = 0;
    double carrier_lock_ratio = 0;
    ChannelRunState state = ChannelRunState::Idle;
    NavState nav_state = NavState::Null;
};

// Reference correlator: per-sample carrier synthesis and code lookup, the
// plain-loop baseline the accelerated kernel is measured against.
inline CorrelatorOutputs correlate_epoch_scalar(std::span<const cplx> view,
                                                ChannelState& ch,
                                                const CaCode& code,
                                                const TrackingConfig& cfg,
                                                double sample_rate_hz) {
    const std::size_t n = view.size();
    if (n == 0)
        throw std::invalid_argument("empty epoch view");
    const double w =
        2.0 * constants::pi * ch.carrier_doppler_hz / sample_rate_hz;
    const double cps = ch.code_freq_hz / sample_rate_hz;
    const double half_spacing = cfg.el_spacing_chips / 2.0;
    // offset keeps all three replica phases positive before flooring
    const double base = ch.code_phase_chips + 1023.0;

    CorrelatorOutputs out;
    const std::size_t n_half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta =
            ch.carrier_phase_rad + w * static_cast<double>(i);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const double wr = view[i].real() * c + view[i].imag() * s;
        const double wi = view[i].imag() * c - view[i].real() * s;

        const double ph = base + static_cast<double>(i) * cps;
        const auto pi_ = static_cast<std::int64_t>(ph + half_spacing);
        const auto pp = static_cast<std::int64_t>(ph);
        const auto pl = static_cast<std::int64_t>(ph - half_spacing);
        const double e = code.chips[static_cast<std::size_t>(pi_ % 1023)];
        const double p = code.chips[static_cast<std::size_t>(pp % 1023)];
        const double l = code.chips[static_cast<std::size_t>(pl % 1023)];

        out.ie += wr * e;
        out.qe += wi * e;
        out.ip += wr * p;
        out.qp += wi * p;
        out.il += wr * l;
        out.ql += wi * l;
        if (i < n_half) {
            out.ip_h1 += wr * p;
            out.qp_h1 += wi * p;
        } else {
            out.ip_h2 += wr * p;
            out.qp_h2 += wi * p;
        }
    }
    out.n_samples = static_cast<int>(n);

    ch.carrier_phase_rad = std::fmod(
        ch.carrier_phase_rad + w * static_cast<double>(n),
        2.0 * constants::pi);
    const double adv = static_cast<double>(n) * cps;
    ch.code_phase_chips = std::fmod(ch.code_phase_chips + adv, 1023.0);
    ch.chi_chips += adv;
    return out;
}

// Batched kernel: carrier and code replicas are generated in block passes
// into contiguous scratch arrays, then the six sums run as banked
// multiply-accumulate loops over those arrays (one per half-epoch, which
// also yields the split prompt sums the FLL wants).
inline CorrelatorOutputs correlate_epoch_batched(std::span<const cplx> view,
                                                 ChannelState& ch,
                                                 const CaCode& code,
                                                 const TrackingConfig& cfg,
                                                 double sample_rate_hz) {
    const std::size_t n = view.size();
    if (n == 0)
        throw std::invalid_argument("empty epoch view");
    ch.scratch.ensure(n, code);
    auto& sc = ch.scratch;

    const double w =
        2.0 * constants::pi * ch.carrier_doppler_hz / sample_rate_hz;
    const double cps = ch.code_freq_hz / sample_rate_hz;
    const double half = cfg.el_spacing_chips / 2.0;
    const double base = ch.code_phase_chips + 1023.0;
    const double* ext = sc.code_ext.data();

    // pass 1: deinterleave the input
    for (std::size_t i = 0; i < n; ++i) {
        sc.xr[i] = view[i].real();
        sc.xi[i] = view[i].imag();
    }

    // pass 2: carrier replica by rotation recurrence, eight interleaved
    // chains so the complex products pipeline instead of serializing on
    // one dependency chain
    {
        constexpr std::size_t nch = 8;
        double cr[nch], ci[nch];
        for (std::size_t k = 0; k < nch; ++k) {
            const double th =
                ch.carrier_phase_rad + w * static_cast<double>(k);
            cr[k] = std::cos(th);
            ci[k] = std::sin(th);
        }
        const double rr = std::cos(w * nch), ri = std::sin(w * nch);
        std::size_t i = 0;
        for (; i + nch <= n; i += nch) {
            for (std::size_t k = 0; k < nch; ++k) {
                sc.carrier_re[i + k] = cr[k];
                sc.carrier_im[i + k] = ci[k];
            }
            for (std::size_t k = 0; k < nch; ++k) {
                const double nr = cr[k] * rr - ci[k] * ri;
                const double ni = cr[k] * ri + ci[k] * rr;
                cr[k] = nr;
                ci[k] = ni;
            }
            if ((i & 1023) == 1016) { // keep the chains on the unit circle
                for (std::size_t k = 0; k < nch; ++k) {
                    const double inv =
                        1.0 / std::sqrt(cr[k] * cr[k] + ci[k] * ci[k]);
                    cr[k] *= inv;
                    ci[k] *= inv;
                }
            }
        }
        for (; i < n; ++i) {
            const double th =
                ch.carrier_phase_rad + w * static_cast<double>(i);
            sc.carrier_re[i] = std::cos(th);
            sc.carrier_im[i] = std::sin(th);
        }
    }

    // pass 3: code replicas; early/late indices derive from the prompt
    // floor and its fractional part, avoiding per-sample modulo
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = base + static_cast<double>(i) * cps;
        const auto idx = static_cast<std::int64_t>(ph);
        const double frac = ph - static_cast<double>(idx);
        sc.prompt[i] = ext[idx];
        sc.early[i] = ext[idx + (frac >= 1.0 - half ? 1 : 0)];
        sc.late[i] = ext[idx - (frac < half ? 1 : 0)];
    }

    // pass 4: banked multiply-accumulate, vectorizer friendly
    auto mac_range = [&sc](std::size_t lo, std::size_t hi,
                           double sums[6]) {
        constexpr std::size_t lanes = 8;
        double acc[6][lanes] = {};
        const std::size_t span = hi - lo;
        const std::size_t main_end = lo + span - span % lanes;
        for (std::size_t i = lo; i < main_end; i += lanes) {
            for (std::size_t k = 0; k < lanes; ++k) {
                const double wr = sc.xr[i + k] * sc.carrier_re[i + k] +
                                  sc.xi[i + k] * sc.carrier_im[i + k];
                const double wi = sc.xi[i + k] * sc.carrier_re[i + k] -
                                  sc.xr[i + k] * sc.carrier_im[i + k];
                acc[0][k] += wr * sc.early[i + k];
                acc[1][k] += wi * sc.early[i + k];
                acc[2][k] += wr * sc.prompt[i + k];
                acc[3][k] += wi * sc.prompt[i + k];
                acc[4][k] += wr * sc.late[i + k];
                acc[5][k] += wi * sc.late[i + k];
            }
        }
        for (std::size_t i = main_end; i < hi; ++i) {
            const double wr = sc.xr[i] * sc.carrier_re[i] +
                              sc.xi[i] * sc.carrier_im[i];
            const double wi = sc.xi[i] * sc.carrier_re[i] -
                              sc.xr[i] * sc.carrier_im[i];
            acc[0][0] += wr * sc.early[i];
            acc[1][0] += wi * sc.early[i];
            acc[2][0] += wr * sc.prompt[i];
            acc[3][0] += wi * sc.prompt[i];
            acc[4][0] += wr * sc.late[i];
            acc[5][0] += wi * sc.late[i];
        }
        for (int q = 0; q < 6; ++q) {
            sums[q] = 0;
            for (std::size_t k = 0; k < lanes; ++k)
                sums[q] += acc[q][k];
        }
    };

    CorrelatorOutputs out;
    const std::size_t n_half = n / 2;
    double h1[6], h2[6];
    mac_range(0, n_half, h1);
    mac_range(n_half, n, h2);
    out.ie = h1[0] + h2[0];
    out.qe = h1[1] + h2[1];
    out.ip = h1[2] + h2[2];
    out.qp = h1[3] + h2[3];
    out.il = h1[4] + h2[4];
    out.ql = h1[5] + h2[5];
    out.ip_h1 = h1[2];
    out.qp_h1 = h1[3];
    out.ip_h2 = h2[2];
    out.qp_h2 = h2[3];
    out.n_samples = static_cast<int>(n);

    ch.carrier_phase_rad = std::fmod(
        ch.carrier_phase_rad + w * static_cast<double>(n),
        2.0 * constants::pi);
    const double adv = static_cast<double>(n) * cps;
    ch.code_phase_chips = std::fmod(ch.code_phase_chips + adv, 1023.0);
    ch.chi_chips += adv;
    return out;
}

// Instrumentation stub: advances channel state like a real kernel but does
// no sample work; used to verify that bench timing wraps only the
// tracking-stage calls.
inline CorrelatorOutputs correlate_epoch_noop(std::span<const cplx> view,
                                              ChannelState& ch,
                                              double sample_rate_hz) {
    const std::size_t n = view.size();
    if (n == 0)
        throw std::invalid_argument("empty epoch view");
    const double w =
        2.0 * constants::pi * ch.carrier_doppler_hz / sample_rate_hz;
    ch.carrier_phase_rad = std::fmod(
        ch.carrier_phase_rad + w * static_cast<double>(n),
        2.0 * constants::pi);
    const double adv =
        static_cast<double>(n) * ch.code_freq_hz / sample_rate_hz;
    ch.code_phase_chips = std::fmod(ch.code_phase_chips + adv, 1023.0);
    ch.chi_chips += adv;
    CorrelatorOutputs out;
    out.n_samples = static_cast<int>(n);
    return out;
}

// Carrier lock ratio (smoothed cos 2*phase-error estimate) and C/N0 by the
// narrowband/wideband power ratio over cn0_window_ms one-ms accumulations.
// Prompt signs are rectified per epoch before the narrowband sum, which at
// healthy C/N0 is equivalent to bit-aligned accumulation without waiting
// for bit sync.
inline void update_quality_metrics(ChannelState& ch,
                                   const CorrelatorOutputs& out,
                                   const TrackingConfig& cfg) {
    const double pwr = out.ip * out.ip + out.qp * out.qp;
    const double clr_sample = pwr > 0 ? (out.ip * out.ip - out.qp * out.qp) /
                                            pwr
                                      : 0.0;
    const double alpha = 1.0 / static_cast<double>(cfg.cn0_window_ms);
    ch.carrier_lock_ratio += alpha * (clr_sample - ch.carrier_lock_ratio);

    ch.win_ip.push_back(out.ip);
    ch.win_qp.push_back(out.qp);
    const auto m = static_cast<std::size_t>(cfg.cn0_window_ms);
    if (ch.win_ip.size() >= m) {
        double nb_i = 0, nb_q = 0, wbp = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const double sgn = ch.win_ip[k] >= 0 ? 1.0 : -1.0;
            nb_i += sgn * ch.win_ip[k];
            nb_q += sgn * ch.win_qp[k];
            wbp += ch.win_ip[k] * ch.win_ip[k] +
                   ch.win_qp[k] * ch.win_qp[k];
        }
        ch.win_ip.clear();
        ch.win_qp.clear();
        // smooth the power ratio before the nonlinear map; averaging in
        // the dB domain reads several dB low once mu saturates toward M
        const double mu = wbp > 0 ? (nb_i * nb_i + nb_q * nb_q) / wbp : 0.0;
        ch.mu_smoothed = ch.metrics_valid
                             ? ch.mu_smoothed + 0.2 * (mu - ch.mu_smoothed)
                             : mu;
        const double md = static_cast<double>(m);
        if (ch.mu_smoothed >= md - 1e-9)
            ch.cn0_dbhz = 65.0; // noiseless cap
        else if (ch.mu_smoothed <= 1.0)
            ch.cn0_dbhz = 0.0;
        else
            ch.cn0_dbhz = 10.0 * std::log10((ch.mu_smoothed - 1.0) /
                                            (md - ch.mu_smoothed) / 1e-3);
        ch.metrics_valid = true;
    }

    // drop logic: gated until the FLL hand-over and the first full window,
    // so pull-in transients do not kill a healthy channel
    if (ch.metrics_valid &&
        ch.epochs_since_handoff >
            cfg.fll_pull_in_ms + cfg.cn0_window_ms) {
        if (ch.cn0_dbhz < cfg.cn0_drop_dbhz ||
            ch.carrier_lock_ratio < cfg.carrier_lock_drop)
            ch.lock_fail_count++;
        else
            ch.lock_fail_count = 0;
    }
    if (ch.lock_fail_count > cfg.lock_fail_limit) {
        ch.state = ChannelRunState::Idle;
        ch.nav = NavDecodeState{};
    }
}

// One full tracking epoch: correlate, discriminators, loop filters
// (FLL-assisted during pull-in), NCO updates with carrier aiding, quality
// metrics, nav-bit handoff. Deterministic given (channel, samples).
inline TrackingEpochOutput track_epoch(ChannelState& ch,
                                       std::span<const cplx> view,
                                       const CaCode& code,
                                       const TrackingConfig& cfg,
                                       double sample_rate_hz,
                                       KernelKind kernel) {
    if (ch.state == ChannelRunState::Idle)
        throw std::logic_error("track_epoch on an idle channel");

    const double chi_at_start = ch.chi_chips;
    CorrelatorOutputs out;
    switch (kernel) {
    case KernelKind::Scalar:
        out = correlate_epoch_scalar(view, ch, code, cfg, sample_rate_hz);
        break;
    case KernelKind::Batched:
        out = correlate_epoch_batched(view, ch, code, cfg, sample_rate_hz);
        break;
    case KernelKind::Noop:
        out = correlate_epoch_noop(view, ch, sample_rate_hz);
        break;
    }
    const double dt = static_cast<double>(out.n_samples) / sample_rate_hz;

    // discriminators
    const double e_env = std::sqrt(out.ie * out.ie + out.qe * out.qe) +
                         std::sqrt(out.il * out.il + out.ql * out.ql);
    const double dll_err = dll_discriminator(out);
    if (e_env == 0.0 && kernel != KernelKind::Noop)
        ch.lock_fail_count++;
    const double pll_err = pll_discriminator(out);

    // FLL assist, two pairing stages. Coarse: half-epoch prompt pairs
    // with the four-quadrant discriminator; both halves sit inside one
    // epoch where the nav bit is constant, so the full (-1000, 1000] Hz
    // range is usable and errors up to the 500 Hz acquisition bound sit
    // well inside it. Fine: consecutive-epoch pairs (a quarter of the
    // measurement noise) straddle bit edges, so they fold to the
    // data-insensitive half plane. A carrier-lock gate idles the assist
    // once the PLL holds phase, so the assist noise does not disturb the
    // locked loop.
    if (ch.fll_enabled &&
        ch.epochs_since_handoff <
            static_cast<std::int64_t>(cfg.fll_pull_in_ms) &&
        ch.carrier_lock_ratio < 0.8 && kernel != KernelKind::Noop) {
        if (ch.epochs_since_handoff <
            static_cast<std::int64_t>(cfg.fll_coarse_ms)) {
            const double f_err =
                fll_discriminator(out.ip_h1, out.qp_h1, out.ip_h2,
                                  out.qp_h2, dt / 2.0);
            fll_assist(ch.pll_filter, f_err, cfg.fll_bandwidth_hz, dt);
        } else if (ch.have_last_prompt) {
            const double f_err = fll_discriminator_data_insensitive(
                ch.last_ip, ch.last_qp, out.ip, out.qp, dt);
            fll_assist(ch.pll_filter, f_err, cfg.fll_bandwidth_hz, dt);
        }
    }

    const double doppler_cmd =
        loop_filter_update(ch.pll_filter, pll_err, cfg.pll_bandwidth_hz,
                           cfg.pll_damping, dt) /
        (2.0 * constants::pi);
    const double dll_cmd = loop_filter_update(
        ch.dll_filter, dll_err, cfg.dll_bandwidth_hz, cfg.dll_damping, dt);

    ch.carrier_doppler_hz = doppler_cmd;
    ch.code_freq_hz = carrier_aid_code_freq(doppler_cmd, dll_cmd);

    ch.last_ip = out.ip;
    ch.last_qp = out.qp;
    ch.have_last_prompt = true;
    if (ch.state == ChannelRunState::Acquired)
        ch.state = ChannelRunState::Tracking;

    update_quality_metrics(ch, out, cfg);

    if (ch.state != ChannelRunState::Idle)
        nav::on_prompt(ch.nav, out.ip, ch.epoch_ms_count, chi_at_start);

    ch.epoch_ms_count++;
    ch.epochs_since_handoff++;
    ch.sample_offset_next_epoch += out.n_samples;

    TrackingEpochOutput teo;
    teo.prn = ch.prn;
    teo.ip = out.ip;
    teo.qp = out.qp;
    teo.epoch_index = ch.epoch_ms_count - 1;
    teo.sample_offset_end = ch.sample_offset_next_epoch;
    teo.carrier_doppler_hz = ch.carrier_doppler_hz;
    teo.code_freq_hz = ch.code_freq_hz;
    teo.code_phase_chips = ch.code_phase_chips;
    teo.chi_chips = ch.chi_chips;
    teo.cn0_dbhz = ch.cn0_dbhz;
    teo.carrier_lock_ratio = ch.carrier_lock_ratio;
    teo.state = ch.state;
    teo.nav_state = ch.nav.nav_state;
    return teo;
}

// Hands an acquisition hit to a channel: the first epoch starts at the
// first code-period boundary at or after start_offset_samples.
inline void init_channel_from_acquisition(
    ChannelState& ch, int prn, double doppler_hz,
    std::int64_t acq_buffer_start, int code_delay_samples,
    std::int64_t start_offset_samples, double sample_rate_hz) {
    ch = ChannelState{};
    ch.prn = prn;
    ch.state = ChannelRunState::Acquired;
    ch.carrier_doppler_hz = doppler_hz;
    ch.code_freq_hz = carrier_aid_code_freq(doppler_hz);
    // prime the PLL integrator so zero phase error holds the acquired
    // Doppler
    ch.pll_filter.integrator = 2.0 * constants::pi * doppler_hz;

    const auto samples_per_ms =
        static_cast<std::int64_t>(std::llround(sample_rate_hz / 1000.0));
    const std::int64_t boundary = acq_buffer_start + code_delay_samples;
    std::int64_t start = boundary;
    if (start < start_offset_samples) {
        const std::int64_t gap = start_offset_samples - boundary;
        start = boundary +
                ((gap + samples_per_ms - 1) / samples_per_ms) *
                    samples_per_ms;
    }
    ch.sample_offset_next_epoch = start;
    const double cps = ch.code_freq_hz / sample_rate_hz;
    ch.code_phase_chips = std::fmod(
        static_cast<double>(start - boundary) * cps, 1023.0);
    ch.chi_chips = ch.code_phase_chips;
}

} // namespace l1rx
