#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "l1rx/constants.hpp"

namespace l1rx {

using cplx = std::complex<double>;

enum class SampleKind {
    Int8ComplexInterleaved,
    Int16ComplexInterleaved,
    Int8RealIF,
};

struct SampleFormat {
    SampleKind kind = SampleKind::Int8ComplexInterleaved;
    double if_frequency_hz = 0.0; // 0 for complex-baseband kinds
};

inline int bytes_per_sample(SampleKind kind) {
    switch (kind) {
    case SampleKind::Int8ComplexInterleaved: return 2;
    case SampleKind::Int16ComplexInterleaved: return 4;
    case SampleKind::Int8RealIF: return 1;
    }
    return 0;
}

// A contiguous run of complex baseband samples, immutable once emitted.
struct SampleBlock {
    std::vector<cplx> samples;
    std::int64_t block_index = 0;
    double sample_rate_hz = 0.0;
    std::int64_t receiver_time_offset_samples = 0;
    bool truncated = false;

    std::size_t count() const { return samples.size(); }
};

struct SourceConfig {
    std::string locator;
    SampleFormat format;
    double sample_rate_hz = 5e6;
    int block_length_ms = 1;
    bool paced = false;
};

inline void validate(const SourceConfig& cfg) {
    if (cfg.sample_rate_hz < 2.046e6)
        throw std::invalid_argument(
            "sample_rate_hz must be >= 2.046 MHz to cover the C/A main lobe");
    if (cfg.block_length_ms < 1)
        throw std::invalid_argument("block_length_ms must be >= 1");
    const bool is_if = cfg.format.kind == SampleKind::Int8RealIF;
    if (is_if && cfg.format.if_frequency_hz <= 0.0)
        throw std::invalid_argument(
            "if_frequency_hz required for Int8RealIF format");
    if (!is_if && cfg.format.if_frequency_hz != 0.0)
        throw std::invalid_argument(
            "if_frequency_hz must be 0 for complex-baseband formats");
    if (cfg.format.if_frequency_hz >= cfg.sample_rate_hz / 2.0)
        throw std::invalid_argument("if_frequency_hz must be < fs/2");
}

inline double recording_duration_s(std::uint64_t file_bytes,
                                   const SampleFormat& fmt,
                                   double sample_rate_hz) {
    return static_cast<double>(file_bytes / bytes_per_sample(fmt.kind)) /
           sample_rate_hz;
}

namespace detail {

// 23-tap half-band low-pass (Hamming-windowed sinc, cutoff fs/4) used to
// reject the 2*IF image after the complex mixer.
inline const std::array<double, 23>& halfband_taps() {
    static const std::array<double, 23> taps = [] {
        std::array<double, 23> h{};
        constexpr int m = 11;
        double sum = 0.0;
        for (int n = 0; n < 23; ++n) {
            const double k = n - m;
            double v = (n == m) ? 0.5
                                : std::sin(constants::pi * k / 2.0) /
                                      (constants::pi * k);
            v *= 0.54 - 0.46 * std::cos(2.0 * constants::pi * n / 22.0);
            h[static_cast<std::size_t>(n)] = v;
            sum += v;
        }
        for (auto& v : h)
            v /= sum; // unit DC gain
        return h;
    }();
    return taps;
}

} // namespace detail

// Stateful reader over a headerless little-endian recording file.
// Single-owner: exactly one reader at a time.
class SampleSource {
public:
    explicit SampleSource(SourceConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        if (!std::filesystem::exists(cfg_.locator))
            throw std::runtime_error("recording not found: " + cfg_.locator);
        file_.open(cfg_.locator, std::ios::binary);
        if (!file_)
            throw std::runtime_error("cannot open recording: " + cfg_.locator);
        fir_history_.assign(detail::halfband_taps().size() - 1, cplx{0, 0});
        start_wall_ = std::chrono::steady_clock::now();
    }

    const SourceConfig& config() const { return cfg_; }

    std::optional<SampleBlock> read_block() {
        return read_block(cfg_.block_length_ms);
    }

    // Frames length_ms of stream time into one block; per-ms sample counts
    // follow floor((k+1)*fs/1000) - floor(k*fs/1000) so that no sample is
    // lost or duplicated at non-integer rates.
    std::optional<SampleBlock> read_block(int length_ms) {
        if (length_ms < 1)
            throw std::invalid_argument("length_ms must be >= 1");
        if (eos_)
            return std::nullopt;
        const double per_ms = cfg_.sample_rate_hz / 1000.0;
        const auto want = static_cast<std::size_t>(
            std::llround(std::floor((ms_consumed_ + length_ms) * per_ms)) -
            std::llround(std::floor(ms_consumed_ * per_ms)));
        ms_consumed_ += length_ms;

        SampleBlock block;
        block.sample_rate_hz = cfg_.sample_rate_hz;
        block.block_index = next_block_index_;
        block.receiver_time_offset_samples = samples_delivered_;
        block.samples = read_samples(want);
        if (block.samples.empty()) {
            eos_ = true;
            return std::nullopt;
        }
        block.truncated = block.samples.size() < want;
        if (block.truncated)
            eos_ = true;
        ++next_block_index_;
        samples_delivered_ += static_cast<std::int64_t>(block.samples.size());

        if (cfg_.paced) {
            const auto stream_time = std::chrono::duration<double>(
                static_cast<double>(samples_delivered_) /
                cfg_.sample_rate_hz);
            std::this_thread::sleep_until(
                start_wall_ + std::chrono::duration_cast<
                                  std::chrono::steady_clock::duration>(
                                  stream_time));
        }
        return block;
    }

    std::int64_t samples_delivered() const { return samples_delivered_; }

private:
    std::vector<cplx> read_samples(std::size_t want) {
        const int bps = bytes_per_sample(cfg_.format.kind);
        raw_.resize(want * static_cast<std::size_t>(bps));
        file_.read(reinterpret_cast<char*>(raw_.data()),
                   static_cast<std::streamsize>(raw_.size()));
        const auto got_bytes = static_cast<std::size_t>(file_.gcount());
        const std::size_t got = got_bytes / static_cast<std::size_t>(bps);

        std::vector<cplx> out;
        out.reserve(got);
        switch (cfg_.format.kind) {
        case SampleKind::Int8ComplexInterleaved:
            for (std::size_t i = 0; i < got; ++i) {
                const auto ii = static_cast<std::int8_t>(raw_[2 * i]);
                const auto qq = static_cast<std::int8_t>(raw_[2 * i + 1]);
                out.emplace_back(ii / 128.0, qq / 128.0);
            }
            break;
        case SampleKind::Int16ComplexInterleaved:
            for (std::size_t i = 0; i < got; ++i) {
                const auto ii = static_cast<std::int16_t>(
                    static_cast<std::uint16_t>(raw_[4 * i]) |
                    (static_cast<std::uint16_t>(raw_[4 * i + 1]) << 8));
                const auto qq = static_cast<std::int16_t>(
                    static_cast<std::uint16_t>(raw_[4 * i + 2]) |
                    (static_cast<std::uint16_t>(raw_[4 * i + 3]) << 8));
                out.emplace_back(ii / 32768.0, qq / 32768.0);
            }
            break;
        case SampleKind::Int8RealIF:
            out = downconvert(got);
            break;
        }
        return out;
    }

    // Complex mixer at -IF followed by the half-band low-pass; the factor 2
    // restores the amplitude split between the two spectral images.
    std::vector<cplx> downconvert(std::size_t got) {
        const auto& taps = detail::halfband_taps();
        const double w = -2.0 * constants::pi * cfg_.format.if_frequency_hz /
                         cfg_.sample_rate_hz;
        std::vector<cplx> mixed(got);
        for (std::size_t i = 0; i < got; ++i) {
            const double v = static_cast<std::int8_t>(raw_[i]) / 128.0;
            const double ph =
                w * static_cast<double>(input_samples_consumed_ +
                                        static_cast<std::int64_t>(i));
            mixed[i] = cplx(v * std::cos(ph), v * std::sin(ph));
        }
        input_samples_consumed_ += static_cast<std::int64_t>(got);

        // streaming FIR with history carried across blocks
        std::vector<cplx> padded;
        padded.reserve(fir_history_.size() + got);
        padded.insert(padded.end(), fir_history_.begin(), fir_history_.end());
        padded.insert(padded.end(), mixed.begin(), mixed.end());
        std::vector<cplx> out(got);
        for (std::size_t i = 0; i < got; ++i) {
            cplx acc{0, 0};
            for (std::size_t t = 0; t < taps.size(); ++t)
                acc += taps[t] * padded[i + taps.size() - 1 - t];
            out[i] = 2.0 * acc;
        }
        if (got >= fir_history_.size()) {
            std::copy(mixed.end() - static_cast<std::ptrdiff_t>(
                                        fir_history_.size()),
                      mixed.end(), fir_history_.begin());
        } else {
            fir_history_.erase(fir_history_.begin(),
                               fir_history_.begin() +
                                   static_cast<std::ptrdiff_t>(got));
            fir_history_.insert(fir_history_.end(), mixed.begin(),
                                mixed.end());
        }
        return out;
    }

    SourceConfig cfg_;
    std::ifstream file_;
    std::vector<std::uint8_t> raw_;
    std::vector<cplx> fir_history_;
    std::int64_t next_block_index_ = 0;
    std::int64_t samples_delivered_ = 0;
    std::int64_t input_samples_consumed_ = 0;
    std::int64_t ms_consumed_ = 0;
    bool eos_ = false;
    std::chrono::steady_clock::time_point start_wall_;
};

inline SampleSource open_source(SourceConfig cfg) {
    return SampleSource(std::move(cfg));
}

} // namespace l1rx
