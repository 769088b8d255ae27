#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "l1rx/fft.hpp"
#include "l1rx/samples.hpp"

using namespace l1rx;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    auto p = fs::temp_directory_path() / ("l1rx_test_" + name);
    return p;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

SourceConfig int8iq_config(const fs::path& p, double fs_hz = 5e6,
                           bool paced = false) {
    SourceConfig cfg;
    cfg.locator = p.string();
    cfg.format.kind = SampleKind::Int8ComplexInterleaved;
    cfg.sample_rate_hz = fs_hz;
    cfg.paced = paced;
    return cfg;
}

} // namespace

TEST_CASE("int8 IQ interleave mapping and normalization") {
    auto p = temp_file("interleave.bin");
    write_bytes(p, {100, static_cast<std::uint8_t>(-50), 0, 127});
    auto src = open_source(int8iq_config(p));
    auto blk = src.read_block(1);
    REQUIRE(blk.has_value());
    REQUIRE(blk->count() == 2);
    CHECK(blk->samples[0] == cplx(100 / 128.0, -50 / 128.0));
    CHECK(blk->samples[1] == cplx(0.0, 127 / 128.0));
    CHECK(blk->truncated);
    fs::remove(p);
}

TEST_CASE("int16 little-endian mapping") {
    auto p = temp_file("int16.bin");
    // one sample: I = 0x0102 = 258, Q = -2 = 0xFFFE
    write_bytes(p, {0x02, 0x01, 0xFE, 0xFF});
    SourceConfig cfg = int8iq_config(p);
    cfg.format.kind = SampleKind::Int16ComplexInterleaved;
    auto src = open_source(cfg);
    auto blk = src.read_block(1);
    REQUIRE(blk.has_value());
    REQUIRE(blk->count() == 1);
    CHECK(blk->samples[0] == cplx(258 / 32768.0, -2 / 32768.0));
    fs::remove(p);
}

TEST_CASE("10 MB int8 IQ file at 5 MHz is 1.0 s and 1M samples per 200 ms") {
    auto p = temp_file("big.bin");
    {
        std::ofstream f(p, std::ios::binary);
        std::vector<char> chunk(1'000'000, 1);
        for (int i = 0; i < 10; ++i)
            f.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    }
    CHECK(recording_duration_s(10'000'000, SampleFormat{}, 5e6) == 1.0);
    // the 300 s regime at the same rate is 3e9 bytes
    CHECK(recording_duration_s(3'000'000'000ull, SampleFormat{}, 5e6) ==
          300.0);

    auto src = open_source(int8iq_config(p));
    std::int64_t total = 0;
    int blocks = 0;
    while (auto blk = src.read_block(200)) {
        CHECK(blk->count() == 1'000'000);
        CHECK(!blk->truncated);
        total += static_cast<std::int64_t>(blk->count());
        ++blocks;
    }
    CHECK(blocks == 5);
    CHECK(total == 5'000'000);
    fs::remove(p);
}

TEST_CASE("config validation") {
    SourceConfig cfg;
    cfg.locator = "/nonexistent";
    cfg.format.kind = SampleKind::Int8RealIF;
    cfg.format.if_frequency_hz = 0.0;
    cfg.sample_rate_hz = 5e6;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    cfg.format.kind = SampleKind::Int8ComplexInterleaved;
    cfg.format.if_frequency_hz = 0.0;
    cfg.sample_rate_hz = 1e6; // below C/A main lobe
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    cfg.sample_rate_hz = 5e6;
    cfg.block_length_ms = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    cfg.block_length_ms = 1;
    CHECK_NOTHROW(validate(cfg));
    CHECK_THROWS_AS(open_source(cfg), std::runtime_error); // no such file
}

TEST_CASE("lossless framing with truncated final block") {
    auto p = temp_file("lossless.bin");
    std::mt19937 rng(42);
    const std::size_t n_samples = 37'437; // not a multiple of 5000
    std::vector<std::uint8_t> bytes(2 * n_samples);
    for (auto& b : bytes)
        b = static_cast<std::uint8_t>(rng());
    write_bytes(p, bytes);

    auto src = open_source(int8iq_config(p));
    std::vector<cplx> all;
    std::int64_t expected_offset = 0;
    std::int64_t expected_index = 0;
    bool saw_truncated = false;
    while (auto blk = src.read_block(1)) {
        CHECK(blk->block_index == expected_index++);
        CHECK(blk->receiver_time_offset_samples == expected_offset);
        expected_offset += static_cast<std::int64_t>(blk->count());
        saw_truncated = blk->truncated;
        all.insert(all.end(), blk->samples.begin(), blk->samples.end());
    }
    CHECK(saw_truncated);
    REQUIRE(all.size() == n_samples);
    bool bytes_match = true;
    bool bounded = true;
    for (std::size_t i = 0; i < n_samples; ++i) {
        bytes_match &= all[i].real() ==
                       static_cast<std::int8_t>(bytes[2 * i]) / 128.0;
        bytes_match &= all[i].imag() ==
                       static_cast<std::int8_t>(bytes[2 * i + 1]) / 128.0;
        bounded &= std::abs(all[i].real()) <= 1.0 &&
                   std::abs(all[i].imag()) <= 1.0;
    }
    CHECK(bytes_match);
    CHECK(bounded);
    fs::remove(p);
}

TEST_CASE("paced delivery does not run ahead of wall clock") {
    auto p = temp_file("paced.bin");
    write_bytes(p, std::vector<std::uint8_t>(2 * 5000 * 10, 0)); // 10 ms
    auto src = open_source(int8iq_config(p, 5e6, true));
    const auto t0 = std::chrono::steady_clock::now();
    int k = 0;
    while (auto blk = src.read_block(1)) {
        const auto elapsed =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0)
                .count();
        CHECK(elapsed >= k * 1.0 - 1.0); // 1 ms scheduler slack
        ++k;
    }
    CHECK(k == 10);
    fs::remove(p);
}

TEST_CASE("real-IF downconversion centers a tone at baseband") {
    const double fs_hz = 16.3676e6;
    const double if_hz = 4.1304e6;
    const double tone_offset = 50e3;
    const std::size_t n = 16384;

    auto p = temp_file("realif.bin");
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs_hz;
        const double v =
            100.0 * std::cos(2.0 * constants::pi * (if_hz + tone_offset) * t);
        bytes[i] = static_cast<std::uint8_t>(
            static_cast<std::int8_t>(std::lround(v)));
    }
    write_bytes(p, bytes);

    SourceConfig cfg;
    cfg.locator = p.string();
    cfg.format.kind = SampleKind::Int8RealIF;
    cfg.format.if_frequency_hz = if_hz;
    cfg.sample_rate_hz = fs_hz;
    auto src = open_source(cfg);

    std::vector<cplx> all;
    while (auto blk = src.read_block(1))
        all.insert(all.end(), blk->samples.begin(), blk->samples.end());
    REQUIRE(all.size() == n);

    std::vector<cplx> spec(all.size());
    Fft::forward(all, spec);
    std::size_t peak = 0;
    double peak_mag = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (std::abs(spec[i]) > peak_mag) {
            peak_mag = std::abs(spec[i]);
            peak = i;
        }
    }
    double peak_hz = static_cast<double>(peak) * fs_hz /
                     static_cast<double>(all.size());
    if (peak_hz > fs_hz / 2)
        peak_hz -= fs_hz;
    const double bin_hz = fs_hz / static_cast<double>(all.size());
    CHECK(std::abs(peak_hz - tone_offset) <= bin_hz);

    // image at -2*IF - offset is suppressed by the half-band filter
    double image_hz = -2.0 * if_hz - tone_offset;
    auto image_bin = static_cast<std::size_t>(
        std::llround(image_hz / bin_hz + static_cast<double>(all.size()))) %
        all.size();
    CHECK(std::abs(spec[image_bin]) < peak_mag / 10.0);
    fs::remove(p);
}
