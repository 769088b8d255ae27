#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "l1rx/bench.hpp"
#include "l1rx/pipeline.hpp"
#include "l1rx/simsource.hpp"

namespace l1rx {

// Configuration files are versioned JSON; schema violations are reported
// with the offending field path.
inline constexpr int config_schema_version = 1;

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error("config field '" + path + "': " + what),
          field_path(path) {}
    std::string field_path;
};

namespace detail {

using json = nlohmann::json;

inline const json& member(const json& j, const std::string& path) {
    const json* cur = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const auto key = path.substr(start, dot - start);
        if (!cur->is_object() || !cur->contains(key))
            throw ConfigError(path, "missing");
        cur = &(*cur)[key];
        if (dot == std::string::npos)
            return *cur;
        start = dot + 1;
    }
}

template <typename T>
T get(const json& j, const std::string& path) {
    try {
        return member(j, path).get<T>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

template <typename T>
T get_or(const json& j, const std::string& path, T fallback) {
    try {
        member(j, path);
    } catch (const ConfigError&) {
        return fallback;
    }
    return get<T>(j, path);
}

inline SampleKind sample_kind_from(const std::string& s,
                                   const std::string& path) {
    if (s == "int8_iq")
        return SampleKind::Int8ComplexInterleaved;
    if (s == "int16_iq")
        return SampleKind::Int16ComplexInterleaved;
    if (s == "int8_real_if")
        return SampleKind::Int8RealIF;
    throw ConfigError(path, "unknown sample format '" + s + "'");
}

inline std::string sample_kind_name(SampleKind k) {
    switch (k) {
    case SampleKind::Int8ComplexInterleaved: return "int8_iq";
    case SampleKind::Int16ComplexInterleaved: return "int16_iq";
    case SampleKind::Int8RealIF: return "int8_real_if";
    }
    return "?";
}

} // namespace detail

// --- receiver config -----------------------------------------------------

inline ReceiverConfig receiver_config_from_json(const nlohmann::json& j) {
    using detail::get;
    using detail::get_or;
    const int version = get<int>(j, "schema_version");
    if (version != config_schema_version)
        throw ConfigError("schema_version", "unsupported version");

    ReceiverConfig cfg;
    cfg.source.locator = get_or<std::string>(j, "source.path", "");
    cfg.source.format.kind = detail::sample_kind_from(
        get_or<std::string>(j, "source.format", "int8_iq"), "source.format");
    cfg.source.format.if_frequency_hz =
        get_or<double>(j, "source.if_frequency_hz", 0.0);
    cfg.source.sample_rate_hz = get<double>(j, "source.sample_rate_hz");
    cfg.source.block_length_ms = get_or<int>(j, "source.block_length_ms", 1);
    cfg.source.paced = get_or<bool>(j, "source.paced", false);

    cfg.acq.doppler_min_hz =
        get_or<double>(j, "acquisition.doppler_min_hz", -5000.0);
    cfg.acq.doppler_max_hz =
        get_or<double>(j, "acquisition.doppler_max_hz", 5000.0);
    cfg.acq.doppler_step_hz =
        get_or<double>(j, "acquisition.doppler_step_hz", 0.0);
    cfg.acq.integration_ms = get_or<int>(j, "acquisition.integration_ms", 4);
    cfg.acq.threshold_ratio =
        get_or<double>(j, "acquisition.threshold_ratio", 2.0);
    if (auto prns = get_or<std::vector<int>>(j, "acquisition.prn_list", {});
        !prns.empty())
        cfg.acq.prn_list = prns;

    cfg.tracking.el_spacing_chips =
        get_or<double>(j, "tracking.el_spacing_chips", 0.5);
    cfg.tracking.dll_bandwidth_hz =
        get_or<double>(j, "tracking.dll_bandwidth_hz", 2.0);
    cfg.tracking.dll_damping = get_or<double>(j, "tracking.dll_damping",
                                              0.707);
    cfg.tracking.pll_bandwidth_hz =
        get_or<double>(j, "tracking.pll_bandwidth_hz", 25.0);
    cfg.tracking.pll_damping = get_or<double>(j, "tracking.pll_damping",
                                              0.707);
    cfg.tracking.fll_bandwidth_hz =
        get_or<double>(j, "tracking.fll_bandwidth_hz", 25.0);
    cfg.tracking.fll_pull_in_ms =
        get_or<int>(j, "tracking.fll_pull_in_ms", 400);
    cfg.tracking.cn0_window_ms = get_or<int>(j, "tracking.cn0_window_ms",
                                             20);
    cfg.tracking.lock_fail_limit =
        get_or<int>(j, "tracking.lock_fail_limit", 50);

    const auto kernel = get_or<std::string>(j, "kernel", "batched");
    if (kernel == "batched")
        cfg.kernel = KernelKind::Batched;
    else if (kernel == "scalar")
        cfg.kernel = KernelKind::Scalar;
    else
        throw ConfigError("kernel", "must be 'scalar' or 'batched'");
    cfg.parallel_channels = get_or<bool>(j, "parallel_channels", false);
    cfg.reacquire_threshold_channels =
        get_or<int>(j, "reacquire_threshold_channels", 4);
    cfg.reacquire_interval_ms = get_or<int>(j, "reacquire_interval_ms", 500);
    cfg.pvt_interval_epochs = get_or<int>(j, "pvt_interval_epochs", 100);
    cfg.queue_capacity = get_or<std::size_t>(j, "queue_capacity", 32);
    cfg.emit_telemetry = get_or<bool>(j, "sinks.telemetry", true);
    cfg.telemetry_decimation =
        get_or<int>(j, "sinks.telemetry_decimation", 1);
    cfg.health_interval_ms = get_or<int>(j, "sinks.health_interval_ms",
                                         1000);
    try {
        validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("(validation)", e.what());
    }
    return cfg;
}

inline nlohmann::json to_json(const ReceiverConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = config_schema_version;
    j["source"] = {
        {"path", cfg.source.locator},
        {"format", detail::sample_kind_name(cfg.source.format.kind)},
        {"if_frequency_hz", cfg.source.format.if_frequency_hz},
        {"sample_rate_hz", cfg.source.sample_rate_hz},
        {"block_length_ms", cfg.source.block_length_ms},
        {"paced", cfg.source.paced},
    };
    j["acquisition"] = {
        {"doppler_min_hz", cfg.acq.doppler_min_hz},
        {"doppler_max_hz", cfg.acq.doppler_max_hz},
        {"doppler_step_hz", cfg.acq.doppler_step_hz},
        {"integration_ms", cfg.acq.integration_ms},
        {"threshold_ratio", cfg.acq.threshold_ratio},
    };
    j["tracking"] = {
        {"el_spacing_chips", cfg.tracking.el_spacing_chips},
        {"dll_bandwidth_hz", cfg.tracking.dll_bandwidth_hz},
        {"dll_damping", cfg.tracking.dll_damping},
        {"pll_bandwidth_hz", cfg.tracking.pll_bandwidth_hz},
        {"pll_damping", cfg.tracking.pll_damping},
        {"fll_bandwidth_hz", cfg.tracking.fll_bandwidth_hz},
        {"fll_pull_in_ms", cfg.tracking.fll_pull_in_ms},
        {"cn0_window_ms", cfg.tracking.cn0_window_ms},
        {"lock_fail_limit", cfg.tracking.lock_fail_limit},
    };
    j["kernel"] = cfg.kernel == KernelKind::Scalar ? "scalar" : "batched";
    j["parallel_channels"] = cfg.parallel_channels;
    j["reacquire_threshold_channels"] = cfg.reacquire_threshold_channels;
    j["reacquire_interval_ms"] = cfg.reacquire_interval_ms;
    j["pvt_interval_epochs"] = cfg.pvt_interval_epochs;
    j["queue_capacity"] = cfg.queue_capacity;
    j["sinks"] = {
        {"telemetry", cfg.emit_telemetry},
        {"telemetry_decimation", cfg.telemetry_decimation},
        {"health_interval_ms", cfg.health_interval_ms},
    };
    return j;
}

// --- scenario ------------------------------------------------------------

inline nlohmann::json to_json(const Ephemeris& e) {
    return {
        {"week_number", e.week_number}, {"sv_accuracy", e.sv_accuracy},
        {"sv_health", e.sv_health},     {"iodc", e.iodc},
        {"tgd_s", e.tgd_s},             {"toc_s", e.toc_s},
        {"af2_s_s2", e.af2_s_s2},       {"af1_s_s", e.af1_s_s},
        {"af0_s", e.af0_s},             {"iode", e.iode},
        {"crs_m", e.crs_m},             {"delta_n_rad_s", e.delta_n_rad_s},
        {"m0_rad", e.m0_rad},           {"cuc_rad", e.cuc_rad},
        {"ecc", e.ecc},                 {"cus_rad", e.cus_rad},
        {"sqrt_a", e.sqrt_a},           {"toe_s", e.toe_s},
        {"cic_rad", e.cic_rad},         {"omega0_rad", e.omega0_rad},
        {"cis_rad", e.cis_rad},         {"i0_rad", e.i0_rad},
        {"crc_m", e.crc_m},             {"omega_rad", e.omega_rad},
        {"omegadot_rad_s", e.omegadot_rad_s},
        {"idot_rad_s", e.idot_rad_s},
    };
}

inline Ephemeris ephemeris_from_json(const nlohmann::json& j,
                                     const std::string& prefix) {
    using detail::get;
    Ephemeris e;
    e.week_number = get<int>(j, prefix + "week_number");
    e.sv_accuracy = detail::get_or<int>(j, prefix + "sv_accuracy", 0);
    e.sv_health = detail::get_or<int>(j, prefix + "sv_health", 0);
    e.iodc = get<int>(j, prefix + "iodc");
    e.tgd_s = detail::get_or<double>(j, prefix + "tgd_s", 0.0);
    e.toc_s = get<double>(j, prefix + "toc_s");
    e.af2_s_s2 = detail::get_or<double>(j, prefix + "af2_s_s2", 0.0);
    e.af1_s_s = detail::get_or<double>(j, prefix + "af1_s_s", 0.0);
    e.af0_s = detail::get_or<double>(j, prefix + "af0_s", 0.0);
    e.iode = get<int>(j, prefix + "iode");
    e.crs_m = detail::get_or<double>(j, prefix + "crs_m", 0.0);
    e.delta_n_rad_s = detail::get_or<double>(j, prefix + "delta_n_rad_s",
                                             0.0);
    e.m0_rad = get<double>(j, prefix + "m0_rad");
    e.cuc_rad = detail::get_or<double>(j, prefix + "cuc_rad", 0.0);
    e.ecc = get<double>(j, prefix + "ecc");
    e.cus_rad = detail::get_or<double>(j, prefix + "cus_rad", 0.0);
    e.sqrt_a = get<double>(j, prefix + "sqrt_a");
    e.toe_s = get<double>(j, prefix + "toe_s");
    e.cic_rad = detail::get_or<double>(j, prefix + "cic_rad", 0.0);
    e.omega0_rad = get<double>(j, prefix + "omega0_rad");
    e.cis_rad = detail::get_or<double>(j, prefix + "cis_rad", 0.0);
    e.i0_rad = get<double>(j, prefix + "i0_rad");
    e.crc_m = detail::get_or<double>(j, prefix + "crc_m", 0.0);
    e.omega_rad = get<double>(j, prefix + "omega_rad");
    e.omegadot_rad_s = detail::get_or<double>(j, prefix + "omegadot_rad_s",
                                              0.0);
    e.idot_rad_s = detail::get_or<double>(j, prefix + "idot_rad_s", 0.0);
    return e;
}

inline nlohmann::json to_json(const SimScenario& sc) {
    nlohmann::json j;
    j["schema_version"] = config_schema_version;
    j["mode"] = sc.mode == SimMode::Raw ? "raw" : "geometric";
    j["duration_s"] = sc.duration_s;
    j["sample_rate_hz"] = sc.sample_rate_hz;
    j["format"] = detail::sample_kind_name(sc.format.kind);
    j["noise_enabled"] = sc.noise_enabled;
    j["seed"] = sc.seed;
    j["tow_start_s"] = sc.tow_start_s;
    if (sc.mode == SimMode::Geometric)
        j["receiver_ecef_m"] = sc.truth_receiver_ecef_m;
    auto& sats = j["satellites"] = nlohmann::json::array();
    for (const auto& sv : sc.satellites) {
        nlohmann::json s = {
            {"prn", sv.prn},
            {"cn0_dbhz", sv.cn0_dbhz},
            {"code_delay_chips", sv.code_delay_chips},
            {"doppler_hz", sv.doppler_hz},
            {"doppler_rate_hz_per_s", sv.doppler_rate_hz_per_s},
            {"carrier_phase_rad", sv.initial_carrier_phase_rad},
        };
        if (!sv.nav_bits.empty())
            s["nav_bits"] = sv.nav_bits;
        if (sv.ephemeris)
            s["ephemeris"] = to_json(*sv.ephemeris);
        sats.push_back(std::move(s));
    }
    return j;
}

inline SimScenario scenario_from_json(const nlohmann::json& j) {
    using detail::get;
    using detail::get_or;
    const int version = get<int>(j, "schema_version");
    if (version != config_schema_version)
        throw ConfigError("schema_version", "unsupported version");

    SimScenario sc;
    const auto mode = get<std::string>(j, "mode");
    if (mode == "raw")
        sc.mode = SimMode::Raw;
    else if (mode == "geometric")
        sc.mode = SimMode::Geometric;
    else
        throw ConfigError("mode", "must be 'raw' or 'geometric'");
    sc.duration_s = get<double>(j, "duration_s");
    sc.sample_rate_hz = get<double>(j, "sample_rate_hz");
    sc.format.kind = detail::sample_kind_from(
        get_or<std::string>(j, "format", "int8_iq"), "format");
    sc.noise_enabled = get_or<bool>(j, "noise_enabled", true);
    sc.seed = get_or<std::uint64_t>(j, "seed", 1);
    sc.tow_start_s = get_or<std::int64_t>(j, "tow_start_s", 259200);
    if (sc.mode == SimMode::Geometric)
        sc.truth_receiver_ecef_m =
            get<std::array<double, 3>>(j, "receiver_ecef_m");

    if (!j.contains("satellites") || !j["satellites"].is_array())
        throw ConfigError("satellites", "missing array");
    std::size_t idx = 0;
    for (const auto& s : j["satellites"]) {
        const std::string p = "satellites[" + std::to_string(idx++) + "].";
        SimSatellite sv;
        sv.prn = detail::get<int>(s, "prn");
        sv.cn0_dbhz = get_or<double>(s, "cn0_dbhz", 45.0);
        sv.code_delay_chips = get_or<double>(s, "code_delay_chips", 0.0);
        sv.doppler_hz = get_or<double>(s, "doppler_hz", 0.0);
        sv.doppler_rate_hz_per_s =
            get_or<double>(s, "doppler_rate_hz_per_s", 0.0);
        sv.initial_carrier_phase_rad =
            get_or<double>(s, "carrier_phase_rad", 0.0);
        sv.nav_bits = get_or<std::vector<int>>(s, "nav_bits", {});
        if (s.contains("ephemeris"))
            sv.ephemeris = ephemeris_from_json(s["ephemeris"], "");
        sc.satellites.push_back(std::move(sv));
    }
    try {
        validate(sc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("(validation)", e.what());
    }
    return sc;
}

// --- run summary -----------------------------------------------------

inline nlohmann::json to_json(const RunSummary& s) {
    nlohmann::json j;
    j["blocks_produced"] = s.blocks_produced;
    j["blocks_consumed"] = s.blocks_consumed;
    j["overflow_count"] = s.overflow_count;
    j["degraded"] = s.degraded;
    j["samples_processed"] = s.samples_processed;
    j["rounds"] = s.rounds;
    j["channel_epochs"] = s.channel_epochs;
    j["tracking_ns"] = s.tracking_ns;
    j["telemetry_dropped"] = s.telemetry_dropped;
    j["acquisition_runs"] = s.acquisition_runs;
    j["wall_seconds"] = s.wall_seconds;
    j["stopped_early"] = s.stopped_early;
    j["n_fixes"] = s.fixes.size();
    int valid = 0;
    for (const auto& f : s.fixes)
        if (f.solution.valid)
            ++valid;
    j["n_valid_fixes"] = valid;
    auto& channels = j["channels"] = nlohmann::json::array();
    static const char* nav_names[] = {"Null", "TOW", "EPH"};
    static const char* state_names[] = {"Idle", "Acquired", "Tracking"};
    for (const auto& cs : s.channels) {
        channels.push_back({
            {"slot", cs.slot},
            {"prn", cs.prn},
            {"state", state_names[static_cast<int>(cs.state)]},
            {"nav_state", nav_names[static_cast<int>(cs.nav_state)]},
            {"cn0_dbhz", cs.cn0_dbhz},
            {"carrier_lock_ratio", cs.carrier_lock_ratio},
            {"lock_fail_count", cs.lock_fail_count},
            {"epochs", cs.epochs},
        });
    }
    return j;
}

// --- file helpers ------------------------------------------------------

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void save_json_file(const std::string& path,
                           const nlohmann::json& j) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << "\n";
}

} // namespace l1rx
