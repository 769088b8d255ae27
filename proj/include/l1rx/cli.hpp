#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l1rx/bench.hpp"
#include "l1rx/config.hpp"
#include "l1rx/report.hpp"

namespace l1rx {

namespace cli_detail {

// default receiver location for generated scenarios
inline const Vec3 default_site = geodetic_to_ecef(29.47, -98.62, 230.0);

inline int do_simulate(const std::string& scenario_path,
                       const std::string& output,
                       const std::string& truth_path,
                       const std::string& generate, int svs,
                       std::uint64_t seed, double duration, double cn0,
                       double rate) {
    SimScenario scenario;
    if (!generate.empty()) {
        scenario.duration_s = duration;
        scenario.sample_rate_hz = rate;
        scenario.seed = seed;
        scenario.tow_start_s = 259218;
        if (generate == "geometric") {
            scenario.mode = SimMode::Geometric;
            scenario.truth_receiver_ecef_m = default_site;
            scenario.satellites = make_geometric_constellation(
                svs, default_site, scenario.tow_start_s, seed, cn0);
        } else if (generate == "raw") {
            scenario.mode = SimMode::Raw;
            std::mt19937_64 rng(seed);
            for (int k = 0; k < svs; ++k) {
                SimSatellite sv;
                sv.prn = k + 1;
                sv.cn0_dbhz = cn0;
                sv.code_delay_chips =
                    static_cast<double>(rng() % 1023000) / 1000.0;
                sv.doppler_hz =
                    static_cast<double>(rng() % 8000) - 4000.0;
                scenario.satellites.push_back(sv);
            }
        } else {
            std::cerr << "unknown --generate kind '" << generate << "'\n";
            return 1;
        }
        save_json_file(scenario_path, to_json(scenario));
        std::cout << "wrote scenario " << scenario_path << "\n";
    } else {
        scenario = scenario_from_json(load_json_file(scenario_path));
    }

    if (output.empty())
        return 0;
    const auto truth = generate_recording(scenario, output);
    const auto tpath = truth_path.empty() ? output + ".truth.csv"
                                          : truth_path;
    write_truth_log(truth, tpath);
    std::cout << "wrote recording " << output << " ("
              << scenario.duration_s << " s at " << scenario.sample_rate_hz
              << " sps), truth log " << tpath << "\n";
    return 0;
}

inline int do_run(ReceiverConfig cfg, const std::string& out_dir,
                  bool require_fix) {
    cfg.output_dir = out_dir;
    Receiver receiver(cfg);
    const auto summary = receiver.run();
    save_json_file(out_dir + "/summary.json", to_json(summary));
    emit_plots(out_dir);
    std::cout << render_report(out_dir);

    if (summary.degraded) {
        std::cerr << "run degraded: paced overflow_count="
                  << summary.overflow_count << "\n";
        return 3;
    }
    if (require_fix) {
        bool any_valid = false;
        for (const auto& f : summary.fixes)
            any_valid |= f.solution.valid;
        if (!any_valid) {
            std::cerr << "no valid PVT fix produced\n";
            return 4;
        }
    }
    return 0;
}

inline int do_bench(const ReceiverConfig& cfg, const std::string& recording,
                    const std::string& variants, int reps,
                    const std::string& out_dir) {
    std::vector<BenchResult> results;
    if (variants == "all") {
        results = bench_all(recording, cfg, reps);
    } else {
        std::stringstream ss(variants);
        std::string name;
        while (std::getline(ss, name, ',')) {
            BenchVariant v;
            if (name == "base")
                v = BenchVariant::Base;
            else if (name == "parallel_loops")
                v = BenchVariant::ParallelLoops;
            else if (name == "batched_kernel")
                v = BenchVariant::BatchedKernel;
            else {
                std::cerr << "unknown variant '" << name << "'\n";
                return 1;
            }
            results.push_back(bench_tracking(recording, cfg, v, reps));
        }
        for (auto& r : results)
            if (results.front().variant == BenchVariant::Base)
                r.speedup_vs_base =
                    results.front().avg_ns_per_epoch_per_channel /
                    r.avg_ns_per_epoch_per_channel;
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/bench.csv");
    write_bench_csv(results, csv);
    write_bench_csv(results, std::cout);
    return 0;
}

} // namespace cli_detail

inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"GPS L1 C/A software receiver"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate",
                                   "render a scenario to a recording");
    std::string scenario_path, sim_out, truth_path, generate;
    int gen_svs = 8;
    std::uint64_t gen_seed = 1;
    double gen_duration = 60.0, gen_cn0 = 48.0, gen_rate = 5e6;
    sim->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();
    sim->add_option("-o,--output", sim_out, "output recording file");
    sim->add_option("--truth", truth_path, "truth log path");
    sim->add_option("--generate", generate,
                    "write a template scenario first: geometric|raw");
    sim->add_option("--svs", gen_svs, "satellites for --generate");
    sim->add_option("--seed", gen_seed, "seed for --generate");
    sim->add_option("--duration", gen_duration,
                    "seconds for --generate");
    sim->add_option("--cn0", gen_cn0, "C/N0 dB-Hz for --generate");
    sim->add_option("--rate", gen_rate, "sample rate for --generate");

    // run
    auto* run = app.add_subcommand("run", "run the receiver");
    std::string run_config, run_input, run_out = "l1rx_run";
    bool run_paced = false, require_fix = false;
    std::string kernel_override, parallel_override;
    run->add_option("-c,--config", run_config, "receiver config JSON")
        ->required();
    run->add_option("-i,--input", run_input, "recording file");
    run->add_option("-o,--output", run_out, "output directory");
    run->add_flag("--paced", run_paced, "real-time paced playback");
    run->add_option("--kernel", kernel_override, "scalar|batched");
    run->add_option("--parallel", parallel_override, "on|off");
    run->add_flag("--require-fix", require_fix,
                  "exit 4 unless a valid fix was produced");

    // bench
    auto* bench = app.add_subcommand(
        "bench", "acceleration study over a recording");
    std::string bench_config, bench_input, bench_out = "l1rx_bench";
    std::string variants = "all";
    int reps = 1;
    bench->add_option("-c,--config", bench_config, "receiver config JSON")
        ->required();
    bench->add_option("-i,--input", bench_input, "recording file")
        ->required();
    bench->add_option("--variants", variants,
                      "all or list: base,parallel_loops,batched_kernel");
    bench->add_option("--reps", reps, "repetitions (median reported)");
    bench->add_option("-o,--output", bench_out, "output directory");

    // report
    auto* report = app.add_subcommand("report",
                                      "render summary tables for a run");
    std::string report_dir;
    report->add_option("dir", report_dir, "run output directory")
        ->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sim->parsed())
            return cli_detail::do_simulate(scenario_path, sim_out,
                                           truth_path, generate, gen_svs,
                                           gen_seed, gen_duration, gen_cn0,
                                           gen_rate);
        if (run->parsed()) {
            auto cfg =
                receiver_config_from_json(load_json_file(run_config));
            if (!run_input.empty())
                cfg.source.locator = run_input;
            if (run_paced)
                cfg.source.paced = true;
            if (kernel_override == "scalar")
                cfg.kernel = KernelKind::Scalar;
            else if (kernel_override == "batched")
                cfg.kernel = KernelKind::Batched;
            else if (!kernel_override.empty()) {
                std::cerr << "--kernel must be scalar or batched\n";
                return 1;
            }
            if (parallel_override == "on")
                cfg.parallel_channels = true;
            else if (parallel_override == "off")
                cfg.parallel_channels = false;
            else if (!parallel_override.empty()) {
                std::cerr << "--parallel must be on or off\n";
                return 1;
            }
            return cli_detail::do_run(cfg, run_out, require_fix);
        }
        if (bench->parsed()) {
            const auto cfg =
                receiver_config_from_json(load_json_file(bench_config));
            return cli_detail::do_bench(cfg, bench_input, variants, reps,
                                        bench_out);
        }
        if (report->parsed()) {
            const auto text = render_report(report_dir);
            std::cout << text;
            std::ofstream f(report_dir + "/report.txt");
            f << text;
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run_cli(std::move(args));
}

} // namespace l1rx
