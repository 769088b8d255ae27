#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "l1rx/pipeline.hpp"

namespace l1rx {

enum class BenchVariant { Base, ParallelLoops, BatchedKernel };

inline const char* variant_name(BenchVariant v) {
    switch (v) {
    case BenchVariant::Base: return "base";
    case BenchVariant::ParallelLoops: return "parallel_loops";
    case BenchVariant::BatchedKernel: return "batched_kernel";
    }
    return "?";
}

// channels that fit one 1 ms epoch budget
inline double capacity(double avg_ns_per_epoch_per_channel) {
    if (avg_ns_per_epoch_per_channel <= 0)
        throw std::invalid_argument("avg_ns must be positive");
    return 1e6 / avg_ns_per_epoch_per_channel;
}

struct BenchResult {
    BenchVariant variant = BenchVariant::Base;
    double avg_ns_per_epoch_per_channel = 0;
    double capacity_channels = 0;
    double speedup_vs_base = 1.0;
    std::string environment;
};

inline std::string environment_descriptor() {
    std::ostringstream os;
    os << std::thread::hardware_concurrency() << " cores";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto pos = line.find(':');
            if (pos != std::string::npos)
                os << ";" << line.substr(pos + 1);
            break;
        }
    }
#ifdef __VERSION__
    os << "; gcc " << __VERSION__;
#endif
    return os.str();
}

// Times only the tracking stage across a full offline run of the
// recording; avg_ns is wall time of the tracking rounds divided by the
// number of channel-epochs executed, median over repetitions.
inline BenchResult bench_tracking(const std::string& recording,
                                  ReceiverConfig cfg, BenchVariant variant,
                                  int repetitions = 1) {
    if (repetitions < 1)
        throw std::invalid_argument("repetitions must be >= 1");
    cfg.source.locator = recording;
    cfg.source.paced = false;
    cfg.output_dir.clear();
    cfg.emit_telemetry = false;
    switch (variant) {
    case BenchVariant::Base:
        cfg.kernel = KernelKind::Scalar;
        cfg.parallel_channels = false;
        break;
    case BenchVariant::ParallelLoops:
        cfg.kernel = KernelKind::Scalar;
        cfg.parallel_channels = true;
        break;
    case BenchVariant::BatchedKernel:
        cfg.kernel = KernelKind::Batched;
        cfg.parallel_channels = true;
        break;
    }

    std::vector<double> avgs;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto summary = run_receiver(cfg);
        if (summary.channel_epochs == 0)
            throw std::runtime_error(
                "bench recording acquired no channels");
        avgs.push_back(static_cast<double>(summary.tracking_ns) /
                       static_cast<double>(summary.channel_epochs));
    }
    std::sort(avgs.begin(), avgs.end());
    BenchResult res;
    res.variant = variant;
    res.avg_ns_per_epoch_per_channel = avgs[avgs.size() / 2];
    res.capacity_channels = capacity(res.avg_ns_per_epoch_per_channel);
    res.environment = environment_descriptor();
    return res;
}

inline std::vector<BenchResult> bench_all(const std::string& recording,
                                          const ReceiverConfig& cfg,
                                          int repetitions = 1) {
    std::vector<BenchResult> out;
    for (auto v : {BenchVariant::Base, BenchVariant::ParallelLoops,
                   BenchVariant::BatchedKernel})
        out.push_back(bench_tracking(recording, cfg, v, repetitions));
    const double base = out.front().avg_ns_per_epoch_per_channel;
    for (auto& r : out)
        r.speedup_vs_base = base / r.avg_ns_per_epoch_per_channel;
    return out;
}

inline void write_bench_csv(const std::vector<BenchResult>& results,
                            std::ostream& os) {
    os << "variant,avg_ns_per_epoch_per_channel,capacity_channels,"
          "speedup_vs_base,environment\n";
    for (const auto& r : results) {
        os << variant_name(r.variant) << ','
           << r.avg_ns_per_epoch_per_channel << ',' << r.capacity_channels
           << ',' << r.speedup_vs_base << ",\"" << r.environment << "\"\n";
    }
}

} // namespace l1rx
