#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "l1rx/acquisition.hpp"
#include "l1rx/cacode.hpp"
#include "l1rx/pvt.hpp"
#include "l1rx/samples.hpp"
#include "l1rx/tracking.hpp"

namespace l1rx {

// Bounded FIFO between the producer and consumer loops. Offline the
// producer blocks when full (lossless); in paced mode the caller uses
// try_push and accounts the overflow.
class BlockQueue {
public:
    explicit BlockQueue(std::size_t capacity) : capacity_(capacity) {}

    bool push_blocking(SampleBlock&& block) {
        std::unique_lock lock(mutex_);
        cv_space_.wait(lock,
                       [&] { return queue_.size() < capacity_ || closed_; });
        if (closed_)
            return false;
        queue_.push_back(std::move(block));
        ++enqueued_;
        cv_data_.notify_one();
        return true;
    }

    bool try_push(SampleBlock&& block) {
        std::lock_guard lock(mutex_);
        if (closed_ || queue_.size() >= capacity_)
            return false;
        queue_.push_back(std::move(block));
        ++enqueued_;
        cv_data_.notify_one();
        return true;
    }

    std::optional<SampleBlock> pop() {
        std::unique_lock lock(mutex_);
        cv_data_.wait(lock, [&] { return !queue_.empty() || closed_; });
        if (queue_.empty())
            return std::nullopt;
        SampleBlock block = std::move(queue_.front());
        queue_.pop_front();
        ++dequeued_;
        cv_space_.notify_one();
        return block;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        cv_data_.notify_all();
        cv_space_.notify_all();
    }

    std::int64_t enqueued_count() const { return enqueued_; }
    std::int64_t dequeued_count() const { return dequeued_; }

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_data_, cv_space_;
    std::deque<SampleBlock> queue_;
    std::size_t capacity_;
    bool closed_ = false;
    std::atomic<std::int64_t> enqueued_{0};
    std::atomic<std::int64_t> dequeued_{0};
};

// Persistent worker pool for the per-channel tracking round. Workers pull
// task indices from a shared counter; results land in per-channel slots so
// the round is deterministic regardless of scheduling.
class ChannelPool {
public:
    explicit ChannelPool(int workers) {
        for (int i = 0; i < workers; ++i)
            threads_.emplace_back([this] { worker(); });
    }

    ~ChannelPool() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        cv_task_.notify_all();
        for (auto& t : threads_)
            t.join();
    }

    void run(int n_tasks, const std::function<void(int)>& fn) {
        if (n_tasks == 0)
            return;
        std::unique_lock lock(mutex_);
        fn_ = &fn;
        next_ = 0;
        total_ = n_tasks;
        remaining_ = n_tasks;
        cv_task_.notify_all();
        cv_done_.wait(lock, [&] { return remaining_ == 0; });
        fn_ = nullptr;
        total_ = 0;
    }

private:
    // index hand-out happens under the mutex: a worker can only take a
    // task while the matching run() call is still waiting, so fn_ stays
    // valid for exactly the tasks it covers
    void worker() {
        std::unique_lock lock(mutex_);
        while (true) {
            cv_task_.wait(lock,
                          [&] { return stopping_ || next_ < total_; });
            if (stopping_)
                return;
            const int idx = next_++;
            const auto* fn = fn_;
            lock.unlock();
            (*fn)(idx);
            lock.lock();
            if (--remaining_ == 0)
                cv_done_.notify_all();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_task_, cv_done_;
    const std::function<void(int)>* fn_ = nullptr;
    int next_ = 0;
    int total_ = 0;
    int remaining_ = 0;
    bool stopping_ = false;
};

enum class ReceiverMode { ColdStart, Tracking };

struct ReceiverConfig {
    SourceConfig source;
    AcqConfig acq;
    TrackingConfig tracking;
    KernelKind kernel = KernelKind::Batched;
    bool parallel_channels = false;
    int reacquire_threshold_channels = 4;
    int reacquire_interval_ms = 500; // continuous-acquisition cooldown
    int pvt_interval_epochs = 100;
    std::size_t queue_capacity = 32;

    // report sinks
    std::string output_dir;        // empty: keep everything in memory only
    bool emit_telemetry = true;
    int telemetry_decimation = 1;  // keep every Nth epoch record
    int health_interval_ms = 1000;
    std::size_t telemetry_queue_capacity = 1 << 16;
};

inline void validate(const ReceiverConfig& cfg) {
    validate(cfg.source);
    validate(cfg.tracking);
    if (cfg.pvt_interval_epochs < 1)
        throw std::invalid_argument("pvt_interval_epochs must be >= 1");
    if (cfg.queue_capacity < 2)
        throw std::invalid_argument("queue_capacity must be >= 2");
    if (cfg.reacquire_threshold_channels < 0 ||
        cfg.reacquire_threshold_channels > 12)
        throw std::invalid_argument(
            "reacquire_threshold_channels must be in 0..12");
    const double per_ms = cfg.source.sample_rate_hz / 1000.0;
    if (std::abs(per_ms - std::round(per_ms)) > 1e-9)
        throw std::invalid_argument(
            "receiver requires an integer number of samples per ms");
}

struct FixRecord {
    PvtSolution solution;
    std::int64_t sample_offset = 0;
    std::vector<Measurement> measurements;
};

struct ChannelSummary {
    int slot = 0;
    int prn = 0;
    ChannelRunState state = ChannelRunState::Idle;
    NavState nav_state = NavState::Null;
    double cn0_dbhz = 0;
    double carrier_lock_ratio = 0;
    int lock_fail_count = 0;
    std::int64_t epochs = 0;
    double chi_chips = 0;
    double carrier_doppler_hz = 0;
};

struct HealthSnapshot {
    std::int64_t sample_offset = 0;
    bool valid_pvt = false;
    std::array<ChannelSummary, 12> channels{};
};

struct RunSummary {
    std::vector<FixRecord> fixes;
    std::vector<HealthSnapshot> health;
    std::vector<AcquisitionResult> last_acquisition;
    std::array<ChannelSummary, 12> channels{};
    std::int64_t blocks_produced = 0;
    std::int64_t blocks_consumed = 0;
    std::int64_t overflow_count = 0;
    bool degraded = false;
    std::int64_t samples_processed = 0;
    std::int64_t rounds = 0;
    std::int64_t channel_epochs = 0;
    std::int64_t tracking_ns = 0;
    std::int64_t telemetry_dropped = 0;
    std::int64_t acquisition_runs = 0;
    double wall_seconds = 0;
    bool stopped_early = false;
};

namespace detail {

// lower-priority telemetry sink: bounded queue drained by its own writer
// thread; records MAY drop under pressure (drops are counted, never
// silent)
class TelemetrySink {
public:
    TelemetrySink(const std::string& path, std::size_t capacity)
        : capacity_(capacity) {
        if (path.empty())
            return;
        file_.open(path);
        file_ << "epoch_ms,prn,ip,qp,doppler_hz,code_freq_hz,cn0_dbhz,"
                 "carrier_lock_ratio,nav_state\n";
        writer_ = std::thread([this] { drain(); });
        active_ = true;
    }

    ~TelemetrySink() { finish(); }

    void push(const TrackingEpochOutput& rec) {
        if (!active_)
            return;
        {
            std::lock_guard lock(mutex_);
            if (queue_.size() >= capacity_) {
                ++dropped_;
                return;
            }
            queue_.push_back(rec);
        }
        cv_.notify_one();
    }

    void finish() {
        if (!active_)
            return;
        {
            std::lock_guard lock(mutex_);
            done_ = true;
        }
        cv_.notify_all();
        writer_.join();
        file_.close();
        active_ = false;
    }

    std::int64_t dropped() const { return dropped_; }

private:
    void drain() {
        std::vector<TrackingEpochOutput> batch;
        char line[256];
        while (true) {
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return !queue_.empty() || done_; });
                batch.assign(queue_.begin(), queue_.end());
                queue_.clear();
                if (batch.empty() && done_)
                    return;
            }
            for (const auto& r : batch) {
                std::snprintf(line, sizeof line,
                              "%lld,%d,%.9g,%.9g,%.4f,%.6f,%.2f,%.4f,%d\n",
                              static_cast<long long>(r.epoch_index), r.prn,
                              r.ip, r.qp, r.carrier_doppler_hz,
                              r.code_freq_hz, r.cn0_dbhz,
                              r.carrier_lock_ratio,
                              static_cast<int>(r.nav_state));
                file_ << line;
            }
        }
    }

    std::ofstream file_;
    std::thread writer_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<TrackingEpochOutput> queue_;
    std::size_t capacity_;
    std::atomic<std::int64_t> dropped_{0};
    bool done_ = false;
    bool active_ = false;
};

} // namespace detail

// The receiver: one producer thread feeding the lossless block queue, the
// consumer loop running acquisition, the per-channel tracking round, the
// sequential post-tracking barrier, nav decoding and navigation solutions.
class Receiver {
public:
    explicit Receiver(ReceiverConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        samples_per_ms_ = static_cast<std::int64_t>(
            std::llround(cfg_.source.sample_rate_hz / 1000.0));
        if (cfg_.parallel_channels)
            pool_ = std::make_unique<ChannelPool>(static_cast<int>(
                std::min<unsigned>(12, std::max<unsigned>(
                                           1, std::thread::
                                                  hardware_concurrency()))));
    }

    void request_stop() { stop_requested_ = true; }

    RunSummary run() {
        const auto wall_start = std::chrono::steady_clock::now();
        if (!cfg_.output_dir.empty())
            std::filesystem::create_directories(cfg_.output_dir);
        telemetry_ = std::make_unique<detail::TelemetrySink>(
            cfg_.output_dir.empty() || !cfg_.emit_telemetry
                ? std::string{}
                : cfg_.output_dir + "/telemetry.csv",
            cfg_.telemetry_queue_capacity);

        SampleSource source(cfg_.source);
        BlockQueue queue(cfg_.queue_capacity);

        std::thread producer([&] { producer_loop(source, queue); });

        while (!stop_requested_) {
            auto block = queue.pop();
            if (!block)
                break;
            consumer_step(*block);
        }
        queue.close();
        producer.join();
        if (acq_worker_.joinable())
            acq_worker_.join();

        summary_.blocks_produced = queue.enqueued_count();
        summary_.blocks_consumed = queue.dequeued_count();
        summary_.overflow_count = overflow_count_;
        summary_.degraded = degraded_;
        summary_.stopped_early = stop_requested_;
        for (int slot = 0; slot < 12; ++slot)
            summary_.channels[static_cast<std::size_t>(slot)] =
                channel_summary(slot);
        telemetry_->finish();
        summary_.telemetry_dropped = telemetry_->dropped();
        summary_.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          wall_start)
                .count();
        write_sinks();
        return summary_;
    }

    const RunSummary& summary() const { return summary_; }

private:
    void producer_loop(SampleSource& source, BlockQueue& queue) {
        while (!stop_requested_) {
            auto block = source.read_block();
            if (!block)
                break;
            if (cfg_.source.paced) {
                if (!queue.try_push(std::move(*block))) {
                    ++overflow_count_;
                    degraded_ = true; // never silent loss
                }
            } else {
                if (!queue.push_blocking(std::move(*block)))
                    break;
            }
        }
        queue.close();
    }

    void consumer_step(const SampleBlock& block) {
        append_to_window(block);
        feed_acquisition(block,
                         block.receiver_time_offset_samples +
                             static_cast<std::int64_t>(block.count()));
        const auto ms_in_block = static_cast<std::int64_t>(
            static_cast<std::int64_t>(block.count()) / samples_per_ms_);
        for (std::int64_t m = 0; m < ms_in_block; ++m) {
            const std::int64_t round_end =
                block.receiver_time_offset_samples +
                (m + 1) * samples_per_ms_;
            tracking_round(round_end);
            post_tracking(round_end);
            if (rounds_ % cfg_.pvt_interval_epochs == 0)
                navigation_step(round_end);
            if (rounds_ %
                    std::max<std::int64_t>(1, cfg_.health_interval_ms) ==
                0)
                snapshot_health(round_end);
        }
        summary_.samples_processed +=
            static_cast<std::int64_t>(block.count());
    }

    // --- sample window -------------------------------------------------

    void append_to_window(const SampleBlock& block) {
        if (window_.empty())
            window_base_ = block.receiver_time_offset_samples;
        window_.insert(window_.end(), block.samples.begin(),
                       block.samples.end());
        const std::int64_t window_end =
            window_base_ + static_cast<std::int64_t>(window_.size());
        const std::int64_t keep_from = window_end - 6 * samples_per_ms_ -
                                       static_cast<std::int64_t>(
                                           block.count());
        if (keep_from > window_base_) {
            window_.erase(window_.begin(),
                          window_.begin() + (keep_from - window_base_));
            window_base_ = keep_from;
        }
    }

    std::span<const cplx> epoch_view(std::int64_t offset) const {
        return {window_.data() + (offset - window_base_),
                static_cast<std::size_t>(samples_per_ms_)};
    }

    // --- acquisition ---------------------------------------------------

    int active_channels() const {
        int n = 0;
        for (const auto& ch : channels_)
            if (ch.state != ChannelRunState::Idle)
                ++n;
        return n;
    }

    void feed_acquisition(const SampleBlock& block, std::int64_t round_end) {
        bool wanted = mode_ == ReceiverMode::ColdStart ||
                      active_channels() < cfg_.reacquire_threshold_channels;
        // continuous acquisition is heavy: once out of cold start it is
        // re-armed at most once per cooldown interval
        if (wanted && mode_ == ReceiverMode::Tracking &&
            rounds_ - last_acq_round_ <
                static_cast<std::int64_t>(cfg_.reacquire_interval_ms))
            wanted = false;
        if (acq_running_) {
            if (acq_done_.load()) {
                acq_worker_.join();
                acq_running_ = false;
                adopt_acquisition(acq_results_, round_end);
                acq_buffer_.reset();
            }
            return;
        }
        if (!wanted) {
            // samples sent to the ACQ module are discarded and the module
            // itself is skipped
            acq_buffer_.reset();
            return;
        }
        if (!fill_acq_buffer(block, acq_buffer_, cfg_.acq))
            return;

        auto cfg = cfg_.acq;
        cfg.prn_list.clear();
        for (int prn = 1; prn <= 32; ++prn) {
            bool assigned = false;
            for (const auto& ch : channels_)
                if (ch.state != ChannelRunState::Idle && ch.prn == prn)
                    assigned = true;
            if (!assigned &&
                std::find(cfg_.acq.prn_list.begin(), cfg_.acq.prn_list.end(),
                          prn) != cfg_.acq.prn_list.end())
                cfg.prn_list.push_back(prn);
        }
        if (cfg.prn_list.empty()) {
            acq_buffer_.reset();
            return;
        }

        if (cfg_.source.paced) {
            // paced mode searches on a snapshot in the background so the
            // consumer keeps draining the lossless queue in real time
            acq_done_ = false;
            acq_running_ = true;
            acq_snapshot_ = acq_buffer_.buffer;
            acq_snapshot_start_ = acq_buffer_.start_offset;
            acq_worker_ = std::thread([this, cfg] {
                acq_results_ = acquire_all(acq_snapshot_, cfg,
                                           cfg_.source.sample_rate_hz);
                acq_done_ = true;
            });
        } else {
            acq_snapshot_start_ = acq_buffer_.start_offset;
            adopt_acquisition(acquire_all(acq_buffer_.buffer, cfg,
                                          cfg_.source.sample_rate_hz),
                              round_end);
            acq_buffer_.reset();
        }
    }

    void adopt_acquisition(const std::vector<AcquisitionResult>& results,
                           std::int64_t round_end) {
        summary_.last_acquisition = results;
        ++summary_.acquisition_runs;
        last_acq_round_ = rounds_;
        auto hits = results;
        std::erase_if(hits, [](const AcquisitionResult& r) {
            return !r.detected;
        });
        std::sort(hits.begin(), hits.end(),
                  [](const auto& a, const auto& b) {
                      return a.ratio > b.ratio;
                  });
        for (const auto& hit : hits) {
            auto slot = std::find_if(channels_.begin(), channels_.end(),
                                     [](const ChannelState& ch) {
                                         return ch.state ==
                                                ChannelRunState::Idle;
                                     });
            if (slot == channels_.end())
                break; // 12-channel cap
            init_channel_from_acquisition(
                *slot, hit.prn, hit.doppler_hz, acq_snapshot_start_,
                hit.code_delay_samples, round_end,
                cfg_.source.sample_rate_hz);
            channel_epoch_counts_[static_cast<std::size_t>(
                slot - channels_.begin())] = 0;
        }
        if (!hits.empty())
            mode_ = ReceiverMode::Tracking;
    }

    // --- tracking ------------------------------------------------------

    void tracking_round(std::int64_t round_end) {
        runnable_.clear();
        for (int slot = 0; slot < 12; ++slot) {
            auto& ch = channels_[static_cast<std::size_t>(slot)];
            if (ch.state == ChannelRunState::Idle)
                continue;
            if (ch.sample_offset_next_epoch + samples_per_ms_ <= round_end &&
                ch.sample_offset_next_epoch >= window_base_)
                runnable_.push_back(slot);
        }
        if (runnable_.empty())
            return;

        const auto t0 = std::chrono::steady_clock::now();
        auto run_one = [this](int slot) {
            auto& ch = channels_[static_cast<std::size_t>(slot)];
            round_outputs_[static_cast<std::size_t>(slot)] = track_epoch(
                ch, epoch_view(ch.sample_offset_next_epoch),
                ca_code_table()[static_cast<std::size_t>(ch.prn)],
                cfg_.tracking, cfg_.source.sample_rate_hz, cfg_.kernel);
        };
        if (pool_) {
            pool_->run(static_cast<int>(runnable_.size()),
                       [&](int i) {
                           run_one(runnable_[static_cast<std::size_t>(i)]);
                       });
        } else {
            for (int slot : runnable_)
                run_one(slot);
        }
        const auto t1 = std::chrono::steady_clock::now();
        summary_.tracking_ns +=
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                .count();
        summary_.channel_epochs +=
            static_cast<std::int64_t>(runnable_.size());

        // sink telemetry in slot order to keep emission deterministic
        for (int slot : runnable_) {
            auto& count =
                channel_epoch_counts_[static_cast<std::size_t>(slot)];
            ++count;
            if (cfg_.telemetry_decimation > 0 &&
                count % cfg_.telemetry_decimation == 0)
                telemetry_->push(
                    round_outputs_[static_cast<std::size_t>(slot)]);
        }
    }

    void post_tracking(std::int64_t round_end) {
        receiver_sample_clock_ = round_end;
        ++rounds_;
        measurements_.clear();
        for (const auto& ch : channels_) {
            if (ch.state != ChannelRunState::Tracking)
                continue;
            if (ch.nav.nav_state != NavState::Eph || !ch.nav.anchored ||
                !ch.nav.eph)
                continue;
            const double delta = static_cast<double>(
                round_end - ch.sample_offset_next_epoch);
            const double chi_at_epoch =
                ch.chi_chips +
                delta * ch.code_freq_hz / cfg_.source.sample_rate_hz;
            Measurement m;
            m.prn = ch.prn;
            m.transmit_time_s =
                ch.nav.anchor_tx_time_s +
                (chi_at_epoch - ch.nav.anchor_chi_chips) /
                    constants::chip_rate_hz;
            m.sample_offset = round_end;
            m.cn0_dbhz = ch.cn0_dbhz;
            measurements_.push_back(m);
        }
    }

    // --- navigation ----------------------------------------------------

    void navigation_step(std::int64_t round_end) {
        if (measurements_.size() < 4)
            return;
        std::vector<SatState> sats;
        sats.reserve(measurements_.size());
        for (const auto& m : measurements_) {
            const Ephemeris* eph = nullptr;
            for (const auto& ch : channels_)
                if (ch.prn == m.prn && ch.nav.eph)
                    eph = &*ch.nav.eph;
            if (!eph)
                return;
            // evaluate at satellite-clock time corrected once
            const double corr =
                sat_position(*eph, m.transmit_time_s).clock_correction_s;
            sats.push_back(sat_position(*eph, m.transmit_time_s - corr));
        }

        double t_rec;
        if (!have_time_)
            t_rec = bootstrap_reception_time(measurements_);
        else
            t_rec = rx_time_base_ +
                    static_cast<double>(round_end - rx_time_offset_) /
                        cfg_.source.sample_rate_hz;

        const auto prs = compute_pseudoranges(measurements_, t_rec);
        auto sol = lms_solve(prs, sats,
                             have_fix_ ? last_pos_ : Vec3{0, 0, 0},
                             have_fix_ ? last_bias_m_ : 0.0);
        sol.solve_time_s = t_rec;
        if (sol.valid) {
            have_fix_ = true;
            last_pos_ = sol.ecef_m;
            last_bias_m_ = sol.clock_bias_s * constants::speed_of_light_mps;
            have_time_ = true;
            rx_time_base_ = t_rec - sol.clock_bias_s;
            rx_time_offset_ = round_end;
        }
        summary_.fixes.push_back({sol, round_end, measurements_});
    }

    // --- reporting -----------------------------------------------------

    ChannelSummary channel_summary(int slot) const {
        const auto& ch = channels_[static_cast<std::size_t>(slot)];
        ChannelSummary cs;
        cs.slot = slot;
        cs.prn = ch.prn;
        cs.state = ch.state;
        cs.nav_state = ch.nav.nav_state;
        cs.cn0_dbhz = ch.cn0_dbhz;
        cs.carrier_lock_ratio = ch.carrier_lock_ratio;
        cs.lock_fail_count = ch.lock_fail_count;
        cs.epochs = ch.epoch_ms_count;
        cs.chi_chips = ch.chi_chips;
        cs.carrier_doppler_hz = ch.carrier_doppler_hz;
        return cs;
    }

    void snapshot_health(std::int64_t round_end) {
        HealthSnapshot snap;
        snap.sample_offset = round_end;
        snap.valid_pvt =
            !summary_.fixes.empty() && summary_.fixes.back().solution.valid;
        for (int slot = 0; slot < 12; ++slot)
            snap.channels[static_cast<std::size_t>(slot)] =
                channel_summary(slot);
        summary_.health.push_back(std::move(snap));
    }

    void write_sinks() const {
        if (cfg_.output_dir.empty())
            return;
        write_fix_log(cfg_.output_dir + "/fixes.csv");
        write_health_log(cfg_.output_dir + "/health.txt");
        if (!summary_.last_acquisition.empty()) {
            std::ofstream f(cfg_.output_dir + "/acquisition.csv");
            write_acquisition_report(summary_.last_acquisition, f);
        }
    }

public:
    void write_fix_log(const std::string& path) const {
        std::ofstream f(path);
        f << "time_s,lat_deg,lon_deg,height_m,ecef_x_m,ecef_y_m,ecef_z_m,"
             "clock_bias_s,gdop,rms_residual_m,n_sats,valid\n";
        char line[320];
        for (const auto& fix : summary_.fixes) {
            const auto& s = fix.solution;
            std::snprintf(line, sizeof line,
                          "%.9f,%.9f,%.9f,%.4f,%.4f,%.4f,%.4f,%.12e,%.4f,"
                          "%.4f,%d,%d\n",
                          s.solve_time_s, s.lat_deg, s.lon_deg, s.height_m,
                          s.ecef_m[0], s.ecef_m[1], s.ecef_m[2],
                          s.clock_bias_s, s.gdop, s.rms_residual_m,
                          s.n_sats_used, s.valid ? 1 : 0);
            f << line;
        }
    }

    void write_health_log(const std::string& path) const {
        static const char* nav_names[] = {"Null", "TOW", "EPH"};
        static const char* state_names[] = {"Idle", "Acquired", "Tracking"};
        std::ofstream f(path);
        for (const auto& snap : summary_.health) {
            f << "# t=" << static_cast<double>(snap.sample_offset) /
                                cfg_.source.sample_rate_hz
              << " s  ValidPVT=" << (snap.valid_pvt ? 1 : 0) << "\n";
            f << "slot prn state     cn0_dbhz lock_ratio lock_fails "
                 "nav\n";
            char line[160];
            for (const auto& cs : snap.channels) {
                std::snprintf(
                    line, sizeof line, "%4d %3d %-9s %8.1f %10.3f %10d %s\n",
                    cs.slot, cs.prn,
                    state_names[static_cast<int>(cs.state)], cs.cn0_dbhz,
                    cs.carrier_lock_ratio, cs.lock_fail_count,
                    nav_names[static_cast<int>(cs.nav_state)]);
                f << line;
            }
        }
    }

private:
    ReceiverConfig cfg_;
    std::int64_t samples_per_ms_ = 0;

    std::array<ChannelState, 12> channels_{};
    std::array<TrackingEpochOutput, 12> round_outputs_{};
    std::array<std::int64_t, 12> channel_epoch_counts_{};
    std::vector<int> runnable_;
    ReceiverMode mode_ = ReceiverMode::ColdStart;
    AcqBufferState acq_buffer_;
    std::vector<Measurement> measurements_;

    std::vector<cplx> window_;
    std::int64_t window_base_ = 0;
    std::int64_t receiver_sample_clock_ = 0;
    std::int64_t rounds_ = 0;
    std::int64_t last_acq_round_ = 0;

    bool have_fix_ = false;
    Vec3 last_pos_{};
    double last_bias_m_ = 0;
    bool have_time_ = false;
    double rx_time_base_ = 0;
    std::int64_t rx_time_offset_ = 0;

    std::unique_ptr<ChannelPool> pool_;
    std::unique_ptr<detail::TelemetrySink> telemetry_;

    std::thread acq_worker_;
    std::atomic<bool> acq_done_{false};
    bool acq_running_ = false;
    std::vector<cplx> acq_snapshot_;
    std::int64_t acq_snapshot_start_ = 0;
    std::vector<AcquisitionResult> acq_results_;

    std::atomic<bool> stop_requested_{false};
    std::atomic<std::int64_t> overflow_count_{0};
    std::atomic<bool> degraded_{false};

    RunSummary summary_;
};

inline RunSummary run_receiver(const ReceiverConfig& cfg) {
    Receiver receiver(cfg);
    return receiver.run();
}

} // namespace l1rx
