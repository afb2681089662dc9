#include "rfsep/streaming.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <new>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rfsep {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

TauStats stats_from(std::vector<double> samples) {
    TauStats s;
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    const size_t n = samples.size();
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / double(n);
    s.p50 = samples[std::min(n - 1, static_cast<size_t>(0.50 * double(n)))];
    s.p95 = samples[std::min(n - 1, static_cast<size_t>(0.95 * double(n)))];
    s.min = samples.front();
    s.max = samples.back();
    return s;
}

} // namespace

StreamFn stub_model(double tau_seconds) {
    if (tau_seconds < 0.0) throw std::invalid_argument("stub_model: negative tau");
    return [tau_seconds](const std::vector<cpx>& in) {
        std::this_thread::sleep_for(std::chrono::duration<double>(tau_seconds));
        return in;
    };
}

StreamFn separator_stream_fn(SeparatorModel model, double sample_rate_hz) {
    return [model = std::move(model), sample_rate_hz](const std::vector<cpx>& in) {
        IqSignal x;
        x.sample_rate_hz = sample_rate_hz;
        x.samples = in;
        return model.separate(x).samples;
    };
}

double buffer_latency(size_t batch_size, size_t signal_length, double sample_rate_hz) {
    if (batch_size == 0 || signal_length == 0 || sample_rate_hz <= 0.0)
        throw std::invalid_argument("buffer_latency: all arguments must be positive");
    return double(batch_size) * double(signal_length) / sample_rate_hz;
}

double output_throughput(size_t batch_size, size_t signal_length, double inference_time_s) {
    if (batch_size == 0 || signal_length == 0 || inference_time_s <= 0.0)
        throw std::invalid_argument("output_throughput: all arguments must be positive");
    return double(batch_size) * double(signal_length) / inference_time_s;
}

TauStats measure_tau(const StreamFn& model, size_t batch_size, size_t signal_length,
                     size_t trials, size_t warmup) {
    if (trials < 10) throw std::invalid_argument("measure_tau: trials must be >= 10");
    if (warmup < 3) throw std::invalid_argument("measure_tau: warmup must be >= 3");
    const std::vector<cpx> buffer(batch_size * signal_length, cpx(0.0, 0.0));
    for (size_t i = 0; i < warmup; ++i) (void)model(buffer);
    std::vector<double> times;
    times.reserve(trials);
    for (size_t i = 0; i < trials; ++i) {
        const auto t0 = Clock::now();
        (void)model(buffer);
        times.push_back(seconds_since(t0));
    }
    return stats_from(std::move(times));
}

std::pair<IqSignal, LatencyReport> run_stream(const StreamConfig& cfg, const IqSignal& source,
                                              const StreamFn& model, double duration_s) {
    if (cfg.batch_size == 0 || cfg.signal_length == 0 || cfg.sample_rate_hz <= 0.0 ||
        cfg.queue_capacity == 0)
        throw std::invalid_argument("run_stream: bad stream config");
    const size_t buf_samples = cfg.batch_size * cfg.signal_length;
    const size_t total = static_cast<size_t>(duration_s * cfg.sample_rate_hz);
    if (source.size() < total)
        throw std::invalid_argument("run_stream: source shorter than requested duration");
    const size_t num_buffers = total / buf_samples;
    const double period = buffer_latency(cfg.batch_size, cfg.signal_length, cfg.sample_rate_hz);

    std::mutex mtx;
    std::condition_variable cv_push, cv_pop;
    std::deque<std::vector<cpx>> queue;
    bool producer_done = false;
    std::atomic<size_t> consumed{0};

    LatencyReport report;
    report.buffer_latency_s = period;
    report.input_throughput_hz = cfg.sample_rate_hz;
    std::vector<double> taus;
    taus.reserve(num_buffers);

    IqSignal out;
    out.sample_rate_hz = cfg.sample_rate_hz;
    out.samples.reserve(num_buffers * buf_samples);

    const auto t0 = Clock::now();

    std::thread producer([&] {
        for (size_t b = 0; b < num_buffers; ++b) {
            // buffer b is complete when its last sample has arrived in real time
            std::this_thread::sleep_until(
                t0 + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(double(b + 1) * period)));
            std::vector<cpx> buf(source.samples.begin() + b * buf_samples,
                                 source.samples.begin() + (b + 1) * buf_samples);
            {
                std::unique_lock<std::mutex> lk(mtx);
                cv_push.wait(lk, [&] { return queue.size() < cfg.queue_capacity; });
                queue.push_back(std::move(buf));
            }
            cv_pop.notify_one();
            // backlog counts samples that have arrived (by the clock) but are
            // not yet processed, so a blocked producer still shows growth
            const double now = seconds_since(t0);
            const size_t arrived =
                std::min(num_buffers * buf_samples,
                         static_cast<size_t>(now * cfg.sample_rate_hz));
            const size_t done = consumed.load();
            report.backlog_trace.push_back({now, arrived > done ? arrived - done : 0});
        }
        {
            std::lock_guard<std::mutex> lk(mtx);
            producer_done = true;
        }
        cv_pop.notify_one();
    });

    bool first = true;
    for (;;) {
        std::vector<cpx> buf;
        {
            std::unique_lock<std::mutex> lk(mtx);
            cv_pop.wait(lk, [&] { return !queue.empty() || producer_done; });
            if (queue.empty()) break;
            buf = std::move(queue.front());
            queue.pop_front();
        }
        cv_push.notify_one();
        const auto ti = Clock::now();
        std::vector<cpx> y = model(buf);
        taus.push_back(seconds_since(ti));
        if (y.size() != buf.size())
            throw std::runtime_error("run_stream: model changed the sample count");
        if (first) {
            report.first_sample_latency_s = seconds_since(t0);
            first = false;
        }
        out.samples.insert(out.samples.end(), y.begin(), y.end());
        consumed.fetch_add(buf_samples);
    }
    producer.join();

    report.tau_stats = stats_from(taus);
    report.inference_time_s = report.tau_stats.mean;
    report.output_throughput_hz =
        output_throughput(cfg.batch_size, cfg.signal_length, report.inference_time_s);
    report.realtime_feasible = report.output_throughput_hz >= report.input_throughput_hz;
    return {std::move(out), std::move(report)};
}

std::string latency_report_json(const LatencyReport& r) {
    nlohmann::json j;
    j["buffer_latency_s"] = r.buffer_latency_s;
    j["tau_stats"] = {{"mean", r.tau_stats.mean}, {"p50", r.tau_stats.p50},
                      {"p95", r.tau_stats.p95},   {"min", r.tau_stats.min},
                      {"max", r.tau_stats.max}};
    j["inference_time_s"] = r.inference_time_s;
    j["output_throughput_hz"] = r.output_throughput_hz;
    j["input_throughput_hz"] = r.input_throughput_hz;
    j["realtime_feasible"] = r.realtime_feasible;
    j["first_sample_latency_s"] = r.first_sample_latency_s;
    auto& trace = j["backlog_trace"] = nlohmann::json::array();
    for (const auto& b : r.backlog_trace)
        trace.push_back({{"time_s", b.time_s}, {"queued_samples", b.queued_samples}});
    return j.dump(2);
}

SweepResult batching_sweep(const StreamFn& model, size_t signal_length, double sample_rate_hz,
                           const std::vector<size_t>& batch_sizes, size_t trials) {
    if (batch_sizes.empty()) throw std::invalid_argument("batching_sweep: empty batch list");
    SweepResult result;
    for (size_t b : batch_sizes) {
        SweepRow row;
        row.batch_size = b;
        row.buffer_latency_s = buffer_latency(b, signal_length, sample_rate_hz);
        try {
            // medians: one preempted trial must not fake or mask a flattening
            const TauStats t = measure_tau(model, b, signal_length, trials);
            row.tau_p50_s = t.p50;
            row.per_window_s = t.p50 / double(b);
            row.throughput_hz = output_throughput(b, signal_length, t.p50);
        } catch (const std::bad_alloc&) {
            row.status = "oom"; // record and keep sweeping
        }
        result.rows.push_back(row);
    }
    const SweepRow* prev = nullptr;
    for (const auto& row : result.rows) {
        if (row.status != "ok") continue;
        if (prev && result.flattening_batch == 0) {
            const double gain = (row.throughput_hz - prev->throughput_hz) / prev->throughput_hz;
            if (gain < 0.05) result.flattening_batch = row.batch_size;
        }
        prev = &row;
    }
    return result;
}

std::string sweep_csv(const SweepResult& s) {
    std::string out = "batch_size,tau_p50_s,per_window_s,throughput_hz,buffer_latency_s,status\n";
    char line[256];
    for (const auto& r : s.rows) {
        std::snprintf(line, sizeof(line), "%zu,%.9f,%.9f,%.3f,%.9f,%s\n", r.batch_size,
                      r.tau_p50_s, r.per_window_s, r.throughput_hz, r.buffer_latency_s,
                      r.status.c_str());
        out += line;
    }
    return out;
}

} // namespace rfsep
