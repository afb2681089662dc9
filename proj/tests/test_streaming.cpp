#include "doctest.h"

#include "rfsep/rng.hpp"
#include "rfsep/streaming.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

using namespace rfsep;

namespace {

IqSignal noise_source(double fs, size_t n, uint64_t seed) {
    Rng rng(seed);
    IqSignal x;
    x.sample_rate_hz = fs;
    x.samples.resize(n);
    for (auto& v : x.samples) v = cpx(rng.gaussian(), rng.gaussian());
    return x;
}

} // namespace

TEST_CASE("buffer latency formula anchors") {
    // [PAPER] 1 x 10240 / 50 kHz ~ 205 ms
    CHECK(buffer_latency(1, 10240, 50000.0) == 0.2048);
    // [TRIVIAL] linear in B
    CHECK(buffer_latency(2, 10240, 50000.0) == 2.0 * buffer_latency(1, 10240, 50000.0));
    // [DERIVED] B=16 arithmetic
    CHECK(buffer_latency(16, 10240, 50000.0) == 3.2768);
    CHECK_THROWS_AS(buffer_latency(0, 10240, 50000.0), std::invalid_argument);
    CHECK_THROWS_AS(buffer_latency(1, 10240, 0.0), std::invalid_argument);
}

TEST_CASE("output throughput formula anchors") {
    // [PAPER] 10240 samples in 25 ms -> 409.6 kHz ("or 410 kHz")
    CHECK(output_throughput(1, 10240, 0.025) == 409600.0);
    // [TRIVIAL] linear in B
    CHECK(output_throughput(2, 10240, 0.025) == 2.0 * output_throughput(1, 10240, 0.025));
    // [DERIVED] inference exactly one buffer period sits on the feasibility boundary
    CHECK(output_throughput(1, 10240, 0.2048) == 50000.0);
    CHECK_THROWS_AS(output_throughput(1, 10240, 0.0), std::invalid_argument);
}

TEST_CASE("measure_tau order statistics and sensitivity") {
    const TauStats fast = measure_tau(stub_model(0.001), 1, 256, 10, 3);
    CHECK(fast.min >= 0.0);
    CHECK(fast.min <= fast.p50);
    CHECK(fast.p50 <= fast.p95);
    CHECK(fast.p95 <= fast.max);
    CHECK(fast.mean >= 0.001); // sleeps at least the requested time
    const TauStats slow = measure_tau(stub_model(0.004), 1, 256, 10, 3);
    // [DERIVED] a model doing more work measures slower
    CHECK(slow.p50 > fast.p50);
    CHECK_THROWS_AS(measure_tau(stub_model(0.0), 1, 256, 5, 3), std::invalid_argument);
    CHECK_THROWS_AS(measure_tau(stub_model(0.0), 1, 256, 10, 1), std::invalid_argument);
}

TEST_CASE("fast stub stream is feasible with bounded backlog") {
    StreamConfig cfg;
    cfg.batch_size = 1;
    cfg.signal_length = 1000;
    cfg.sample_rate_hz = 10000.0; // 100 ms buffer period, large vs OS jitter
    const IqSignal src = noise_source(cfg.sample_rate_hz, 33000, 1);
    auto [out, rep] = run_stream(cfg, src, stub_model(0.001), 3.0);
    CHECK(rep.realtime_feasible);
    // conservation + order: passthrough output equals the streamed prefix
    const size_t buffers = 30000 / 1000;
    REQUIRE(out.size() == buffers * 1000);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.samples[i] == src.samples[i]);
    // backlog stays at the one-buffer level: scheduler preemption can inflate
    // single clock-derived samples, so bound the mean and cap the spikes
    double mean_queued = 0.0;
    size_t spiky = 0;
    for (const auto& b : rep.backlog_trace) {
        CHECK(b.queued_samples <= 4 * 1000);
        if (b.queued_samples > 2 * 1000) ++spiky;
        mean_queued += double(b.queued_samples);
    }
    CHECK(mean_queued / double(rep.backlog_trace.size()) <= 1.5 * 1000.0);
    CHECK(spiky * 10 <= rep.backlog_trace.size());
    CHECK(rep.backlog_trace.size() == buffers);
}

TEST_CASE("slow stub stream grows backlog and reports infeasible") {
    StreamConfig cfg;
    cfg.batch_size = 1;
    cfg.signal_length = 1000;
    cfg.sample_rate_hz = 10000.0; // 100 ms buffer period, model takes 200 ms
    const IqSignal src = noise_source(cfg.sample_rate_hz, 33000, 2);
    auto [out, rep] = run_stream(cfg, src, stub_model(0.200), 3.0);
    CHECK(!rep.realtime_feasible);
    CHECK(rep.output_throughput_hz < rep.input_throughput_hz);
    REQUIRE(!rep.backlog_trace.empty());
    // [DERIVED] queueing arithmetic: deficit rate fs/2 -> roughly linear growth
    const auto& last = rep.backlog_trace.back();
    CHECK(last.queued_samples >= 3 * 1000);
    // queueing bound: backlog(T) <= max(0, (fs - throughput) * T) + 2 B L
    for (const auto& b : rep.backlog_trace) {
        const double bound =
            std::max(0.0, (rep.input_throughput_hz - rep.output_throughput_hz) * b.time_s) +
            2.0 * 1000.0;
        CHECK(double(b.queued_samples) <= bound + 1000.0);
    }
    CHECK(out.size() == 30 * 1000);
}

TEST_CASE("end to end first-sample latency matches the latency budget") {
    StreamConfig cfg;
    cfg.batch_size = 1;
    cfg.signal_length = 10240;
    cfg.sample_rate_hz = 50000.0;
    const IqSignal src = noise_source(cfg.sample_rate_hz, 25000, 3);
    // [PAPER] 204.8 ms buffering + 25 ms inference ~ 230 ms, 15 ms overhead
    // budget; jitter only inflates the measurement, so take the best of three
    double best = 1e9;
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto [out, rep] = run_stream(cfg, src, stub_model(0.025), 0.45);
        best = std::min(best, rep.first_sample_latency_s);
        CHECK(rep.buffer_latency_s == 0.2048);
        CHECK(rep.realtime_feasible);
        CHECK(out.size() == 2 * 10240);
        if (std::abs(best - 0.2298) <= 0.015) break;
    }
    CHECK(std::abs(best - 0.2298) <= 0.015);
}

TEST_CASE("latency report arithmetic is internally consistent") {
    StreamConfig cfg;
    cfg.batch_size = 2;
    cfg.signal_length = 500;
    cfg.sample_rate_hz = 100000.0;
    const IqSignal src = noise_source(cfg.sample_rate_hz, 20000, 4);
    auto [out, rep] = run_stream(cfg, src, stub_model(0.002), 0.15);
    CHECK(rep.buffer_latency_s == buffer_latency(2, 500, 100000.0));
    CHECK(rep.output_throughput_hz == output_throughput(2, 500, rep.inference_time_s));
    CHECK(rep.realtime_feasible == (rep.output_throughput_hz >= rep.input_throughput_hz));
    CHECK(rep.inference_time_s == rep.tau_stats.mean);
    const std::string j = latency_report_json(rep);
    CHECK(j.find("\"realtime_feasible\": true") != std::string::npos);
    CHECK(j.find("backlog_trace") != std::string::npos);
}

TEST_CASE("batching sweep rows and flattening flag") {
    // per-sample cost: tau proportional to B, so throughput is flat in B
    const double per_sample = 2e-6;
    StreamFn linear_cost = [per_sample](const std::vector<cpx>& in) {
        std::this_thread::sleep_for(
            std::chrono::duration<double>(per_sample * double(in.size())));
        return in;
    };
    const SweepResult s = batching_sweep(linear_cost, 2048, 50000.0, {1, 2, 4}, 10);
    REQUIRE(s.rows.size() == 3);
    for (const auto& r : s.rows) {
        CHECK(r.status == "ok");
        // [TRIVIAL] buffer-latency column is the Eq.-form value exactly
        CHECK(r.buffer_latency_s == buffer_latency(r.batch_size, 2048, 50000.0));
        CHECK(r.per_window_s == r.tau_p50_s / double(r.batch_size));
    }
    // flat throughput -> flattening flagged early (scheduler overhead at the
    // smallest batch can defer detection by one step)
    CHECK((s.flattening_batch == 2 || s.flattening_batch == 4));

    // constant cost: throughput doubles with B, gains never flatten
    const SweepResult g = batching_sweep(stub_model(0.002), 2048, 50000.0, {1, 2, 4}, 10);
    CHECK(g.flattening_batch == 0);
    CHECK(g.rows[2].throughput_hz > 1.5 * g.rows[1].throughput_hz);

    // [TRIVIAL] single-entry sweep mirrors measure_tau
    const SweepResult one = batching_sweep(stub_model(0.003), 1024, 50000.0, {1}, 10);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].tau_p50_s >= 0.003);
    CHECK(one.rows[0].tau_p50_s < 0.010);

    const std::string csv = sweep_csv(s);
    CHECK(csv.rfind("batch_size,tau_p50_s,per_window_s,throughput_hz,buffer_latency_s,status\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    CHECK_THROWS_AS(batching_sweep(stub_model(0.001), 1024, 50000.0, {}, 10),
                    std::invalid_argument);
}

TEST_CASE("separator adapter preserves sample count") {
    SeparatorModel pass = SeparatorModel::make_passthrough();
    StreamFn fn = separator_stream_fn(pass, 50000.0);
    const IqSignal src = noise_source(50000.0, 2048, 5);
    const std::vector<cpx> y = fn(src.samples);
    REQUIRE(y.size() == src.size());
    for (size_t i = 0; i < y.size(); ++i) CHECK(y[i] == src.samples[i]);
}
