#pragma once

#include "rfsep/iq_signal.hpp"
#include "rfsep/train.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rfsep {

// One processing stage: consumes a buffer of B*L samples, returns the same
// number of samples. Wall-clock cost of the call is what measure_tau times.
using StreamFn = std::function<std::vector<cpx>(const std::vector<cpx>&)>;

// Passthrough that burns a fixed wall-clock time per call. Used for latency
// harness tests and feasibility boundary construction.
StreamFn stub_model(double tau_seconds);

// Adapter around a trained separator (processes the B windows serially).
StreamFn separator_stream_fn(SeparatorModel model, double sample_rate_hz);

struct TauStats {
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Buffer latency in seconds: exactly B*L/fs.
double buffer_latency(size_t batch_size, size_t signal_length, double sample_rate_hz);

// Output throughput in Hz: exactly B*L/inference_time.
double output_throughput(size_t batch_size, size_t signal_length, double inference_time_s);

// Wall-clock per forward pass of a B-buffer batch, monotonic clock, `warmup`
// discarded calls then `trials` measured ones.
TauStats measure_tau(const StreamFn& model, size_t batch_size, size_t signal_length,
                     size_t trials = 10, size_t warmup = 3);

struct StreamConfig {
    size_t batch_size = 1;
    size_t signal_length = 10240;
    double sample_rate_hz = 50000.0;
    size_t queue_capacity = 8; // bounded buffer between the two stages
};

struct BacklogSample {
    double time_s = 0.0;       // since stream start
    size_t queued_samples = 0; // produced but not yet processed
};

struct LatencyReport {
    double buffer_latency_s = 0.0;
    TauStats tau_stats;
    double inference_time_s = 0.0; // mean tau over the run
    double output_throughput_hz = 0.0;
    double input_throughput_hz = 0.0;
    bool realtime_feasible = false;
    double first_sample_latency_s = 0.0; // stream start -> first output ready
    std::vector<BacklogSample> backlog_trace;
};

std::string latency_report_json(const LatencyReport& r);

// Two pipelined stages: a producer paces `source` samples at fs and fills
// B*L-sample buffers; a consumer runs the model on each. The bounded queue is
// the only cross-thread channel. The trailing partial buffer is dropped.
std::pair<IqSignal, LatencyReport> run_stream(const StreamConfig& cfg, const IqSignal& source,
                                              const StreamFn& model, double duration_s);

struct SweepRow {
    size_t batch_size = 0;
    double tau_p50_s = 0.0;
    double per_window_s = 0.0; // tau/B
    double throughput_hz = 0.0;
    double buffer_latency_s = 0.0;
    std::string status = "ok";
};

struct SweepResult {
    std::vector<SweepRow> rows;
    // first B whose marginal throughput gain over the previous row is < 5%;
    // 0 when the gains never flatten within the list
    size_t flattening_batch = 0;
};

SweepResult batching_sweep(const StreamFn& model, size_t signal_length, double sample_rate_hz,
                           const std::vector<size_t>& batch_sizes, size_t trials = 10);

std::string sweep_csv(const SweepResult& s);

} // namespace rfsep
