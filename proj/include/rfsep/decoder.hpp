#pragma once

#include "rfsep/checkpoint.hpp"
#include "rfsep/tensor.hpp"

#include <cstdint>
#include <deque>
#include <vector>

namespace rfsep {

struct DecoderConfig {
    size_t num_layers = 4;
    size_t hidden_dim = 96;
    size_t num_heads = 4;
    size_t window_samples = 64; // W: I/Q samples per token
    size_t context_windows = 32; // K: attention span in tokens
    double rope_base = 10000.0;

    // Table-scale configuration: 14 layers, 480 hidden, 12 heads,
    // 80-sample windows with a 20-token context.
    static DecoderConfig paper_scale();

    void validate() const;
    size_t head_dim() const { return hidden_dim / num_heads; }
    size_t token_dim() const { return 2 * window_samples; } // flattened I/Q window
};

// Per-layer key/value cache for incremental decoding. Holds at most K tokens;
// the oldest entry is evicted first.
struct StreamState {
    struct LayerCache {
        std::deque<std::vector<float>> keys;   // each [hidden_dim], rope applied
        std::deque<std::vector<float>> values; // each [hidden_dim]
    };
    std::vector<LayerCache> layers;
    std::vector<float> last_soi_window; // [2W], fed back autoregressively
    size_t token_counter = 0;
};

// Autoregressive separator: each token embeds the current mixture window
// together with the previous SOI window, runs causal self-attention with
// rotary positional encodings over at most K past tokens, and emits the SOI
// window for the current position.
class TransformerDecoder {
  public:
    TransformerDecoder(DecoderConfig cfg, uint64_t seed);

    // Teacher-forced batch path. mixture and soi_teacher are [T, 2W] token
    // matrices (see windows_from_iq); token t conditions on soi row t-1.
    ag::Tensor forward(const ag::Tensor& mixture_tokens, const ag::Tensor& soi_teacher) const;

    StreamState stream_reset() const;
    // One token: consumes a [2W] mixture window, returns the [2W] SOI window.
    // By default feeds back its own previous output; a teacher window can be
    // injected to reproduce the batch path exactly.
    std::vector<float> stream_step(StreamState& state, const std::vector<float>& mixture_window,
                                   const std::vector<float>* teacher_prev = nullptr) const;

    const DecoderConfig& config() const { return cfg_; }
    NamedTensors& parameters() { return params_; }
    const NamedTensors& parameters() const { return params_; }
    size_t parameter_count() const;

  private:
    const ag::Tensor& param(const std::string& name) const;
    DecoderConfig cfg_;
    NamedTensors params_;
};

// [2, L] <-> [T, 2W] conversions (row t = [I window, Q window]). L must be a
// multiple of the window unless pad_tail zero-fills the last partial window.
ag::Tensor windows_from_iq(const std::vector<float>& i_samples,
                           const std::vector<float>& q_samples, size_t window,
                           bool pad_tail = false);
void iq_from_windows(const ag::Tensor& tokens, size_t window, std::vector<float>& i_samples,
                     std::vector<float>& q_samples);

} // namespace rfsep
