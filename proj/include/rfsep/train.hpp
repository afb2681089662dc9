#pragma once

#include "rfsep/decoder.hpp"
#include "rfsep/mixing.hpp"
#include "rfsep/tensor.hpp"
#include "rfsep/wavenet.hpp"

#include <memory>
#include <string>
#include <vector>

namespace rfsep {

// [2, L] float tensor <-> complex baseband
ag::Tensor iq_to_tensor(const IqSignal& x);
IqSignal tensor_to_iq(const ag::Tensor& t, double sample_rate_hz);

enum class ModelKind { WaveNet, Decoder, Passthrough };

// One handle over every separator the workbench trains or runs: WaveNet,
// transformer decoder, or the passthrough control (mixture out unchanged).
class SeparatorModel {
  public:
    static SeparatorModel make_wavenet(const WaveNetConfig& cfg, uint64_t seed);
    static SeparatorModel make_decoder(const DecoderConfig& cfg, uint64_t seed);
    static SeparatorModel make_passthrough();

    ModelKind kind() const { return kind_; }
    NamedTensors& parameters();
    size_t parameter_count() const;

    // inference: WaveNet runs the batch forward, the decoder streams with
    // self-feedback, passthrough copies the input
    IqSignal separate(const IqSignal& mixture) const;

    // training graph: teacher forcing for the decoder, plain forward for the
    // WaveNet, constant (grad-free) loss for passthrough. For the decoder,
    // self_feedback_prob > 0 replaces each teacher window with the model's own
    // grad-free streamed estimate at that probability (scheduled sampling), so
    // training sees the feedback distribution inference runs under.
    ag::Tensor training_loss(const IqSignal& mixture, const IqSignal& soi,
                             double self_feedback_prob = 0.0, uint64_t feedback_seed = 0) const;

    const WaveNetConfig* wavenet_config() const;
    const DecoderConfig* decoder_config() const;

  private:
    SeparatorModel() = default;
    ModelKind kind_ = ModelKind::Passthrough;
    std::shared_ptr<WaveNet> wavenet_;
    std::shared_ptr<TransformerDecoder> decoder_;
    NamedTensors empty_;
};

struct TrainConfig {
    size_t epochs = 10;
    double learning_rate = 1e-3;
    size_t batch_size = 8;
    uint64_t seed = 0;
    size_t max_time_shift = 256;       // augmentation draw range
    double scheduled_sampling = 0.0;   // peak self-feedback prob, ramped over epochs
    std::string checkpoint_prefix;     // best-val checkpoint when non-empty
    std::string log_csv_path;          // per-epoch log when non-empty
    bool verbose = false;
};

struct TrainResult {
    std::vector<double> train_loss; // per epoch
    std::vector<double> val_loss;
    double best_val_loss = 0.0;
    size_t best_epoch = 0;
    double passthrough_val_mse = 0.0; // control for the same val split
};

// Minimizes MSE between estimated and true SOI I/Q with Adam. Augmentation
// (circular shift + phase) is drawn per training example per epoch and applied
// jointly to mixture and SOI. Aborts on non-finite loss with learning-rate
// guidance. Fixed seed gives bit-reproducible loss curves.
TrainResult train(SeparatorModel& model, const Dataset& dataset, const TrainConfig& cfg);

} // namespace rfsep
