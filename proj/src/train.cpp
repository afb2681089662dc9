#include "rfsep/train.hpp"

#include "rfsep/checkpoint.hpp"
#include "rfsep/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rfsep {

using ag::Tensor;

Tensor iq_to_tensor(const IqSignal& x) {
    const size_t n = x.size();
    std::vector<float> data(2 * n);
    for (size_t i = 0; i < n; ++i) {
        data[i] = static_cast<float>(x.samples[i].real());
        data[n + i] = static_cast<float>(x.samples[i].imag());
    }
    return Tensor::from_data({2, n}, std::move(data));
}

IqSignal tensor_to_iq(const Tensor& t, double sample_rate_hz) {
    const auto& s = t.shape();
    if (s.size() != 2 || s[0] != 2)
        throw std::invalid_argument("tensor_to_iq: expected [2, L], got " + ag::shape_str(s));
    IqSignal out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.resize(s[1]);
    for (size_t i = 0; i < s[1]; ++i)
        out.samples[i] = cpx(t.data()[i], t.data()[s[1] + i]);
    return out;
}

SeparatorModel SeparatorModel::make_wavenet(const WaveNetConfig& cfg, uint64_t seed) {
    SeparatorModel m;
    m.kind_ = ModelKind::WaveNet;
    m.wavenet_ = std::make_shared<WaveNet>(cfg, seed);
    return m;
}

SeparatorModel SeparatorModel::make_decoder(const DecoderConfig& cfg, uint64_t seed) {
    SeparatorModel m;
    m.kind_ = ModelKind::Decoder;
    m.decoder_ = std::make_shared<TransformerDecoder>(cfg, seed);
    return m;
}

SeparatorModel SeparatorModel::make_passthrough() {
    return SeparatorModel();
}

NamedTensors& SeparatorModel::parameters() {
    switch (kind_) {
        case ModelKind::WaveNet: return wavenet_->parameters();
        case ModelKind::Decoder: return decoder_->parameters();
        default: return empty_;
    }
}

size_t SeparatorModel::parameter_count() const {
    switch (kind_) {
        case ModelKind::WaveNet: return wavenet_->parameter_count();
        case ModelKind::Decoder: return decoder_->parameter_count();
        default: return 0;
    }
}

const WaveNetConfig* SeparatorModel::wavenet_config() const {
    return wavenet_ ? &wavenet_->config() : nullptr;
}

const DecoderConfig* SeparatorModel::decoder_config() const {
    return decoder_ ? &decoder_->config() : nullptr;
}

IqSignal SeparatorModel::separate(const IqSignal& mixture) const {
    mixture.validate();
    switch (kind_) {
        case ModelKind::WaveNet: {
            Tensor y = wavenet_->forward(iq_to_tensor(mixture));
            return tensor_to_iq(y, mixture.sample_rate_hz);
        }
        case ModelKind::Decoder: {
            const size_t w = decoder_->config().window_samples;
            const size_t td = decoder_->config().token_dim();
            Tensor tokens;
            {
                std::vector<float> iv(mixture.size()), qv(mixture.size());
                for (size_t i = 0; i < mixture.size(); ++i) {
                    iv[i] = static_cast<float>(mixture.samples[i].real());
                    qv[i] = static_cast<float>(mixture.samples[i].imag());
                }
                tokens = windows_from_iq(iv, qv, w, true);
            }
            StreamState st = decoder_->stream_reset();
            const size_t t_count = tokens.shape()[0];
            std::vector<float> out_tokens(t_count * td);
            for (size_t t = 0; t < t_count; ++t) {
                std::vector<float> win(tokens.data().begin() + t * td,
                                       tokens.data().begin() + (t + 1) * td);
                std::vector<float> y = decoder_->stream_step(st, win);
                std::copy(y.begin(), y.end(), out_tokens.begin() + t * td);
            }
            std::vector<float> iv, qv;
            iq_from_windows(Tensor::from_data({t_count, td}, std::move(out_tokens)), w, iv, qv);
            IqSignal out;
            out.sample_rate_hz = mixture.sample_rate_hz;
            out.samples.resize(mixture.size());
            for (size_t i = 0; i < mixture.size(); ++i) out.samples[i] = cpx(iv[i], qv[i]);
            return out;
        }
        default: return mixture;
    }
}

ag::Tensor SeparatorModel::training_loss(const IqSignal& mixture, const IqSignal& soi,
                                         double self_feedback_prob,
                                         uint64_t feedback_seed) const {
    if (mixture.size() != soi.size())
        throw std::invalid_argument("training_loss: mixture/SOI length mismatch");
    switch (kind_) {
        case ModelKind::WaveNet:
            return ag::mse_loss(wavenet_->forward(iq_to_tensor(mixture)), iq_to_tensor(soi));
        case ModelKind::Decoder: {
            const size_t w = decoder_->config().window_samples;
            const size_t len = (mixture.size() / w) * w; // truncate to whole windows
            if (len == 0)
                throw std::invalid_argument("training_loss: input shorter than one window");
            std::vector<float> mi(len), mq(len), si(len), sq(len);
            for (size_t i = 0; i < len; ++i) {
                mi[i] = static_cast<float>(mixture.samples[i].real());
                mq[i] = static_cast<float>(mixture.samples[i].imag());
                si[i] = static_cast<float>(soi.samples[i].real());
                sq[i] = static_cast<float>(soi.samples[i].imag());
            }
            Tensor mix_tok = windows_from_iq(mi, mq, w);
            Tensor soi_tok = windows_from_iq(si, sq, w);
            Tensor prev_tok = soi_tok;
            if (self_feedback_prob > 0.0) {
                // scheduled sampling: stream the current model grad-free and
                // swap its own estimates in for teacher windows at random
                const size_t td = decoder_->config().token_dim();
                const size_t t_count = mix_tok.shape()[0];
                StreamState st = decoder_->stream_reset();
                std::vector<float> prev(soi_tok.data());
                Rng rng(feedback_seed);
                for (size_t t = 0; t < t_count; ++t) {
                    std::vector<float> win(mix_tok.data().begin() + t * td,
                                           mix_tok.data().begin() + (t + 1) * td);
                    const std::vector<float> est = decoder_->stream_step(st, win);
                    if (rng.uniform() < self_feedback_prob)
                        std::copy(est.begin(), est.end(), prev.begin() + t * td);
                }
                prev_tok = Tensor::from_data({t_count, td}, std::move(prev));
            }
            return ag::mse_loss(decoder_->forward(mix_tok, prev_tok), soi_tok);
        }
        default:
            return ag::mse_loss(iq_to_tensor(mixture), iq_to_tensor(soi));
    }
}

namespace {

double eval_split(const SeparatorModel& model, const Dataset& ds, size_t begin, size_t end) {
    double acc = 0.0;
    for (size_t i = begin; i < end; ++i)
        acc += static_cast<double>(
            model.training_loss(ds.examples[i].mixture, ds.examples[i].soi).item());
    return acc / static_cast<double>(end - begin);
}

double passthrough_val(const Dataset& ds, size_t begin, size_t end) {
    double acc = 0.0;
    for (size_t i = begin; i < end; ++i) {
        const auto& ex = ds.examples[i];
        double e = 0.0;
        for (size_t n = 0; n < ex.mixture.size(); ++n)
            e += std::norm(ex.mixture.samples[n] - ex.soi.samples[n]);
        // same convention as mse_loss over a [2, L] tensor
        acc += e / static_cast<double>(2 * ex.mixture.size());
    }
    return acc / static_cast<double>(end - begin);
}

} // namespace

TrainResult train(SeparatorModel& model, const Dataset& dataset, const TrainConfig& cfg) {
    if (dataset.examples.empty()) throw std::invalid_argument("train: dataset is empty");
    if (dataset.train_count == 0 || dataset.train_count > dataset.examples.size())
        throw std::invalid_argument("train: bad train/val split");
    if (cfg.batch_size == 0 || cfg.epochs == 0)
        throw std::invalid_argument("train: epochs and batch_size must be positive");
    const size_t n_train = dataset.train_count;
    const size_t n_val = dataset.examples.size() - n_train;

    std::vector<ag::Tensor> params;
    for (auto& [name, t] : model.parameters()) params.push_back(t);
    ag::AdamState<float> adam;

    std::ofstream log;
    if (!cfg.log_csv_path.empty()) {
        log.open(cfg.log_csv_path);
        if (!log) throw std::runtime_error("train: cannot open log " + cfg.log_csv_path);
        log << "epoch,train_mse,val_mse,wall_time_s\n";
    }

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    if (n_val > 0) result.passthrough_val_mse = passthrough_val(dataset, n_train, dataset.examples.size());
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(cfg.seed ^ (0x9e3779b97f4a7c15ull + epoch));
        // ramp self-feedback from 0 to the configured peak over the epochs
        const double feedback_prob =
            cfg.epochs > 1 ? cfg.scheduled_sampling * static_cast<double>(epoch) /
                                 static_cast<double>(cfg.epochs - 1)
                           : cfg.scheduled_sampling;
        for (size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < n_train; start += cfg.batch_size) {
            const size_t stop = std::min(start + cfg.batch_size, n_train);
            for (auto& p : params) p.zero_grad();
            double batch_loss = 0.0;
            for (size_t bi = start; bi < stop; ++bi) {
                const auto& ex = dataset.examples[order[bi]];
                Rng aug_rng = Rng::for_index(cfg.seed, epoch * n_train + order[bi]);
                const Augmentation aug = draw_augmentation(
                    std::min(cfg.max_time_shift, ex.mixture.size()), aug_rng);
                // joint draw: mixing commutes with the augmentation
                Tensor loss = model.training_loss(augment(ex.mixture, aug), augment(ex.soi, aug),
                                                  feedback_prob,
                                                  cfg.seed ^ (0xfeedbacc00000000ull +
                                                              epoch * n_train + order[bi]));
                batch_loss += static_cast<double>(loss.item());
                if (loss.requires_grad()) {
                    Tensor scaled = ag::scale(loss, 1.0f / static_cast<float>(stop - start));
                    ag::backward(scaled);
                }
            }
            batch_loss /= static_cast<double>(stop - start);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error(
                    "train: non-finite loss at epoch " + std::to_string(epoch) +
                    "; try a lower learning rate (current " + std::to_string(cfg.learning_rate) +
                    "), e.g. one third of it, or reduce augmentation range");
            if (!params.empty()) ag::adam_step(params, adam, cfg.learning_rate);
            epoch_loss += batch_loss * static_cast<double>(stop - start);
            seen += stop - start;
        }
        epoch_loss /= static_cast<double>(seen);

        const double val_loss =
            n_val > 0 ? eval_split(model, dataset, n_train, dataset.examples.size()) : epoch_loss;
        result.train_loss.push_back(epoch_loss);
        result.val_loss.push_back(val_loss);
        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            if (!cfg.checkpoint_prefix.empty())
                checkpoint_save(cfg.checkpoint_prefix, model.parameters());
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log) log << epoch << ',' << epoch_loss << ',' << val_loss << ',' << wall << '\n';
        if (cfg.verbose)
            std::fprintf(stderr, "epoch %zu train %.6f val %.6f (%.1fs)\n", epoch, epoch_loss,
                         val_loss, wall);
    }
    return result;
}

} // namespace rfsep
