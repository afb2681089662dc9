#include "rfsep/fm.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rfsep {

void FmConfig::validate() const {
    if (deviation_hz <= 0.0 || deviation_hz >= rf_rate_hz / 2.0)
        throw std::invalid_argument("FmConfig: deviation_hz must lie in (0, rf_rate_hz/2)");
    if (rf_rate_hz < audio_rate_hz)
        throw std::invalid_argument("FmConfig: rf_rate_hz must be >= audio_rate_hz");
}

namespace {

// Integral-Hz rates are assumed; reduce to the smallest p/q.
std::pair<size_t, size_t> rational_ratio(double target_hz, double source_hz) {
    const auto p = static_cast<long long>(std::llround(target_hz));
    const auto q = static_cast<long long>(std::llround(source_hz));
    if (p <= 0 || q <= 0 ||
        std::abs(target_hz - static_cast<double>(p)) > 1e-6 ||
        std::abs(source_hz - static_cast<double>(q)) > 1e-6)
        throw std::invalid_argument("resample_audio: sample rates must be integral Hz");
    const long long g = std::gcd(p, q);
    return {static_cast<size_t>(p / g), static_cast<size_t>(q / g)};
}

} // namespace

AudioSignal resample_audio(const AudioSignal& a, double target_rate_hz) {
    if (a.sample_rate_hz == target_rate_hz) return a;
    const auto [p, q] = rational_ratio(target_rate_hz, a.sample_rate_hz);
    IqSignal x;
    x.sample_rate_hz = a.sample_rate_hz;
    x.samples.reserve(a.size());
    for (double v : a.samples) x.samples.emplace_back(v, 0.0);
    const IqSignal y = resample(x, p, q);
    AudioSignal out;
    out.sample_rate_hz = target_rate_hz;
    out.samples.reserve(y.size());
    for (const auto& v : y.samples) out.samples.push_back(v.real());
    return out;
}

IqSignal fm_modulate(const AudioSignal& a, const FmConfig& cfg) {
    cfg.validate();
    a.validate();
    const AudioSignal up = resample_audio(a, cfg.rf_rate_hz);
    IqSignal y;
    y.sample_rate_hz = cfg.rf_rate_hz;
    y.samples.resize(up.size());
    const double k = 2.0 * std::numbers::pi * cfg.deviation_hz / cfg.rf_rate_hz;
    double phase = 0.0;
    for (size_t n = 0; n < up.size(); ++n) {
        phase += k * up.samples[n];
        if (phase > std::numbers::pi) phase -= 2.0 * std::numbers::pi;
        if (phase < -std::numbers::pi) phase += 2.0 * std::numbers::pi;
        y.samples[n] = std::polar(1.0, phase);
    }
    return y;
}

AudioSignal fm_demodulate(const IqSignal& x, const FmConfig& cfg) {
    cfg.validate();
    if (x.samples.empty()) throw std::invalid_argument("fm_demodulate: empty input");
    IqSignal disc;
    disc.sample_rate_hz = x.sample_rate_hz;
    disc.samples.assign(x.size(), cpx{0.0, 0.0});
    const double scale = x.sample_rate_hz / (2.0 * std::numbers::pi * cfg.deviation_hz);
    for (size_t n = 1; n < x.size(); ++n) {
        const cpx d = x.samples[n] * std::conj(x.samples[n - 1]);
        disc.samples[n] = (std::abs(d) == 0.0) ? cpx{0.0, 0.0}
                                               : cpx{std::arg(d) * scale, 0.0};
    }
    const double cutoff = std::min(0.45 * cfg.audio_rate_hz, 0.45 * x.sample_rate_hz);
    const FirFilter lp = design_lowpass(cutoff, x.sample_rate_hz, 129);
    const IqSignal filtered = filter(disc, lp);
    AudioSignal audio;
    audio.sample_rate_hz = x.sample_rate_hz;
    audio.samples.reserve(filtered.size());
    for (const auto& v : filtered.samples) audio.samples.push_back(v.real());
    return resample_audio(audio, cfg.audio_rate_hz);
}

} // namespace rfsep
