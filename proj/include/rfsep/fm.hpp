#pragma once

#include "rfsep/audio.hpp"
#include "rfsep/iq_signal.hpp"

namespace rfsep {

// Narrowband voice FM defaults: 5 kHz peak deviation, 50 kHz baseband rate,
// 8 kHz audio. Deviation for the target radio is not published; these follow
// walkie-talkie NBFM convention and are plain config values.
struct FmConfig {
    double deviation_hz = 5000.0;
    double audio_rate_hz = 8000.0;
    double rf_rate_hz = 50000.0;

    void validate() const;
};

// Constant-envelope phase accumulation: y[n] = exp(i phi[n]),
// phi[n] = phi[n-1] + 2 pi dev a[n] / fs. Audio is resampled to rf_rate_hz
// internally.
IqSignal fm_modulate(const AudioSignal& a, const FmConfig& cfg);

// Quadrature discriminator arg(x[n] conj(x[n-1])), scaled to audio units,
// lowpassed to the audio band and resampled to audio_rate_hz. Zero-magnitude
// samples produce 0 for that step instead of NaN.
AudioSignal fm_demodulate(const IqSignal& x, const FmConfig& cfg);

// Rational-rate conversion helper for real signals (wraps the complex
// polyphase resampler).
AudioSignal resample_audio(const AudioSignal& a, double target_rate_hz);

} // namespace rfsep
