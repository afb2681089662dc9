#pragma once

#include <complex>
#include <string>
#include <vector>

namespace rfsep {

using cpx = std::complex<double>;

// Complex baseband sample stream. The universal signal currency: every
// generator, mixer and separator produces or consumes one of these.
struct IqSignal {
    std::vector<cpx> samples;
    double sample_rate_hz = 0.0;

    IqSignal() = default;
    IqSignal(std::vector<cpx> s, double fs);

    size_t size() const { return samples.size(); }
    void validate() const; // throws on non-positive rate or non-finite samples
};

// Band edges relative to baseband center; either edge may be negative.
struct FrequencyBand {
    double low_hz = 0.0;
    double high_hz = 0.0;

    FrequencyBand() = default;
    FrequencyBand(double lo, double hi);
    double width_hz() const { return high_hz - low_hz; }
};

// Linear-phase FIR: odd tap count, symmetric about the center tap.
struct FirFilter {
    std::vector<double> taps;

    explicit FirFilter(std::vector<double> t);
    size_t group_delay() const { return taps.size() / 2; }
};

// y[n] = x[n] * exp(i 2 pi delta_hz n / fs). Rejects shifts past Nyquist.
IqSignal frequency_shift(const IqSignal& x, double delta_hz);

// Windowed-sinc (Hamming) lowpass, DC gain forced to exactly 1.
FirFilter design_lowpass(double cutoff_hz, double fs, size_t num_taps);

// Linear convolution truncated to the input length with the filter's group
// delay removed, so output stays aligned to the input timeline.
IqSignal filter(const IqSignal& x, const FirFilter& h);

// Rational polyphase resampling by p/q. Output rate fs*p/q, length ceil(len*p/q).
IqSignal resample(const IqSignal& x, size_t p, size_t q);

double rms(const IqSignal& x);

// x / RMS(x); rejects all-zero input.
IqSignal unit_normalize(const IqSignal& x);

// Mean power in the band measured on FFT bins, scaled so the full band
// reproduces mean(|x|^2) (Parseval-consistent).
double inband_power(const IqSignal& x, const FrequencyBand& band);

// Symmetric band around DC holding `fraction` of total power (bin-granular).
FrequencyBand occupied_band(const IqSignal& x, double fraction = 0.99);

// Consecutive non-overlapping windows; trailing remainder discarded.
std::vector<IqSignal> slice_signal(const IqSignal& x, size_t length);

// RFIQ container: 16-byte header (magic "RFIQ", u32 version, f64 sample rate,
// little endian) followed by interleaved f32 I/Q pairs.
void rfiq_write(const std::string& path, const IqSignal& x);
IqSignal rfiq_read(const std::string& path);

} // namespace rfsep
