#include "rfsep/iq_signal.hpp"

#include "rfsep/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rfsep {

IqSignal::IqSignal(std::vector<cpx> s, double fs) : samples(std::move(s)), sample_rate_hz(fs) {
    validate();
}

void IqSignal::validate() const {
    if (sample_rate_hz <= 0.0)
        throw std::invalid_argument("IqSignal: sample_rate_hz must be positive, got " +
                                    std::to_string(sample_rate_hz));
    for (const auto& v : samples) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("IqSignal: non-finite sample");
    }
}

FrequencyBand::FrequencyBand(double lo, double hi) : low_hz(lo), high_hz(hi) {
    if (!(lo < hi))
        throw std::invalid_argument("FrequencyBand: low_hz (" + std::to_string(lo) +
                                    ") must be < high_hz (" + std::to_string(hi) + ")");
}

FirFilter::FirFilter(std::vector<double> t) : taps(std::move(t)) {
    if (taps.empty() || taps.size() % 2 == 0)
        throw std::invalid_argument("FirFilter: tap count must be odd, got " +
                                    std::to_string(taps.size()));
    const size_t n = taps.size();
    for (size_t k = 0; k < n; ++k) {
        if (!std::isfinite(taps[k])) throw std::invalid_argument("FirFilter: non-finite tap");
        if (std::abs(taps[k] - taps[n - 1 - k]) > 1e-12 * std::max(1.0, std::abs(taps[k])))
            throw std::invalid_argument("FirFilter: taps must be symmetric (linear phase)");
    }
}

IqSignal frequency_shift(const IqSignal& x, double delta_hz) {
    if (std::abs(delta_hz) > x.sample_rate_hz / 2.0)
        throw std::invalid_argument("frequency_shift: |delta_hz| = " + std::to_string(std::abs(delta_hz)) +
                                    " exceeds Nyquist " + std::to_string(x.sample_rate_hz / 2.0));
    IqSignal y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.samples.resize(x.size());
    const double w = 2.0 * std::numbers::pi * delta_hz / x.sample_rate_hz;
    for (size_t n = 0; n < x.size(); ++n) {
        const double phase = std::fmod(w * static_cast<double>(n), 2.0 * std::numbers::pi);
        y.samples[n] = x.samples[n] * std::polar(1.0, phase);
    }
    return y;
}

FirFilter design_lowpass(double cutoff_hz, double fs, size_t num_taps) {
    if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0))
        throw std::invalid_argument("design_lowpass: cutoff " + std::to_string(cutoff_hz) +
                                    " Hz outside (0, fs/2) for fs = " + std::to_string(fs));
    if (num_taps % 2 == 0 || num_taps < 11)
        throw std::invalid_argument("design_lowpass: num_taps must be odd and >= 11, got " +
                                    std::to_string(num_taps));
    const double fc = cutoff_hz / fs; // normalized
    const auto m = static_cast<double>(num_taps - 1) / 2.0;
    std::vector<double> taps(num_taps);
    double sum = 0.0;
    for (size_t k = 0; k < num_taps; ++k) {
        const double t = static_cast<double>(k) - m;
        double sinc = (t == 0.0) ? 2.0 * fc
                                 : std::sin(2.0 * std::numbers::pi * fc * t) /
                                       (std::numbers::pi * t);
        const double window =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                   static_cast<double>(num_taps - 1));
        taps[k] = sinc * window;
        sum += taps[k];
    }
    for (auto& t : taps) t /= sum; // DC gain exactly 1
    // enforce exact symmetry against rounding asymmetries in sin()
    for (size_t k = 0; k < num_taps / 2; ++k) {
        const double avg = 0.5 * (taps[k] + taps[num_taps - 1 - k]);
        taps[k] = avg;
        taps[num_taps - 1 - k] = avg;
    }
    return FirFilter(std::move(taps));
}

IqSignal filter(const IqSignal& x, const FirFilter& h) {
    if (x.samples.empty()) throw std::invalid_argument("filter: empty input");
    const size_t len = x.size();
    const size_t nh = h.taps.size();
    const size_t delay = h.group_delay();
    IqSignal y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.samples.assign(len, cpx{0.0, 0.0});
    // y[n] = conv(x, h)[n + delay], zero padded at the edges
    for (size_t n = 0; n < len; ++n) {
        const size_t c = n + delay;
        cpx acc{0.0, 0.0};
        const size_t k_lo = c >= len - 1 ? c - (len - 1) : 0;
        const size_t k_hi = std::min(nh - 1, c);
        for (size_t k = k_lo; k <= k_hi; ++k) acc += h.taps[k] * x.samples[c - k];
        y.samples[n] = acc;
    }
    return y;
}

IqSignal resample(const IqSignal& x, size_t p, size_t q) {
    if (p < 1 || q < 1) throw std::invalid_argument("resample: p and q must be >= 1");
    const size_t g = std::gcd(p, q);
    p /= g;
    q /= g;
    if (p == 1 && q == 1) return x;
    if (x.samples.empty()) throw std::invalid_argument("resample: empty input");

    const double fs = x.sample_rate_hz;
    const double fs_up = fs * static_cast<double>(p);
    const double cutoff = std::min(fs / 2.0, fs * static_cast<double>(p) / (2.0 * static_cast<double>(q)));
    const size_t taps_per_branch = 24;
    size_t nh = taps_per_branch * std::max(p, q);
    if (nh % 2 == 0) nh += 1;
    // 0.92 factor keeps the transition band clear of the new Nyquist edge
    const FirFilter h = design_lowpass(0.92 * cutoff, fs_up, nh);
    const auto delay = static_cast<long>(h.group_delay());

    const size_t in_len = x.size();
    const size_t out_len =
        (in_len * p + q - 1) / q; // ceil(len * p / q)
    IqSignal y;
    y.sample_rate_hz = fs * static_cast<double>(p) / static_cast<double>(q);
    y.samples.assign(out_len, cpx{0.0, 0.0});
    const auto pl = static_cast<long>(p);
    const auto nhl = static_cast<long>(h.taps.size());
    for (size_t m = 0; m < out_len; ++m) {
        // position on the virtual upsampled grid, group delay removed
        const long t = static_cast<long>(m) * static_cast<long>(q) + delay;
        long i_lo = (t - nhl + 1 + pl - 1) / pl; // ceil
        long i_hi = t / pl;                      // floor
        i_lo = std::max(i_lo, 0l);
        i_hi = std::min(i_hi, static_cast<long>(in_len) - 1);
        cpx acc{0.0, 0.0};
        for (long i = i_lo; i <= i_hi; ++i) acc += h.taps[t - i * pl] * x.samples[i];
        y.samples[m] = acc * static_cast<double>(p);
    }
    return y;
}

double rms(const IqSignal& x) {
    if (x.samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : x.samples) acc += std::norm(v);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

IqSignal unit_normalize(const IqSignal& x) {
    const double r = rms(x);
    if (r == 0.0) throw std::invalid_argument("unit_normalize: all-zero signal");
    IqSignal y = x;
    const double inv = 1.0 / r;
    for (auto& v : y.samples) v *= inv;
    return y;
}

double inband_power(const IqSignal& x, const FrequencyBand& band) {
    if (x.samples.empty()) throw std::invalid_argument("inband_power: empty signal");
    const double nyq = x.sample_rate_hz / 2.0;
    if (band.low_hz < -nyq - 1e-9 || band.high_hz > nyq + 1e-9)
        throw std::invalid_argument("inband_power: band outside Nyquist range");
    const auto spectrum = fft(x.samples);
    const size_t n = spectrum.size();
    double acc = 0.0;
    size_t count = 0;
    for (size_t k = 0; k < n; ++k) {
        const double f = bin_frequency_hz(k, n, x.sample_rate_hz);
        // half-open [low, high) so adjacent bands tile without double counting
        if (f >= band.low_hz && f < band.high_hz) {
            acc += std::norm(spectrum[k]);
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("inband_power: band selects no FFT bins");
    return acc / (static_cast<double>(n) * static_cast<double>(n));
}

FrequencyBand occupied_band(const IqSignal& x, double fraction) {
    const auto spectrum = fft(x.samples);
    const size_t n = spectrum.size();
    std::vector<std::pair<double, double>> by_offset(n); // (|f|, power)
    double total = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double f = bin_frequency_hz(k, n, x.sample_rate_hz);
        const double pwr = std::norm(spectrum[k]);
        by_offset[k] = {std::abs(f), pwr};
        total += pwr;
    }
    std::sort(by_offset.begin(), by_offset.end());
    double acc = 0.0;
    double half_width = 0.0;
    for (const auto& [f, pwr] : by_offset) {
        acc += pwr;
        half_width = f;
        if (acc >= fraction * total) break;
    }
    const double bin_width = x.sample_rate_hz / static_cast<double>(n);
    half_width += bin_width / 2.0;
    return {-half_width, half_width};
}

std::vector<IqSignal> slice_signal(const IqSignal& x, size_t length) {
    if (length < 1) throw std::invalid_argument("slice: length must be >= 1");
    std::vector<IqSignal> out;
    const size_t count = x.size() / length;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        IqSignal s;
        s.sample_rate_hz = x.sample_rate_hz;
        s.samples.assign(x.samples.begin() + static_cast<long>(i * length),
                         x.samples.begin() + static_cast<long>((i + 1) * length));
        out.push_back(std::move(s));
    }
    return out;
}

namespace {
constexpr char kRfiqMagic[4] = {'R', 'F', 'I', 'Q'};
constexpr uint32_t kRfiqVersion = 1;
} // namespace

void rfiq_write(const std::string& path, const IqSignal& x) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("rfiq_write: cannot open " + path);
    f.write(kRfiqMagic, 4);
    f.write(reinterpret_cast<const char*>(&kRfiqVersion), 4);
    f.write(reinterpret_cast<const char*>(&x.sample_rate_hz), 8);
    std::vector<float> buf(x.size() * 2);
    for (size_t i = 0; i < x.size(); ++i) {
        buf[2 * i] = static_cast<float>(x.samples[i].real());
        buf[2 * i + 1] = static_cast<float>(x.samples[i].imag());
    }
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) throw std::runtime_error("rfiq_write: short write to " + path);
}

IqSignal rfiq_read(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("rfiq_read: cannot open " + path);
    const auto file_size = static_cast<size_t>(f.tellg());
    if (file_size < 16) throw std::runtime_error("rfiq_read: " + path + " truncated header");
    f.seekg(0);
    char magic[4];
    uint32_t version = 0;
    IqSignal x;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&x.sample_rate_hz), 8);
    if (std::memcmp(magic, kRfiqMagic, 4) != 0)
        throw std::runtime_error("rfiq_read: bad magic in " + path);
    if (version != kRfiqVersion)
        throw std::runtime_error("rfiq_read: unsupported version " + std::to_string(version));
    const size_t payload = file_size - 16;
    if (payload % (2 * sizeof(float)) != 0)
        throw std::runtime_error("rfiq_read: payload not a whole number of I/Q pairs in " + path);
    const size_t count = payload / (2 * sizeof(float));
    std::vector<float> buf(count * 2);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(payload));
    if (!f) throw std::runtime_error("rfiq_read: short read from " + path);
    x.samples.resize(count);
    for (size_t i = 0; i < count; ++i)
        x.samples[i] = cpx{static_cast<double>(buf[2 * i]), static_cast<double>(buf[2 * i + 1])};
    x.validate();
    return x;
}

} // namespace rfsep
