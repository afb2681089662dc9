#include "rfsep/metrics.hpp"

#include "rfsep/fft.hpp"
#include "rfsep/fm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace rfsep {

namespace {

void check_pair(const AudioSignal& ref, const AudioSignal& est, const char* op) {
    ref.validate();
    est.validate();
    if (ref.sample_rate_hz != est.sample_rate_hz)
        throw std::invalid_argument(std::string(op) + ": sample rates differ (" +
                                    std::to_string(ref.sample_rate_hz) + " vs " +
                                    std::to_string(est.sample_rate_hz) + ")");
}

double dot(const std::vector<double>& a, const std::vector<double>& b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

// Hann-windowed one-sided power spectrum of frame starting at `start`
std::vector<double> frame_power(const std::vector<double>& x, size_t start, size_t frame) {
    std::vector<cpx> buf(frame, cpx(0.0, 0.0));
    for (size_t i = 0; i < frame && start + i < x.size(); ++i) {
        const double w =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(frame - 1));
        buf[i] = x[start + i] * w;
    }
    const auto spec = fft(buf);
    std::vector<double> p(frame / 2 + 1);
    for (size_t k = 0; k < p.size(); ++k) p[k] = std::norm(spec[k]);
    return p;
}

} // namespace

AlignResult align(const AudioSignal& ref, const AudioSignal& est, size_t max_lag) {
    check_pair(ref, est, "align");
    const auto& r = ref.samples;
    const auto& e = est.samples;
    const long ml = static_cast<long>(max_lag);

    double best_score = -1.0;
    long best_lag = 0;
    const double r_norm = std::sqrt(dot(r, r, r.size()));
    for (long lag = -ml; lag <= ml; ++lag) {
        // est[n + lag] versus ref[n]
        double num = 0.0, e_sq = 0.0;
        size_t count = 0;
        for (size_t n = 0; n < r.size(); ++n) {
            const long m = static_cast<long>(n) + lag;
            if (m < 0 || m >= static_cast<long>(e.size())) continue;
            num += r[n] * e[m];
            e_sq += e[m] * e[m];
            ++count;
        }
        if (count == 0 || e_sq == 0.0) continue;
        const double score = std::abs(num) / (r_norm * std::sqrt(e_sq) + 1e-30);
        if (score > best_score) {
            best_score = score;
            best_lag = lag;
        }
    }

    AlignResult out;
    out.lag = best_lag;
    out.confident = best_score >= 0.1;
    if (!out.confident) {
        std::fprintf(stderr,
                     "align: correlation peak %.3f below confidence floor; keeping lag 0\n",
                     best_score);
        out.lag = 0;
    }
    const long lag = out.lag;
    const size_t start_r = lag < 0 ? static_cast<size_t>(-lag) : 0;
    const size_t start_e = lag > 0 ? static_cast<size_t>(lag) : 0;
    const size_t n = std::min(r.size() - start_r, e.size() - start_e);
    out.ref.sample_rate_hz = ref.sample_rate_hz;
    out.est.sample_rate_hz = est.sample_rate_hz;
    out.ref.samples.assign(r.begin() + start_r, r.begin() + start_r + n);
    out.est.samples.assign(e.begin() + start_e, e.begin() + start_e + n);
    return out;
}

double sdr(const AudioSignal& ref, const AudioSignal& est) {
    check_pair(ref, est, "sdr");
    const size_t n = std::min(ref.size(), est.size());
    if (n == 0) throw std::invalid_argument("sdr: empty input");
    const double ref_pow = dot(ref.samples, ref.samples, n);
    if (ref_pow == 0.0) throw std::invalid_argument("sdr: reference is identically zero");
    const double est_pow = dot(est.samples, est.samples, n);
    const double alpha = est_pow > 0.0 ? dot(ref.samples, est.samples, n) / est_pow : 0.0;
    double resid = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = ref.samples[i] - alpha * est.samples[i];
        resid += d * d;
    }
    if (resid <= ref_pow * 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(ref_pow / resid));
}

double lsd(const AudioSignal& ref, const AudioSignal& est, size_t frame, size_t hop) {
    check_pair(ref, est, "lsd");
    if (frame < 2 || hop == 0) throw std::invalid_argument("lsd: bad frame/hop");
    const size_t n = std::min(ref.size(), est.size());
    double acc = 0.0;
    size_t frames = 0;
    for (size_t start = 0; start == 0 || start + frame <= n; start += hop) {
        const auto pr = frame_power(ref.samples, start, frame);
        const auto pe = frame_power(est.samples, start, frame);
        double sq = 0.0;
        for (size_t k = 0; k < pr.size(); ++k) {
            const double mr = std::max(std::sqrt(pr[k]), 1e-10);
            const double me = std::max(std::sqrt(pe[k]), 1e-10);
            const double d = 20.0 * std::log10(mr / me);
            sq += d * d;
        }
        acc += std::sqrt(sq / double(pr.size()));
        ++frames;
        if (start + frame >= n) break;
    }
    return acc / double(frames);
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// per-frame cepstra c_1..c_C via mel filterbank -> log -> DCT-II
std::vector<std::vector<double>> mfcc_frames(const AudioSignal& a, size_t num_mels,
                                             size_t num_ceps, size_t frame, size_t hop) {
    const double fs = a.sample_rate_hz;
    const size_t bins = frame / 2 + 1;
    // triangular filters, equally spaced in mel between 0 and Nyquist
    std::vector<double> edges(num_mels + 2);
    const double mel_hi = hz_to_mel(fs / 2.0);
    for (size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_hi * double(i) / double(num_mels + 1));
    auto bin_hz = [&](size_t k) { return double(k) * fs / double(frame); };

    std::vector<std::vector<double>> out;
    for (size_t start = 0; start == 0 || start + frame <= a.size(); start += hop) {
        const auto p = frame_power(a.samples, start, frame);
        std::vector<double> log_e(num_mels);
        for (size_t m = 0; m < num_mels; ++m) {
            const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
            double e = 0.0;
            for (size_t k = 0; k < bins; ++k) {
                const double f = bin_hz(k);
                double w = 0.0;
                if (f > lo && f < mid) w = (f - lo) / (mid - lo);
                else if (f >= mid && f < hi) w = (hi - f) / (hi - mid);
                e += w * p[k];
            }
            log_e[m] = std::log(std::max(e, 1e-10));
        }
        std::vector<double> ceps(num_ceps);
        for (size_t k = 1; k <= num_ceps; ++k) {
            double c = 0.0;
            for (size_t m = 0; m < num_mels; ++m)
                c += log_e[m] *
                     std::cos(std::numbers::pi * double(k) * (double(m) + 0.5) / double(num_mels));
            ceps[k - 1] = c;
        }
        out.push_back(std::move(ceps));
        if (start + frame >= a.size()) break;
    }
    return out;
}

} // namespace

double mel_cd(const AudioSignal& ref, const AudioSignal& est, size_t num_mels, size_t num_ceps) {
    check_pair(ref, est, "mel_cd");
    if (ref.sample_rate_hz < 8000.0)
        throw std::invalid_argument("mel_cd: sample rate must be at least 8 kHz");
    const size_t frame = 512, hop = 256;
    const auto cr = mfcc_frames(ref, num_mels, num_ceps, frame, hop);
    const auto ce = mfcc_frames(est, num_mels, num_ceps, frame, hop);
    const size_t frames = std::min(cr.size(), ce.size());
    double acc = 0.0;
    for (size_t t = 0; t < frames; ++t) {
        double sq = 0.0;
        for (size_t k = 0; k < num_ceps; ++k) {
            const double d = cr[t][k] - ce[t][k];
            sq += d * d;
        }
        acc += std::sqrt(sq);
    }
    return (10.0 * std::numbers::sqrt2 / std::numbers::ln10) * acc / double(frames);
}

namespace {

constexpr size_t kStoiFrame = 256;   // 25.6 ms at 10 kHz
constexpr size_t kStoiHop = 128;
constexpr size_t kStoiFft = 512;
constexpr size_t kStoiBands = 15;
constexpr size_t kStoiSegment = 30;  // 30 frames * 12.8 ms = 384 ms
constexpr double kStoiRate = 10000.0;
constexpr double kSilenceRangeDb = 40.0;
constexpr double kClipBeta = -15.0;

// [frames x bands] one-third-octave envelope matrix
std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x,
                                                const std::vector<size_t>& keep) {
    // sqrt-Hann analysis window
    std::vector<double> win(kStoiFrame);
    for (size_t i = 0; i < kStoiFrame; ++i)
        win[i] = std::sqrt(
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(kStoiFrame - 1)));

    // band edges: centers 150 * 2^(k/3), half-octave/3 wide
    std::vector<std::pair<size_t, size_t>> bins(kStoiBands);
    for (size_t b = 0; b < kStoiBands; ++b) {
        const double fc = 150.0 * std::pow(2.0, double(b) / 3.0);
        const double lo = fc * std::pow(2.0, -1.0 / 6.0);
        const double hi = fc * std::pow(2.0, 1.0 / 6.0);
        bins[b] = {static_cast<size_t>(std::ceil(lo * kStoiFft / kStoiRate)),
                   std::min(kStoiFft / 2, static_cast<size_t>(std::floor(hi * kStoiFft / kStoiRate)))};
    }

    std::vector<std::vector<double>> env;
    for (size_t fi : keep) {
        const size_t start = fi * kStoiHop;
        std::vector<cpx> buf(kStoiFft, cpx(0.0, 0.0));
        for (size_t i = 0; i < kStoiFrame && start + i < x.size(); ++i)
            buf[i] = x[start + i] * win[i];
        const auto spec = fft(buf);
        std::vector<double> row(kStoiBands);
        for (size_t b = 0; b < kStoiBands; ++b) {
            double e = 0.0;
            for (size_t k = bins[b].first; k <= bins[b].second; ++k) e += std::norm(spec[k]);
            row[b] = std::sqrt(e);
        }
        env.push_back(std::move(row));
    }
    return env;
}

} // namespace

double stoi(const AudioSignal& ref_in, const AudioSignal& est_in) {
    check_pair(ref_in, est_in, "stoi");
    if (double(ref_in.size()) / ref_in.sample_rate_hz < 0.5)
        throw std::invalid_argument("stoi: need at least 0.5 s of audio");
    AudioSignal ref = ref_in.sample_rate_hz == kStoiRate ? ref_in : resample_audio(ref_in, kStoiRate);
    AudioSignal est = est_in.sample_rate_hz == kStoiRate ? est_in : resample_audio(est_in, kStoiRate);
    const size_t n = std::min(ref.size(), est.size());
    ref.samples.resize(n);
    est.samples.resize(n);
    if (n < kStoiFrame) throw std::invalid_argument("stoi: input too short");

    // energy-based silent-frame removal driven by the reference
    const size_t num_frames = (n - kStoiFrame) / kStoiHop + 1;
    std::vector<double> energy_db(num_frames);
    double max_db = -1e30;
    for (size_t f = 0; f < num_frames; ++f) {
        double e = 0.0;
        for (size_t i = 0; i < kStoiFrame; ++i) {
            const double v = ref.samples[f * kStoiHop + i];
            e += v * v;
        }
        energy_db[f] = 10.0 * std::log10(std::max(e, 1e-30));
        max_db = std::max(max_db, energy_db[f]);
    }
    if (max_db <= -200.0) throw std::invalid_argument("stoi: reference is silent");
    std::vector<size_t> keep;
    for (size_t f = 0; f < num_frames; ++f)
        if (energy_db[f] > max_db - kSilenceRangeDb) keep.push_back(f);
    if (keep.size() < kStoiSegment)
        throw std::invalid_argument("stoi: too few non-silent frames (input mostly silence?)");

    const auto xr = band_envelopes(ref.samples, keep);
    const auto xe = band_envelopes(est.samples, keep);

    const double clip_factor = 1.0 + std::pow(10.0, -kClipBeta / 20.0);
    double acc = 0.0;
    size_t count = 0;
    for (size_t m = kStoiSegment; m <= xr.size(); ++m) {
        for (size_t b = 0; b < kStoiBands; ++b) {
            double xx = 0.0, yy = 0.0;
            for (size_t i = m - kStoiSegment; i < m; ++i) {
                xx += xr[i][b] * xr[i][b];
                yy += xe[i][b] * xe[i][b];
            }
            const double g = yy > 0.0 ? std::sqrt(xx / yy) : 0.0;
            double mx = 0.0, my = 0.0;
            std::array<double, kStoiSegment> xs{}, ys{};
            for (size_t i = 0; i < kStoiSegment; ++i) {
                const size_t t = m - kStoiSegment + i;
                xs[i] = xr[t][b];
                ys[i] = std::min(g * xe[t][b], xs[i] * clip_factor);
                mx += xs[i];
                my += ys[i];
            }
            mx /= double(kStoiSegment);
            my /= double(kStoiSegment);
            double num = 0.0, dx = 0.0, dy = 0.0;
            for (size_t i = 0; i < kStoiSegment; ++i) {
                num += (xs[i] - mx) * (ys[i] - my);
                dx += (xs[i] - mx) * (xs[i] - mx);
                dy += (ys[i] - my) * (ys[i] - my);
            }
            if (dx > 0.0 && dy > 0.0) acc += num / std::sqrt(dx * dy);
            ++count;
        }
    }
    return count ? acc / double(count) : 0.0;
}

namespace {

std::string band_ge(double v, double good, double fair) {
    return v >= good ? "good" : (v >= fair ? "fair" : "poor");
}
std::string band_le(double v, double good, double fair) {
    return v <= good ? "good" : (v <= fair ? "fair" : "poor");
}

} // namespace

MetricReport score(const AudioSignal& ref, const AudioSignal& est, size_t max_lag,
                   const MetricBands& bands) {
    const AlignResult a = align(ref, est, max_lag);
    MetricReport r;
    r.alignment_lag = a.lag;
    r.sdr_db = sdr(a.ref, a.est);
    r.lsd_db = lsd(a.ref, a.est);
    r.mel_cd = mel_cd(a.ref, a.est);
    r.stoi = stoi(a.ref, a.est);
    r.sdr_band = band_ge(r.sdr_db, bands.sdr_good_db, bands.sdr_fair_db);
    r.stoi_band = band_ge(r.stoi, bands.stoi_good, bands.stoi_fair);
    r.lsd_band = band_le(r.lsd_db, bands.lsd_good_db, bands.lsd_fair_db);
    r.mel_cd_band = band_le(r.mel_cd, bands.mel_cd_good, bands.mel_cd_fair);
    return r;
}

std::string metric_report_json(const MetricReport& r) {
    nlohmann::json j = {
        {"sdr_db", r.sdr_db},           {"lsd_db", r.lsd_db},
        {"mel_cd", r.mel_cd},           {"stoi", r.stoi},
        {"alignment_lag", r.alignment_lag},
        {"bands",
         {{"sdr", r.sdr_band}, {"lsd", r.lsd_band}, {"mel_cd", r.mel_cd_band}, {"stoi", r.stoi_band}}},
        // reserved for externally computed scores (conformance suites not shipped here)
        {"pesq", nullptr},
        {"estoi", nullptr},
    };
    return j.dump(2);
}

std::string metric_report_csv_header() {
    return "sdr_db,lsd_db,mel_cd,stoi,alignment_lag,sdr_band,lsd_band,mel_cd_band,stoi_band";
}

std::string metric_report_csv_row(const MetricReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%ld,%s,%s,%s,%s", r.sdr_db, r.lsd_db,
                  r.mel_cd, r.stoi, r.alignment_lag, r.sdr_band.c_str(), r.lsd_band.c_str(),
                  r.mel_cd_band.c_str(), r.stoi_band.c_str());
    return buf;
}

} // namespace rfsep
