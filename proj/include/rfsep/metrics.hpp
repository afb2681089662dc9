#pragma once

#include "rfsep/audio.hpp"

#include <cstdint>
#include <string>

namespace rfsep {

// Cross-correlation alignment: argmax lag within +/- max_lag, both signals
// trimmed to the overlapping support. A peak below the confidence floor keeps
// lag 0 and warns instead of failing.
struct AlignResult {
    AudioSignal ref;
    AudioSignal est;
    long lag = 0; // positive: est lags ref by this many samples
    bool confident = true;
};
AlignResult align(const AudioSignal& ref, const AudioSignal& est, size_t max_lag);

// 10 log10(|ref|^2 / |ref - alpha est|^2), alpha the least-squares scale of
// est onto ref; capped at +100 dB. Scale-invariant in est.
double sdr(const AudioSignal& ref, const AudioSignal& est);

// Mean over frames of sqrt(mean over bins of (10 log10(P_ref / P_est))^2),
// power spectra floored at 1e-10.
double lsd(const AudioSignal& ref, const AudioSignal& est, size_t frame = 512, size_t hop = 256);

// Mel cepstral distortion (10 sqrt(2) / ln 10) * mean_t sqrt(sum (dc)^2),
// coefficients 1..num_ceps (c0 excluded, so gain differences score 0).
double mel_cd(const AudioSignal& ref, const AudioSignal& est, size_t num_mels = 26,
              size_t num_ceps = 13);

// Short-time objective intelligibility: resampled to 10 kHz, 15 one-third-
// octave bands from 150 Hz, 384 ms segments, silent frames removed, clipped
// normalized envelope correlation averaged over bands and segments.
double stoi(const AudioSignal& ref, const AudioSignal& est);

// Good/fair/poor thresholds are report configuration, not algorithm facts.
struct MetricBands {
    double stoi_good = 0.75, stoi_fair = 0.45;      // >=
    double sdr_good_db = 10.0, sdr_fair_db = 0.0;   // >=
    double lsd_good_db = 1.0, lsd_fair_db = 2.5;    // <=
    double mel_cd_good = 4.0, mel_cd_fair = 8.0;    // <=
};

struct MetricReport {
    double sdr_db = 0.0;
    double lsd_db = 0.0;
    double mel_cd = 0.0;
    double stoi = 0.0;
    long alignment_lag = 0;
    std::string sdr_band, lsd_band, mel_cd_band, stoi_band;
};

// align + all four metrics + banding in one call
MetricReport score(const AudioSignal& ref, const AudioSignal& est, size_t max_lag,
                   const MetricBands& bands = {});

std::string metric_report_json(const MetricReport& r);
std::string metric_report_csv_header();
std::string metric_report_csv_row(const MetricReport& r);

} // namespace rfsep
