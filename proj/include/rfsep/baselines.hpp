#pragma once

#include "rfsep/audio.hpp"
#include "rfsep/fm.hpp"
#include "rfsep/iq_signal.hpp"

#include <complex>
#include <vector>

namespace rfsep {

// Classical reference separators the learned models are judged against.

// Bandpass the mixture to the SOI band (shift-lowpass-shift), discarding
// everything the FM receiver would reject, then demodulate. Uses no knowledge
// of the interferer.
AudioSignal matched_filter_baseline(const IqSignal& mixture, const FrequencyBand& soi_band,
                                    const FmConfig& fm_cfg);

// The bandpass front half on its own; also serves as the fixed linear filter
// the LMMSE estimator is compared against.
IqSignal bandpass_filter(const IqSignal& x, const FrequencyBand& band, size_t num_taps = 129);

// Column-major M x M complex matrix.
struct CovarianceMatrix {
    size_t size = 0;
    std::vector<cpx> entries;

    cpx& at(size_t r, size_t c) { return entries[c * size + r]; }
    const cpx& at(size_t r, size_t c) const { return entries[c * size + r]; }
};

// Sample covariance over non-overlapping length-M windows drawn from the pool.
// M is capped at 512: the estimator's cost grows like M^3 and the full-length
// solve is exactly the expense this workbench avoids.
CovarianceMatrix estimate_covariance(const std::vector<IqSignal>& pool, size_t window);

// Wiener estimate s_hat = C_s (C_s + C_b)^-1 y per non-overlapping window,
// solved as a linear system after diagonal loading. The trailing partial
// window uses the leading principal submatrices.
IqSignal lmmse_baseline(const IqSignal& mixture, const CovarianceMatrix& c_s,
                        const CovarianceMatrix& c_b, double diagonal_loading = 1e-9);

} // namespace rfsep
