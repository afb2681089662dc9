#include "rfsep/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace rfsep {

IqSignal bandpass_filter(const IqSignal& x, const FrequencyBand& band, size_t num_taps) {
    x.validate();
    const double center = 0.5 * (band.low_hz + band.high_hz);
    const double half_width = 0.5 * band.width_hz();
    if (half_width <= 0.0)
        throw std::invalid_argument("bandpass_filter: band has non-positive width");
    IqSignal shifted = frequency_shift(x, -center);
    IqSignal low = filter(shifted, design_lowpass(half_width, x.sample_rate_hz, num_taps));
    return frequency_shift(low, center);
}

AudioSignal matched_filter_baseline(const IqSignal& mixture, const FrequencyBand& soi_band,
                                    const FmConfig& fm_cfg) {
    fm_cfg.validate();
    return fm_demodulate(bandpass_filter(mixture, soi_band), fm_cfg);
}

CovarianceMatrix estimate_covariance(const std::vector<IqSignal>& pool, size_t window) {
    if (window == 0 || window > 512)
        throw std::invalid_argument("estimate_covariance: window must be in [1, 512]");
    CovarianceMatrix cov;
    cov.size = window;
    cov.entries.assign(window * window, cpx(0.0, 0.0));
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(window, window);
    size_t count = 0;
    for (const auto& sig : pool) {
        for (size_t start = 0; start + window <= sig.size(); start += window) {
            Eigen::Map<const Eigen::VectorXcd> y(sig.samples.data() + start,
                                                 static_cast<long>(window));
            acc.noalias() += y * y.adjoint();
            ++count;
        }
    }
    if (count == 0)
        throw std::invalid_argument("estimate_covariance: pool holds no full window");
    acc /= static_cast<double>(count);
    Eigen::Map<Eigen::MatrixXcd>(cov.entries.data(), window, window) = acc;
    return cov;
}

IqSignal lmmse_baseline(const IqSignal& mixture, const CovarianceMatrix& c_s,
                        const CovarianceMatrix& c_b, double diagonal_loading) {
    mixture.validate();
    if (c_s.size == 0 || c_s.size != c_b.size)
        throw std::invalid_argument("lmmse_baseline: covariance sizes disagree");
    const long m = static_cast<long>(c_s.size);
    const Eigen::Map<const Eigen::MatrixXcd> cs(c_s.entries.data(), m, m);
    const Eigen::Map<const Eigen::MatrixXcd> cb(c_b.entries.data(), m, m);

    IqSignal out;
    out.sample_rate_hz = mixture.sample_rate_hz;
    out.samples.resize(mixture.size());

    // factor once per distinct window size (full size + possible tail)
    auto solve_block = [&](long mm, const cpx* y_in, cpx* y_out) {
        Eigen::MatrixXcd sum = cs.topLeftCorner(mm, mm) + cb.topLeftCorner(mm, mm);
        const double load = diagonal_loading * sum.trace().real() / static_cast<double>(mm);
        sum.diagonal().array() += cpx(std::max(load, 0.0), 0.0);
        Eigen::LDLT<Eigen::MatrixXcd> fac(sum);
        const double dmax = fac.vectorD().real().maxCoeff();
        const double dmin = fac.vectorD().real().minCoeff();
        if (fac.info() != Eigen::Success || !(dmin > 0.0))
            throw std::runtime_error(
                "lmmse_baseline: C_s + C_b is singular after loading (pivot range " +
                std::to_string(dmin) + " .. " + std::to_string(dmax) + ")");
        Eigen::Map<const Eigen::VectorXcd> y(y_in, mm);
        Eigen::VectorXcd est = cs.topLeftCorner(mm, mm) * fac.solve(y);
        Eigen::Map<Eigen::VectorXcd>(y_out, mm) = est;
    };

    size_t start = 0;
    while (start < mixture.size()) {
        const long mm = static_cast<long>(std::min<size_t>(c_s.size, mixture.size() - start));
        solve_block(mm, mixture.samples.data() + start, out.samples.data() + start);
        start += static_cast<size_t>(mm);
    }
    return out;
}

} // namespace rfsep
