#include "rfsep/ofdm.hpp"

#include "rfsep/fft.hpp"
#include "rfsep/rng.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rfsep {

void OfdmConfig::validate() const {
    if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
        throw std::invalid_argument("OfdmConfig: fft_size must be a power of two >= 2");
    if (num_active_subcarriers < 1 || num_active_subcarriers > fft_size - 1)
        throw std::invalid_argument("OfdmConfig: num_active_subcarriers must be in [1, fft_size-1]");
    if (cp_length >= fft_size)
        throw std::invalid_argument("OfdmConfig: cp_length must be < fft_size");
    if (subcarrier_spacing_hz <= 0.0)
        throw std::invalid_argument("OfdmConfig: subcarrier_spacing_hz must be positive");
    if (qam_order != 4 && qam_order != 16 && qam_order != 64)
        throw std::invalid_argument("OfdmConfig: qam_order must be 4, 16 or 64");
    if (num_symbols < 1) throw std::invalid_argument("OfdmConfig: num_symbols must be >= 1");
}

std::vector<size_t> active_subcarrier_bins(const OfdmConfig& cfg) {
    // n/2 on each side of DC (positive side first when odd), DC bin 0 skipped
    const size_t n_pos = (cfg.num_active_subcarriers + 1) / 2;
    const size_t n_neg = cfg.num_active_subcarriers / 2;
    std::vector<size_t> bins;
    bins.reserve(cfg.num_active_subcarriers);
    for (size_t k = 1; k <= n_pos; ++k) bins.push_back(k);
    for (size_t k = n_neg; k >= 1; --k) bins.push_back(cfg.fft_size - k);
    return bins;
}

std::vector<cpx> qam_constellation(unsigned order) {
    size_t side = 0;
    if (order == 4) side = 2;
    else if (order == 16) side = 4;
    else if (order == 64) side = 8;
    else throw std::invalid_argument("qam_constellation: order must be 4, 16 or 64");
    std::vector<cpx> points;
    points.reserve(order);
    double energy = 0.0;
    for (size_t i = 0; i < side; ++i) {
        for (size_t j = 0; j < side; ++j) {
            const double re = 2.0 * static_cast<double>(i) - static_cast<double>(side - 1);
            const double im = 2.0 * static_cast<double>(j) - static_cast<double>(side - 1);
            points.emplace_back(re, im);
            energy += re * re + im * im;
        }
    }
    const double scale = 1.0 / std::sqrt(energy / static_cast<double>(order));
    for (auto& p : points) p *= scale;
    return points;
}

OfdmSignal ofdm_generate(const OfdmConfig& cfg) {
    cfg.validate();
    const auto bins = active_subcarrier_bins(cfg);
    const auto constellation = qam_constellation(cfg.qam_order);
    Rng rng(cfg.seed);

    OfdmSignal out;
    out.grid.num_symbols = cfg.num_symbols;
    out.grid.num_subcarriers = bins.size();
    out.grid.symbols.resize(cfg.num_symbols * bins.size());
    out.signal.sample_rate_hz = cfg.sample_rate_hz();
    out.signal.samples.reserve(cfg.num_symbols * cfg.symbol_length());

    std::vector<cpx> freq(cfg.fft_size);
    for (size_t sym = 0; sym < cfg.num_symbols; ++sym) {
        std::fill(freq.begin(), freq.end(), cpx{0.0, 0.0});
        for (size_t sc = 0; sc < bins.size(); ++sc) {
            const cpx point = constellation[rng.uniform_index(constellation.size())];
            out.grid.at(sym, sc) = point;
            freq[bins[sc]] = point;
        }
        const auto body = ifft(freq);
        // cyclic prefix then body
        for (size_t i = cfg.fft_size - cfg.cp_length; i < cfg.fft_size; ++i)
            out.signal.samples.push_back(body[i]);
        out.signal.samples.insert(out.signal.samples.end(), body.begin(), body.end());
    }
    return out;
}

OfdmGrid ofdm_demodulate(const IqSignal& x, const OfdmConfig& cfg) {
    cfg.validate();
    const size_t sym_len = cfg.symbol_length();
    const size_t num_symbols = x.size() / sym_len;
    if (num_symbols == 0)
        throw std::invalid_argument("ofdm_demodulate: signal shorter than one OFDM symbol");
    const auto bins = active_subcarrier_bins(cfg);
    OfdmGrid grid;
    grid.num_symbols = num_symbols;
    grid.num_subcarriers = bins.size();
    grid.symbols.resize(num_symbols * bins.size());
    for (size_t sym = 0; sym < num_symbols; ++sym) {
        const auto* body = x.samples.data() + sym * sym_len + cfg.cp_length;
        const auto freq = fft(std::vector<cpx>(body, body + cfg.fft_size));
        for (size_t sc = 0; sc < bins.size(); ++sc) grid.at(sym, sc) = freq[bins[sc]];
    }
    return grid;
}

size_t ofdm_symbol_errors(const OfdmGrid& received, const OfdmGrid& reference, unsigned qam_order) {
    if (received.num_symbols != reference.num_symbols ||
        received.num_subcarriers != reference.num_subcarriers)
        throw std::invalid_argument("ofdm_symbol_errors: grid shapes differ");
    // least-squares common scale (handles FFT normalization and channel gain)
    cpx num{0.0, 0.0};
    double den = 0.0;
    for (size_t i = 0; i < received.symbols.size(); ++i) {
        num += reference.symbols[i] * std::conj(received.symbols[i]);
        den += std::norm(received.symbols[i]);
    }
    if (den == 0.0) throw std::invalid_argument("ofdm_symbol_errors: received grid is all zero");
    const cpx scale = num / den;
    const auto constellation = qam_constellation(qam_order);
    auto nearest = [&](cpx v) {
        size_t best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (size_t i = 0; i < constellation.size(); ++i) {
            const double d = std::norm(v - constellation[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };
    size_t errors = 0;
    for (size_t i = 0; i < received.symbols.size(); ++i)
        if (nearest(received.symbols[i] * scale) != nearest(reference.symbols[i])) ++errors;
    return errors;
}

void grid_write_csv(const std::string& path, const OfdmGrid& grid) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("grid_write_csv: cannot open " + path);
    f << "symbol,subcarrier,re,im\n";
    for (size_t sym = 0; sym < grid.num_symbols; ++sym)
        for (size_t sc = 0; sc < grid.num_subcarriers; ++sc) {
            const cpx v = grid.at(sym, sc);
            f << sym << ',' << sc << ',' << v.real() << ',' << v.imag() << '\n';
        }
}

} // namespace rfsep
