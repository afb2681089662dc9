#pragma once

#include "rfsep/iq_signal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rfsep {

// Simplified parameterized OFDM downlink. Every resource element carries a
// random QAM symbol so the interference is persistent across the whole grid.
struct OfdmConfig {
    size_t fft_size = 64;
    size_t num_active_subcarriers = 48;
    size_t cp_length = 16;
    double subcarrier_spacing_hz = 15000.0;
    unsigned qam_order = 4; // 4, 16 or 64
    size_t num_symbols = 100;
    uint64_t seed = 0;

    void validate() const;
    double sample_rate_hz() const { return static_cast<double>(fft_size) * subcarrier_spacing_hz; }
    size_t symbol_length() const { return fft_size + cp_length; }
};

// Transmitted QAM symbols, num_symbols rows x num_active_subcarriers columns,
// column order matching active_subcarrier_bins().
struct OfdmGrid {
    size_t num_symbols = 0;
    size_t num_subcarriers = 0;
    std::vector<cpx> symbols;

    cpx& at(size_t sym, size_t sc) { return symbols[sym * num_subcarriers + sc]; }
    const cpx& at(size_t sym, size_t sc) const { return symbols[sym * num_subcarriers + sc]; }
};

struct OfdmSignal {
    IqSignal signal;
    OfdmGrid grid;
};

// FFT bin indices of the active subcarriers: symmetric around DC, DC unused.
std::vector<size_t> active_subcarrier_bins(const OfdmConfig& cfg);

// Unit-average-power constellation for the given order.
std::vector<cpx> qam_constellation(unsigned order);

OfdmSignal ofdm_generate(const OfdmConfig& cfg);

// Strip CPs, FFT each symbol, sample the active bins. Used as the
// self-inverse oracle and for grid inspection on clean signals.
OfdmGrid ofdm_demodulate(const IqSignal& x, const OfdmConfig& cfg);

// Nearest-constellation-point decisions; returns symbol error count against
// a reference grid after removing a common complex scale.
size_t ofdm_symbol_errors(const OfdmGrid& received, const OfdmGrid& reference, unsigned qam_order);

void grid_write_csv(const std::string& path, const OfdmGrid& grid);

} // namespace rfsep
