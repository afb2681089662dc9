#include "rfsep/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace rfsep {

// FFTW plan creation is not thread-safe; execution of a plan on the arrays it
// was planned with is. We plan per call under a lock with FFTW_ESTIMATE, which
// is cheap and keeps every public entry point safely callable from any thread.
static std::mutex g_plan_mutex;

static std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& x,
                                                   int sign) {
    if (x.empty()) throw std::invalid_argument("fft: empty input");
    std::vector<std::complex<double>> out(x.size());
    auto* in_ptr = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(x.data()));
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(x.size()), in_ptr, out_ptr, sign,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x) {
    return transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x) {
    auto out = transform(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : out) v *= scale;
    return out;
}

double bin_frequency_hz(size_t k, size_t n, double fs) {
    double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f >= fs / 2.0) f -= fs;
    return f;
}

} // namespace rfsep
