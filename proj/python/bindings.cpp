// Python surface over the workbench: signal generation, mixing, separators,
// metrics and the latency model. Complex baseband signals cross the boundary
// as (complex128 array, sample_rate) pairs.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rfsep/baselines.hpp"
#include "rfsep/checkpoint.hpp"
#include "rfsep/fm.hpp"
#include "rfsep/metrics.hpp"
#include "rfsep/mixing.hpp"
#include "rfsep/ofdm.hpp"
#include "rfsep/streaming.hpp"
#include "rfsep/train.hpp"

namespace py = pybind11;
using namespace rfsep;

namespace {

IqSignal iq_from_array(const py::array_t<std::complex<double>>& a, double fs) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d complex array");
    IqSignal x;
    x.sample_rate_hz = fs;
    x.samples.assign(a.data(), a.data() + a.shape(0));
    return x;
}

py::array_t<std::complex<double>> iq_to_array(const IqSignal& x) {
    py::array_t<std::complex<double>> out(std::vector<py::ssize_t>{py::ssize_t(x.size())});
    std::copy(x.samples.begin(), x.samples.end(), out.mutable_data());
    return out;
}

AudioSignal audio_from_array(const py::array_t<double>& a, double fs) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d float array");
    AudioSignal x;
    x.sample_rate_hz = fs;
    x.samples.assign(a.data(), a.data() + a.shape(0));
    return x;
}

py::array_t<double> audio_to_array(const AudioSignal& a) {
    py::array_t<double> out(std::vector<py::ssize_t>{py::ssize_t(a.size())});
    std::copy(a.samples.begin(), a.samples.end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_rfsep, m) {
    m.doc() = "RF interference-rejection workbench";

    py::class_<IqSignal>(m, "IqSignal")
        .def(py::init([](py::array_t<std::complex<double>> a, double fs) {
                 return iq_from_array(a, fs);
             }),
             py::arg("samples"), py::arg("sample_rate_hz"))
        .def_property_readonly("samples", &iq_to_array)
        .def_readonly("sample_rate_hz", &IqSignal::sample_rate_hz)
        .def("__len__", &IqSignal::size);

    py::class_<AudioSignal>(m, "AudioSignal")
        .def(py::init([](py::array_t<double> a, double fs) { return audio_from_array(a, fs); }),
             py::arg("samples"), py::arg("sample_rate_hz"))
        .def_property_readonly("samples", &audio_to_array)
        .def_readonly("sample_rate_hz", &AudioSignal::sample_rate_hz)
        .def("__len__", &AudioSignal::size);

    py::class_<FrequencyBand>(m, "FrequencyBand")
        .def(py::init<double, double>(), py::arg("low_hz"), py::arg("high_hz"))
        .def_readonly("low_hz", &FrequencyBand::low_hz)
        .def_readonly("high_hz", &FrequencyBand::high_hz)
        .def("width_hz", &FrequencyBand::width_hz);

    // signal core
    m.def("frequency_shift", &frequency_shift, py::arg("x"), py::arg("delta_hz"));
    m.def("resample", &resample, py::arg("x"), py::arg("p"), py::arg("q"));
    m.def("unit_normalize", &unit_normalize);
    m.def("rms", &rms);
    m.def("inband_power", &inband_power, py::arg("x"), py::arg("band"));
    m.def("occupied_band", &occupied_band, py::arg("x"), py::arg("fraction") = 0.99);
    m.def("rfiq_read", &rfiq_read);
    m.def("rfiq_write", &rfiq_write);
    m.def("wav_read", &wav_read);
    m.def("wav_write", [](const std::string& p, const AudioSignal& a) { wav_write(p, a); });

    // waveforms
    py::class_<FmConfig>(m, "FmConfig")
        .def(py::init<>())
        .def_readwrite("deviation_hz", &FmConfig::deviation_hz)
        .def_readwrite("audio_rate_hz", &FmConfig::audio_rate_hz)
        .def_readwrite("rf_rate_hz", &FmConfig::rf_rate_hz);
    m.def("fm_modulate", &fm_modulate, py::arg("audio"), py::arg("cfg") = FmConfig{});
    m.def("fm_demodulate", &fm_demodulate, py::arg("x"), py::arg("cfg") = FmConfig{});

    py::class_<OfdmConfig>(m, "OfdmConfig")
        .def(py::init<>())
        .def_readwrite("fft_size", &OfdmConfig::fft_size)
        .def_readwrite("num_active_subcarriers", &OfdmConfig::num_active_subcarriers)
        .def_readwrite("cp_length", &OfdmConfig::cp_length)
        .def_readwrite("subcarrier_spacing_hz", &OfdmConfig::subcarrier_spacing_hz)
        .def_readwrite("qam_order", &OfdmConfig::qam_order)
        .def_readwrite("num_symbols", &OfdmConfig::num_symbols)
        .def_readwrite("seed", &OfdmConfig::seed)
        .def("sample_rate_hz", &OfdmConfig::sample_rate_hz);
    m.def("ofdm_generate", [](const OfdmConfig& cfg) { return ofdm_generate(cfg).signal; });

    // mixing
    py::class_<MixtureExample>(m, "MixtureExample")
        .def_readonly("mixture", &MixtureExample::mixture)
        .def_readonly("soi", &MixtureExample::soi)
        .def_readonly("interference_scaled", &MixtureExample::interference_scaled)
        .def_readonly("target_sinr_db", &MixtureExample::target_sinr_db)
        .def_readonly("achieved_sinr_db", &MixtureExample::achieved_sinr_db)
        .def_readonly("kappa", &MixtureExample::kappa);
    m.def("mix_at_sinr", &mix_at_sinr, py::arg("soi"), py::arg("interference"),
          py::arg("target_sinr_db"), py::arg("soi_band"));

    // separators
    py::class_<WaveNetConfig>(m, "WaveNetConfig")
        .def(py::init<>())
        .def_readwrite("residual_channels", &WaveNetConfig::residual_channels)
        .def_readwrite("num_blocks", &WaveNetConfig::num_blocks)
        .def_readwrite("kernel_size", &WaveNetConfig::kernel_size)
        .def_readwrite("dilation_cycle", &WaveNetConfig::dilation_cycle)
        .def_readwrite("causal", &WaveNetConfig::causal)
        .def_static("paper_scale", &WaveNetConfig::paper_scale)
        .def("receptive_field", &WaveNetConfig::receptive_field);
    py::class_<DecoderConfig>(m, "DecoderConfig")
        .def(py::init<>())
        .def_readwrite("num_layers", &DecoderConfig::num_layers)
        .def_readwrite("hidden_dim", &DecoderConfig::hidden_dim)
        .def_readwrite("num_heads", &DecoderConfig::num_heads)
        .def_readwrite("window_samples", &DecoderConfig::window_samples)
        .def_readwrite("context_windows", &DecoderConfig::context_windows)
        .def_static("paper_scale", &DecoderConfig::paper_scale);

    py::class_<SeparatorModel>(m, "SeparatorModel")
        .def_static("wavenet", &SeparatorModel::make_wavenet, py::arg("cfg"), py::arg("seed"))
        .def_static("decoder", &SeparatorModel::make_decoder, py::arg("cfg"), py::arg("seed"))
        .def_static("passthrough", &SeparatorModel::make_passthrough)
        .def("parameter_count", &SeparatorModel::parameter_count)
        .def("separate", &SeparatorModel::separate, py::arg("mixture"))
        .def("save",
             [](SeparatorModel& self, const std::string& prefix) {
                 checkpoint_save(prefix, self.parameters());
             })
        .def("load", [](SeparatorModel& self, const std::string& prefix) {
            checkpoint_restore(prefix, self.parameters());
        });

    // baselines
    m.def("bandpass_filter", &bandpass_filter, py::arg("x"), py::arg("band"),
          py::arg("num_taps") = 129);
    m.def("matched_filter_baseline", &matched_filter_baseline, py::arg("mixture"),
          py::arg("soi_band"), py::arg("fm_cfg") = FmConfig{});

    // metrics
    m.def("sdr", &sdr, py::arg("ref"), py::arg("est"));
    m.def("lsd", &lsd, py::arg("ref"), py::arg("est"), py::arg("frame") = 512,
          py::arg("hop") = 256);
    m.def("mel_cd", &mel_cd, py::arg("ref"), py::arg("est"), py::arg("num_mels") = 26,
          py::arg("num_ceps") = 13);
    m.def("stoi", &stoi, py::arg("ref"), py::arg("est"));
    py::class_<MetricReport>(m, "MetricReport")
        .def_readonly("sdr_db", &MetricReport::sdr_db)
        .def_readonly("lsd_db", &MetricReport::lsd_db)
        .def_readonly("mel_cd", &MetricReport::mel_cd)
        .def_readonly("stoi", &MetricReport::stoi)
        .def_readonly("alignment_lag", &MetricReport::alignment_lag)
        .def_readonly("sdr_band", &MetricReport::sdr_band)
        .def_readonly("lsd_band", &MetricReport::lsd_band)
        .def_readonly("mel_cd_band", &MetricReport::mel_cd_band)
        .def_readonly("stoi_band", &MetricReport::stoi_band)
        .def("json", [](const MetricReport& r) { return metric_report_json(r); });
    m.def(
        "score",
        [](const AudioSignal& ref, const AudioSignal& est, size_t max_lag) {
            return score(ref, est, max_lag);
        },
        py::arg("ref"), py::arg("est"), py::arg("max_lag") = 256);

    // latency model
    m.def("buffer_latency", &buffer_latency, py::arg("batch_size"), py::arg("signal_length"),
          py::arg("sample_rate_hz"));
    m.def("output_throughput", &output_throughput, py::arg("batch_size"),
          py::arg("signal_length"), py::arg("inference_time_s"));
}
