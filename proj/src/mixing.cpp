#include "rfsep/mixing.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace rfsep {

using nlohmann::json;

void DatasetSpec::validate() const {
    if (slice_length < 1) throw std::invalid_argument("DatasetSpec: slice_length must be >= 1");
    if (sinr_low_db > sinr_high_db)
        throw std::invalid_argument("DatasetSpec: sinr_low_db must be <= sinr_high_db");
    if (count < 1) throw std::invalid_argument("DatasetSpec: count must be >= 1");
    if (train_fraction < 0.0 || train_fraction > 1.0)
        throw std::invalid_argument("DatasetSpec: train_fraction must be in [0, 1]");
    if (include_awgn && awgn_power < 0.0)
        throw std::invalid_argument("DatasetSpec: awgn_power must be >= 0");
}

std::vector<double> shift_schedule(const IqSignal& raw, double step_hz) {
    if (step_hz <= 0.0) return {0.0};
    const FrequencyBand occ = occupied_band(raw, 0.99);
    const auto k_max = static_cast<long>(std::floor(occ.high_hz / step_hz));
    std::vector<double> shifts;
    for (long k = -k_max; k <= k_max; ++k) shifts.push_back(static_cast<double>(k) * step_hz);
    if (shifts.empty()) shifts.push_back(0.0);
    return shifts;
}

std::vector<IqSignal> prepare_interference_pool(const IqSignal& raw, const DatasetSpec& spec,
                                                double target_fs_hz) {
    spec.validate();
    const auto shifts = shift_schedule(raw, spec.shift_step_hz);
    const double cutoff = 0.45 * std::min(target_fs_hz, raw.sample_rate_hz);
    const FirFilter lp = design_lowpass(cutoff, raw.sample_rate_hz, 129);
    const auto p = static_cast<long long>(std::llround(target_fs_hz));
    const auto q = static_cast<long long>(std::llround(raw.sample_rate_hz));

    std::vector<IqSignal> pool;
    for (double shift : shifts) {
        // bring the selected part of the interference band to baseband
        IqSignal centered = (shift == 0.0) ? raw : frequency_shift(raw, -shift);
        IqSignal filtered = filter(centered, lp);
        IqSignal common_rate = resample(filtered, static_cast<size_t>(p), static_cast<size_t>(q));
        for (auto& slice : slice_signal(common_rate, spec.slice_length)) {
            if (rms(slice) == 0.0) continue;
            pool.push_back(unit_normalize(slice));
        }
    }
    if (pool.empty())
        throw std::runtime_error("prepare_interference_pool: no usable slices (input too short "
                                 "for slice_length " + std::to_string(spec.slice_length) + ")");
    return pool;
}

std::vector<IqSignal> prepare_soi_pool(const IqSignal& raw, size_t slice_length) {
    if (raw.size() < slice_length)
        throw std::invalid_argument("prepare_soi_pool: input shorter than one slice (" +
                                    std::to_string(raw.size()) + " < " +
                                    std::to_string(slice_length) + ")");
    std::vector<IqSignal> pool;
    for (auto& slice : slice_signal(raw, slice_length)) pool.push_back(unit_normalize(slice));
    return pool;
}

MixtureExample mix_at_sinr(const IqSignal& s, const IqSignal& b, double target_sinr_db,
                           const FrequencyBand& soi_band) {
    if (s.size() != b.size())
        throw std::invalid_argument("mix_at_sinr: length mismatch (" + std::to_string(s.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    if (s.sample_rate_hz != b.sample_rate_hz)
        throw std::invalid_argument("mix_at_sinr: sample rate mismatch");
    const double p_s = inband_power(s, soi_band);
    const double p_b = inband_power(b, soi_band);
    if (p_s <= 0.0) throw std::invalid_argument("mix_at_sinr: SOI has zero in-band power");
    if (p_b <= 0.0)
        throw std::invalid_argument("mix_at_sinr: interference has zero in-band power, "
                                    "scale factor undefined");
    const double ratio = std::pow(10.0, target_sinr_db / 10.0);
    const double kappa = std::sqrt(p_s / (ratio * p_b));

    MixtureExample ex;
    ex.soi = s;
    ex.interference_scaled = b;
    for (auto& v : ex.interference_scaled.samples) v *= kappa;
    ex.mixture = ex.soi;
    for (size_t n = 0; n < ex.mixture.size(); ++n)
        ex.mixture.samples[n] = ex.soi.samples[n] + ex.interference_scaled.samples[n];
    ex.target_sinr_db = target_sinr_db;
    ex.kappa = kappa;
    ex.soi_band = soi_band;
    const double p_b_scaled = inband_power(ex.interference_scaled, soi_band);
    ex.achieved_sinr_db = 10.0 * std::log10(p_s / p_b_scaled);
    return ex;
}

Augmentation draw_augmentation(size_t max_shift, Rng& rng) {
    Augmentation aug;
    aug.time_shift = max_shift == 0 ? 0 : static_cast<size_t>(rng.uniform_index(max_shift + 1));
    aug.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return aug;
}

IqSignal augment(const IqSignal& x, const Augmentation& aug) {
    IqSignal y;
    y.sample_rate_hz = x.sample_rate_hz;
    const size_t n = x.size();
    y.samples.resize(n);
    const cpx rot = std::polar(1.0, aug.phase);
    const size_t shift = n == 0 ? 0 : aug.time_shift % n;
    for (size_t i = 0; i < n; ++i) y.samples[(i + shift) % n] = x.samples[i] * rot;
    return y;
}

Dataset build_dataset(const std::vector<IqSignal>& soi_pool,
                      const std::vector<IqSignal>& interference_pool, const DatasetSpec& spec,
                      std::optional<FrequencyBand> soi_band) {
    spec.validate();
    if (soi_pool.empty() || interference_pool.empty())
        throw std::invalid_argument("build_dataset: empty pool");
    Dataset ds;
    ds.examples.reserve(spec.count);
    for (size_t i = 0; i < spec.count; ++i) {
        Rng rng = Rng::for_index(spec.seed, i);
        const IqSignal& s = soi_pool[rng.uniform_index(soi_pool.size())];
        IqSignal b = interference_pool[rng.uniform_index(interference_pool.size())];
        const double sinr = rng.uniform(spec.sinr_low_db, spec.sinr_high_db);
        if (spec.include_awgn && spec.awgn_power > 0.0) {
            const double sigma = std::sqrt(spec.awgn_power / 2.0);
            for (auto& v : b.samples)
                v += cpx{sigma * rng.gaussian(), sigma * rng.gaussian()};
        }
        // default band: measured 99%-power bandwidth of the clean SOI slice
        const FrequencyBand band = soi_band ? *soi_band : occupied_band(s, 0.99);
        MixtureExample ex = mix_at_sinr(s, b, sinr, band);
        ex.seed = Rng::for_index(spec.seed, i).next_u64();
        ds.examples.push_back(std::move(ex));
    }
    ds.train_count = static_cast<size_t>(std::llround(spec.train_fraction *
                                                      static_cast<double>(spec.count)));
    return ds;
}

namespace {

IqSignal quantize_f32(const IqSignal& x) {
    IqSignal y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.samples.reserve(x.size());
    for (const auto& v : x.samples)
        y.samples.emplace_back(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    return y;
}

} // namespace

void dataset_save(const std::string& dir, const Dataset& ds, const DatasetSpec& spec) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json manifest;
    manifest["seed"] = spec.seed;
    manifest["spec"] = {{"slice_length", spec.slice_length},
                        {"sinr_low_db", spec.sinr_low_db},
                        {"sinr_high_db", spec.sinr_high_db},
                        {"count", spec.count},
                        {"shift_step_hz", spec.shift_step_hz},
                        {"include_awgn", spec.include_awgn},
                        {"awgn_power", spec.awgn_power},
                        {"train_fraction", spec.train_fraction}};
    manifest["train_count"] = ds.train_count;
    manifest["examples"] = json::array();
    char name[64];
    for (size_t i = 0; i < ds.examples.size(); ++i) {
        const auto& ex = ds.examples[i];
        const IqSignal soi32 = quantize_f32(ex.soi);
        const IqSignal intf32 = quantize_f32(ex.interference_scaled);
        IqSignal mix32 = soi32;
        for (size_t n = 0; n < mix32.size(); ++n) {
            // f32 arithmetic so that mixture == soi + interference bit-exactly on disk
            const float re = static_cast<float>(soi32.samples[n].real()) +
                             static_cast<float>(intf32.samples[n].real());
            const float im = static_cast<float>(soi32.samples[n].imag()) +
                             static_cast<float>(intf32.samples[n].imag());
            mix32.samples[n] = cpx{re, im};
        }
        std::snprintf(name, sizeof(name), "ex%06zu", i);
        const std::string base(name);
        rfiq_write(dir + "/" + base + "_mixture.rfiq", mix32);
        rfiq_write(dir + "/" + base + "_soi.rfiq", soi32);
        rfiq_write(dir + "/" + base + "_interference.rfiq", intf32);
        manifest["examples"].push_back({{"base", base},
                                        {"kappa", ex.kappa},
                                        {"target_sinr_db", ex.target_sinr_db},
                                        {"achieved_sinr_db", ex.achieved_sinr_db},
                                        {"soi_band_low_hz", ex.soi_band.low_hz},
                                        {"soi_band_high_hz", ex.soi_band.high_hz},
                                        {"seed", ex.seed}});
    }
    std::ofstream f(dir + "/manifest.json");
    if (!f) throw std::runtime_error("dataset_save: cannot write manifest in " + dir);
    f << manifest.dump(2) << '\n';
}

Dataset dataset_load(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw std::runtime_error("dataset_load: no manifest.json in " + dir);
    json manifest = json::parse(f);
    Dataset ds;
    ds.train_count = manifest.at("train_count").get<size_t>();
    for (const auto& e : manifest.at("examples")) {
        MixtureExample ex;
        const auto base = e.at("base").get<std::string>();
        ex.mixture = rfiq_read(dir + "/" + base + "_mixture.rfiq");
        ex.soi = rfiq_read(dir + "/" + base + "_soi.rfiq");
        ex.interference_scaled = rfiq_read(dir + "/" + base + "_interference.rfiq");
        ex.kappa = e.at("kappa").get<double>();
        ex.target_sinr_db = e.at("target_sinr_db").get<double>();
        ex.achieved_sinr_db = e.at("achieved_sinr_db").get<double>();
        ex.soi_band = FrequencyBand(e.at("soi_band_low_hz").get<double>(),
                                    e.at("soi_band_high_hz").get<double>());
        ex.seed = e.at("seed").get<uint64_t>();
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

} // namespace rfsep
