// rfsep: operator front end over the separation workbench.
//
// Subcommands: generate, mix, train, separate, evaluate, bench, sweep.
// One JSON config file describes the experiment; flags override fields and
// the hash of the effective config is embedded in every artifact.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 realtime infeasible.

#include "CLI11.hpp"

#include "rfsep/audio.hpp"
#include "rfsep/baselines.hpp"
#include "rfsep/checkpoint.hpp"
#include "rfsep/fm.hpp"
#include "rfsep/metrics.hpp"
#include "rfsep/mixing.hpp"
#include "rfsep/ofdm.hpp"
#include "rfsep/rng.hpp"
#include "rfsep/streaming.hpp"
#include "rfsep/train.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rfsep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInfeasible = 4;

json default_config() {
    return json{
        {"seed", 0},
        {"output_dir", "run"},
        {"audio", {{"wav", ""}, {"seconds", 4.0}}},
        {"fm", {{"deviation_hz", 5000.0}, {"audio_rate_hz", 8000.0}, {"rf_rate_hz", 50000.0}}},
        {"ofdm",
         {{"fft_size", 64},
          {"num_active_subcarriers", 48},
          {"cp_length", 16},
          {"subcarrier_spacing_hz", 15000.0},
          {"qam_order", 4},
          {"num_symbols", 40000}}},
        {"dataset",
         {{"slice_length", 10240},
          {"sinr_low_db", -20.0},
          {"sinr_high_db", 20.0},
          {"count", 64},
          {"shift_step_hz", 0.0},
          {"train_fraction", 0.75}}},
        {"model",
         {{"kind", "wavenet"},
          {"wavenet",
           {{"residual_channels", 32}, {"num_blocks", 10}, {"kernel_size", 3}, {"causal", true}}},
          {"decoder",
           {{"num_layers", 4},
            {"hidden_dim", 96},
            {"num_heads", 4},
            {"window_samples", 64},
            {"context_windows", 32}}}}},
        {"train",
         {{"epochs", 10},
          {"learning_rate", 1e-3},
          {"batch_size", 8},
          {"max_time_shift", 256},
          {"scheduled_sampling", 0.0}}},
        {"evaluate",
         {{"sinr_grid", {-10.0, 0.0, 10.0}},
          {"max_lag", 256},
          {"methods", {"passthrough", "matched"}},
          {"lmmse_window", 64},
          {"max_examples", 8}}},
        {"bench",
         {{"batch_size", 1},
          {"signal_length", 10240},
          {"sample_rate_hz", 50000.0},
          {"stub_tau_s", 0.025},
          {"duration_s", 0.45}}},
        {"sweep", {{"batch_sizes", {1, 2, 4, 8, 16}}, {"signal_length", 10240}, {"trials", 10}}}};
}

void merge_into(json& base, const json& overlay) {
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge_into(base[it.key()], *it);
        else
            base[it.key()] = *it;
    }
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("config file not found: " + path);
        json user;
        try {
            in >> user;
        } catch (const json::parse_error& e) {
            throw std::invalid_argument("config parse error in " + path + ": " + e.what());
        }
        if (!user.is_object()) throw std::invalid_argument("config root must be an object");
        merge_into(cfg, user);
    }
    return cfg;
}

// FNV-1a over the canonical (sorted-key) dump; stable across runs and hosts.
// The output location is provenance, not an experiment parameter, so it is
// excluded: the same experiment written elsewhere hashes the same.
std::string config_hash(const json& cfg) {
    json canon = cfg;
    canon.erase("output_dir");
    const std::string s = canon.dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Hash of just the fields that determine the dataset bytes; training
// hyperparameters do not invalidate a dataset.
std::string dataset_fingerprint(const json& cfg) {
    return config_hash(json{{"seed", cfg["seed"]},
                            {"audio", cfg["audio"]},
                            {"fm", cfg["fm"]},
                            {"ofdm", cfg["ofdm"]},
                            {"dataset", cfg["dataset"]}});
}

std::string model_fingerprint(const json& cfg) {
    return config_hash(json{{"dataset", dataset_fingerprint(cfg)},
                            {"model", cfg["model"]},
                            {"train", cfg["train"]}});
}

void write_stamp(const fs::path& dir, const json& cfg, const std::string& fingerprint,
                 const std::string& command) {
    json stamp{{"config_hash", fingerprint},
               {"full_config_hash", config_hash(cfg)},
               {"seed", cfg["seed"].get<uint64_t>()},
               {"command", command}};
    std::ofstream out(dir / "stamp.json");
    out << stamp.dump(2) << "\n";
}

// Returns the stamped hash, or "" when no stamp exists.
std::string read_stamp_hash(const fs::path& dir) {
    std::ifstream in(dir / "stamp.json");
    if (!in) return "";
    json stamp;
    in >> stamp;
    return stamp.value("config_hash", "");
}

void check_stamp(const fs::path& dir, const std::string& expected, bool force, const char* what) {
    const std::string stamped = read_stamp_hash(dir);
    if (stamped.empty()) return;
    if (stamped != expected && !force)
        throw std::runtime_error(std::string(what) + " at " + dir.string() +
                                 " was produced with config " + stamped + ", current is " +
                                 expected + "; pass --force to use it anyway");
}

FmConfig fm_from(const json& cfg) {
    FmConfig f;
    f.deviation_hz = cfg["fm"]["deviation_hz"].get<double>();
    f.audio_rate_hz = cfg["fm"]["audio_rate_hz"].get<double>();
    f.rf_rate_hz = cfg["fm"]["rf_rate_hz"].get<double>();
    f.validate();
    return f;
}

OfdmConfig ofdm_from(const json& cfg) {
    OfdmConfig o;
    o.fft_size = cfg["ofdm"]["fft_size"].get<size_t>();
    o.num_active_subcarriers = cfg["ofdm"]["num_active_subcarriers"].get<size_t>();
    o.cp_length = cfg["ofdm"]["cp_length"].get<size_t>();
    o.subcarrier_spacing_hz = cfg["ofdm"]["subcarrier_spacing_hz"].get<double>();
    o.qam_order = cfg["ofdm"]["qam_order"].get<unsigned>();
    o.num_symbols = cfg["ofdm"]["num_symbols"].get<size_t>();
    o.seed = cfg["seed"].get<uint64_t>() ^ 0x0fdul;
    o.validate();
    return o;
}

DatasetSpec dataset_spec_from(const json& cfg) {
    DatasetSpec s;
    s.slice_length = cfg["dataset"]["slice_length"].get<size_t>();
    s.sinr_low_db = cfg["dataset"]["sinr_low_db"].get<double>();
    s.sinr_high_db = cfg["dataset"]["sinr_high_db"].get<double>();
    s.count = cfg["dataset"]["count"].get<size_t>();
    s.shift_step_hz = cfg["dataset"]["shift_step_hz"].get<double>();
    s.train_fraction = cfg["dataset"]["train_fraction"].get<double>();
    s.seed = cfg["seed"].get<uint64_t>();
    s.validate();
    return s;
}

SeparatorModel model_from(const json& cfg) {
    const std::string kind = cfg["model"]["kind"].get<std::string>();
    const uint64_t seed = cfg["seed"].get<uint64_t>();
    if (kind == "wavenet") {
        const json& w = cfg["model"]["wavenet"];
        WaveNetConfig wc;
        wc.residual_channels = w["residual_channels"].get<size_t>();
        wc.num_blocks = w["num_blocks"].get<size_t>();
        wc.kernel_size = w["kernel_size"].get<size_t>();
        wc.causal = w["causal"].get<bool>();
        wc.validate();
        return SeparatorModel::make_wavenet(wc, seed);
    }
    if (kind == "decoder") {
        const json& d = cfg["model"]["decoder"];
        DecoderConfig dc;
        dc.num_layers = d["num_layers"].get<size_t>();
        dc.hidden_dim = d["hidden_dim"].get<size_t>();
        dc.num_heads = d["num_heads"].get<size_t>();
        dc.window_samples = d["window_samples"].get<size_t>();
        dc.context_windows = d["context_windows"].get<size_t>();
        dc.validate();
        return SeparatorModel::make_decoder(dc, seed);
    }
    if (kind == "passthrough") return SeparatorModel::make_passthrough();
    throw std::invalid_argument("model.kind must be wavenet, decoder or passthrough, got " + kind);
}

AudioSignal synthetic_voice(double fs, double seconds, uint64_t seed) {
    Rng rng(seed);
    const auto n = static_cast<size_t>(fs * seconds);
    AudioSignal a;
    a.sample_rate_hz = fs;
    a.samples.assign(n, 0.0);
    const double tones[] = {220.0, 450.0, 870.0, 1300.0, 2100.0};
    const double mods[] = {2.1, 3.7, 5.3, 1.3, 4.4};
    for (size_t j = 0; j < 5; ++j) {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            a.samples[i] += 0.15 * (0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * mods[j] * t)) *
                            std::sin(2.0 * std::numbers::pi * tones[j] * t + phase);
        }
    }
    for (auto& v : a.samples) v += 0.01 * rng.gaussian(); // keep every band alive
    return a;
}

int cmd_generate(const json& cfg) {
    const fs::path out = cfg["output_dir"].get<std::string>();
    fs::create_directories(out);
    const FmConfig fm = fm_from(cfg);

    AudioSignal audio;
    const std::string wav = cfg["audio"]["wav"].get<std::string>();
    if (!wav.empty()) {
        audio = wav_read(wav);
        std::printf("audio: %s (%zu samples @ %.0f Hz)\n", wav.c_str(), audio.size(),
                    audio.sample_rate_hz);
    } else {
        audio = synthetic_voice(fm.audio_rate_hz, cfg["audio"]["seconds"].get<double>(),
                                cfg["seed"].get<uint64_t>());
        std::printf("audio: synthetic, %.2f s @ %.0f Hz\n",
                    cfg["audio"]["seconds"].get<double>(), fm.audio_rate_hz);
    }
    wav_write((out / "soi_audio.wav").string(), audio);

    const IqSignal soi = fm_modulate(audio, fm);
    rfiq_write((out / "soi.rfiq").string(), soi);
    std::printf("soi.rfiq: %zu samples @ %.0f Hz\n", soi.size(), soi.sample_rate_hz);

    const OfdmSignal interference = ofdm_generate(ofdm_from(cfg));
    rfiq_write((out / "interference.rfiq").string(), interference.signal);
    std::printf("interference.rfiq: %zu samples @ %.0f Hz\n", interference.signal.size(),
                interference.signal.sample_rate_hz);

    write_stamp(out, cfg, dataset_fingerprint(cfg), "generate");
    return kExitOk;
}

int cmd_mix(const json& cfg, bool force) {
    const fs::path out = cfg["output_dir"].get<std::string>();
    const fs::path ds_dir = out / "dataset";
    if (fs::exists(ds_dir / "manifest.json") && !force)
        throw std::runtime_error("dataset already exists at " + ds_dir.string() +
                                 "; pass --force to rebuild");
    const IqSignal soi_raw = rfiq_read((out / "soi.rfiq").string());
    const IqSignal intf_raw = rfiq_read((out / "interference.rfiq").string());
    const DatasetSpec spec = dataset_spec_from(cfg);

    const auto soi_pool = prepare_soi_pool(soi_raw, spec.slice_length);
    const auto intf_pool = prepare_interference_pool(intf_raw, spec, soi_raw.sample_rate_hz);
    std::printf("pools: %zu SOI slices, %zu interference slices (length %zu)\n", soi_pool.size(),
                intf_pool.size(), spec.slice_length);
    if (soi_pool.empty() || intf_pool.empty())
        throw std::runtime_error(
            "empty slice pool: SOI " + std::to_string(soi_raw.size()) + " and interference " +
            std::to_string(intf_raw.size()) + " samples must both cover slice_length " +
            std::to_string(spec.slice_length) + " after resampling");

    const Dataset ds = build_dataset(soi_pool, intf_pool, spec);
    double worst = 0.0;
    for (const auto& ex : ds.examples)
        worst = std::max(worst, std::abs(ex.achieved_sinr_db - ex.target_sinr_db));
    std::printf("mixed %zu examples (%zu train / %zu val), max |achieved-target| SINR %.4f dB\n",
                ds.examples.size(), ds.train_count, ds.examples.size() - ds.train_count, worst);

    fs::create_directories(ds_dir);
    dataset_save(ds_dir.string(), ds, spec);
    write_stamp(ds_dir, cfg, dataset_fingerprint(cfg), "mix");
    return kExitOk;
}

int cmd_train(const json& cfg, bool force, bool verbose) {
    const fs::path out = cfg["output_dir"].get<std::string>();
    const fs::path ds_dir = out / "dataset";
    check_stamp(ds_dir, dataset_fingerprint(cfg), force, "dataset");
    const Dataset ds = dataset_load(ds_dir.string());

    SeparatorModel model = model_from(cfg);
    std::printf("model: %s, %zu parameters\n", cfg["model"]["kind"].get<std::string>().c_str(),
                model.parameter_count());

    fs::create_directories(out / "checkpoints");
    TrainConfig tc;
    tc.epochs = cfg["train"]["epochs"].get<size_t>();
    tc.learning_rate = cfg["train"]["learning_rate"].get<double>();
    tc.batch_size = cfg["train"]["batch_size"].get<size_t>();
    tc.max_time_shift = cfg["train"]["max_time_shift"].get<size_t>();
    tc.scheduled_sampling = cfg["train"]["scheduled_sampling"].get<double>();
    tc.seed = cfg["seed"].get<uint64_t>();
    tc.checkpoint_prefix = (out / "checkpoints" / "best").string();
    tc.log_csv_path = (out / "train_log.csv").string();
    tc.verbose = verbose;

    const TrainResult r = train(model, ds, tc);
    std::printf("best val MSE %.6f at epoch %zu (passthrough control %.6f)\n", r.best_val_loss,
                r.best_epoch, r.passthrough_val_mse);

    json summary{{"config_hash", config_hash(cfg)},
                 {"seed", tc.seed},
                 {"train_loss", r.train_loss},
                 {"val_loss", r.val_loss},
                 {"best_val_loss", r.best_val_loss},
                 {"best_epoch", r.best_epoch},
                 {"passthrough_val_mse", r.passthrough_val_mse}};
    std::ofstream(out / "train_summary.json") << summary.dump(2) << "\n";
    write_stamp(out / "checkpoints", cfg, model_fingerprint(cfg), "train");
    return kExitOk;
}

int cmd_separate(const json& cfg, const std::string& in_path, const std::string& out_path,
                 const std::string& method, const std::string& checkpoint) {
    const IqSignal mixture = rfiq_read(in_path);
    IqSignal estimate;
    if (method == "passthrough") {
        estimate = mixture;
    } else if (method == "bandpass") {
        estimate = bandpass_filter(mixture, occupied_band(mixture));
    } else if (method == "wavenet" || method == "decoder") {
        json model_cfg = cfg;
        model_cfg["model"]["kind"] = method;
        SeparatorModel model = model_from(model_cfg);
        if (!checkpoint.empty()) checkpoint_restore(checkpoint, model.parameters());
        estimate = model.separate(mixture);
    } else {
        throw std::invalid_argument(
            "method must be passthrough, bandpass, wavenet or decoder, got " + method);
    }
    rfiq_write(out_path, estimate);
    std::printf("%s -> %s via %s (%zu samples)\n", in_path.c_str(), out_path.c_str(),
                method.c_str(), estimate.size());
    return kExitOk;
}

double metric_or_nan(double v) { return std::isfinite(v) ? v : std::nan(""); }

int cmd_evaluate(const json& cfg, bool force) {
    const fs::path out = cfg["output_dir"].get<std::string>();
    const fs::path ds_dir = out / "dataset";
    check_stamp(ds_dir, dataset_fingerprint(cfg), force, "dataset");
    if (fs::exists(out / "checkpoints"))
        check_stamp(out / "checkpoints", model_fingerprint(cfg), force, "checkpoint");
    const Dataset ds = dataset_load(ds_dir.string());
    if (ds.train_count >= ds.examples.size())
        throw std::runtime_error("dataset has no validation split to evaluate on");

    const FmConfig fm = fm_from(cfg);
    const json& ev = cfg["evaluate"];
    const auto grid = ev["sinr_grid"].get<std::vector<double>>();
    const auto methods = ev["methods"].get<std::vector<std::string>>();
    const auto max_lag = ev["max_lag"].get<size_t>();
    const size_t max_examples = ev["max_examples"].get<size_t>();
    const size_t lmmse_window = ev["lmmse_window"].get<size_t>();

    // covariances from the train split components, shared across the grid
    CovarianceMatrix c_s, c_b;
    bool have_cov = false;
    for (const auto& m : methods) {
        if (m != "lmmse") continue;
        std::vector<IqSignal> soi_train, intf_train;
        for (size_t i = 0; i < ds.train_count; ++i) {
            soi_train.push_back(ds.examples[i].soi);
            intf_train.push_back(ds.examples[i].interference_scaled);
        }
        c_s = estimate_covariance(soi_train, lmmse_window);
        c_b = estimate_covariance(intf_train, lmmse_window);
        have_cov = true;
    }

    SeparatorModel model = SeparatorModel::make_passthrough();
    bool have_model = false;
    for (const auto& m : methods) {
        if (m != "wavenet" && m != "decoder") continue;
        json model_cfg = cfg;
        model_cfg["model"]["kind"] = m;
        model = model_from(model_cfg);
        checkpoint_restore((out / "checkpoints" / "best").string(), model.parameters());
        have_model = true;
    }

    std::ofstream csv(out / "metrics.csv");
    csv << "# config_hash=" << config_hash(cfg) << " seed=" << cfg["seed"].get<uint64_t>() << "\n";
    csv << "method,sinr_db,metric,value\n";

    const size_t n_val = std::min(max_examples, ds.examples.size() - ds.train_count);
    for (const auto& method : methods) {
        for (double sinr : grid) {
            AudioSignal ref_cat, est_cat;
            long worst_lag = 0;
            for (size_t v = 0; v < n_val; ++v) {
                const auto& ex = ds.examples[ds.train_count + v];
                const MixtureExample remix =
                    mix_at_sinr(ex.soi, ex.interference_scaled, sinr, ex.soi_band);
                IqSignal est;
                if (method == "passthrough")
                    est = remix.mixture;
                else if (method == "matched")
                    est = bandpass_filter(remix.mixture, ex.soi_band);
                else if (method == "lmmse" && have_cov)
                    est = lmmse_baseline(remix.mixture, c_s, c_b);
                else if ((method == "wavenet" || method == "decoder") && have_model)
                    est = model.separate(remix.mixture);
                else
                    throw std::invalid_argument("unknown evaluate method " + method);
                const AudioSignal ref_audio = fm_demodulate(ex.soi, fm);
                const AudioSignal est_audio = fm_demodulate(est, fm);
                const AlignResult al = align(ref_audio, est_audio, max_lag);
                worst_lag = std::max(worst_lag, std::abs(al.lag));
                ref_cat.sample_rate_hz = al.ref.sample_rate_hz;
                est_cat.sample_rate_hz = al.est.sample_rate_hz;
                ref_cat.samples.insert(ref_cat.samples.end(), al.ref.samples.begin(),
                                       al.ref.samples.end());
                est_cat.samples.insert(est_cat.samples.end(), al.est.samples.begin(),
                                       al.est.samples.end());
            }
            const double v_sdr = metric_or_nan(sdr(ref_cat, est_cat));
            const double v_lsd = metric_or_nan(lsd(ref_cat, est_cat));
            const double v_mcd = metric_or_nan(mel_cd(ref_cat, est_cat));
            double v_stoi = std::nan("");
            try {
                v_stoi = stoi(ref_cat, est_cat);
            } catch (const std::invalid_argument&) {
                // too short or silent for the intelligibility window; leave nan
            }
            char line[256];
            const auto row = [&](const char* name, double val) {
                std::snprintf(line, sizeof(line), "%s,%.2f,%s,%.6f\n", method.c_str(), sinr, name,
                              val);
                csv << line;
            };
            row("sdr_db", v_sdr);
            row("lsd_db", v_lsd);
            row("mel_cd", v_mcd);
            row("stoi", v_stoi);
            std::printf("%-12s %+6.1f dB: sdr %7.3f  lsd %6.3f  mcd %6.3f  stoi %6.3f  (lag<=%ld)\n",
                        method.c_str(), sinr, v_sdr, v_lsd, v_mcd, v_stoi, worst_lag);
        }
    }
    return kExitOk;
}

StreamFn bench_model(const json& cfg, const std::string& checkpoint) {
    const double tau = cfg["bench"]["stub_tau_s"].get<double>();
    if (tau > 0.0) return stub_model(tau);
    json model_cfg = cfg;
    SeparatorModel model = model_from(model_cfg);
    if (!checkpoint.empty()) checkpoint_restore(checkpoint, model.parameters());
    return separator_stream_fn(std::move(model), cfg["bench"]["sample_rate_hz"].get<double>());
}

int cmd_bench(const json& cfg, const std::string& checkpoint) {
    const fs::path out = cfg["output_dir"].get<std::string>();
    fs::create_directories(out);
    StreamConfig sc;
    sc.batch_size = cfg["bench"]["batch_size"].get<size_t>();
    sc.signal_length = cfg["bench"]["signal_length"].get<size_t>();
    sc.sample_rate_hz = cfg["bench"]["sample_rate_hz"].get<double>();
    const double duration = cfg["bench"]["duration_s"].get<double>();

    IqSignal source;
    source.sample_rate_hz = sc.sample_rate_hz;
    Rng rng(cfg["seed"].get<uint64_t>());
    source.samples.resize(static_cast<size_t>(duration * sc.sample_rate_hz) +
                          sc.batch_size * sc.signal_length);
    for (auto& v : source.samples) v = cpx(rng.gaussian(), rng.gaussian());

    auto [processed, report] = run_stream(sc, source, bench_model(cfg, checkpoint), duration);
    (void)processed;

    json j = json::parse(latency_report_json(report));
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg["seed"].get<uint64_t>();
    std::ofstream(out / "latency.json") << j.dump(2) << "\n";

    std::printf("buffer latency %.4f s, tau mean %.4f s, first sample after %.4f s\n",
                report.buffer_latency_s, report.inference_time_s, report.first_sample_latency_s);
    std::printf("throughput out %.0f Hz vs in %.0f Hz -> %s\n", report.output_throughput_hz,
                report.input_throughput_hz, report.realtime_feasible ? "feasible" : "INFEASIBLE");
    return report.realtime_feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const json& cfg, const std::string& checkpoint) {
    const fs::path out = cfg["output_dir"].get<std::string>();
    fs::create_directories(out);
    const auto batches = cfg["sweep"]["batch_sizes"].get<std::vector<size_t>>();
    const size_t length = cfg["sweep"]["signal_length"].get<size_t>();
    const size_t trials = cfg["sweep"]["trials"].get<size_t>();
    const double fs_hz = cfg["bench"]["sample_rate_hz"].get<double>();

    const SweepResult s = batching_sweep(bench_model(cfg, checkpoint), length, fs_hz, batches,
                                         trials);
    std::ofstream csv(out / "sweep.csv");
    csv << "# config_hash=" << config_hash(cfg) << " seed=" << cfg["seed"].get<uint64_t>() << "\n";
    csv << sweep_csv(s);
    for (const auto& r : s.rows)
        std::printf("B=%-3zu tau %.5f s  per-window %.5f s  throughput %10.0f Hz  %s\n",
                    r.batch_size, r.tau_p50_s, r.per_window_s, r.throughput_hz, r.status.c_str());
    if (s.flattening_batch)
        std::printf("throughput gains flatten at B=%zu (marginal gain < 5%%)\n",
                    s.flattening_batch);
    else
        std::printf("throughput gains do not flatten within the sweep\n");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF interference-rejection workbench"};
    app.require_subcommand(1);
    app.fallthrough(); // -c/--force may follow the subcommand name

    std::string config_path;
    bool force = false;
    app.add_option("-c,--config", config_path, "experiment config JSON");
    app.add_flag("--force", force, "ignore config-hash mismatches and overwrite guards");

    // flag overrides collected here, applied on top of the file before hashing
    json overrides = json::object();
    auto add_override = [&](CLI::App* sub) {
        sub->add_option_function<uint64_t>(
            "--seed", [&](uint64_t v) { overrides["seed"] = v; }, "global seed");
        sub->add_option_function<std::string>(
            "--out", [&](const std::string& v) { overrides["output_dir"] = v; }, "run directory");
    };

    auto* c_gen = app.add_subcommand("generate", "synthesize SOI and interference source files");
    std::string gen_wav;
    c_gen->add_option("--wav", gen_wav, "modulate this WAV instead of the synthetic voice");
    add_override(c_gen);

    auto* c_mix = app.add_subcommand("mix", "build the mixture dataset");
    size_t mix_count = 0;
    double mix_lo = std::nan(""), mix_hi = std::nan("");
    c_mix->add_option("--count", mix_count, "number of examples");
    c_mix->add_option("--sinr-low", mix_lo, "low edge of the SINR draw, dB");
    c_mix->add_option("--sinr-high", mix_hi, "high edge of the SINR draw, dB");
    add_override(c_mix);

    auto* c_train = app.add_subcommand("train", "train the configured separator");
    size_t tr_epochs = 0;
    double tr_lr = 0.0;
    std::string tr_model;
    bool tr_verbose = false;
    c_train->add_option("--epochs", tr_epochs, "training epochs");
    c_train->add_option("--lr", tr_lr, "learning rate");
    c_train->add_option("--model", tr_model, "wavenet | decoder | passthrough");
    c_train->add_flag("-v,--verbose", tr_verbose, "per-epoch progress on stderr");
    add_override(c_train);

    auto* c_sep = app.add_subcommand("separate", "run one mixture file through a separator");
    std::string sep_in, sep_out, sep_method = "passthrough", sep_ckpt;
    c_sep->add_option("--in", sep_in, "input RFIQ file")->required();
    c_sep->add_option("--output", sep_out, "output RFIQ file")->required();
    c_sep->add_option("--method", sep_method, "passthrough | bandpass | wavenet | decoder");
    c_sep->add_option("--checkpoint", sep_ckpt, "checkpoint prefix for model methods");
    add_override(c_sep);

    auto* c_eval = app.add_subcommand("evaluate", "metric-vs-SINR table on the validation split");
    std::vector<std::string> ev_methods;
    c_eval->add_option("--method", ev_methods, "methods to evaluate (repeatable)");
    add_override(c_eval);

    auto* c_bench = app.add_subcommand("bench", "pipelined stream latency report");
    std::string bench_ckpt;
    double bench_tau = std::nan("");
    c_bench->add_option("--stub-tau", bench_tau, "stub inference time, s (0 = use the model)");
    c_bench->add_option("--checkpoint", bench_ckpt, "checkpoint prefix when using the model");
    add_override(c_bench);

    auto* c_sweep = app.add_subcommand("sweep", "batch-size sweep of tau and throughput");
    std::vector<size_t> sweep_batches;
    c_sweep->add_option("--batch", sweep_batches, "batch sizes to sweep (repeatable)");
    c_sweep->add_option("--checkpoint", bench_ckpt, "checkpoint prefix when using the model");
    add_override(c_sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = load_config(config_path);
        merge_into(cfg, overrides);
        if (c_mix->parsed()) {
            if (mix_count) cfg["dataset"]["count"] = mix_count;
            if (std::isfinite(mix_lo)) cfg["dataset"]["sinr_low_db"] = mix_lo;
            if (std::isfinite(mix_hi)) cfg["dataset"]["sinr_high_db"] = mix_hi;
        }
        if (c_train->parsed()) {
            if (tr_epochs) cfg["train"]["epochs"] = tr_epochs;
            if (tr_lr > 0.0) cfg["train"]["learning_rate"] = tr_lr;
            if (!tr_model.empty()) cfg["model"]["kind"] = tr_model;
        }
        if (c_eval->parsed() && !ev_methods.empty()) cfg["evaluate"]["methods"] = ev_methods;
        if (c_bench->parsed() && std::isfinite(bench_tau)) cfg["bench"]["stub_tau_s"] = bench_tau;
        if (c_sweep->parsed() && !sweep_batches.empty())
            cfg["sweep"]["batch_sizes"] = sweep_batches;
        if (c_gen->parsed() && !gen_wav.empty()) cfg["audio"]["wav"] = gen_wav;

        if (c_gen->parsed()) return cmd_generate(cfg);
        if (c_mix->parsed()) return cmd_mix(cfg, force);
        if (c_train->parsed()) return cmd_train(cfg, force, tr_verbose);
        if (c_sep->parsed()) return cmd_separate(cfg, sep_in, sep_out, sep_method, sep_ckpt);
        if (c_eval->parsed()) return cmd_evaluate(cfg, force);
        if (c_bench->parsed()) return cmd_bench(cfg, bench_ckpt);
        if (c_sweep->parsed()) return cmd_sweep(cfg, bench_ckpt);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}
