#pragma once

#include "rfsep/iq_signal.hpp"
#include "rfsep/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rfsep {

// One training/eval record. mixture == soi + interference_scaled holds exactly
// by construction; achieved SINR is re-measured from the stored components.
struct MixtureExample {
    IqSignal mixture;
    IqSignal soi;
    IqSignal interference_scaled;
    double target_sinr_db = 0.0;
    double achieved_sinr_db = 0.0;
    double kappa = 1.0;
    FrequencyBand soi_band;
    uint64_t seed = 0;
};

struct DatasetSpec {
    size_t slice_length = 10240;
    double sinr_low_db = -20.0;
    double sinr_high_db = 20.0;
    size_t count = 1000;
    double shift_step_hz = 0.0; // 0 => single shift at baseband
    bool include_awgn = false;
    double awgn_power = 0.0;
    double train_fraction = 0.9;
    uint64_t seed = 0;

    void validate() const;
};

struct Dataset {
    std::vector<MixtureExample> examples;
    size_t train_count = 0; // examples[0..train_count) train, rest val
};

// Fig.-4-style interference preparation: for every shift in the schedule,
// shift -> lowpass around baseband -> resample to target_fs -> slice ->
// unit-normalize. The pool is the union over shifts.
std::vector<IqSignal> prepare_interference_pool(const IqSignal& raw, const DatasetSpec& spec,
                                                double target_fs_hz);

// Shift schedule: multiples of step covering the occupied band (always
// includes 0; step <= 0 gives just {0}).
std::vector<double> shift_schedule(const IqSignal& raw, double step_hz);

std::vector<IqSignal> prepare_soi_pool(const IqSignal& raw, size_t slice_length);

// Scale b so the measured in-band power ratio hits the target, then add.
MixtureExample mix_at_sinr(const IqSignal& s, const IqSignal& b, double target_sinr_db,
                           const FrequencyBand& soi_band);

struct Augmentation {
    size_t time_shift = 0;
    double phase = 0.0;
};

Augmentation draw_augmentation(size_t max_shift, Rng& rng);

// Circular time shift then global phase rotation. Unitary, so it commutes
// with mixing when the same draw is applied to every component.
IqSignal augment(const IqSignal& x, const Augmentation& aug);

// Deterministic per (spec.seed, index): parallel and serial builds agree.
Dataset build_dataset(const std::vector<IqSignal>& soi_pool,
                      const std::vector<IqSignal>& interference_pool, const DatasetSpec& spec,
                      std::optional<FrequencyBand> soi_band = std::nullopt);

// Directory of RFIQ files plus manifest.json (seed, spec echo, per-example
// kappa and SINR). Components are quantized to f32 before the mixture is
// formed so the construction identity also holds on disk.
void dataset_save(const std::string& dir, const Dataset& ds, const DatasetSpec& spec);
Dataset dataset_load(const std::string& dir);

} // namespace rfsep
