#pragma once

#include "rfsep/checkpoint.hpp"
#include "rfsep/tensor.hpp"

#include <cstdint>
#include <vector>

namespace rfsep {

struct WaveNetConfig {
    size_t residual_channels = 32;
    size_t num_blocks = 10;
    size_t kernel_size = 3;
    std::vector<size_t> dilation_cycle = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    bool causal = true;

    // Table-scale configuration: 30 blocks of 128 channels, kernel 3,
    // dilation cycle 1..512 repeated three times.
    static WaveNetConfig paper_scale();

    void validate() const;
    size_t dilation_for_block(size_t block) const {
        return dilation_cycle[block % dilation_cycle.size()];
    }
    // 1 + (kernel-1) * sum of per-block dilations
    size_t receptive_field() const;
};

// Dilated-convolution separator: gated residual blocks feeding a summed skip
// path, temporal resolution preserved end to end.
class WaveNet {
  public:
    WaveNet(WaveNetConfig cfg, uint64_t seed);

    // mixture [2, L] -> SOI estimate [2, L]
    ag::Tensor forward(const ag::Tensor& mixture) const;

    const WaveNetConfig& config() const { return cfg_; }
    NamedTensors& parameters() { return params_; }
    const NamedTensors& parameters() const { return params_; }
    size_t parameter_count() const;

  private:
    const ag::Tensor& param(const std::string& name) const;
    WaveNetConfig cfg_;
    NamedTensors params_;
};

} // namespace rfsep
