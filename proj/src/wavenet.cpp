#include "rfsep/wavenet.hpp"

#include "rfsep/rng.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rfsep {

using ag::Tensor;

WaveNetConfig WaveNetConfig::paper_scale() {
    WaveNetConfig cfg;
    cfg.residual_channels = 128;
    cfg.num_blocks = 30;
    cfg.kernel_size = 3;
    cfg.dilation_cycle = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    return cfg;
}

void WaveNetConfig::validate() const {
    if (residual_channels < 1 || num_blocks < 1 || kernel_size < 1 || dilation_cycle.empty())
        throw std::invalid_argument("WaveNetConfig: channels, blocks, kernel and dilation cycle "
                                    "must all be nonempty/positive");
}

size_t WaveNetConfig::receptive_field() const {
    size_t dil_sum = 0;
    for (size_t b = 0; b < num_blocks; ++b) dil_sum += dilation_for_block(b);
    return 1 + (kernel_size - 1) * dil_sum;
}

namespace {

Tensor init_tensor(std::vector<size_t> shape, size_t fan_in, Rng& rng) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    const double bound = std::sqrt(1.0 / static_cast<double>(std::max<size_t>(fan_in, 1)));
    std::vector<float> data(n);
    for (auto& v : data) v = static_cast<float>(rng.uniform(-bound, bound));
    return Tensor::from_data(std::move(shape), std::move(data), true);
}

} // namespace

WaveNet::WaveNet(WaveNetConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(seed);
    const size_t c = cfg_.residual_channels;
    const size_t k = cfg_.kernel_size;
    auto add_conv = [&](const std::string& name, size_t cout, size_t cin, size_t kernel) {
        params_.emplace_back(name + ".w", init_tensor({cout, cin, kernel}, cin * kernel, rng));
        params_.emplace_back(name + ".b", Tensor::zeros({cout}, true));
    };
    add_conv("input", c, 2, 1);
    for (size_t b = 0; b < cfg_.num_blocks; ++b) {
        const std::string p = "block" + std::to_string(b);
        add_conv(p + ".gate", 2 * c, c, k); // tanh half and sigmoid half
        add_conv(p + ".res", c, c, 1);
        add_conv(p + ".skip", c, c, 1);
    }
    add_conv("head.pre", c, c, 1);
    add_conv("head.out", 2, c, 1);
}

const Tensor& WaveNet::param(const std::string& name) const {
    for (const auto& [n, t] : params_)
        if (n == name) return t;
    throw std::logic_error("WaveNet: unknown parameter " + name);
}

size_t WaveNet::parameter_count() const {
    size_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

ag::Tensor WaveNet::forward(const Tensor& mixture) const {
    const auto& s = mixture.shape();
    if (s.size() != 2 || s[0] != 2)
        throw std::invalid_argument("WaveNet::forward: expected [2, L] input, got " +
                                    ag::shape_str(s));
    const size_t c = cfg_.residual_channels;
    if (s[1] < cfg_.receptive_field())
        std::fprintf(stderr,
                     "wavenet: input length %zu is shorter than the receptive field %zu; "
                     "running with implicit zero padding\n",
                     s[1], cfg_.receptive_field());
    Tensor x = conv1d(mixture, param("input.w"), param("input.b"), 1, cfg_.causal);
    Tensor skip_sum;
    for (size_t b = 0; b < cfg_.num_blocks; ++b) {
        const std::string p = "block" + std::to_string(b);
        Tensor g = conv1d(x, param(p + ".gate.w"), param(p + ".gate.b"),
                          cfg_.dilation_for_block(b), cfg_.causal);
        Tensor act = mul(tanh_op(slice(g, 0, 0, c)), sigmoid(slice(g, 0, c, 2 * c)));
        Tensor res = conv1d(act, param(p + ".res.w"), param(p + ".res.b"), 1, cfg_.causal);
        x = add(x, res);
        Tensor skip = conv1d(act, param(p + ".skip.w"), param(p + ".skip.b"), 1, cfg_.causal);
        skip_sum = skip_sum.defined() ? add(skip_sum, skip) : skip;
    }
    Tensor h = relu(skip_sum);
    h = relu(conv1d(h, param("head.pre.w"), param("head.pre.b"), 1, cfg_.causal));
    return conv1d(h, param("head.out.w"), param("head.out.b"), 1, cfg_.causal);
}

} // namespace rfsep
