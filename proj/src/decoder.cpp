#include "rfsep/decoder.hpp"

#include "rfsep/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfsep {

using ag::Tensor;

DecoderConfig DecoderConfig::paper_scale() {
    DecoderConfig cfg;
    cfg.num_layers = 14;
    cfg.hidden_dim = 480;
    cfg.num_heads = 12;
    cfg.window_samples = 80;
    cfg.context_windows = 20;
    return cfg;
}

void DecoderConfig::validate() const {
    if (num_layers < 1 || hidden_dim < 1 || num_heads < 1 || window_samples < 1 ||
        context_windows < 1)
        throw std::invalid_argument("DecoderConfig: all dimensions must be positive");
    if (hidden_dim % num_heads != 0)
        throw std::invalid_argument("DecoderConfig: hidden_dim must divide evenly across heads");
    if (head_dim() % 2 != 0)
        throw std::invalid_argument("DecoderConfig: head dim must be even for rotary encoding");
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

TransformerDecoder::TransformerDecoder(DecoderConfig cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    const size_t d = cfg_.hidden_dim;
    const size_t ff = 4 * d;
    auto add_linear = [&](const std::string& name, size_t in, size_t out) {
        params_.emplace_back(name + ".w", init_tensor({in, out}, in, rng));
        params_.emplace_back(name + ".b", Tensor::zeros({out}, true));
    };
    auto add_norm = [&](const std::string& name) {
        params_.emplace_back(name + ".g", Tensor::filled({d}, 1.0f, true));
        params_.emplace_back(name + ".b", Tensor::zeros({d}, true));
    };
    add_linear("embed", 2 * cfg_.token_dim(), d); // mixture window + previous SOI window
    for (size_t l = 0; l < cfg_.num_layers; ++l) {
        const std::string p = "layer" + std::to_string(l);
        add_norm(p + ".ln1");
        add_linear(p + ".attn.q", d, d);
        add_linear(p + ".attn.k", d, d);
        add_linear(p + ".attn.v", d, d);
        add_linear(p + ".attn.o", d, d);
        add_norm(p + ".ln2");
        add_linear(p + ".ff1", d, ff);
        add_linear(p + ".ff2", ff, d);
    }
    add_norm("final_ln");
    add_linear("out", d, cfg_.token_dim());
}

const Tensor& TransformerDecoder::param(const std::string& name) const {
    for (const auto& [n, t] : params_)
        if (n == name) return t;
    throw std::logic_error("TransformerDecoder: unknown parameter " + name);
}

size_t TransformerDecoder::parameter_count() const {
    size_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

ag::Tensor TransformerDecoder::forward(const Tensor& mixture_tokens,
                                       const Tensor& soi_teacher) const {
    const auto& sm = mixture_tokens.shape();
    if (sm.size() != 2 || sm[1] != cfg_.token_dim() || soi_teacher.shape() != sm)
        throw std::invalid_argument("TransformerDecoder::forward: expected matching [T, " +
                                    std::to_string(cfg_.token_dim()) + "] token matrices");
    const size_t tokens = sm[0];
    const size_t d = cfg_.hidden_dim;
    const size_t heads = cfg_.num_heads;
    const size_t k_ctx = cfg_.context_windows;

    // token t conditions on the teacher SOI window at t-1 (zeros at t=0)
    Tensor prev = Tensor::zeros({1, cfg_.token_dim()});
    if (tokens > 1)
        prev = ag::concat<float>({prev, slice(soi_teacher, 0, 0, tokens - 1)}, 0);
    Tensor x = linear(ag::concat<float>({mixture_tokens, prev}, 1), param("embed.w"),
                      param("embed.b"));

    // causal sliding window: token t attends to s in [max(0, t-K+1), t]
    std::vector<float> mask(tokens * tokens, -1e9f);
    for (size_t t = 0; t < tokens; ++t)
        for (size_t s = (t + 1 >= k_ctx ? t + 1 - k_ctx : 0); s <= t; ++s)
            mask[t * tokens + s] = 0.0f;
    const Tensor mask_t = Tensor::from_data({tokens, tokens}, std::move(mask));
    const float inv_sqrt_dh =
        static_cast<float>(1.0 / std::sqrt(static_cast<double>(cfg_.head_dim())));

    for (size_t l = 0; l < cfg_.num_layers; ++l) {
        const std::string p = "layer" + std::to_string(l);
        Tensor h = layer_norm(x, param(p + ".ln1.g"), param(p + ".ln1.b"));
        Tensor qh = rope(split_heads(linear(h, param(p + ".attn.q.w"), param(p + ".attn.q.b")),
                                     heads),
                         0, cfg_.rope_base);
        Tensor kh = rope(split_heads(linear(h, param(p + ".attn.k.w"), param(p + ".attn.k.b")),
                                     heads),
                         0, cfg_.rope_base);
        Tensor vh = split_heads(linear(h, param(p + ".attn.v.w"), param(p + ".attn.v.b")), heads);
        Tensor scores = add(scale(matmul(qh, transpose(kh)), inv_sqrt_dh), mask_t);
        Tensor ctx = merge_heads(matmul(softmax(scores), vh));
        x = add(x, linear(ctx, param(p + ".attn.o.w"), param(p + ".attn.o.b")));
        Tensor h2 = layer_norm(x, param(p + ".ln2.g"), param(p + ".ln2.b"));
        Tensor ff = linear(gelu(linear(h2, param(p + ".ff1.w"), param(p + ".ff1.b"))),
                           param(p + ".ff2.w"), param(p + ".ff2.b"));
        x = add(x, ff);
    }
    x = layer_norm(x, param("final_ln.g"), param("final_ln.b"));
    (void)d;
    return linear(x, param("out.w"), param("out.b"));
}

StreamState TransformerDecoder::stream_reset() const {
    StreamState st;
    st.layers.resize(cfg_.num_layers);
    st.last_soi_window.assign(cfg_.token_dim(), 0.0f);
    return st;
}

// The incremental helpers below mirror the tensor ops bit for bit: float
// accumulators walked in the same index order, double only where the batch
// path uses double. That keeps the cached path numerically equal to forward().
namespace {

std::vector<float> matvec(const std::vector<float>& x, const Tensor& w, const Tensor& b) {
    const size_t in = w.shape()[0], out = w.shape()[1];
    std::vector<float> y(out, 0.0f);
    const float* pw = w.data().data();
    for (size_t i = 0; i < in; ++i) {
        const float xv = x[i];
        if (xv == 0.0f) continue;
        const float* row = pw + i * out;
        for (size_t j = 0; j < out; ++j) y[j] += xv * row[j];
    }
    for (size_t j = 0; j < out; ++j) y[j] = y[j] + b.data()[j];
    return y;
}

std::vector<float> norm_row(const std::vector<float>& x, const Tensor& g, const Tensor& b,
                            float eps = 1e-5f) {
    const size_t d = x.size();
    double mean = 0.0;
    for (float v : x) mean += static_cast<double>(v);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (float v : x) {
        const double c = static_cast<double>(v) - mean;
        var += c * c;
    }
    var /= static_cast<double>(d);
    const float istd = static_cast<float>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    std::vector<float> y(d);
    for (size_t i = 0; i < d; ++i) {
        const float xhat = static_cast<float>(static_cast<double>(x[i]) - mean) * istd;
        y[i] = g.data()[i] * xhat + b.data()[i];
    }
    return y;
}

void rope_row(std::vector<float>& x, size_t heads, size_t dh, size_t pos, double base) {
    for (size_t h = 0; h < heads; ++h)
        for (size_t j = 0; j < dh / 2; ++j) {
            const double theta =
                static_cast<double>(pos) *
                std::pow(base, -2.0 * static_cast<double>(j) / static_cast<double>(dh));
            const double c = std::cos(theta), s = std::sin(theta);
            const size_t i0 = h * dh + 2 * j;
            const double x0 = x[i0], x1 = x[i0 + 1];
            x[i0] = static_cast<float>(x0 * c - x1 * s);
            x[i0 + 1] = static_cast<float>(x0 * s + x1 * c);
        }
}

float gelu_scalar(float x) {
    return 0.5f * x *
           (1.0f + static_cast<float>(std::erf(static_cast<double>(x) / std::numbers::sqrt2)));
}

} // namespace

std::vector<float> TransformerDecoder::stream_step(StreamState& state,
                                                   const std::vector<float>& mixture_window,
                                                   const std::vector<float>* teacher_prev) const {
    if (mixture_window.size() != cfg_.token_dim())
        throw std::invalid_argument("stream_step: mixture window must hold " +
                                    std::to_string(cfg_.token_dim()) + " values");
    if (state.layers.size() != cfg_.num_layers)
        throw std::invalid_argument("stream_step: state was not produced by stream_reset()");
    const std::vector<float>& prev = teacher_prev ? *teacher_prev : state.last_soi_window;
    if (prev.size() != cfg_.token_dim())
        throw std::invalid_argument("stream_step: previous SOI window has wrong length");

    const size_t d = cfg_.hidden_dim;
    const size_t heads = cfg_.num_heads;
    const size_t dh = cfg_.head_dim();
    const size_t pos = state.token_counter;
    const float inv_sqrt_dh = static_cast<float>(1.0 / std::sqrt(static_cast<double>(dh)));

    std::vector<float> tok(2 * cfg_.token_dim());
    std::copy(mixture_window.begin(), mixture_window.end(), tok.begin());
    std::copy(prev.begin(), prev.end(), tok.begin() + cfg_.token_dim());
    std::vector<float> x = matvec(tok, param("embed.w"), param("embed.b"));

    for (size_t l = 0; l < cfg_.num_layers; ++l) {
        const std::string p = "layer" + std::to_string(l);
        auto& cache = state.layers[l];
        const std::vector<float> h = norm_row(x, param(p + ".ln1.g"), param(p + ".ln1.b"));
        std::vector<float> q = matvec(h, param(p + ".attn.q.w"), param(p + ".attn.q.b"));
        std::vector<float> k = matvec(h, param(p + ".attn.k.w"), param(p + ".attn.k.b"));
        std::vector<float> v = matvec(h, param(p + ".attn.v.w"), param(p + ".attn.v.b"));
        rope_row(q, heads, dh, pos, cfg_.rope_base);
        rope_row(k, heads, dh, pos, cfg_.rope_base);
        cache.keys.push_back(std::move(k));
        cache.values.push_back(std::move(v));
        if (cache.keys.size() > cfg_.context_windows) {
            cache.keys.pop_front();
            cache.values.pop_front();
        }
        const size_t span = cache.keys.size();

        std::vector<float> ctx(d, 0.0f);
        std::vector<float> scores(span);
        for (size_t hd = 0; hd < heads; ++hd) {
            for (size_t s = 0; s < span; ++s) {
                float acc = 0.0f;
                const float* kr = cache.keys[s].data() + hd * dh;
                const float* qr = q.data() + hd * dh;
                for (size_t j = 0; j < dh; ++j) acc += qr[j] * kr[j];
                scores[s] = acc * inv_sqrt_dh + 0.0f; // masked lanes never enter the cache
            }
            float mx = scores[0];
            for (size_t s = 1; s < span; ++s) mx = std::max(mx, scores[s]);
            double sum = 0.0;
            for (size_t s = 0; s < span; ++s) {
                scores[s] = static_cast<float>(std::exp(static_cast<double>(scores[s] - mx)));
                sum += static_cast<double>(scores[s]);
            }
            const float inv = static_cast<float>(1.0 / sum);
            float* cr = ctx.data() + hd * dh;
            for (size_t s = 0; s < span; ++s) {
                const float w = scores[s] * inv;
                if (w == 0.0f) continue;
                const float* vr = cache.values[s].data() + hd * dh;
                for (size_t j = 0; j < dh; ++j) cr[j] += w * vr[j];
            }
        }
        const std::vector<float> attn_out =
            matvec(ctx, param(p + ".attn.o.w"), param(p + ".attn.o.b"));
        for (size_t i = 0; i < d; ++i) x[i] = x[i] + attn_out[i];

        const std::vector<float> h2 = norm_row(x, param(p + ".ln2.g"), param(p + ".ln2.b"));
        std::vector<float> f = matvec(h2, param(p + ".ff1.w"), param(p + ".ff1.b"));
        for (auto& vv : f) vv = gelu_scalar(vv);
        const std::vector<float> f2 = matvec(f, param(p + ".ff2.w"), param(p + ".ff2.b"));
        for (size_t i = 0; i < d; ++i) x[i] = x[i] + f2[i];
    }
    x = norm_row(x, param("final_ln.g"), param("final_ln.b"));
    std::vector<float> out = matvec(x, param("out.w"), param("out.b"));
    state.last_soi_window = out;
    state.token_counter += 1;
    return out;
}

Tensor windows_from_iq(const std::vector<float>& i_samples, const std::vector<float>& q_samples,
                       size_t window, bool pad_tail) {
    if (window == 0 || i_samples.size() != q_samples.size() || i_samples.empty())
        throw std::invalid_argument("windows_from_iq: need equal nonempty I/Q and window > 0");
    if (!pad_tail && i_samples.size() % window != 0)
        throw std::invalid_argument("windows_from_iq: length " +
                                    std::to_string(i_samples.size()) +
                                    " is not a multiple of window " + std::to_string(window));
    const size_t tokens = (i_samples.size() + window - 1) / window;
    std::vector<float> data(tokens * 2 * window, 0.0f); // zero pad the tail window
    for (size_t t = 0; t < tokens; ++t)
        for (size_t j = 0; j < window; ++j) {
            const size_t n = t * window + j;
            if (n >= i_samples.size()) break;
            data[t * 2 * window + j] = i_samples[n];
            data[t * 2 * window + window + j] = q_samples[n];
        }
    return Tensor::from_data({tokens, 2 * window}, std::move(data));
}

void iq_from_windows(const Tensor& tokens, size_t window, std::vector<float>& i_samples,
                     std::vector<float>& q_samples) {
    const auto& s = tokens.shape();
    if (s.size() != 2 || s[1] != 2 * window)
        throw std::invalid_argument("iq_from_windows: expected [T, 2*window] tokens");
    const size_t t_count = s[0];
    i_samples.assign(t_count * window, 0.0f);
    q_samples.assign(t_count * window, 0.0f);
    for (size_t t = 0; t < t_count; ++t)
        for (size_t j = 0; j < window; ++j) {
            i_samples[t * window + j] = tokens.data()[t * 2 * window + j];
            q_samples[t * window + j] = tokens.data()[t * 2 * window + window + j];
        }
}

} // namespace rfsep
