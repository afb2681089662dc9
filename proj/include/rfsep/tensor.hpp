#pragma once

// Reverse-mode autodiff over dense tensors. Dynamic tape: every op records a
// node holding its inputs and a backward closure; backward() walks the graph
// in reverse topological order. Templated on the scalar so the float32
// production path has a float64 shadow for gradient verification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace rfsep::ag {

// When set, every forward op asserts its outputs are finite.
inline bool debug_check_finite = false;

inline std::string shape_str(const std::vector<size_t>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

template <typename T>
struct Node {
    std::vector<size_t> shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backward_fn;

    size_t numel() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    }
};

template <typename T>
class TensorT {
  public:
    TensorT() = default;
    explicit TensorT(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}

    static TensorT zeros(std::vector<size_t> shape, bool requires_grad = false) {
        return filled(std::move(shape), T(0), requires_grad);
    }

    static TensorT filled(std::vector<size_t> shape, T fill, bool requires_grad = false) {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return from_data(std::move(shape), std::vector<T>(n, fill), requires_grad);
    }

    static TensorT scalar(T v, bool requires_grad = false) {
        return from_data({1}, {v}, requires_grad);
    }

    static TensorT from_data(std::vector<size_t> shape, std::vector<T> data,
                             bool requires_grad = false) {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        if (n != data.size())
            throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                        " does not match shape " + shape_str(shape));
        auto node = std::make_shared<Node<T>>();
        node->shape = std::move(shape);
        node->value = std::move(data);
        node->requires_grad = requires_grad;
        return TensorT(std::move(node));
    }

    const std::vector<size_t>& shape() const { return node_->shape; }
    size_t numel() const { return node_->numel(); }
    std::vector<T>& data() { return node_->value; }
    const std::vector<T>& data() const { return node_->value; }
    std::vector<T>& grad() { return node_->grad; }
    const std::vector<T>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }
    void zero_grad() { node_->grad.assign(node_->value.size(), T(0)); }

    T item() const {
        if (numel() != 1) throw std::invalid_argument("item(): tensor is not scalar");
        return node_->value[0];
    }

    std::shared_ptr<Node<T>> node() const { return node_; }
    bool defined() const { return node_ != nullptr; }

  private:
    std::shared_ptr<Node<T>> node_;
};

namespace detail {

template <typename T>
std::shared_ptr<Node<T>> begin_op(std::vector<size_t> shape, size_t numel,
                                  std::initializer_list<TensorT<T>> parents) {
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->value.assign(numel, T(0));
    for (const auto& p : parents) {
        node->requires_grad = node->requires_grad || p.requires_grad();
        node->parents.push_back(p.node());
    }
    return node;
}

template <typename T>
TensorT<T> finish_op(std::shared_ptr<Node<T>> node, std::function<void()> backward) {
    if (debug_check_finite)
        for (T v : node->value)
            if (!std::isfinite(static_cast<double>(v)))
                throw std::runtime_error("autograd: non-finite value in forward op");
    if (node->requires_grad) node->backward_fn = std::move(backward);
    return TensorT<T>(std::move(node));
}

// b's shape must equal a's shape or a suffix of it (bias / mask broadcast).
template <typename T>
void check_suffix(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sb.size() > sa.size() || !std::equal(sb.rbegin(), sb.rend(), sa.rbegin()))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(sa) +
                                    " vs " + shape_str(sb));
}

} // namespace detail

// ---- elementwise ----

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    detail::check_suffix(a, b, "add");
    const size_t nb = b.numel();
    const size_t repeat = a.numel() / nb;
    auto node = detail::begin_op<T>(a.shape(), a.numel(), {a, b});
    for (size_t r = 0; r < repeat; ++r)
        for (size_t i = 0; i < nb; ++i) node->value[r * nb + i] = a.data()[r * nb + i] + b.data()[i];
    auto* out = node.get();
    auto an = a.node();
    auto bn = b.node();
    return detail::finish_op<T>(node, [out, an, bn, repeat, nb]() {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < out->grad.size(); ++i) an->grad[i] += out->grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t r = 0; r < repeat; ++r)
                for (size_t i = 0; i < nb; ++i) bn->grad[i] += out->grad[r * nb + i];
        }
    });
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    auto node = detail::begin_op<T>(a.shape(), a.numel(), {a, b});
    for (size_t i = 0; i < a.numel(); ++i) node->value[i] = a.data()[i] * b.data()[i];
    auto* out = node.get();
    auto an = a.node();
    auto bn = b.node();
    return detail::finish_op<T>(node, [out, an, bn]() {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < out->grad.size(); ++i) an->grad[i] += out->grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < out->grad.size(); ++i) bn->grad[i] += out->grad[i] * an->value[i];
        }
    });
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T c) {
    auto node = detail::begin_op<T>(a.shape(), a.numel(), {a});
    for (size_t i = 0; i < a.numel(); ++i) node->value[i] = a.data()[i] * c;
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, c]() {
        an->ensure_grad();
        for (size_t i = 0; i < out->grad.size(); ++i) an->grad[i] += out->grad[i] * c;
    });
}

template <typename T, typename F, typename DF>
TensorT<T> unary_op(const TensorT<T>& a, F f, DF df) {
    auto node = detail::begin_op<T>(a.shape(), a.numel(), {a});
    for (size_t i = 0; i < a.numel(); ++i) node->value[i] = f(a.data()[i]);
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, df]() {
        an->ensure_grad();
        for (size_t i = 0; i < out->grad.size(); ++i)
            an->grad[i] += out->grad[i] * df(an->value[i], out->value[i]);
    });
}

template <typename T>
TensorT<T> relu(const TensorT<T>& a) {
    return unary_op(
        a, [](T x) { return x > T(0) ? x : T(0); },
        [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
TensorT<T> gelu(const TensorT<T>& a) {
    return unary_op(
        a,
        [](T x) {
            return T(0.5) * x * (T(1) + static_cast<T>(std::erf(static_cast<double>(x) / std::numbers::sqrt2)));
        },
        [](T x, T) {
            const double xd = static_cast<double>(x);
            const double cdf = 0.5 * (1.0 + std::erf(xd / std::numbers::sqrt2));
            const double pdf = std::exp(-0.5 * xd * xd) / std::sqrt(2.0 * std::numbers::pi);
            return static_cast<T>(cdf + xd * pdf);
        });
}

template <typename T>
TensorT<T> tanh_op(const TensorT<T>& a) {
    return unary_op(
        a, [](T x) { return static_cast<T>(std::tanh(static_cast<double>(x))); },
        [](T, T y) { return T(1) - y * y; });
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& a) {
    return unary_op(
        a, [](T x) { return static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(x)))); },
        [](T, T y) { return y * (T(1) - y); });
}

// ---- shape ops ----

template <typename T>
TensorT<T> reshape(const TensorT<T>& a, std::vector<size_t> new_shape) {
    size_t n = 1;
    for (size_t d : new_shape) n *= d;
    if (n != a.numel())
        throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                    shape_str(new_shape));
    auto node = detail::begin_op<T>(std::move(new_shape), a.numel(), {a});
    node->value = a.data();
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an]() {
        an->ensure_grad();
        for (size_t i = 0; i < out->grad.size(); ++i) an->grad[i] += out->grad[i];
    });
}

// Transpose of the last two axes (2D or batched 3D).
template <typename T>
TensorT<T> transpose(const TensorT<T>& a) {
    const auto& s = a.shape();
    if (s.size() != 2 && s.size() != 3)
        throw std::invalid_argument("transpose: expected 2D or 3D tensor, got " + shape_str(s));
    const size_t batch = s.size() == 3 ? s[0] : 1;
    const size_t rows = s[s.size() - 2];
    const size_t cols = s[s.size() - 1];
    std::vector<size_t> out_shape = s;
    std::swap(out_shape[s.size() - 2], out_shape[s.size() - 1]);
    auto node = detail::begin_op<T>(std::move(out_shape), a.numel(), {a});
    for (size_t b = 0; b < batch; ++b)
        for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c)
                node->value[(b * cols + c) * rows + r] = a.data()[(b * rows + r) * cols + c];
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, batch, rows, cols]() {
        an->ensure_grad();
        for (size_t b = 0; b < batch; ++b)
            for (size_t r = 0; r < rows; ++r)
                for (size_t c = 0; c < cols; ++c)
                    an->grad[(b * rows + r) * cols + c] += out->grad[(b * cols + c) * rows + r];
    });
}

// Slice along one axis, [start, end).
template <typename T>
TensorT<T> slice(const TensorT<T>& a, size_t axis, size_t start, size_t end) {
    const auto& s = a.shape();
    if (axis >= s.size() || start >= end || end > s[axis])
        throw std::invalid_argument("slice: bad range [" + std::to_string(start) + "," +
                                    std::to_string(end) + ") on axis " + std::to_string(axis) +
                                    " of " + shape_str(s));
    size_t outer = 1, inner = 1;
    for (size_t i = 0; i < axis; ++i) outer *= s[i];
    for (size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    const size_t dim = s[axis];
    const size_t out_dim = end - start;
    std::vector<size_t> out_shape = s;
    out_shape[axis] = out_dim;
    auto node = detail::begin_op<T>(std::move(out_shape), outer * out_dim * inner, {a});
    for (size_t o = 0; o < outer; ++o)
        for (size_t d = 0; d < out_dim; ++d)
            std::copy_n(a.data().begin() + ((o * dim + start + d) * inner), inner,
                        node->value.begin() + ((o * out_dim + d) * inner));
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, outer, inner, dim, out_dim, start]() {
        an->ensure_grad();
        for (size_t o = 0; o < outer; ++o)
            for (size_t d = 0; d < out_dim; ++d)
                for (size_t i = 0; i < inner; ++i)
                    an->grad[(o * dim + start + d) * inner + i] +=
                        out->grad[(o * out_dim + d) * inner + i];
    });
}

template <typename T>
TensorT<T> concat(const std::vector<TensorT<T>>& parts, size_t axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    const auto& s0 = parts[0].shape();
    if (axis >= s0.size()) throw std::invalid_argument("concat: axis out of range");
    size_t total_dim = 0;
    for (const auto& p : parts) {
        const auto& s = p.shape();
        if (s.size() != s0.size())
            throw std::invalid_argument("concat: rank mismatch");
        for (size_t i = 0; i < s.size(); ++i)
            if (i != axis && s[i] != s0[i])
                throw std::invalid_argument("concat: shape mismatch " + shape_str(s0) + " vs " +
                                            shape_str(s));
        total_dim += s[axis];
    }
    size_t outer = 1, inner = 1;
    for (size_t i = 0; i < axis; ++i) outer *= s0[i];
    for (size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];
    std::vector<size_t> out_shape = s0;
    out_shape[axis] = total_dim;

    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(out_shape);
    node->value.assign(outer * total_dim * inner, T(0));
    for (const auto& p : parts) {
        node->requires_grad = node->requires_grad || p.requires_grad();
        node->parents.push_back(p.node());
    }
    size_t offset = 0;
    std::vector<size_t> dims;
    for (const auto& p : parts) {
        const size_t dim = p.shape()[axis];
        dims.push_back(dim);
        for (size_t o = 0; o < outer; ++o)
            std::copy_n(p.data().begin() + o * dim * inner, dim * inner,
                        node->value.begin() + (o * total_dim + offset) * inner);
        offset += dim;
    }
    auto* out = node.get();
    auto parent_nodes = node->parents;
    return detail::finish_op<T>(node, [out, parent_nodes, dims, outer, inner, total_dim]() {
        size_t offset = 0;
        for (size_t pi = 0; pi < parent_nodes.size(); ++pi) {
            auto& pn = *parent_nodes[pi];
            const size_t dim = dims[pi];
            if (pn.requires_grad) {
                pn.ensure_grad();
                for (size_t o = 0; o < outer; ++o)
                    for (size_t j = 0; j < dim * inner; ++j)
                        pn.grad[o * dim * inner + j] +=
                            out->grad[(o * total_dim + offset) * inner + j];
            }
            offset += dim;
        }
    });
}

// [T, H*dh] -> [H, T, dh]
template <typename T>
TensorT<T> split_heads(const TensorT<T>& a, size_t heads) {
    const auto& s = a.shape();
    if (s.size() != 2 || s[1] % heads != 0)
        throw std::invalid_argument("split_heads: need [tokens, heads*dim], got " + shape_str(s) +
                                    " with " + std::to_string(heads) + " heads");
    const size_t tokens = s[0], dh = s[1] / heads;
    auto node = detail::begin_op<T>({heads, tokens, dh}, a.numel(), {a});
    for (size_t t = 0; t < tokens; ++t)
        for (size_t h = 0; h < heads; ++h)
            std::copy_n(a.data().begin() + (t * heads + h) * dh, dh,
                        node->value.begin() + (h * tokens + t) * dh);
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, tokens, heads, dh]() {
        an->ensure_grad();
        for (size_t t = 0; t < tokens; ++t)
            for (size_t h = 0; h < heads; ++h)
                for (size_t i = 0; i < dh; ++i)
                    an->grad[(t * heads + h) * dh + i] += out->grad[(h * tokens + t) * dh + i];
    });
}

// [H, T, dh] -> [T, H*dh]
template <typename T>
TensorT<T> merge_heads(const TensorT<T>& a) {
    const auto& s = a.shape();
    if (s.size() != 3)
        throw std::invalid_argument("merge_heads: need [heads, tokens, dim], got " + shape_str(s));
    const size_t heads = s[0], tokens = s[1], dh = s[2];
    auto node = detail::begin_op<T>({tokens, heads * dh}, a.numel(), {a});
    for (size_t h = 0; h < heads; ++h)
        for (size_t t = 0; t < tokens; ++t)
            std::copy_n(a.data().begin() + (h * tokens + t) * dh, dh,
                        node->value.begin() + (t * heads + h) * dh);
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, tokens, heads, dh]() {
        an->ensure_grad();
        for (size_t h = 0; h < heads; ++h)
            for (size_t t = 0; t < tokens; ++t)
                for (size_t i = 0; i < dh; ++i)
                    an->grad[(h * tokens + t) * dh + i] += out->grad[(t * heads + h) * dh + i];
    });
}

// ---- linear algebra ----

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    const bool batched = sa.size() == 3;
    if ((sa.size() != 2 && sa.size() != 3) || sb.size() != sa.size() ||
        (batched && sa[0] != sb[0]) || sa[sa.size() - 1] != sb[sb.size() - 2])
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(sa) + " x " +
                                    shape_str(sb));
    const size_t batch = batched ? sa[0] : 1;
    const size_t m = sa[sa.size() - 2], k = sa[sa.size() - 1], n = sb[sb.size() - 1];
    std::vector<size_t> out_shape = batched ? std::vector<size_t>{batch, m, n}
                                            : std::vector<size_t>{m, n};
    auto node = detail::begin_op<T>(std::move(out_shape), batch * m * n, {a, b});
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    T* pc = node->value.data();
    for (size_t bi = 0; bi < batch; ++bi) {
        const T* A = pa + bi * m * k;
        const T* B = pb + bi * k * n;
        T* C = pc + bi * m * n;
        for (size_t i = 0; i < m; ++i)
            for (size_t kk = 0; kk < k; ++kk) {
                const T av = A[i * k + kk];
                if (av == T(0)) continue;
                const T* Brow = B + kk * n;
                T* Crow = C + i * n;
                for (size_t j = 0; j < n; ++j) Crow[j] += av * Brow[j];
            }
    }
    auto* out = node.get();
    auto an = a.node();
    auto bn = b.node();
    return detail::finish_op<T>(node, [out, an, bn, batch, m, k, n]() {
        // dA = dC * B^T, dB = A^T * dC
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t bi = 0; bi < batch; ++bi) {
                const T* dC = out->grad.data() + bi * m * n;
                const T* B = bn->value.data() + bi * k * n;
                T* dA = an->grad.data() + bi * m * k;
                for (size_t i = 0; i < m; ++i)
                    for (size_t j = 0; j < n; ++j) {
                        const T g = dC[i * n + j];
                        if (g == T(0)) continue;
                        for (size_t kk = 0; kk < k; ++kk) dA[i * k + kk] += g * B[kk * n + j];
                    }
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t bi = 0; bi < batch; ++bi) {
                const T* dC = out->grad.data() + bi * m * n;
                const T* A = an->value.data() + bi * m * k;
                T* dB = bn->grad.data() + bi * k * n;
                for (size_t i = 0; i < m; ++i)
                    for (size_t kk = 0; kk < k; ++kk) {
                        const T av = A[i * k + kk];
                        if (av == T(0)) continue;
                        const T* dCrow = dC + i * n;
                        T* dBrow = dB + kk * n;
                        for (size_t j = 0; j < n; ++j) dBrow[j] += av * dCrow[j];
                    }
            }
        }
    });
}

// x [.., in] * W [in, out] + b [out]
template <typename T>
TensorT<T> linear(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    const auto& s = x.shape();
    const size_t in_dim = s.back();
    if (w.shape().size() != 2 || w.shape()[0] != in_dim)
        throw std::invalid_argument("linear: weight " + shape_str(w.shape()) +
                                    " incompatible with input " + shape_str(s));
    const size_t rows = x.numel() / in_dim;
    auto flat = reshape(x, {rows, in_dim});
    auto y = add(matmul(flat, w), b);
    std::vector<size_t> out_shape = s;
    out_shape.back() = w.shape()[1];
    return reshape(y, out_shape);
}

// ---- normalization / attention pieces ----

template <typename T>
TensorT<T> softmax(const TensorT<T>& a) {
    const auto& s = a.shape();
    const size_t d = s.back();
    const size_t rows = a.numel() / d;
    auto node = detail::begin_op<T>(s, a.numel(), {a});
    for (size_t r = 0; r < rows; ++r) {
        const T* x = a.data().data() + r * d;
        T* y = node->value.data() + r * d;
        T mx = x[0];
        for (size_t i = 1; i < d; ++i) mx = std::max(mx, x[i]);
        double sum = 0.0;
        for (size_t i = 0; i < d; ++i) {
            y[i] = static_cast<T>(std::exp(static_cast<double>(x[i] - mx)));
            sum += static_cast<double>(y[i]);
        }
        const T inv = static_cast<T>(1.0 / sum);
        for (size_t i = 0; i < d; ++i) y[i] *= inv;
    }
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an, rows, d]() {
        an->ensure_grad();
        for (size_t r = 0; r < rows; ++r) {
            const T* y = out->value.data() + r * d;
            const T* dy = out->grad.data() + r * d;
            double dot = 0.0;
            for (size_t i = 0; i < d; ++i) dot += static_cast<double>(dy[i]) * y[i];
            for (size_t i = 0; i < d; ++i)
                an->grad[r * d + i] += y[i] * (dy[i] - static_cast<T>(dot));
        }
    });
}

template <typename T>
TensorT<T> layer_norm(const TensorT<T>& a, const TensorT<T>& gamma, const TensorT<T>& beta,
                      T eps = T(1e-5)) {
    const auto& s = a.shape();
    const size_t d = s.back();
    if (gamma.numel() != d || beta.numel() != d)
        throw std::invalid_argument("layer_norm: gamma/beta length must equal last axis " +
                                    std::to_string(d));
    const size_t rows = a.numel() / d;
    auto node = detail::begin_op<T>(s, a.numel(), {a, gamma, beta});
    std::vector<T> xhat(a.numel());
    std::vector<T> inv_std(rows);
    for (size_t r = 0; r < rows; ++r) {
        const T* x = a.data().data() + r * d;
        double mean = 0.0;
        for (size_t i = 0; i < d; ++i) mean += static_cast<double>(x[i]);
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (size_t i = 0; i < d; ++i) {
            const double c = static_cast<double>(x[i]) - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const T istd = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
        inv_std[r] = istd;
        for (size_t i = 0; i < d; ++i) {
            xhat[r * d + i] = static_cast<T>((static_cast<double>(x[i]) - mean)) * istd;
            node->value[r * d + i] = gamma.data()[i] * xhat[r * d + i] + beta.data()[i];
        }
    }
    auto* out = node.get();
    auto an = a.node();
    auto gn = gamma.node();
    auto bn = beta.node();
    return detail::finish_op<T>(
        node, [out, an, gn, bn, rows, d, xhat = std::move(xhat), inv_std = std::move(inv_std)]() {
            if (gn->requires_grad) gn->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            if (an->requires_grad) an->ensure_grad();
            for (size_t r = 0; r < rows; ++r) {
                const T* dy = out->grad.data() + r * d;
                const T* xh = xhat.data() + r * d;
                double sum_g = 0.0, sum_gx = 0.0;
                for (size_t i = 0; i < d; ++i) {
                    const double gdy = static_cast<double>(gn->value[i]) * dy[i];
                    sum_g += gdy;
                    sum_gx += gdy * xh[i];
                    if (gn->requires_grad) gn->grad[i] += dy[i] * xh[i];
                    if (bn->requires_grad) bn->grad[i] += dy[i];
                }
                if (an->requires_grad) {
                    const double inv_d = 1.0 / static_cast<double>(d);
                    for (size_t i = 0; i < d; ++i) {
                        const double gdy = static_cast<double>(gn->value[i]) * dy[i];
                        an->grad[r * d + i] += static_cast<T>(
                            inv_std[r] * (gdy - inv_d * sum_g - xh[i] * inv_d * sum_gx));
                    }
                }
            }
        });
}

// Rotary positional encoding on [heads, tokens, head_dim]; token t uses
// absolute position pos_offset + t, frequencies base^(-2j/head_dim).
template <typename T>
TensorT<T> rope(const TensorT<T>& a, size_t pos_offset, double base = 10000.0) {
    const auto& s = a.shape();
    if (s.size() != 3 || s[2] % 2 != 0)
        throw std::invalid_argument("rope: need [heads, tokens, even head_dim], got " +
                                    shape_str(s));
    const size_t heads = s[0], tokens = s[1], dh = s[2];
    auto node = detail::begin_op<T>(s, a.numel(), {a});
    std::vector<double> cs(tokens * dh / 2), sn(tokens * dh / 2);
    for (size_t t = 0; t < tokens; ++t)
        for (size_t j = 0; j < dh / 2; ++j) {
            const double theta = static_cast<double>(pos_offset + t) *
                                 std::pow(base, -2.0 * static_cast<double>(j) /
                                                    static_cast<double>(dh));
            cs[t * dh / 2 + j] = std::cos(theta);
            sn[t * dh / 2 + j] = std::sin(theta);
        }
    for (size_t h = 0; h < heads; ++h)
        for (size_t t = 0; t < tokens; ++t)
            for (size_t j = 0; j < dh / 2; ++j) {
                const size_t i0 = (h * tokens + t) * dh + 2 * j;
                const double c = cs[t * dh / 2 + j], si = sn[t * dh / 2 + j];
                const double x0 = a.data()[i0], x1 = a.data()[i0 + 1];
                node->value[i0] = static_cast<T>(x0 * c - x1 * si);
                node->value[i0 + 1] = static_cast<T>(x0 * si + x1 * c);
            }
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(
        node, [out, an, heads, tokens, dh, cs = std::move(cs), sn = std::move(sn)]() {
            an->ensure_grad();
            for (size_t h = 0; h < heads; ++h)
                for (size_t t = 0; t < tokens; ++t)
                    for (size_t j = 0; j < dh / 2; ++j) {
                        const size_t i0 = (h * tokens + t) * dh + 2 * j;
                        const double c = cs[t * dh / 2 + j], si = sn[t * dh / 2 + j];
                        const double g0 = out->grad[i0], g1 = out->grad[i0 + 1];
                        an->grad[i0] += static_cast<T>(g0 * c + g1 * si);
                        an->grad[i0 + 1] += static_cast<T>(-g0 * si + g1 * c);
                    }
        });
}

// ---- convolution ----

// x [Cin, T], w [Cout, Cin, K], b [Cout], output [Cout, T]. Causal: output
// at t sees inputs at t - k*dilation only. Non-causal: symmetric zero pad.
template <typename T>
TensorT<T> conv1d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b, size_t dilation,
                  bool causal = true) {
    const auto& sx = x.shape();
    const auto& sw = w.shape();
    if (sx.size() != 2 || sw.size() != 3 || sw[1] != sx[0] || b.numel() != sw[0])
        throw std::invalid_argument("conv1d: incompatible shapes x=" + shape_str(sx) +
                                    " w=" + shape_str(sw) + " b=" + shape_str(b.shape()));
    if (dilation < 1) throw std::invalid_argument("conv1d: dilation must be >= 1");
    const size_t cin = sx[0], len = sx[1], cout = sw[0], k = sw[2];
    auto node = detail::begin_op<T>({cout, len}, cout * len, {x, w, b});
    // tap j looks back by lag(j); causal anchors the newest tap at t,
    // non-causal centers the kernel
    const auto lag = [k, dilation, causal](size_t j) -> long {
        return causal ? static_cast<long>((k - 1 - j) * dilation)
                      : static_cast<long>(k - 1 - j) * static_cast<long>(dilation) -
                            static_cast<long>((k - 1) / 2 * dilation);
    };
    for (size_t co = 0; co < cout; ++co) {
        T* y = node->value.data() + co * len;
        for (size_t t = 0; t < len; ++t) y[t] = b.data()[co];
        for (size_t ci = 0; ci < cin; ++ci) {
            const T* xin = x.data().data() + ci * len;
            const T* wrow = w.data().data() + (co * cin + ci) * k;
            for (size_t j = 0; j < k; ++j) {
                const T wv = wrow[j];
                if (wv == T(0)) continue;
                const long l = lag(j);
                const size_t t_lo = l > 0 ? static_cast<size_t>(l) : 0;
                const size_t t_hi = l < 0 ? len - static_cast<size_t>(-l) : len;
                for (size_t t = t_lo; t < t_hi; ++t) y[t] += wv * xin[t - l];
            }
        }
    }
    auto* out = node.get();
    auto xn = x.node();
    auto wn = w.node();
    auto bn = b.node();
    return detail::finish_op<T>(node, [out, xn, wn, bn, cin, cout, len, k, lag]() {
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t co = 0; co < cout; ++co) {
                double acc = 0.0;
                for (size_t t = 0; t < len; ++t) acc += static_cast<double>(out->grad[co * len + t]);
                bn->grad[co] += static_cast<T>(acc);
            }
        }
        for (size_t co = 0; co < cout; ++co) {
            const T* dy = out->grad.data() + co * len;
            for (size_t ci = 0; ci < cin; ++ci) {
                const T* xin = xn->value.data() + ci * len;
                const T* wrow = wn->value.data() + (co * cin + ci) * k;
                for (size_t j = 0; j < k; ++j) {
                    const long l = lag(j);
                    const size_t t_lo = l > 0 ? static_cast<size_t>(l) : 0;
                    const size_t t_hi = l < 0 ? len - static_cast<size_t>(-l) : len;
                    if (wn->requires_grad) {
                        wn->ensure_grad();
                        double acc = 0.0;
                        for (size_t t = t_lo; t < t_hi; ++t)
                            acc += static_cast<double>(dy[t]) * xin[t - l];
                        wn->grad[(co * cin + ci) * k + j] += static_cast<T>(acc);
                    }
                    if (xn->requires_grad) {
                        xn->ensure_grad();
                        const T wv = wrow[j];
                        if (wv != T(0))
                            for (size_t t = t_lo; t < t_hi; ++t)
                                xn->grad[ci * len + t - l] += wv * dy[t];
                    }
                }
            }
        }
    });
}

// ---- reductions / loss ----

template <typename T>
TensorT<T> sum(const TensorT<T>& a) {
    auto node = detail::begin_op<T>({1}, 1, {a});
    double acc = 0.0;
    for (T v : a.data()) acc += static_cast<double>(v);
    node->value[0] = static_cast<T>(acc);
    auto* out = node.get();
    auto an = a.node();
    return detail::finish_op<T>(node, [out, an]() {
        an->ensure_grad();
        for (auto& g : an->grad) g += out->grad[0];
    });
}

template <typename T>
TensorT<T> mean(const TensorT<T>& a) {
    return scale(sum(a), static_cast<T>(1.0 / static_cast<double>(a.numel())));
}

template <typename T>
TensorT<T> mse_loss(const TensorT<T>& pred, const TensorT<T>& target) {
    if (pred.shape() != target.shape())
        throw std::invalid_argument("mse_loss: shape mismatch " + shape_str(pred.shape()) +
                                    " vs " + shape_str(target.shape()));
    auto node = detail::begin_op<T>({1}, 1, {pred, target});
    double acc = 0.0;
    for (size_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred.data()[i]) - target.data()[i];
        acc += d * d;
    }
    node->value[0] = static_cast<T>(acc / static_cast<double>(pred.numel()));
    auto* out = node.get();
    auto pn = pred.node();
    auto tn = target.node();
    return detail::finish_op<T>(node, [out, pn, tn]() {
        const T c = static_cast<T>(2.0 / static_cast<double>(pn->numel()));
        if (pn->requires_grad) {
            pn->ensure_grad();
            for (size_t i = 0; i < pn->numel(); ++i)
                pn->grad[i] += out->grad[0] * c * (pn->value[i] - tn->value[i]);
        }
        if (tn->requires_grad) {
            tn->ensure_grad();
            for (size_t i = 0; i < tn->numel(); ++i)
                tn->grad[i] += out->grad[0] * c * (tn->value[i] - pn->value[i]);
        }
    });
}

// ---- backward ----

template <typename T>
void backward(const TensorT<T>& loss) {
    if (loss.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
    if (!loss.requires_grad())
        throw std::invalid_argument("backward: tensor is detached from any graph");
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    // iterative post-order DFS
    std::vector<std::pair<Node<T>*, size_t>> stack{{loss.node().get(), 0}};
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    loss.node()->ensure_grad();
    loss.node()->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        (*it)->ensure_grad();
        if ((*it)->backward_fn) (*it)->backward_fn();
    }
}

// ---- optimizer ----

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
    int64_t step = 0;
};

template <typename T>
void adam_step(std::vector<TensorT<T>>& params, AdamState<T>& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (state.m.empty()) {
        for (auto& p : params) {
            state.m.emplace_back(p.numel(), T(0));
            state.v.emplace_back(p.numel(), T(0));
        }
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state/parameter count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = params[pi];
        if (p.grad().size() != p.numel()) continue; // no gradient this step
        auto& m = state.m[pi];
        auto& v = state.v[pi];
        for (size_t i = 0; i < p.numel(); ++i) {
            const double g = static_cast<double>(p.grad()[i]);
            m[i] = static_cast<T>(beta1 * m[i] + (1.0 - beta1) * g);
            v[i] = static_cast<T>(beta2 * v[i] + (1.0 - beta2) * g * g);
            const double mhat = static_cast<double>(m[i]) / bc1;
            const double vhat = static_cast<double>(v[i]) / bc2;
            p.data()[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

using Tensor = TensorT<float>;

} // namespace rfsep::ag
