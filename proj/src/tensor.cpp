#include "aisllm/tensor.hpp"
#include "aisllm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace aisllm {

std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

namespace {

// C (MxN) += A (MxK) * B (KxN)
template <typename T>
void mm_nn(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m,
           std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* ar = a + i * k;
        T* cr = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = ar[p];
            const T* br = b + p * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

// C (KxN) += A^T * B, with A stored (MxK) and B stored (MxN)
template <typename T>
void mm_tn(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m,
           std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* ar = a + i * k;
        const T* br = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = ar[p];
            T* cr = c + p * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

enum class Broadcast { full, row, col, scalar };

template <typename T>
Broadcast broadcast_kind(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::full;
    if (b.size() == 1) return Broadcast::scalar;
    if (a.rank() == 2 && b.size() == a.cols() && b.rank() <= 2 &&
        (b.rank() == 1 || b.rows() == 1))
        return Broadcast::row;
    if (a.rank() == 2 && b.rank() == 2 && b.cols() == 1 && b.rows() == a.rows())
        return Broadcast::col;
    throw ShapeMismatch(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                        " and " + shape_str(b.shape()));
}

template <typename T>
T broadcast_at(const TensorT<T>& b, Broadcast kind, std::size_t i, std::size_t cols) {
    switch (kind) {
        case Broadcast::full: return b[i];
        case Broadcast::scalar: return b[0];
        case Broadcast::row: return b[i % cols];
        case Broadcast::col: return b[i / cols];
    }
    return T(0);
}

template <typename T>
void broadcast_accum(TensorT<T>& b, Broadcast kind, std::size_t i, std::size_t cols, T v) {
    switch (kind) {
        case Broadcast::full: b.grad()[i] += v; break;
        case Broadcast::scalar: b.grad()[0] += v; break;
        case Broadcast::row: b.grad()[i % cols] += v; break;
        case Broadcast::col: b.grad()[i / cols] += v; break;
    }
}

} // namespace

template <typename T>
TensorT<T> GraphT<T>::make_out(std::vector<std::size_t> shape, bool needs_grad) {
    Tensor out(std::move(shape));
    if (recording && needs_grad) out.set_requires_grad(true);
    return out;
}

template <typename T>
void GraphT<T>::push(Tensor& out, std::function<void()> back) {
    if (out.requires_grad()) {
        out.node = static_cast<int>(nodes_.size());
        nodes_.push_back({std::move(back)});
    }
}

template <typename T>
void GraphT<T>::backward(Tensor& loss) {
    if (loss.size() != 1)
        throw NotScalar("backward needs a scalar loss, got " + shape_str(loss.shape()));
    if (consumed_) throw TapeConsumed("backward already ran on this tape");
    if (!loss.requires_grad() || loss.node < 0)
        throw NotOnTape("loss does not depend on any recorded parameter");
    loss.grad()[0] = T(1);
    for (int i = loss.node; i >= 0; --i) nodes_[static_cast<std::size_t>(i)].back();
    consumed_ = true;
}

template <typename T>
TensorT<T> GraphT<T>::matmul(Tensor a, Tensor b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
        throw ShapeMismatch("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                            shape_str(b.shape()));
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = make_out({m, n}, any_grad({&a, &b}));
    mm_nn(a.data(), b.data(), out.data(), m, k, n);
    push(out, [a, b, out, m, k, n]() mutable {
        if (a.requires_grad()) {
            // dA += dC * B^T via an explicit transpose so the kernel stays
            // contiguous in the inner loop
            std::vector<T> bt(n * k);
            for (std::size_t p = 0; p < k; ++p)
                for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
            mm_nn(out.grad(), bt.data(), a.grad(), m, n, k);
        }
        if (b.requires_grad()) mm_tn(a.data(), out.grad(), b.grad(), m, k, n);
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::add(Tensor a, Tensor b) {
    const Broadcast kind = broadcast_kind(a, b, "add");
    const std::size_t cols = a.cols();
    Tensor out = make_out(a.shape(), any_grad({&a, &b}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + broadcast_at(b, kind, i, cols);
    push(out, [a, b, out, kind, cols]() mutable {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T go = out.grad()[i];
            if (a.requires_grad()) a.grad()[i] += go;
            if (b.requires_grad()) broadcast_accum(b, kind, i, cols, go);
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::sub(Tensor a, Tensor b) {
    const Broadcast kind = broadcast_kind(a, b, "sub");
    const std::size_t cols = a.cols();
    Tensor out = make_out(a.shape(), any_grad({&a, &b}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - broadcast_at(b, kind, i, cols);
    push(out, [a, b, out, kind, cols]() mutable {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T go = out.grad()[i];
            if (a.requires_grad()) a.grad()[i] += go;
            if (b.requires_grad()) broadcast_accum(b, kind, i, cols, -go);
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::mul(Tensor a, Tensor b) {
    const Broadcast kind = broadcast_kind(a, b, "mul");
    const std::size_t cols = a.cols();
    Tensor out = make_out(a.shape(), any_grad({&a, &b}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * broadcast_at(b, kind, i, cols);
    push(out, [a, b, out, kind, cols]() mutable {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T go = out.grad()[i];
            if (a.requires_grad()) a.grad()[i] += go * broadcast_at(b, kind, i, cols);
            if (b.requires_grad()) broadcast_accum(b, kind, i, cols, go * a[i]);
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::div(Tensor a, Tensor b) {
    const Broadcast kind = broadcast_kind(a, b, "div");
    const std::size_t cols = a.cols();
    Tensor out = make_out(a.shape(), any_grad({&a, &b}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / broadcast_at(b, kind, i, cols);
    push(out, [a, b, out, kind, cols]() mutable {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T go = out.grad()[i];
            const T bv = broadcast_at(b, kind, i, cols);
            if (a.requires_grad()) a.grad()[i] += go / bv;
            if (b.requires_grad()) broadcast_accum(b, kind, i, cols, -go * a[i] / (bv * bv));
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::scale(Tensor a, double s) {
    Tensor out = make_out(a.shape(), any_grad({&a}));
    const T sv = static_cast<T>(s);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * sv;
    push(out, [a, out, sv]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < out.size(); ++i) a.grad()[i] += out.grad()[i] * sv;
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::concat(std::vector<Tensor> parts, std::size_t axis) {
    if (parts.empty()) throw ShapeMismatch("concat: no inputs");
    bool needs = false;
    for (const Tensor& p : parts) needs = needs || p.requires_grad();

    if (axis == 0 && parts[0].rank() == 1) {
        std::size_t total = 0;
        for (const Tensor& p : parts) total += p.size();
        Tensor out = make_out({total}, needs);
        std::size_t off = 0;
        for (const Tensor& p : parts) {
            std::copy(p.data(), p.data() + p.size(), out.data() + off);
            off += p.size();
        }
        push(out, [parts, out]() mutable {
            std::size_t off = 0;
            for (Tensor& p : parts) {
                if (p.requires_grad())
                    for (std::size_t i = 0; i < p.size(); ++i) p.grad()[i] += out.grad()[off + i];
                off += p.size();
            }
        });
        return out;
    }

    const std::size_t rows0 = parts[0].rows(), cols0 = parts[0].cols();
    std::size_t rows = axis == 0 ? 0 : rows0;
    std::size_t cols = axis == 1 ? 0 : cols0;
    for (const Tensor& p : parts) {
        if (p.rank() != 2)
            throw ShapeMismatch("concat: rank-2 tensors required, got " + shape_str(p.shape()));
        if (axis == 0) {
            if (p.cols() != cols0) throw ShapeMismatch("concat axis 0: column mismatch");
            rows += p.rows();
        } else {
            if (p.rows() != rows0) throw ShapeMismatch("concat axis 1: row mismatch");
            cols += p.cols();
        }
    }
    Tensor out = make_out({rows, cols}, needs);
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        if (axis == 0) {
            std::copy(p.data(), p.data() + p.size(), out.data() + off * cols);
            off += p.rows();
        } else {
            for (std::size_t r = 0; r < rows; ++r)
                std::copy(p.data() + r * p.cols(), p.data() + (r + 1) * p.cols(),
                          out.data() + r * cols + off);
            off += p.cols();
        }
    }
    push(out, [parts, out, axis, rows, cols]() mutable {
        std::size_t off = 0;
        for (Tensor& p : parts) {
            if (axis == 0) {
                if (p.requires_grad())
                    for (std::size_t i = 0; i < p.size(); ++i)
                        p.grad()[i] += out.grad()[off * cols + i];
                off += p.rows();
            } else {
                if (p.requires_grad())
                    for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < p.cols(); ++c)
                            p.grad()[r * p.cols() + c] += out.grad()[r * cols + off + c];
                off += p.cols();
            }
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::slice(Tensor a, std::size_t axis, std::size_t start, std::size_t len) {
    if (a.rank() == 1) {
        if (axis != 0 || start + len > a.size())
            throw ShapeMismatch("slice: out of range for " + shape_str(a.shape()));
        Tensor out = make_out({len}, any_grad({&a}));
        std::copy(a.data() + start, a.data() + start + len, out.data());
        push(out, [a, out, start, len]() mutable {
            if (!a.requires_grad()) return;
            for (std::size_t i = 0; i < len; ++i) a.grad()[start + i] += out.grad()[i];
        });
        return out;
    }
    const std::size_t rows = a.rows(), cols = a.cols();
    if (a.rank() != 2 || (axis == 0 && start + len > rows) || (axis == 1 && start + len > cols) ||
        axis > 1)
        throw ShapeMismatch("slice: out of range for " + shape_str(a.shape()));
    Tensor out = make_out(axis == 0 ? std::vector<std::size_t>{len, cols}
                                    : std::vector<std::size_t>{rows, len},
                          any_grad({&a}));
    if (axis == 0) {
        std::copy(a.data() + start * cols, a.data() + (start + len) * cols, out.data());
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            std::copy(a.data() + r * cols + start, a.data() + r * cols + start + len,
                      out.data() + r * len);
    }
    push(out, [a, out, axis, start, len, rows, cols]() mutable {
        if (!a.requires_grad()) return;
        if (axis == 0) {
            for (std::size_t i = 0; i < out.size(); ++i) a.grad()[start * cols + i] += out.grad()[i];
        } else {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < len; ++c)
                    a.grad()[r * cols + start + c] += out.grad()[r * len + c];
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::transpose(Tensor a) {
    if (a.rank() != 2) throw ShapeMismatch("transpose: rank-2 required, got " + shape_str(a.shape()));
    const std::size_t rows = a.rows(), cols = a.cols();
    Tensor out = make_out({cols, rows}, any_grad({&a}));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = a[r * cols + c];
    push(out, [a, out, rows, cols]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) a.grad()[r * cols + c] += out.grad()[c * rows + r];
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::reshape(Tensor a, std::vector<std::size_t> new_shape) {
    std::size_t n = 1;
    for (std::size_t d : new_shape) n *= d;
    if (n != a.size())
        throw ShapeMismatch("reshape: cannot view " + shape_str(a.shape()) + " as " +
                            shape_str(new_shape));
    Tensor out = make_out(std::move(new_shape), any_grad({&a}));
    std::copy(a.data(), a.data() + a.size(), out.data());
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += out.grad()[i];
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::sum(Tensor a, std::size_t axis) {
    if (a.rank() != 2 || axis > 1)
        throw ShapeMismatch("sum: rank-2 required, got " + shape_str(a.shape()));
    const std::size_t rows = a.rows(), cols = a.cols();
    Tensor out = make_out({axis == 0 ? cols : rows}, any_grad({&a}));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[axis == 0 ? c : r] += a[r * cols + c];
    push(out, [a, out, axis, rows, cols]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                a.grad()[r * cols + c] += out.grad()[axis == 0 ? c : r];
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::mean(Tensor a, std::size_t axis) {
    const double denom = axis == 0 ? static_cast<double>(a.rows()) : static_cast<double>(a.cols());
    return scale(sum(a, axis), 1.0 / denom);
}

template <typename T>
TensorT<T> GraphT<T>::sum_all(Tensor a) {
    Tensor out = make_out({1}, any_grad({&a}));
    T acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    out[0] = acc;
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        const T go = out.grad()[0];
        for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += go;
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::mean_all(Tensor a) {
    return scale(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

template <typename T>
TensorT<T> GraphT<T>::softmax(Tensor a) {
    const std::size_t cols = a.rank() == 1 ? a.size() : a.cols();
    const std::size_t rows = a.size() / cols;
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t r = 0; r < rows; ++r) {
        const T* x = a.data() + r * cols;
        T* y = out.data() + r * cols;
        T mx = x[0];
        for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
        T z = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            y[c] = std::exp(x[c] - mx);
            z += y[c];
        }
        for (std::size_t c = 0; c < cols; ++c) y[c] /= z;
    }
    push(out, [a, out, rows, cols]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t r = 0; r < rows; ++r) {
            const T* y = out.data() + r * cols;
            const T* gy = out.grad() + r * cols;
            T dot = 0;
            for (std::size_t c = 0; c < cols; ++c) dot += gy[c] * y[c];
            for (std::size_t c = 0; c < cols; ++c) a.grad()[r * cols + c] += y[c] * (gy[c] - dot);
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::causal_softmax(Tensor a) {
    if (a.rank() != 2 || a.rows() != a.cols())
        throw ShapeMismatch("causal_softmax: square scores required, got " +
                            shape_str(a.shape()));
    const std::size_t n = a.rows();
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t r = 0; r < n; ++r) {
        const T* x = a.data() + r * n;
        T* y = out.data() + r * n;
        T mx = x[0];
        for (std::size_t c = 1; c <= r; ++c) mx = std::max(mx, x[c]);
        T z = 0;
        for (std::size_t c = 0; c <= r; ++c) {
            y[c] = std::exp(x[c] - mx);
            z += y[c];
        }
        for (std::size_t c = 0; c <= r; ++c) y[c] /= z;
        for (std::size_t c = r + 1; c < n; ++c) y[c] = T(0);
    }
    push(out, [a, out, n]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t r = 0; r < n; ++r) {
            const T* y = out.data() + r * n;
            const T* gy = out.grad() + r * n;
            T dot = 0;
            for (std::size_t c = 0; c <= r; ++c) dot += gy[c] * y[c];
            for (std::size_t c = 0; c <= r; ++c) a.grad()[r * n + c] += y[c] * (gy[c] - dot);
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::layer_norm(Tensor x, Tensor gain, Tensor bias,
                                 double eps) {
    const std::size_t cols = x.rank() == 1 ? x.size() : x.cols();
    const std::size_t rows = x.size() / cols;
    if (gain.size() != cols || bias.size() != cols)
        throw ShapeMismatch("layer_norm: gain/bias of size " + std::to_string(gain.size()) +
                            " vs row width " + std::to_string(cols));
    Tensor out = make_out(x.shape(), any_grad({&x, &gain, &bias}));
    Tensor xhat({rows, cols});
    Tensor inv_std({rows});
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x.data() + r * cols;
        T m = 0;
        for (std::size_t c = 0; c < cols; ++c) m += xr[c];
        m /= static_cast<T>(cols);
        T v = 0;
        for (std::size_t c = 0; c < cols; ++c) v += (xr[c] - m) * (xr[c] - m);
        v /= static_cast<T>(cols);
        const T inv = T(1) / std::sqrt(v + static_cast<T>(eps));
        inv_std[r] = inv;
        for (std::size_t c = 0; c < cols; ++c) {
            xhat[r * cols + c] = (xr[c] - m) * inv;
            out[r * cols + c] = xhat[r * cols + c] * gain[c] + bias[c];
        }
    }
    push(out, [x, gain, bias, out, xhat, inv_std, rows, cols]() mutable {
        for (std::size_t r = 0; r < rows; ++r) {
            const T* go = out.grad() + r * cols;
            const T* xh = xhat.data() + r * cols;
            if (gain.requires_grad())
                for (std::size_t c = 0; c < cols; ++c) gain.grad()[c] += go[c] * xh[c];
            if (bias.requires_grad())
                for (std::size_t c = 0; c < cols; ++c) bias.grad()[c] += go[c];
            if (x.requires_grad()) {
                T sum_g = 0, sum_gx = 0;
                for (std::size_t c = 0; c < cols; ++c) {
                    const T dxhat = go[c] * gain[c];
                    sum_g += dxhat;
                    sum_gx += dxhat * xh[c];
                }
                const T n = static_cast<T>(cols);
                for (std::size_t c = 0; c < cols; ++c) {
                    const T dxhat = go[c] * gain[c];
                    x.grad()[r * cols + c] +=
                        inv_std[r] * (dxhat - sum_g / n - xh[c] * sum_gx / n);
                }
            }
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::relu(Tensor a) {
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > T(0) ? a[i] : T(0);
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] > T(0)) a.grad()[i] += out.grad()[i];
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::gelu(Tensor a) {
    Tensor out = make_out(a.shape(), any_grad({&a}));
    constexpr T inv_sqrt2 = T(0.7071067811865475);
    constexpr T inv_sqrt2pi = T(0.3989422804014327);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const T x = a[i];
        out[i] = T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
    }
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const T x = a[i];
            const T phi = T(0.5) * (T(1) + std::erf(x * inv_sqrt2));
            const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * x * x);
            a.grad()[i] += out.grad()[i] * (phi + x * pdf);
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::sigmoid(Tensor a) {
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = T(1) / (T(1) + std::exp(-a[i]));
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i)
            a.grad()[i] += out.grad()[i] * out[i] * (T(1) - out[i]);
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::tanh(Tensor a) {
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i)
            a.grad()[i] += out.grad()[i] * (T(1) - out[i] * out[i]);
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::abs(Tensor a) {
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] < T(0) ? -a[i] : a[i];
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const T s = a[i] > T(0) ? T(1) : (a[i] < T(0) ? T(-1) : T(0));
            a.grad()[i] += out.grad()[i] * s;
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::log(Tensor a) {
    constexpr double floor_v = 1e-12;
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = std::log(std::max(static_cast<double>(a[i]), floor_v));
    push(out, [a, out]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (static_cast<double>(a[i]) > floor_v)
                a.grad()[i] += out.grad()[i] / a[i];
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::huber(Tensor a, double delta) {
    const T d = static_cast<T>(delta);
    Tensor out = make_out(a.shape(), any_grad({&a}));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const T x = a[i];
        const T ax = x < T(0) ? -x : x;
        out[i] = ax <= d ? T(0.5) * x * x : d * (ax - T(0.5) * d);
    }
    push(out, [a, out, d]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const T x = a[i];
            const T ax = x < T(0) ? -x : x;
            const T dfdx = ax <= d ? x : (x > T(0) ? d : -d);
            a.grad()[i] += out.grad()[i] * dfdx;
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::dropout(Tensor a, double p, const DropoutKey& key, bool training) {
    if (!training || p <= 0.0) return a;
    if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
    Tensor out = make_out(a.shape(), any_grad({&a}));
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    auto kept = std::make_shared<std::vector<bool>>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::uint64_t h = mix_key(key.seed, key.layer, key.step * 0x100000001b3ull + i);
        const double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
        (*kept)[i] = u >= p;
        out[i] = (*kept)[i] ? a[i] * keep_scale : T(0);
    }
    push(out, [a, out, kept, keep_scale]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t i = 0; i < a.size(); ++i)
            if ((*kept)[i]) a.grad()[i] += out.grad()[i] * keep_scale;
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::embedding_lookup(Tensor table, const std::vector<int>& ids) {
    if (table.rank() != 2) throw ShapeMismatch("embedding_lookup: table must be rank 2");
    const std::size_t vocab = table.rows(), dim = table.cols();
    for (int id : ids)
        if (id < 0 || static_cast<std::size_t>(id) >= vocab)
            throw ShapeMismatch("embedding_lookup: id " + std::to_string(id) +
                                " outside vocab of " + std::to_string(vocab));
    Tensor out = make_out({ids.size(), dim}, any_grad({&table}));
    for (std::size_t r = 0; r < ids.size(); ++r)
        std::copy(table.data() + static_cast<std::size_t>(ids[r]) * dim,
                  table.data() + (static_cast<std::size_t>(ids[r]) + 1) * dim,
                  out.data() + r * dim);
    push(out, [table, out, ids, dim]() mutable {
        if (!table.requires_grad()) return;
        for (std::size_t r = 0; r < ids.size(); ++r)
            for (std::size_t c = 0; c < dim; ++c)
                table.grad()[static_cast<std::size_t>(ids[r]) * dim + c] +=
                    out.grad()[r * dim + c];
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::cross_entropy_logits(Tensor logits, const std::vector<int>& targets,
                                           double label_smoothing,
                                           const std::vector<double>* row_weights) {
    if (logits.rank() != 2 || targets.size() != logits.rows())
        throw ShapeMismatch("cross_entropy_logits: logits " + shape_str(logits.shape()) + " vs " +
                            std::to_string(targets.size()) + " targets");
    const std::size_t rows = logits.rows(), vocab = logits.cols();
    if (row_weights && row_weights->size() != rows)
        throw ShapeMismatch("cross_entropy_logits: weight count mismatch");
    std::size_t active = 0;
    for (std::size_t r = 0; r < rows; ++r)
        if (!row_weights || (*row_weights)[r] != 0.0) ++active;
    if (active == 0) throw EmptyMask("cross_entropy_logits: all rows masked out");

    // closure must outlive the caller's weight buffer
    const auto weights = row_weights
                             ? std::make_shared<std::vector<double>>(*row_weights)
                             : std::shared_ptr<std::vector<double>>();

    Tensor probs({rows, vocab});
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double w = weights ? (*weights)[r] : 1.0;
        const T* x = logits.data() + r * vocab;
        T mx = x[0];
        for (std::size_t c = 1; c < vocab; ++c) mx = std::max(mx, x[c]);
        double z = 0;
        for (std::size_t c = 0; c < vocab; ++c) z += std::exp(static_cast<double>(x[c] - mx));
        const double lse = std::log(z) + static_cast<double>(mx);
        for (std::size_t c = 0; c < vocab; ++c)
            probs[r * vocab + c] = static_cast<T>(std::exp(static_cast<double>(x[c]) - lse));
        if (w == 0.0) continue;
        const double uni = label_smoothing / static_cast<double>(vocab);
        double ce = 0.0;
        for (std::size_t c = 0; c < vocab; ++c) {
            const double q =
                uni + (static_cast<std::size_t>(targets[r]) == c ? 1.0 - label_smoothing : 0.0);
            if (q != 0.0) ce += q * (lse - static_cast<double>(x[c]));
        }
        total += w * ce;
    }
    Tensor out = make_out({1}, any_grad({&logits}));
    out[0] = static_cast<T>(total / static_cast<double>(active));
    push(out, [logits, out, probs, targets, weights, label_smoothing, rows, vocab,
               active]() mutable {
        if (!logits.requires_grad()) return;
        const double go = static_cast<double>(out.grad()[0]) / static_cast<double>(active);
        const double uni = label_smoothing / static_cast<double>(vocab);
        for (std::size_t r = 0; r < rows; ++r) {
            const double w = weights ? (*weights)[r] : 1.0;
            if (w == 0.0) continue;
            for (std::size_t c = 0; c < vocab; ++c) {
                const double q =
                    uni + (static_cast<std::size_t>(targets[r]) == c ? 1.0 - label_smoothing : 0.0);
                logits.grad()[r * vocab + c] +=
                    static_cast<T>(go * w * (static_cast<double>(probs[r * vocab + c]) - q));
            }
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::avg_pool1d(Tensor a, std::size_t window) {
    if (a.rank() != 2 || window == 0)
        throw ShapeMismatch("avg_pool1d: rank-2 input required, got " + shape_str(a.shape()));
    const std::size_t rows = a.rows(), cols = a.cols();
    const std::size_t pooled = (rows + window - 1) / window;
    Tensor out = make_out({pooled, cols}, any_grad({&a}));
    for (std::size_t p = 0; p < pooled; ++p) {
        const std::size_t lo = p * window;
        const std::size_t hi = std::min(rows, lo + window);
        for (std::size_t c = 0; c < cols; ++c) {
            T acc = 0;
            for (std::size_t r = lo; r < hi; ++r) acc += a[r * cols + c];
            out[p * cols + c] = acc / static_cast<T>(hi - lo);
        }
    }
    push(out, [a, out, window, rows, cols, pooled]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t p = 0; p < pooled; ++p) {
            const std::size_t lo = p * window;
            const std::size_t hi = std::min(rows, lo + window);
            const T inv = T(1) / static_cast<T>(hi - lo);
            for (std::size_t c = 0; c < cols; ++c)
                for (std::size_t r = lo; r < hi; ++r)
                    a.grad()[r * cols + c] += out.grad()[p * cols + c] * inv;
        }
    });
    return out;
}

template <typename T>
TensorT<T> GraphT<T>::nearest_upsample1d(Tensor a, std::size_t factor) {
    if (a.rank() != 2 || factor == 0)
        throw ShapeMismatch("nearest_upsample1d: rank-2 input required, got " +
                            shape_str(a.shape()));
    const std::size_t rows = a.rows(), cols = a.cols();
    Tensor out = make_out({rows * factor, cols}, any_grad({&a}));
    for (std::size_t r = 0; r < rows * factor; ++r)
        std::copy(a.data() + (r / factor) * cols, a.data() + (r / factor + 1) * cols,
                  out.data() + r * cols);
    push(out, [a, out, factor, rows, cols]() mutable {
        if (!a.requires_grad()) return;
        for (std::size_t r = 0; r < rows * factor; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                a.grad()[(r / factor) * cols + c] += out.grad()[r * cols + c];
    });
    return out;
}

template class TensorT<double>;
template class TensorT<float>;
template class GraphT<double>;
template class GraphT<float>;

double grad_check(const std::function<Tensor(Graph&, std::vector<Tensor>&)>& f,
                  std::vector<Tensor> inputs, std::size_t max_probes_per_input,
                  std::uint64_t probe_seed) {
    for (Tensor& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    Graph g;
    Tensor loss = f(g, inputs);
    g.backward(loss);

    const double h = 1e-5;
    double worst = 0.0;
    SplitMix64 rng(probe_seed);
    for (Tensor& t : inputs) {
        std::vector<std::size_t> probes;
        if (max_probes_per_input == 0 || t.size() <= max_probes_per_input) {
            probes.resize(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) probes[i] = i;
        } else {
            for (std::size_t i = 0; i < max_probes_per_input; ++i)
                probes.push_back(static_cast<std::size_t>(rng.below(t.size())));
        }
        for (std::size_t idx : probes) {
            const double orig = t[idx];
            auto eval = [&](double v) {
                t[idx] = v;
                Graph ge;
                ge.recording = false;
                std::vector<Tensor> copy = inputs;
                return f(ge, copy).item();
            };
            const double fp = eval(orig + h);
            const double fm = eval(orig - h);
            t[idx] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = t.grad()[idx];
            const double denom = std::max({1e-8, std::abs(analytic), std::abs(numeric)});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
    }
    return worst;
}

} // namespace aisllm
