#pragma once

// Dense-tensor substrate with reverse-mode automatic differentiation.
// Covers exactly the operation set the forecasting model needs, in
// float64 (default, testable against finite differences) or float32.

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace aisllm {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotScalar : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TapeConsumed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotOnTape : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyMask : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string shape_str(const std::vector<std::size_t>& s);

template <typename T>
class TensorT {
public:
    TensorT() = default;
    explicit TensorT(std::vector<std::size_t> shape)
        : shape_(std::move(shape)),
          data_(std::make_shared<std::vector<T>>(count(shape_), T(0))) {}
    TensorT(std::vector<std::size_t> shape, std::vector<T> values)
        : shape_(std::move(shape)), data_(std::make_shared<std::vector<T>>(std::move(values))) {
        if (data_->size() != count(shape_))
            throw ShapeMismatch("data length " + std::to_string(data_->size()) +
                                " does not match shape " + shape_str(shape_));
    }

    static TensorT scalar(T v) { return TensorT({1}, {v}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_ ? data_->size() : 0; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    T* data() { return data_->data(); }
    const T* data() const { return data_->data(); }
    T& operator[](std::size_t i) { return (*data_)[i]; }
    T operator[](std::size_t i) const { return (*data_)[i]; }
    T& at(std::size_t r, std::size_t c) { return (*data_)[r * cols() + c]; }
    T at(std::size_t r, std::size_t c) const { return (*data_)[r * cols() + c]; }

    T item() const {
        if (size() != 1) throw NotScalar("tensor of shape " + shape_str(shape_) + " is not scalar");
        return (*data_)[0];
    }

    bool defined() const { return static_cast<bool>(data_); }
    bool requires_grad() const { return static_cast<bool>(grad_); }
    TensorT& set_requires_grad(bool on = true) {
        if (on && !grad_) grad_ = std::make_shared<std::vector<T>>(size(), T(0));
        if (!on) grad_.reset();
        return *this;
    }
    T* grad() { return grad_->data(); }
    const T* grad() const { return grad_->data(); }
    void zero_grad() {
        if (grad_) std::fill(grad_->begin(), grad_->end(), T(0));
    }

    int node = -1; // index on the recording tape; -1 for leaves/constants

private:
    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::vector<std::size_t> shape_;
    std::shared_ptr<std::vector<T>> data_;
    std::shared_ptr<std::vector<T>> grad_;
};

/// Seeded-dropout identity: masks depend only on (seed, layer, step), never
/// on evaluation order or worker count.
struct DropoutKey {
    std::uint64_t seed = 0;
    std::uint64_t layer = 0;
    std::uint64_t step = 0;
};

/// The tape. Ops record a backward closure when any input requires grad;
/// backward() replays them once in reverse. One graph per execution context.
template <typename T>
class GraphT {
public:
    using Tensor = TensorT<T>;

    bool recording = true;

    std::size_t tape_size() const { return nodes_.size(); }
    void clear() {
        nodes_.clear();
        consumed_ = false;
    }

    /// Reverse accumulation from a scalar loss. Repeated calls without
    /// clear() raise TapeConsumed.
    void backward(Tensor& loss);

    // ----- forward op suite -----
    Tensor matmul(Tensor a, Tensor b);
    Tensor add(Tensor a, Tensor b);
    Tensor sub(Tensor a, Tensor b);
    Tensor mul(Tensor a, Tensor b);
    Tensor div(Tensor a, Tensor b);
    Tensor scale(Tensor a, double s);
    Tensor concat(std::vector<Tensor> parts, std::size_t axis);
    Tensor slice(Tensor a, std::size_t axis, std::size_t start, std::size_t len);
    Tensor transpose(Tensor a);
    Tensor reshape(Tensor a, std::vector<std::size_t> new_shape);
    Tensor sum(Tensor a, std::size_t axis);
    Tensor mean(Tensor a, std::size_t axis);
    Tensor sum_all(Tensor a);
    Tensor mean_all(Tensor a);
    Tensor softmax(Tensor a); // along the last axis
    /// Softmax over square scores where row r attends to columns <= r only;
    /// masked entries are exactly zero. Fused form of mask-add + softmax.
    Tensor causal_softmax(Tensor a);
    Tensor layer_norm(Tensor x, Tensor gain, Tensor bias, double eps = 1e-5);
    Tensor relu(Tensor a);
    Tensor gelu(Tensor a);
    Tensor sigmoid(Tensor a);
    Tensor tanh(Tensor a);
    Tensor abs(Tensor a);
    Tensor log(Tensor a); // input clamped at 1e-12
    Tensor huber(Tensor a, double delta);
    Tensor dropout(Tensor a, double p, const DropoutKey& key, bool training);
    Tensor embedding_lookup(Tensor table, const std::vector<int>& ids);

    /// Mean cross-entropy of row-wise logits against integer targets.
    /// Optional per-row weights: rows with weight zero are excluded from the
    /// mean (the denominator counts nonzero-weight rows); all-zero weights
    /// raise EmptyMask. Smoothing mixes the one-hot target with uniform.
    Tensor cross_entropy_logits(Tensor logits, const std::vector<int>& targets,
                                double label_smoothing = 0.0,
                                const std::vector<double>* row_weights = nullptr);

    Tensor avg_pool1d(Tensor a, std::size_t window);
    Tensor nearest_upsample1d(Tensor a, std::size_t factor);

private:
    struct Node {
        std::function<void()> back;
    };

    Tensor make_out(std::vector<std::size_t> shape, bool needs_grad);
    void push(Tensor& out, std::function<void()> back);
    static bool any_grad(std::initializer_list<const Tensor*> ts) {
        for (const Tensor* t : ts)
            if (t->requires_grad()) return true;
        return false;
    }

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

using Tensor = TensorT<double>;
using Graph = GraphT<double>;
using TensorF = TensorT<float>;
using GraphF = GraphT<float>;

extern template class TensorT<double>;
extern template class TensorT<float>;
extern template class GraphT<double>;
extern template class GraphT<float>;

/// Compare analytic gradients against central finite differences
/// (h = 1e-5) for a scalar-valued function of the given inputs. Elements
/// are compared as |a - n| / max(1e-8, |a|, |n|); returns the worst case.
/// Pass max_probes_per_input > 0 to sample large tensors instead of
/// probing every element.
double grad_check(const std::function<Tensor(Graph&, std::vector<Tensor>&)>& f,
                  std::vector<Tensor> inputs, std::size_t max_probes_per_input = 0,
                  std::uint64_t probe_seed = 1234);

} // namespace aisllm
