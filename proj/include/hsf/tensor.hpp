#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsf/error.hpp"
#include "hsf/rng.hpp"

namespace hsf {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

class Tensor;

namespace detail {

// Per-backward-pass cotangent buffers, keyed by graph node. Persistent grads
// are only touched at the end of a pass so repeated backward() calls
// accumulate without double counting.
struct GradSink;

struct Node {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;  // persistent accumulator, lazily allocated
    std::vector<Tensor> parents;
    std::function<void(const std::vector<double>& g, GradSink& sink)> backprop;
};

}  // namespace detail

// Dense double-precision tensor. Value-semantic handle to a shared node in
// the differentiation graph: copies alias the same storage. Data is immutable
// after construction except through raw() (optimizer updates, test probes);
// grad buffers are mutated by backward()/zero_grad() only.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_vec(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value);
    // Uniform in [lo, hi) from the given stream.
    static Tensor uniform(Shape shape, Rng& rng, double lo, double hi, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    int64_t dim(int axis) const { return node_->shape[static_cast<size_t>(axis)]; }
    int64_t numel() const { return static_cast<int64_t>(node_->data.size()); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<double>& data() const { return node_->data; }
    double* raw() { return node_->data.data(); }

    bool has_grad() const { return !node_->grad.empty(); }
    const std::vector<double>& grad() const;
    void zero_grad() { node_->grad.clear(); }
    // Allocates a zero grad buffer when none exists (parameters that sit
    // outside the active stage of a configurable graph).
    void ensure_grad() {
        if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
    }

    // Scalar convenience; requires numel() == 1.
    double value() const;
    double at(std::initializer_list<int64_t> idx) const;

    detail::Node* node() const { return node_.get(); }

    // Graph construction entry point used by the op implementations.
    static Tensor make(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                       std::function<void(const std::vector<double>&, detail::GradSink&)> backprop);

private:
    std::shared_ptr<detail::Node> node_;
};

namespace detail {
struct GradSink {
    std::unordered_map<Node*, std::vector<double>> cot;
    // Lazily allocated zero-initialized cotangent of t.
    std::vector<double>& of(const Tensor& t);
    // Gradient only flows into nodes that require it.
    static bool needs(const Tensor& t) { return t.requires_grad(); }
};
}  // namespace detail

// ---------------------------------------------------------------------------
// Operator set. All ops are pure; outputs carry backprop closures whenever an
// input requires gradients.
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double k);
Tensor sum(const Tensor& a);    // -> shape {1}
Tensor mean(const Tensor& a);   // -> shape {1}
Tensor relu(const Tensor& a);
Tensor sqrt_elem(const Tensor& a);
Tensor div_elem(const Tensor& a, const Tensor& b);
Tensor clamp_min(const Tensor& a, double floor);

// Cross-correlation over [N,C_in,H,W] with kernel [C_out,C_in,k,k], odd k,
// zero padding. H' = H + 2*padding - k + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int64_t padding);

// Affine map over the trailing axis: [...,D_in] x [D_out,D_in] + [D_out].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

// Concatenate along `axis`; all other extents must match.
Tensor concat(const std::vector<Tensor>& parts, int axis);
// Channels-last convention: concatenation along the trailing axis.
Tensor concat_channels(const std::vector<Tensor>& parts);
// Inverse of concat along the trailing axis.
Tensor slice_lastdim(const Tensor& t, int64_t start, int64_t len);

// Mean over non-overlapping r x r blocks of the trailing two axes.
Tensor mean_pool(const Tensor& t, int64_t r);

// Max-stabilized softmax along the trailing axis.
Tensor softmax_lastdim(const Tensor& t);

enum class Reduction { kMean, kSum };
// |pred - target| reduced over all elements; sign subgradient, 0 at ties.
Tensor l1_loss(const Tensor& pred, const Tensor& target, Reduction reduction = Reduction::kMean);

Tensor permute(const Tensor& t, const std::vector<int>& perm);
Tensor reshape(const Tensor& t, Shape shape);

// Row gather from a [R,D] tensor; backward scatter-adds (duplicates allowed).
Tensor index_select_rows(const Tensor& t, const std::vector<int64_t>& indices);
// Per-row dot product of two [R,D] tensors -> [R,1].
Tensor rowwise_dot(const Tensor& a, const Tensor& b);
// Scale each row of [R,C] by the matching entry of [R,1].
Tensor scale_rows(const Tensor& a, const Tensor& s);

// Reverse-mode differentiation from a scalar loss. Accumulates into the
// persistent grad of every reachable tensor with requires_grad set.
void backward(const Tensor& loss);

// ---------------------------------------------------------------------------
// Parameters and optimizer
// ---------------------------------------------------------------------------

struct Parameter {
    std::string name;
    Tensor tensor;                 // requires_grad == true
    std::vector<double> moment1;   // Adam first moment, same size as tensor
    std::vector<double> moment2;   // Adam second moment
    int64_t step = 0;

    Parameter() = default;
    Parameter(std::string n, Tensor t);
};

void zero_grads(std::vector<Parameter>& params);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias correction. Throws ValueError listing parameter
// names whose grads are missing.
void adam_step(std::vector<Parameter>& params, const AdamConfig& cfg);

}  // namespace hsf
