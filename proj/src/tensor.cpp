#include "hsf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace hsf {

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

namespace {

void check_positive_shape(const Shape& s, const char* what) {
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] <= 0) {
            throw ShapeError(std::string(what) + ": axis " + std::to_string(i) +
                             " has non-positive extent in " + shape_str(s));
        }
    }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

bool any_requires_grad(const std::vector<Tensor>& ts) {
    for (const auto& t : ts)
        if (t.requires_grad()) return true;
    return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor basics
// ---------------------------------------------------------------------------

Tensor Tensor::make(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                    std::function<void(const std::vector<double>&, detail::GradSink&)> backprop) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
        throw ShapeError("tensor: data size " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    Tensor t;
    t.node_ = std::make_shared<detail::Node>();
    t.node_->shape = std::move(shape);
    t.node_->data = std::move(data);
    t.node_->requires_grad = any_requires_grad(parents);
    if (t.node_->requires_grad) {
        t.node_->parents = std::move(parents);
        t.node_->backprop = std::move(backprop);
    }
    return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    check_positive_shape(shape, "zeros");
    Tensor t;
    t.node_ = std::make_shared<detail::Node>();
    t.node_->data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
    t.node_->shape = std::move(shape);
    t.node_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.node_->data.begin(), t.node_->data.end(), value);
    return t;
}

Tensor Tensor::from_vec(Shape shape, std::vector<double> data, bool requires_grad) {
    check_positive_shape(shape, "from_vec");
    if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
        throw ShapeError("from_vec: data size " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    Tensor t;
    t.node_ = std::make_shared<detail::Node>();
    t.node_->shape = std::move(shape);
    t.node_->data = std::move(data);
    t.node_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double value) { return from_vec({1}, {value}); }

Tensor Tensor::uniform(Shape shape, Rng& rng, double lo, double hi, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.node_->data) v = rng.uniform(lo, hi);
    return t;
}

const std::vector<double>& Tensor::grad() const {
    if (node_->grad.empty()) throw ValueError("tensor has no gradient; call backward() first");
    return node_->grad;
}

double Tensor::value() const {
    if (numel() != 1) throw ShapeError("value(): tensor is not scalar, shape " + shape_str(shape()));
    return node_->data[0];
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
    if (static_cast<int>(idx.size()) != rank())
        throw ShapeError("at(): index rank mismatch for shape " + shape_str(shape()));
    int64_t flat = 0;
    int axis = 0;
    for (int64_t i : idx) {
        flat = flat * dim(axis) + i;
        ++axis;
    }
    return node_->data[static_cast<size_t>(flat)];
}

namespace detail {
std::vector<double>& GradSink::of(const Tensor& t) {
    auto& buf = cot[t.node()];
    if (buf.empty()) buf.assign(t.node()->data.size(), 0.0);
    return buf;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
    return Tensor::make(a.shape(), std::move(out), {a, b},
                        [a, b](const std::vector<double>& g, detail::GradSink& s) {
                            if (detail::GradSink::needs(a)) {
                                auto& ga = s.of(a);
                                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                            }
                            if (detail::GradSink::needs(b)) {
                                auto& gb = s.of(b);
                                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                            }
                        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
    return Tensor::make(a.shape(), std::move(out), {a, b},
                        [a, b](const std::vector<double>& g, detail::GradSink& s) {
                            if (detail::GradSink::needs(a)) {
                                auto& ga = s.of(a);
                                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                            }
                            if (detail::GradSink::needs(b)) {
                                auto& gb = s.of(b);
                                for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                            }
                        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
    return Tensor::make(a.shape(), std::move(out), {a, b},
                        [a, b](const std::vector<double>& g, detail::GradSink& s) {
                            if (detail::GradSink::needs(a)) {
                                auto& ga = s.of(a);
                                const auto& bd2 = b.data();
                                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd2[i];
                            }
                            if (detail::GradSink::needs(b)) {
                                auto& gb = s.of(b);
                                const auto& ad2 = a.data();
                                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad2[i];
                            }
                        });
}

Tensor scale(const Tensor& a, double k) {
    std::vector<double> out(a.data());
    for (auto& v : out) v *= k;
    return Tensor::make(a.shape(), std::move(out), {a},
                        [a, k](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(a)) return;
                            auto& ga = s.of(a);
                            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * k;
                        });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return Tensor::make({1}, {acc}, {a},
                        [a](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(a)) return;
                            auto& ga = s.of(a);
                            for (auto& v : ga) v += g[0];
                        });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.data());
    for (auto& v : out) v = v > 0.0 ? v : 0.0;
    return Tensor::make(a.shape(), std::move(out), {a},
                        [a](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(a)) return;
                            auto& ga = s.of(a);
                            const auto& ad = a.data();
                            // subgradient at 0 is 0
                            for (size_t i = 0; i < g.size(); ++i)
                                if (ad[i] > 0.0) ga[i] += g[i];
                        });
}

Tensor sqrt_elem(const Tensor& a) {
    std::vector<double> out(a.data());
    for (auto& v : out) v = std::sqrt(v);
    return Tensor::make(a.shape(), std::move(out), {a},
                        [a](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(a)) return;
                            auto& ga = s.of(a);
                            const auto& ad = a.data();
                            for (size_t i = 0; i < g.size(); ++i) {
                                if (ad[i] > 1e-300) ga[i] += g[i] * 0.5 / std::sqrt(ad[i]);
                            }
                        });
}

Tensor div_elem(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "div_elem");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] /= bd[i];
    return Tensor::make(a.shape(), std::move(out), {a, b},
                        [a, b](const std::vector<double>& g, detail::GradSink& s) {
                            const auto& ad = a.data();
                            const auto& bd2 = b.data();
                            if (detail::GradSink::needs(a)) {
                                auto& ga = s.of(a);
                                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bd2[i];
                            }
                            if (detail::GradSink::needs(b)) {
                                auto& gb = s.of(b);
                                for (size_t i = 0; i < g.size(); ++i)
                                    gb[i] -= g[i] * ad[i] / (bd2[i] * bd2[i]);
                            }
                        });
}

Tensor clamp_min(const Tensor& a, double floor) {
    std::vector<double> out(a.data());
    for (auto& v : out) v = v > floor ? v : floor;
    return Tensor::make(a.shape(), std::move(out), {a},
                        [a, floor](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(a)) return;
                            auto& ga = s.of(a);
                            const auto& ad = a.data();
                            for (size_t i = 0; i < g.size(); ++i)
                                if (ad[i] > floor) ga[i] += g[i];
                        });
}

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int64_t padding) {
    if (input.rank() != 4) throw ShapeError("conv2d: input must be [N,C_in,H,W], got " + shape_str(input.shape()));
    if (kernel.rank() != 4) throw ShapeError("conv2d: kernel must be [C_out,C_in,k,k], got " + shape_str(kernel.shape()));
    if (bias.rank() != 1) throw ShapeError("conv2d: bias must be [C_out], got " + shape_str(bias.shape()));
    const int64_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int64_t cout = kernel.dim(0), k = kernel.dim(2);
    if (kernel.dim(1) != cin)
        throw ShapeError("conv2d: kernel C_in axis = " + std::to_string(kernel.dim(1)) +
                         " but input C_in axis = " + std::to_string(cin));
    if (kernel.dim(3) != k) throw ShapeError("conv2d: kernel must be square, got " + shape_str(kernel.shape()));
    if (k % 2 == 0) throw ShapeError("conv2d: kernel size axis must be odd, got " + std::to_string(k));
    if (bias.dim(0) != cout)
        throw ShapeError("conv2d: bias axis = " + std::to_string(bias.dim(0)) +
                         " but kernel C_out axis = " + std::to_string(cout));
    if (padding < 0) throw ShapeError("conv2d: padding must be >= 0");
    const int64_t oh = h + 2 * padding - k + 1;
    const int64_t ow = w + 2 * padding - k + 1;
    if (oh < 1 || ow < 1) throw ShapeError("conv2d: output spatial axes would be empty");

    const auto& in = input.data();
    const auto& ker = kernel.data();
    const auto& bv = bias.data();
    std::vector<double> out(static_cast<size_t>(n * cout * oh * ow), 0.0);

    for (int64_t b = 0; b < n; ++b)
        for (int64_t co = 0; co < cout; ++co)
            for (int64_t y = 0; y < oh; ++y)
                for (int64_t x = 0; x < ow; ++x) {
                    double acc = bv[static_cast<size_t>(co)];
                    for (int64_t ci = 0; ci < cin; ++ci)
                        for (int64_t dy = 0; dy < k; ++dy) {
                            const int64_t iy = y + dy - padding;
                            if (iy < 0 || iy >= h) continue;
                            for (int64_t dx = 0; dx < k; ++dx) {
                                const int64_t ix = x + dx - padding;
                                if (ix < 0 || ix >= w) continue;
                                acc += in[static_cast<size_t>(((b * cin + ci) * h + iy) * w + ix)] *
                                       ker[static_cast<size_t>(((co * cin + ci) * k + dy) * k + dx)];
                            }
                        }
                    out[static_cast<size_t>(((b * cout + co) * oh + y) * ow + x)] = acc;
                }

    auto backprop = [input, kernel, bias, padding, n, cin, cout, h, w, k, oh, ow](
                        const std::vector<double>& g, detail::GradSink& s) {
        const auto& in = input.data();
        const auto& ker = kernel.data();
        const bool need_in = detail::GradSink::needs(input);
        const bool need_ker = detail::GradSink::needs(kernel);
        const bool need_bias = detail::GradSink::needs(bias);
        std::vector<double>* gin = need_in ? &s.of(input) : nullptr;
        std::vector<double>* gker = need_ker ? &s.of(kernel) : nullptr;
        std::vector<double>* gbias = need_bias ? &s.of(bias) : nullptr;
        for (int64_t b = 0; b < n; ++b)
            for (int64_t co = 0; co < cout; ++co)
                for (int64_t y = 0; y < oh; ++y)
                    for (int64_t x = 0; x < ow; ++x) {
                        const double go = g[static_cast<size_t>(((b * cout + co) * oh + y) * ow + x)];
                        if (go == 0.0) continue;
                        if (gbias) (*gbias)[static_cast<size_t>(co)] += go;
                        if (!gin && !gker) continue;
                        for (int64_t ci = 0; ci < cin; ++ci)
                            for (int64_t dy = 0; dy < k; ++dy) {
                                const int64_t iy = y + dy - padding;
                                if (iy < 0 || iy >= h) continue;
                                for (int64_t dx = 0; dx < k; ++dx) {
                                    const int64_t ix = x + dx - padding;
                                    if (ix < 0 || ix >= w) continue;
                                    const size_t ii = static_cast<size_t>(((b * cin + ci) * h + iy) * w + ix);
                                    const size_t ki = static_cast<size_t>(((co * cin + ci) * k + dy) * k + dx);
                                    if (gin) (*gin)[ii] += go * ker[ki];
                                    if (gker) (*gker)[ki] += go * in[ii];
                                }
                            }
                    }
    };
    return Tensor::make({n, cout, oh, ow}, std::move(out), {input, kernel, bias}, std::move(backprop));
}

// ---------------------------------------------------------------------------
// linear
// ---------------------------------------------------------------------------

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    if (weight.rank() != 2) throw ShapeError("linear: weight must be [D_out,D_in], got " + shape_str(weight.shape()));
    if (bias.rank() != 1) throw ShapeError("linear: bias must be [D_out], got " + shape_str(bias.shape()));
    if (input.rank() < 1) throw ShapeError("linear: input must have at least one axis");
    const int64_t din = weight.dim(1), dout = weight.dim(0);
    if (input.dim(input.rank() - 1) != din)
        throw ShapeError("linear: trailing axis of input = " + std::to_string(input.dim(input.rank() - 1)) +
                         " but weight D_in = " + std::to_string(din));
    if (bias.dim(0) != dout)
        throw ShapeError("linear: bias axis = " + std::to_string(bias.dim(0)) +
                         " but weight D_out = " + std::to_string(dout));

    const int64_t rows = input.numel() / din;
    const auto& in = input.data();
    const auto& wt = weight.data();
    const auto& bv = bias.data();
    std::vector<double> out(static_cast<size_t>(rows * dout));
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t o = 0; o < dout; ++o) {
            double acc = bv[static_cast<size_t>(o)];
            for (int64_t i = 0; i < din; ++i)
                acc += in[static_cast<size_t>(r * din + i)] * wt[static_cast<size_t>(o * din + i)];
            out[static_cast<size_t>(r * dout + o)] = acc;
        }

    Shape out_shape = input.shape();
    out_shape.back() = dout;

    auto backprop = [input, weight, bias, rows, din, dout](const std::vector<double>& g,
                                                           detail::GradSink& s) {
        const auto& in = input.data();
        const auto& wt = weight.data();
        std::vector<double>* gin = detail::GradSink::needs(input) ? &s.of(input) : nullptr;
        std::vector<double>* gw = detail::GradSink::needs(weight) ? &s.of(weight) : nullptr;
        std::vector<double>* gb = detail::GradSink::needs(bias) ? &s.of(bias) : nullptr;
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t o = 0; o < dout; ++o) {
                const double go = g[static_cast<size_t>(r * dout + o)];
                if (go == 0.0) continue;
                if (gb) (*gb)[static_cast<size_t>(o)] += go;
                for (int64_t i = 0; i < din; ++i) {
                    if (gin) (*gin)[static_cast<size_t>(r * din + i)] += go * wt[static_cast<size_t>(o * din + i)];
                    if (gw) (*gw)[static_cast<size_t>(o * din + i)] += go * in[static_cast<size_t>(r * din + i)];
                }
            }
    };
    return Tensor::make(std::move(out_shape), std::move(out), {input, weight, bias}, std::move(backprop));
}

// ---------------------------------------------------------------------------
// concat / slice
// ---------------------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat: need at least one part");
    const int rank = parts[0].rank();
    if (axis < 0 || axis >= rank) throw ShapeError("concat: axis out of range");
    int64_t cat_extent = 0;
    for (size_t p = 0; p < parts.size(); ++p) {
        if (parts[p].rank() != rank) throw ShapeError("concat: rank mismatch at part " + std::to_string(p));
        for (int a = 0; a < rank; ++a) {
            if (a == axis) continue;
            if (parts[p].dim(a) != parts[0].dim(a))
                throw ShapeError("concat: axis " + std::to_string(a) + " mismatch at part " +
                                 std::to_string(p) + ": " + shape_str(parts[p].shape()) + " vs " +
                                 shape_str(parts[0].shape()));
        }
        cat_extent += parts[p].dim(axis);
    }
    Shape out_shape = parts[0].shape();
    out_shape[static_cast<size_t>(axis)] = cat_extent;

    int64_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= parts[0].dim(a);
    for (int a = axis + 1; a < rank; ++a) inner *= parts[0].dim(a);

    std::vector<double> out(static_cast<size_t>(shape_numel(out_shape)));
    const int64_t out_row = cat_extent * inner;
    int64_t offset = 0;
    for (const auto& part : parts) {
        const int64_t block = part.dim(axis) * inner;
        const auto& pd = part.data();
        for (int64_t o = 0; o < outer; ++o)
            std::copy(pd.begin() + o * block, pd.begin() + (o + 1) * block,
                      out.begin() + o * out_row + offset);
        offset += block;
    }

    auto parts_copy = parts;
    auto backprop = [parts_copy, outer, inner, out_row](const std::vector<double>& g,
                                                        detail::GradSink& s) {
        int64_t offset = 0;
        for (const auto& part : parts_copy) {
            const int64_t axis_extent = static_cast<int64_t>(part.numel()) / (outer * inner);
            const int64_t block = axis_extent * inner;
            if (detail::GradSink::needs(part)) {
                auto& gp = s.of(part);
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < block; ++i)
                        gp[static_cast<size_t>(o * block + i)] += g[static_cast<size_t>(o * out_row + offset + i)];
            }
            offset += block;
        }
    };
    return Tensor::make(std::move(out_shape), std::move(out), parts, std::move(backprop));
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_channels: need at least one part");
    return concat(parts, parts[0].rank() - 1);
}

Tensor slice_lastdim(const Tensor& t, int64_t start, int64_t len) {
    const int64_t d = t.dim(t.rank() - 1);
    if (start < 0 || len < 1 || start + len > d)
        throw ShapeError("slice_lastdim: range [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") out of axis extent " + std::to_string(d));
    const int64_t rows = t.numel() / d;
    std::vector<double> out(static_cast<size_t>(rows * len));
    const auto& td = t.data();
    for (int64_t r = 0; r < rows; ++r)
        std::copy(td.begin() + r * d + start, td.begin() + r * d + start + len, out.begin() + r * len);
    Shape out_shape = t.shape();
    out_shape.back() = len;
    return Tensor::make(std::move(out_shape), std::move(out), {t},
                        [t, start, len, rows, d](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(t)) return;
                            auto& gt = s.of(t);
                            for (int64_t r = 0; r < rows; ++r)
                                for (int64_t i = 0; i < len; ++i)
                                    gt[static_cast<size_t>(r * d + start + i)] += g[static_cast<size_t>(r * len + i)];
                        });
}

// ---------------------------------------------------------------------------
// mean_pool
// ---------------------------------------------------------------------------

Tensor mean_pool(const Tensor& t, int64_t r) {
    if (t.rank() < 2) throw ShapeError("mean_pool: need at least two axes, got " + shape_str(t.shape()));
    if (r < 1) throw ShapeError("mean_pool: r must be >= 1");
    const int64_t h = t.dim(t.rank() - 2), w = t.dim(t.rank() - 1);
    if (h % r != 0 || w % r != 0)
        throw ShapeError("mean_pool: r = " + std::to_string(r) + " does not divide trailing axes of " +
                         shape_str(t.shape()));
    const int64_t oh = h / r, ow = w / r;
    const int64_t lead = t.numel() / (h * w);
    const double inv = 1.0 / static_cast<double>(r * r);
    const auto& td = t.data();
    std::vector<double> out(static_cast<size_t>(lead * oh * ow), 0.0);
    for (int64_t l = 0; l < lead; ++l)
        for (int64_t y = 0; y < oh; ++y)
            for (int64_t x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int64_t a = 0; a < r; ++a)
                    for (int64_t b = 0; b < r; ++b)
                        acc += td[static_cast<size_t>((l * h + y * r + a) * w + x * r + b)];
                out[static_cast<size_t>((l * oh + y) * ow + x)] = acc * inv;
            }
    Shape out_shape = t.shape();
    out_shape[out_shape.size() - 2] = oh;
    out_shape[out_shape.size() - 1] = ow;
    return Tensor::make(std::move(out_shape), std::move(out), {t},
                        [t, r, h, w, oh, ow, lead, inv](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(t)) return;
                            auto& gt = s.of(t);
                            for (int64_t l = 0; l < lead; ++l)
                                for (int64_t y = 0; y < oh; ++y)
                                    for (int64_t x = 0; x < ow; ++x) {
                                        const double go = g[static_cast<size_t>((l * oh + y) * ow + x)] * inv;
                                        for (int64_t a = 0; a < r; ++a)
                                            for (int64_t b = 0; b < r; ++b)
                                                gt[static_cast<size_t>((l * h + y * r + a) * w + x * r + b)] += go;
                                    }
                        });
}

// ---------------------------------------------------------------------------
// softmax
// ---------------------------------------------------------------------------

Tensor softmax_lastdim(const Tensor& t) {
    const int64_t d = t.dim(t.rank() - 1);
    const int64_t rows = t.numel() / d;
    const auto& td = t.data();
    std::vector<double> out(td.size());
    for (int64_t r = 0; r < rows; ++r) {
        double mx = td[static_cast<size_t>(r * d)];
        for (int64_t i = 1; i < d; ++i) mx = std::max(mx, td[static_cast<size_t>(r * d + i)]);
        double denom = 0.0;
        for (int64_t i = 0; i < d; ++i) {
            const double e = std::exp(td[static_cast<size_t>(r * d + i)] - mx);
            out[static_cast<size_t>(r * d + i)] = e;
            denom += e;
        }
        for (int64_t i = 0; i < d; ++i) out[static_cast<size_t>(r * d + i)] /= denom;
    }
    std::vector<double> y = out;  // captured for the Jacobian
    return Tensor::make(t.shape(), std::move(out), {t},
                        [t, y = std::move(y), rows, d](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(t)) return;
                            auto& gt = s.of(t);
                            for (int64_t r = 0; r < rows; ++r) {
                                double dot = 0.0;
                                for (int64_t i = 0; i < d; ++i)
                                    dot += g[static_cast<size_t>(r * d + i)] * y[static_cast<size_t>(r * d + i)];
                                for (int64_t i = 0; i < d; ++i) {
                                    const size_t ix = static_cast<size_t>(r * d + i);
                                    gt[ix] += y[ix] * (g[ix] - dot);
                                }
                            }
                        });
}

// ---------------------------------------------------------------------------
// l1 loss
// ---------------------------------------------------------------------------

Tensor l1_loss(const Tensor& pred, const Tensor& target, Reduction reduction) {
    check_same_shape(pred, target, "l1_loss");
    const auto& p = pred.data();
    const auto& t = target.data();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - t[i]);
    const double weight = reduction == Reduction::kMean ? 1.0 / static_cast<double>(p.size()) : 1.0;
    acc *= weight;
    return Tensor::make({1}, {acc}, {pred, target},
                        [pred, target, weight](const std::vector<double>& g, detail::GradSink& s) {
                            const auto& p = pred.data();
                            const auto& t = target.data();
                            const double go = g[0] * weight;
                            // sign subgradient, 0 at ties
                            if (detail::GradSink::needs(pred)) {
                                auto& gp = s.of(pred);
                                for (size_t i = 0; i < p.size(); ++i) {
                                    const double diff = p[i] - t[i];
                                    if (diff > 0.0) gp[i] += go;
                                    else if (diff < 0.0) gp[i] -= go;
                                }
                            }
                            if (detail::GradSink::needs(target)) {
                                auto& gt = s.of(target);
                                for (size_t i = 0; i < p.size(); ++i) {
                                    const double diff = p[i] - t[i];
                                    if (diff > 0.0) gt[i] -= go;
                                    else if (diff < 0.0) gt[i] += go;
                                }
                            }
                        });
}

// ---------------------------------------------------------------------------
// permute / reshape
// ---------------------------------------------------------------------------

namespace {
std::vector<int64_t> contiguous_strides(const Shape& s) {
    std::vector<int64_t> st(s.size(), 1);
    for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
    return st;
}
}  // namespace

Tensor permute(const Tensor& t, const std::vector<int>& perm) {
    const int rank = t.rank();
    if (static_cast<int>(perm.size()) != rank) throw ShapeError("permute: perm rank mismatch");
    std::vector<bool> seen(perm.size(), false);
    for (int p : perm) {
        if (p < 0 || p >= rank || seen[static_cast<size_t>(p)]) throw ShapeError("permute: invalid permutation");
        seen[static_cast<size_t>(p)] = true;
    }
    Shape out_shape(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) out_shape[i] = t.dim(perm[i]);
    const auto in_strides = contiguous_strides(t.shape());
    // stride in the input for each output axis
    std::vector<int64_t> gather(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) gather[i] = in_strides[static_cast<size_t>(perm[i])];

    const auto& td = t.data();
    std::vector<double> out(td.size());
    std::vector<int64_t> idx(perm.size(), 0);
    const int64_t n = t.numel();
    for (int64_t flat = 0; flat < n; ++flat) {
        int64_t src = 0;
        for (size_t a = 0; a < perm.size(); ++a) src += idx[a] * gather[a];
        out[static_cast<size_t>(flat)] = td[static_cast<size_t>(src)];
        for (int a = static_cast<int>(perm.size()) - 1; a >= 0; --a) {
            if (++idx[static_cast<size_t>(a)] < out_shape[static_cast<size_t>(a)]) break;
            idx[static_cast<size_t>(a)] = 0;
        }
    }

    return Tensor::make(out_shape, std::move(out), {t},
                        [t, out_shape, gather](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(t)) return;
                            auto& gt = s.of(t);
                            std::vector<int64_t> idx(out_shape.size(), 0);
                            const int64_t n = static_cast<int64_t>(g.size());
                            for (int64_t flat = 0; flat < n; ++flat) {
                                int64_t src = 0;
                                for (size_t a = 0; a < out_shape.size(); ++a) src += idx[a] * gather[a];
                                gt[static_cast<size_t>(src)] += g[static_cast<size_t>(flat)];
                                for (int a = static_cast<int>(out_shape.size()) - 1; a >= 0; --a) {
                                    if (++idx[static_cast<size_t>(a)] < out_shape[static_cast<size_t>(a)]) break;
                                    idx[static_cast<size_t>(a)] = 0;
                                }
                            }
                        });
}

Tensor reshape(const Tensor& t, Shape shape) {
    if (shape_numel(shape) != t.numel())
        throw ShapeError("reshape: cannot view " + shape_str(t.shape()) + " as " + shape_str(shape));
    std::vector<double> out(t.data());
    return Tensor::make(std::move(shape), std::move(out), {t},
                        [t](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(t)) return;
                            auto& gt = s.of(t);
                            for (size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
                        });
}

// ---------------------------------------------------------------------------
// row ops used by the fusion stage
// ---------------------------------------------------------------------------

Tensor index_select_rows(const Tensor& t, const std::vector<int64_t>& indices) {
    if (t.rank() != 2) throw ShapeError("index_select_rows: expected [R,D], got " + shape_str(t.shape()));
    const int64_t rows = t.dim(0), d = t.dim(1);
    for (int64_t ix : indices)
        if (ix < 0 || ix >= rows)
            throw ShapeError("index_select_rows: index " + std::to_string(ix) + " out of " +
                             std::to_string(rows) + " rows");
    const auto& td = t.data();
    std::vector<double> out(indices.size() * static_cast<size_t>(d));
    for (size_t m = 0; m < indices.size(); ++m)
        std::copy(td.begin() + indices[m] * d, td.begin() + (indices[m] + 1) * d, out.begin() + m * static_cast<size_t>(d));
    return Tensor::make({static_cast<int64_t>(indices.size()), d}, std::move(out), {t},
                        [t, indices, d](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(t)) return;
                            auto& gt = s.of(t);
                            for (size_t m = 0; m < indices.size(); ++m)
                                for (int64_t i = 0; i < d; ++i)
                                    gt[static_cast<size_t>(indices[m] * d + i)] += g[m * static_cast<size_t>(d) + static_cast<size_t>(i)];
                        });
}

Tensor rowwise_dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "rowwise_dot");
    if (a.rank() != 2) throw ShapeError("rowwise_dot: expected [R,D], got " + shape_str(a.shape()));
    const int64_t rows = a.dim(0), d = a.dim(1);
    const auto& ad = a.data();
    const auto& bd = b.data();
    std::vector<double> out(static_cast<size_t>(rows));
    for (int64_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int64_t i = 0; i < d; ++i)
            acc += ad[static_cast<size_t>(r * d + i)] * bd[static_cast<size_t>(r * d + i)];
        out[static_cast<size_t>(r)] = acc;
    }
    return Tensor::make({rows, 1}, std::move(out), {a, b},
                        [a, b, rows, d](const std::vector<double>& g, detail::GradSink& s) {
                            const auto& ad = a.data();
                            const auto& bd = b.data();
                            if (detail::GradSink::needs(a)) {
                                auto& ga = s.of(a);
                                for (int64_t r = 0; r < rows; ++r)
                                    for (int64_t i = 0; i < d; ++i)
                                        ga[static_cast<size_t>(r * d + i)] += g[static_cast<size_t>(r)] * bd[static_cast<size_t>(r * d + i)];
                            }
                            if (detail::GradSink::needs(b)) {
                                auto& gb = s.of(b);
                                for (int64_t r = 0; r < rows; ++r)
                                    for (int64_t i = 0; i < d; ++i)
                                        gb[static_cast<size_t>(r * d + i)] += g[static_cast<size_t>(r)] * ad[static_cast<size_t>(r * d + i)];
                            }
                        });
}

Tensor scale_rows(const Tensor& a, const Tensor& s_col) {
    if (a.rank() != 2) throw ShapeError("scale_rows: expected [R,C], got " + shape_str(a.shape()));
    if (s_col.rank() != 2 || s_col.dim(1) != 1 || s_col.dim(0) != a.dim(0))
        throw ShapeError("scale_rows: scale must be [R,1] matching " + shape_str(a.shape()) + ", got " +
                         shape_str(s_col.shape()));
    const int64_t rows = a.dim(0), c = a.dim(1);
    const auto& ad = a.data();
    const auto& sd = s_col.data();
    std::vector<double> out(ad.size());
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t i = 0; i < c; ++i)
            out[static_cast<size_t>(r * c + i)] = ad[static_cast<size_t>(r * c + i)] * sd[static_cast<size_t>(r)];
    return Tensor::make(a.shape(), std::move(out), {a, s_col},
                        [a, s_col, rows, c](const std::vector<double>& g, detail::GradSink& s) {
                            const auto& ad = a.data();
                            const auto& sd = s_col.data();
                            if (detail::GradSink::needs(a)) {
                                auto& ga = s.of(a);
                                for (int64_t r = 0; r < rows; ++r)
                                    for (int64_t i = 0; i < c; ++i)
                                        ga[static_cast<size_t>(r * c + i)] += g[static_cast<size_t>(r * c + i)] * sd[static_cast<size_t>(r)];
                            }
                            if (detail::GradSink::needs(s_col)) {
                                auto& gs = s.of(s_col);
                                for (int64_t r = 0; r < rows; ++r) {
                                    double acc = 0.0;
                                    for (int64_t i = 0; i < c; ++i)
                                        acc += g[static_cast<size_t>(r * c + i)] * ad[static_cast<size_t>(r * c + i)];
                                    gs[static_cast<size_t>(r)] += acc;
                                }
                            }
                        });
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

void backward(const Tensor& loss) {
    if (loss.numel() != 1)
        throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    if (!loss.requires_grad()) return;  // not connected to any differentiable input

    // Postorder DFS over the requires_grad subgraph.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, size_t>> stack;
    stack.emplace_back(loss.node(), 0);
    visited.insert(loss.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* p = node->parents[next].node();
            ++next;
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    detail::GradSink sink;
    sink.cot[loss.node()] = {1.0};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        auto found = sink.cot.find(node);
        if (found == sink.cot.end() || found->second.empty()) continue;
        if (node->backprop) node->backprop(found->second, sink);
    }
    for (detail::Node* node : order) {
        auto found = sink.cot.find(node);
        if (found == sink.cot.end()) continue;
        if (node->grad.empty()) node->grad.assign(node->data.size(), 0.0);
        for (size_t i = 0; i < node->grad.size(); ++i) node->grad[i] += found->second[i];
    }
}

// ---------------------------------------------------------------------------
// Parameter / Adam
// ---------------------------------------------------------------------------

Parameter::Parameter(std::string n, Tensor t) : name(std::move(n)), tensor(std::move(t)) {
    moment1.assign(static_cast<size_t>(tensor.numel()), 0.0);
    moment2.assign(static_cast<size_t>(tensor.numel()), 0.0);
}

void zero_grads(std::vector<Parameter>& params) {
    for (auto& p : params) p.tensor.zero_grad();
}

void adam_step(std::vector<Parameter>& params, const AdamConfig& cfg) {
    std::string missing;
    for (const auto& p : params) {
        if (!p.tensor.has_grad()) missing += missing.empty() ? p.name : ", " + p.name;
    }
    if (!missing.empty()) throw ValueError("adam_step: missing gradients for: " + missing);

    for (auto& p : params) {
        p.step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
        const auto& g = p.tensor.grad();
        double* x = p.tensor.raw();
        for (size_t i = 0; i < g.size(); ++i) {
            p.moment1[i] = cfg.beta1 * p.moment1[i] + (1.0 - cfg.beta1) * g[i];
            p.moment2[i] = cfg.beta2 * p.moment2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = p.moment1[i] / bc1;
            const double vhat = p.moment2[i] / bc2;
            x[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace hsf
