#include <doctest.h>

#include <cmath>
#include <vector>

#include "conv_oracle.hpp"
#include "grad_check.hpp"
#include "hsf/rng.hpp"
#include "hsf/tensor.hpp"

using namespace hsf;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = false, double lo = -1.0,
                     double hi = 1.0) {
    return Tensor::uniform(std::move(shape), rng, lo, hi, requires_grad);
}

}  // namespace

// ===========================================================================
// conv2d
// ===========================================================================

TEST_CASE("conv2d identity 1x1 kernel is exact identity") {
    Rng rng(1);
    Tensor in = random_tensor({1, 1, 2, 2}, rng);
    Tensor ker = Tensor::from_vec({1, 1, 1, 1}, {1.0});
    Tensor bias = Tensor::zeros({1});
    Tensor out = conv2d(in, ker, bias, 0);
    REQUIRE(out.shape() == Shape{1, 1, 2, 2});
    for (int64_t i = 0; i < in.numel(); ++i) CHECK(out.data()[i] == in.data()[i]);
}

TEST_CASE("conv2d 3x3 averaging of a constant keeps interior at the constant") {
    Tensor in = Tensor::full({1, 1, 5, 5}, 5.0);
    Tensor ker = Tensor::full({1, 1, 3, 3}, 1.0 / 9.0);
    Tensor bias = Tensor::zeros({1});
    Tensor out = conv2d(in, ker, bias, 1);
    REQUIRE(out.shape() == Shape{1, 1, 5, 5});
    for (int64_t y = 1; y < 4; ++y)
        for (int64_t x = 1; x < 4; ++x) CHECK(out.at({0, 0, y, x}) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("conv2d matches the nested-loop oracle") {
    Rng rng(7);
    Tensor in = random_tensor({1, 2, 5, 5}, rng);
    Tensor ker = random_tensor({3, 2, 3, 3}, rng);
    Tensor bias = random_tensor({3}, rng);
    for (int64_t pad : {0, 1, 2}) {
        Tensor out = conv2d(in, ker, bias, pad);
        auto expect = conv_oracle(in.data(), 1, 2, 5, 5, ker.data(), 3, 3, bias.data(), pad);
        REQUIRE(out.numel() == static_cast<int64_t>(expect.size()));
        for (size_t i = 0; i < expect.size(); ++i)
            CHECK(out.data()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d rejects mismatched shapes with the axis named") {
    Tensor in = Tensor::zeros({1, 2, 4, 4});
    Tensor ker = Tensor::zeros({3, 3, 3, 3});
    Tensor bias = Tensor::zeros({3});
    CHECK_THROWS_WITH_AS(conv2d(in, ker, bias, 1), doctest::Contains("C_in"), ShapeError);
    Tensor ker2 = Tensor::zeros({3, 2, 3, 3});
    Tensor bias2 = Tensor::zeros({4});
    CHECK_THROWS_WITH_AS(conv2d(in, ker2, bias2, 1), doctest::Contains("bias"), ShapeError);
}

// ===========================================================================
// linear
// ===========================================================================

TEST_CASE("linear with identity weight and zero bias is identity") {
    Tensor in = Tensor::from_vec({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor w = Tensor::from_vec({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor b = Tensor::zeros({3});
    Tensor out = linear(in, w, b);
    for (int64_t i = 0; i < in.numel(); ++i) CHECK(out.data()[i] == in.data()[i]);
}

TEST_CASE("linear with zero weight returns the bias") {
    Tensor in = Tensor::from_vec({1, 2}, {1, 2});
    Tensor w = Tensor::zeros({2, 2});
    Tensor b = Tensor::from_vec({2}, {3, 4});
    Tensor out = linear(in, w, b);
    CHECK(out.at({0, 0}) == 3.0);
    CHECK(out.at({0, 1}) == 4.0);
}

TEST_CASE("linear matches the dot-product oracle") {
    Rng rng(11);
    Tensor in = random_tensor({4, 5}, rng);
    Tensor w = random_tensor({3, 5}, rng);
    Tensor b = random_tensor({3}, rng);
    Tensor out = linear(in, w, b);
    for (int64_t r = 0; r < 4; ++r)
        for (int64_t o = 0; o < 3; ++o) {
            double acc = b.data()[static_cast<size_t>(o)];
            for (int64_t i = 0; i < 5; ++i)
                acc += in.at({r, i}) * w.at({o, i});
            CHECK(out.at({r, o}) == doctest::Approx(acc).epsilon(1e-12));
        }
    Tensor bad = Tensor::zeros({4, 4});
    CHECK_THROWS_AS(linear(bad, w, b), ShapeError);
}

// ===========================================================================
// relu / softmax / l1
// ===========================================================================

TEST_CASE("relu clamps negatives and zero") {
    Tensor in = Tensor::from_vec({3}, {-1, 0, 2});
    Tensor out = relu(in);
    CHECK(out.data() == std::vector<double>{0, 0, 2});

    Tensor all_neg = Tensor::full({4}, -3.0);
    Tensor clamped = relu(all_neg);
    for (double v : clamped.data()) CHECK(v == 0.0);
}

TEST_CASE("relu subgradient at 0 is 0") {
    Tensor x = Tensor::from_vec({2}, {-1, 2}, /*requires_grad=*/true);
    backward(sum(relu(x)));
    CHECK(x.grad() == std::vector<double>{0, 1});

    Tensor z = Tensor::from_vec({1}, {0.0}, true);
    backward(sum(relu(z)));
    CHECK(z.grad()[0] == 0.0);
}

TEST_CASE("softmax of a uniform row is uniform") {
    Tensor in = Tensor::zeros({1, 4});
    Tensor out = softmax_lastdim(in);
    for (double v : out.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("softmax saturates without overflow under a +1000 spike") {
    for (double base : {-500.0, 0.0, 700.0}) {
        Tensor in = Tensor::from_vec({1, 4}, {base, base + 1000.0, base, base});
        Tensor out = softmax_lastdim(in);
        for (double v : out.data()) CHECK(std::isfinite(v));
        CHECK(out.at({0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("softmax [1,0,-1,1] matches the direct exp/sum oracle") {
    Tensor in = Tensor::from_vec({1, 4}, {1, 0, -1, 1});
    Tensor out = softmax_lastdim(in);
    const double e1 = std::exp(1.0), e0 = 1.0, em1 = std::exp(-1.0);
    const double total = e1 + e0 + em1 + e1;
    const double expect[4] = {e1 / total, e0 / total, em1 / total, e1 / total};
    for (int i = 0; i < 4; ++i) CHECK(out.data()[static_cast<size_t>(i)] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one and shift invariance holds") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor in = random_tensor({5, 7}, rng, false, -30.0, 30.0);
        Tensor out = softmax_lastdim(in);
        for (int64_t r = 0; r < 5; ++r) {
            double s = 0.0;
            for (int64_t i = 0; i < 7; ++i) s += out.at({r, i});
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        const double c = rng.uniform(-5.0, 5.0);
        std::vector<double> shifted = in.data();
        for (auto& v : shifted) v += c;
        Tensor out2 = softmax_lastdim(Tensor::from_vec(in.shape(), shifted));
        for (int64_t i = 0; i < out.numel(); ++i)
            CHECK(out2.data()[i] == doctest::Approx(out.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("l1_loss closed forms and oracle") {
    Rng rng(5);
    Tensor a = random_tensor({3, 3}, rng);
    CHECK(l1_loss(a, a).value() == 0.0);

    std::vector<double> shifted = a.data();
    for (auto& v : shifted) v += 0.5;
    Tensor b = Tensor::from_vec(a.shape(), shifted);
    CHECK(l1_loss(b, a).value() == doctest::Approx(0.5).epsilon(1e-12));

    Tensor c = random_tensor({3, 3}, rng);
    double manual = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) manual += std::abs(a.data()[i] - c.data()[i]);
    CHECK(l1_loss(a, c, Reduction::kSum).value() == doctest::Approx(manual).epsilon(1e-12));
    CHECK(l1_loss(a, c).value() == doctest::Approx(manual / 9.0).epsilon(1e-12));

    Tensor d = Tensor::zeros({2, 2});
    CHECK_THROWS_AS(l1_loss(a, d), ShapeError);
}

// ===========================================================================
// concat / slice / mean_pool
// ===========================================================================

TEST_CASE("concat_channels single part is identity") {
    Tensor a = Tensor::from_vec({2, 2}, {1, 2, 3, 4});
    Tensor out = concat_channels({a});
    CHECK(out.data() == a.data());
}

TEST_CASE("concat_channels widths add and order is preserved") {
    Tensor a = Tensor::from_vec({2, 2}, {1, 2, 3, 4});
    Tensor b = Tensor::from_vec({2, 3}, {5, 6, 7, 8, 9, 10});
    Tensor out = concat_channels({a, b});
    REQUIRE(out.shape() == Shape{2, 5});
    CHECK(out.data() == std::vector<double>{1, 2, 5, 6, 7, 3, 4, 8, 9, 10});

    Tensor bad = Tensor::zeros({3, 2});
    CHECK_THROWS_AS(concat_channels({a, bad}), ShapeError);
}

TEST_CASE("concat gradient splits to all-ones per part") {
    Tensor a = Tensor::full({2, 2}, 1.0, true);
    Tensor b = Tensor::full({2, 3}, 2.0, true);
    backward(sum(concat_channels({a, b})));
    for (double v : a.grad()) CHECK(v == 1.0);
    for (double v : b.grad()) CHECK(v == 1.0);
}

TEST_CASE("concat then slice recovers the parts exactly") {
    Rng rng(9);
    Tensor a = random_tensor({3, 2}, rng);
    Tensor b = random_tensor({3, 4}, rng);
    Tensor cat = concat_channels({a, b});
    Tensor sa = slice_lastdim(cat, 0, 2);
    Tensor sb = slice_lastdim(cat, 2, 4);
    CHECK(sa.data() == a.data());
    CHECK(sb.data() == b.data());
}

TEST_CASE("mean_pool 2x2 block and constant behavior") {
    Tensor in = Tensor::from_vec({2, 2}, {1, 2, 3, 4});
    Tensor out = mean_pool(in, 2);
    REQUIRE(out.shape() == Shape{1, 1});
    CHECK(out.value() == 2.5);

    Tensor c = Tensor::full({3, 4, 4}, 3.25);
    Tensor pooled = mean_pool(c, 2);
    for (double v : pooled.data()) CHECK(v == 3.25);

    CHECK_THROWS_AS(mean_pool(Tensor::zeros({5, 5}), 2), ShapeError);
}

TEST_CASE("mean_pool matches the block-sum oracle on random 8x8") {
    Rng rng(13);
    Tensor in = random_tensor({8, 8}, rng);
    Tensor out = mean_pool(in, 4);
    REQUIRE(out.shape() == Shape{2, 2});
    for (int64_t y = 0; y < 2; ++y)
        for (int64_t x = 0; x < 2; ++x) {
            double acc = 0.0;
            for (int64_t a = 0; a < 4; ++a)
                for (int64_t b = 0; b < 4; ++b) acc += in.at({y * 4 + a, x * 4 + b});
            CHECK(out.at({y, x}) == doctest::Approx(acc / 16.0).epsilon(1e-12));
        }
}

// ===========================================================================
// backward semantics
// ===========================================================================

TEST_CASE("backward of sum gives all-ones") {
    Tensor x = Tensor::from_vec({3}, {5, -2, 7}, true);
    backward(sum(x));
    CHECK(x.grad() == std::vector<double>{1, 1, 1});
}

TEST_CASE("backward of sum of squares gives 2x") {
    Tensor x = Tensor::from_vec({2}, {1, 2}, true);
    backward(sum(mul(x, x)));
    CHECK(x.grad() == std::vector<double>{2, 4});
}

TEST_CASE("backward requires a scalar and accumulates across calls") {
    Tensor x = Tensor::from_vec({2}, {1, 2}, true);
    CHECK_THROWS_AS(backward(x), ShapeError);

    backward(sum(x));
    backward(sum(x));
    CHECK(x.grad() == std::vector<double>{2, 2});
    x.zero_grad();
    backward(sum(x));
    CHECK(x.grad() == std::vector<double>{1, 1});
}

TEST_CASE("diamond graph accumulates both paths") {
    Tensor x = Tensor::from_vec({2}, {3, 4}, true);
    Tensor y = add(mul(x, x), scale(x, 2.0));  // x^2 + 2x -> d/dx = 2x + 2
    backward(sum(y));
    CHECK(x.grad() == std::vector<double>{8, 10});
}

TEST_CASE("finite differences agree on a composed graph of every op") {
    Rng rng(21);
    Tensor in = Tensor::uniform({1, 2, 4, 4}, rng, 0.2, 1.0, true);
    Tensor ker = Tensor::uniform({2, 2, 3, 3}, rng, -0.5, 0.5, true);
    Tensor bias = Tensor::uniform({2}, rng, 0.1, 0.5, true);
    Tensor w = Tensor::uniform({3, 2}, rng, -0.5, 0.5, true);
    Tensor b = Tensor::uniform({3}, rng, -0.5, 0.5, true);
    Tensor target = Tensor::uniform({2, 2, 3}, rng, -2.0, 2.0);

    auto build = [&]() {
        Tensor h = conv2d(in, ker, bias, 1);           // [1,2,4,4]
        h = relu(h);
        h = mean_pool(h, 2);                            // [1,2,2,2]
        h = permute(reshape(h, {2, 2, 2}), {1, 2, 0});  // [2,2,2]
        h = linear(h, w, b);                            // [2,2,3]
        Tensor sm = softmax_lastdim(h);
        Tensor mixed = concat_channels({h, sm});        // [2,2,6]
        Tensor part = slice_lastdim(mixed, 1, 4);
        return add(l1_loss(slice_lastdim(mixed, 0, 3), target), mean(mul(part, part)));
    };
    CHECK(max_grad_error(build, {in, ker, bias, w, b}) < 1e-4);
}

TEST_CASE("finite differences agree for row ops") {
    Rng rng(22);
    Tensor base = Tensor::uniform({4, 3}, rng, -1.0, 1.0, true);
    Tensor other = Tensor::uniform({3, 3}, rng, -1.0, 1.0, true);
    Tensor col = Tensor::uniform({3, 1}, rng, 0.2, 1.0, true);
    std::vector<int64_t> idx = {0, 2, 2};

    auto build = [&]() {
        Tensor sel = index_select_rows(base, idx);      // [3,3], row 2 twice
        Tensor dots = rowwise_dot(sel, other);          // [3,1]
        Tensor scaled = scale_rows(other, col);         // [3,3]
        Tensor q = div_elem(dots, clamp_min(rowwise_dot(scaled, scaled), 0.5));
        return add(sum(mul(q, q)), sum(sqrt_elem(clamp_min(rowwise_dot(sel, sel), 0.1))));
    };
    CHECK(max_grad_error(build, {base, other, col}) < 1e-4);
}

// ===========================================================================
// adam
// ===========================================================================

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
    Tensor x = Tensor::from_vec({3}, {1, 2, 3}, true);
    std::vector<Parameter> params;
    params.emplace_back("x", x);
    backward(scale(sum(x), 0.0));  // gradient exists and is zero
    adam_step(params, {});
    CHECK(params[0].tensor.data() == std::vector<double>{1, 2, 3});
}

TEST_CASE("adam first step is approximately -lr*sign(g)") {
    Tensor x = Tensor::from_vec({1}, {0.7}, true);
    std::vector<Parameter> params;
    params.emplace_back("x", x);
    backward(scale(sum(x), 3.0));  // constant gradient 3
    AdamConfig cfg;
    cfg.lr = 0.01;
    adam_step(params, cfg);
    // first-step closed form: -lr * g/(|g| + eps*sqrt(1-beta2))-ish; to eps
    CHECK(params[0].tensor.data()[0] == doctest::Approx(0.7 - 0.01).epsilon(1e-6));
}

TEST_CASE("adam on f(x)=x^2 matches a hand-stepped oracle and decreases |x|") {
    Tensor x = Tensor::from_vec({1}, {1.0}, true);
    std::vector<Parameter> params;
    params.emplace_back("x", x);
    AdamConfig cfg;
    cfg.lr = 0.1;

    // independent hand-stepped oracle
    double ox = 1.0, om = 0.0, ov = 0.0;
    double prev_abs = 1.0;
    for (int step = 1; step <= 10; ++step) {
        zero_grads(params);
        backward(sum(mul(params[0].tensor, params[0].tensor)));
        adam_step(params, cfg);

        const double g = 2.0 * ox;
        om = 0.9 * om + 0.1 * g;
        ov = 0.999 * ov + 0.001 * g * g;
        const double mhat = om / (1.0 - std::pow(0.9, step));
        const double vhat = ov / (1.0 - std::pow(0.999, step));
        ox -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);

        const double cur = params[0].tensor.data()[0];
        CHECK(cur == doctest::Approx(ox).epsilon(1e-12));
        CHECK(std::abs(cur) < prev_abs);
        prev_abs = std::abs(cur);
    }
}

TEST_CASE("adam reports missing gradients by name") {
    std::vector<Parameter> params;
    params.emplace_back("alpha", Tensor::zeros({2}, true));
    params.emplace_back("beta", Tensor::zeros({2}, true));
    CHECK_THROWS_WITH_AS(adam_step(params, {}), doctest::Contains("alpha"), ValueError);
}

// ===========================================================================
// misc ops
// ===========================================================================

TEST_CASE("permute round trip and reshape") {
    Rng rng(31);
    Tensor t = random_tensor({2, 3, 4}, rng);
    Tensor p = permute(t, {2, 0, 1});
    REQUIRE(p.shape() == Shape{4, 2, 3});
    CHECK(p.at({1, 0, 2}) == t.at({0, 2, 1}));
    Tensor back = permute(p, {1, 2, 0});
    CHECK(back.data() == t.data());

    Tensor r = reshape(t, {6, 4});
    CHECK(r.data() == t.data());
    CHECK_THROWS_AS(reshape(t, {5, 5}), ShapeError);
}

TEST_CASE("uniform init is deterministic per seed") {
    Rng a(42), b(42), c(43);
    Tensor ta = Tensor::uniform({16}, a, -1, 1);
    Tensor tb = Tensor::uniform({16}, b, -1, 1);
    Tensor tc = Tensor::uniform({16}, c, -1, 1);
    CHECK(ta.data() == tb.data());
    CHECK(ta.data() != tc.data());
}
