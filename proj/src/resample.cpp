#include "hsf/resample.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hsf/error.hpp"

namespace hsf {

double keys_cubic(double x) {
    x = std::abs(x);
    if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

namespace {

int64_t reflect_index(int64_t i, int64_t n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

struct Tap {
    int n = 0;
    int64_t idx[4];
    double w[4];
};

std::vector<Tap> make_axis_taps(int64_t in_extent, int64_t r, ResampleKernel kernel) {
    std::vector<Tap> taps(static_cast<size_t>(in_extent * r));
    for (int64_t j = 0; j < in_extent * r; ++j) {
        const double src = (static_cast<double>(j) + 0.5) / static_cast<double>(r) - 0.5;
        const int64_t m = static_cast<int64_t>(std::floor(src));
        const double t = src - static_cast<double>(m);
        Tap& tap = taps[static_cast<size_t>(j)];
        if (kernel == ResampleKernel::kBilinear) {
            tap.n = 2;
            tap.idx[0] = reflect_index(m, in_extent);
            tap.idx[1] = reflect_index(m + 1, in_extent);
            tap.w[0] = 1.0 - t;
            tap.w[1] = t;
        } else {
            tap.n = 4;
            const double w[4] = {keys_cubic(t + 1.0), keys_cubic(t), keys_cubic(1.0 - t),
                                 keys_cubic(2.0 - t)};
            for (int k = 0; k < 4; ++k) {
                tap.idx[k] = reflect_index(m - 1 + k, in_extent);
                tap.w[k] = w[k];
            }
        }
    }
    return taps;
}

// Channels-last separable upsampling, rows then columns. in is [h,w,c],
// out is [h*r, w*r, c].
void upsample_hwc_raw(const double* in, int64_t h, int64_t w, int64_t c, int64_t r,
                      ResampleKernel kernel, double* out) {
    const int64_t oh = h * r, ow = w * r;
    const auto row_taps = make_axis_taps(h, r, kernel);
    const auto col_taps = make_axis_taps(w, r, kernel);

    std::vector<double> tmp(static_cast<size_t>(oh * w * c), 0.0);
    for (int64_t y = 0; y < oh; ++y) {
        const Tap& ty = row_taps[static_cast<size_t>(y)];
        for (int64_t x = 0; x < w; ++x)
            for (int64_t b = 0; b < c; ++b) {
                double acc = 0.0;
                for (int k = 0; k < ty.n; ++k)
                    acc += ty.w[k] * in[(ty.idx[k] * w + x) * c + b];
                tmp[static_cast<size_t>((y * w + x) * c + b)] = acc;
            }
    }
    for (int64_t y = 0; y < oh; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            const Tap& tx = col_taps[static_cast<size_t>(x)];
            for (int64_t b = 0; b < c; ++b) {
                double acc = 0.0;
                for (int k = 0; k < tx.n; ++k)
                    acc += tx.w[k] * tmp[static_cast<size_t>((y * w + tx.idx[k]) * c + b)];
                out[(y * ow + x) * c + b] = acc;
            }
        }
}

void check_scale(int64_t r) {
    if (r < 1) throw ShapeError("upsample: scale must be >= 1, got " + std::to_string(r));
}

}  // namespace

HsiCube upsample(const HsiCube& cube, int64_t r, ResampleKernel kernel) {
    check_scale(r);
    cube.validate();
    HsiCube out(cube.height * r, cube.width * r, cube.bands);
    out.wavelengths = cube.wavelengths;
    upsample_hwc_raw(cube.data.data(), cube.height, cube.width, cube.bands, r, kernel,
                     out.data.data());
    return out;
}

Tensor upsample(const Tensor& hwc, int64_t r, ResampleKernel kernel) {
    check_scale(r);
    if (hwc.rank() != 3)
        throw ShapeError("upsample: expected [h,w,C], got " + shape_str(hwc.shape()));
    const int64_t h = hwc.dim(0), w = hwc.dim(1), c = hwc.dim(2);
    std::vector<double> out(static_cast<size_t>(h * r * w * r * c), 0.0);
    upsample_hwc_raw(hwc.data().data(), h, w, c, r, kernel, out.data());
    auto backprop = [hwc, h, w, c, r, kernel](const std::vector<double>& g, detail::GradSink& s) {
        if (!detail::GradSink::needs(hwc)) return;
        auto& gin = s.of(hwc);
        const auto row_taps = make_axis_taps(h, r, kernel);
        const auto col_taps = make_axis_taps(w, r, kernel);
        const int64_t ow = w * r;
        for (int64_t y = 0; y < h * r; ++y) {
            const Tap& ty = row_taps[static_cast<size_t>(y)];
            for (int64_t x = 0; x < ow; ++x) {
                const Tap& tx = col_taps[static_cast<size_t>(x)];
                for (int64_t b = 0; b < c; ++b) {
                    const double go = g[static_cast<size_t>((y * ow + x) * c + b)];
                    if (go == 0.0) continue;
                    for (int ky = 0; ky < ty.n; ++ky)
                        for (int kx = 0; kx < tx.n; ++kx)
                            gin[static_cast<size_t>((ty.idx[ky] * w + tx.idx[kx]) * c + b)] +=
                                go * ty.w[ky] * tx.w[kx];
                }
            }
        }
    };
    return Tensor::make({h * r, w * r, c}, std::move(out), {hwc}, std::move(backprop));
}

Tensor pixel_shuffle(const Tensor& hwc, int64_t r) {
    check_scale(r);
    if (hwc.rank() != 3)
        throw ShapeError("pixel_shuffle: expected [h,w,K], got " + shape_str(hwc.shape()));
    const int64_t h = hwc.dim(0), w = hwc.dim(1), kch = hwc.dim(2);
    if (kch % (r * r) != 0)
        throw ShapeError("pixel_shuffle: channel axis " + std::to_string(kch) +
                         " not divisible by r^2 = " + std::to_string(r * r));
    const int64_t c = kch / (r * r);
    const int64_t oh = h * r, ow = w * r;
    const auto& in = hwc.data();
    std::vector<double> out(in.size());
    for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j)
            for (int64_t dy = 0; dy < r; ++dy)
                for (int64_t dx = 0; dx < r; ++dx)
                    for (int64_t b = 0; b < c; ++b)
                        out[static_cast<size_t>((((i * r + dy) * ow) + (j * r + dx)) * c + b)] =
                            in[static_cast<size_t>((i * w + j) * kch + (dy * r + dx) * c + b)];
    return Tensor::make({oh, ow, c}, std::move(out), {hwc},
                        [hwc, h, w, kch, c, r, ow](const std::vector<double>& g, detail::GradSink& s) {
                            if (!detail::GradSink::needs(hwc)) return;
                            auto& gin = s.of(hwc);
                            for (int64_t i = 0; i < h; ++i)
                                for (int64_t j = 0; j < w; ++j)
                                    for (int64_t dy = 0; dy < r; ++dy)
                                        for (int64_t dx = 0; dx < r; ++dx)
                                            for (int64_t b = 0; b < c; ++b)
                                                gin[static_cast<size_t>((i * w + j) * kch + (dy * r + dx) * c + b)] +=
                                                    g[static_cast<size_t>((((i * r + dy) * ow) + (j * r + dx)) * c + b)];
                        });
}

}  // namespace hsf
