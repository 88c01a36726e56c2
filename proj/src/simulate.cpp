#include "hsf/simulate.hpp"

#include <cmath>
#include <string>

#include "hsf/error.hpp"
#include "hsf/rng.hpp"

namespace hsf {

namespace {

int64_t reflect_index(int64_t i, int64_t n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

}  // namespace

HsiCube gaussian_blur(const HsiCube& cube, int64_t kernel_size, double sigma) {
    cube.validate();
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw ValueError("gaussian_blur: kernel size must be odd, got " + std::to_string(kernel_size));
    if (sigma <= 0.0) throw ValueError("gaussian_blur: sigma must be positive");

    const int64_t half = kernel_size / 2;
    std::vector<double> kernel(static_cast<size_t>(kernel_size * kernel_size));
    double total = 0.0;
    for (int64_t dy = -half; dy <= half; ++dy)
        for (int64_t dx = -half; dx <= half; ++dx) {
            const double v = std::exp(-(static_cast<double>(dy * dy + dx * dx)) / (2.0 * sigma * sigma));
            kernel[static_cast<size_t>((dy + half) * kernel_size + dx + half)] = v;
            total += v;
        }
    for (auto& v : kernel) v /= total;

    HsiCube out(cube.height, cube.width, cube.bands);
    out.wavelengths = cube.wavelengths;
    for (int64_t i = 0; i < cube.height; ++i)
        for (int64_t j = 0; j < cube.width; ++j)
            for (int64_t b = 0; b < cube.bands; ++b) {
                double acc = 0.0;
                for (int64_t dy = -half; dy <= half; ++dy) {
                    const int64_t yy = reflect_index(i + dy, cube.height);
                    for (int64_t dx = -half; dx <= half; ++dx) {
                        const int64_t xx = reflect_index(j + dx, cube.width);
                        acc += kernel[static_cast<size_t>((dy + half) * kernel_size + dx + half)] *
                               cube.at(yy, xx, b);
                    }
                }
                out.at(i, j, b) = acc;
            }
    return out;
}

HsiCube downsample(const HsiCube& cube, int64_t r, DownsampleMethod method) {
    cube.validate();
    if (r < 1) throw ValueError("downsample: scale must be >= 1");
    if (cube.height % r != 0 || cube.width % r != 0)
        throw ShapeError("downsample: scale " + std::to_string(r) + " does not divide " +
                         std::to_string(cube.height) + "x" + std::to_string(cube.width));
    HsiCube out(cube.height / r, cube.width / r, cube.bands);
    out.wavelengths = cube.wavelengths;
    const double inv = 1.0 / static_cast<double>(r * r);
    for (int64_t i = 0; i < out.height; ++i)
        for (int64_t j = 0; j < out.width; ++j)
            for (int64_t b = 0; b < cube.bands; ++b) {
                if (method == DownsampleMethod::kDecimate) {
                    out.at(i, j, b) = cube.at(i * r, j * r, b);
                } else {
                    double acc = 0.0;
                    for (int64_t dy = 0; dy < r; ++dy)
                        for (int64_t dx = 0; dx < r; ++dx) acc += cube.at(i * r + dy, j * r + dx, b);
                    out.at(i, j, b) = acc * inv;
                }
            }
    return out;
}

HsiCube apply_srf(const HsiCube& cube, const SpectralResponse& srf) {
    cube.validate();
    if (srf.bands_in != cube.bands)
        throw ShapeError("apply_srf: response has " + std::to_string(srf.bands_in) +
                         " input bands, cube has " + std::to_string(cube.bands));
    HsiCube out(cube.height, cube.width, srf.bands_out);
    for (int64_t i = 0; i < cube.height; ++i)
        for (int64_t j = 0; j < cube.width; ++j)
            for (int64_t o = 0; o < srf.bands_out; ++o) {
                double acc = 0.0;
                for (int64_t b = 0; b < cube.bands; ++b) acc += cube.at(i, j, b) * srf.at(b, o);
                out.at(i, j, o) = acc;
            }
    return out;
}

std::vector<HsiCube> extract_patches(const HsiCube& cube, int64_t size, int64_t stride) {
    cube.validate();
    if (size < 1 || stride < 1) throw ValueError("extract_patches: size and stride must be positive");
    if (size > cube.height || size > cube.width)
        throw ShapeError("extract_patches: patch size " + std::to_string(size) + " exceeds cube " +
                         std::to_string(cube.height) + "x" + std::to_string(cube.width));
    std::vector<HsiCube> patches;
    for (int64_t i = 0; i + size <= cube.height; i += stride)
        for (int64_t j = 0; j + size <= cube.width; j += stride) {
            HsiCube p(size, size, cube.bands);
            p.wavelengths = cube.wavelengths;
            for (int64_t y = 0; y < size; ++y)
                for (int64_t x = 0; x < size; ++x)
                    for (int64_t b = 0; b < cube.bands; ++b) p.at(y, x, b) = cube.at(i + y, j + x, b);
            patches.push_back(std::move(p));
        }
    return patches;
}

SimulatedPair simulate_pair(const HsiCube& gt, const SpectralResponse& srf, int64_t r,
                            DownsampleMethod method) {
    SimulatedPair pair;
    pair.lr = downsample(gaussian_blur(gt), r, method);
    pair.msi = apply_srf(gt, srf);
    return pair;
}

HsiCube make_synthetic_cube(int64_t height, int64_t width, int64_t bands, uint64_t seed) {
    HsiCube cube(height, width, bands);
    cube.wavelengths = default_wavelengths(bands);
    Rng rng(seed);

    constexpr int kModes = 6;
    struct Mode {
        double amp, fy, fx, phase, spectral_freq, spectral_phase;
    };
    std::vector<Mode> modes(kModes);
    for (auto& m : modes) {
        m.amp = rng.uniform(0.3, 1.0);
        m.fy = rng.uniform(0.5, 2.5);
        m.fx = rng.uniform(0.5, 2.5);
        m.phase = rng.uniform(0.0, 2.0 * M_PI);
        m.spectral_freq = rng.uniform(0.5, 2.0);
        m.spectral_phase = rng.uniform(0.0, 2.0 * M_PI);
    }

    double lo = 1e300, hi = -1e300;
    for (int64_t i = 0; i < height; ++i)
        for (int64_t j = 0; j < width; ++j)
            for (int64_t b = 0; b < bands; ++b) {
                const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(height);
                const double v = (static_cast<double>(j) + 0.5) / static_cast<double>(width);
                const double t = bands == 1 ? 0.0 : static_cast<double>(b) / static_cast<double>(bands - 1);
                double val = 0.0;
                for (const auto& m : modes)
                    val += m.amp * std::cos(2.0 * M_PI * (m.fy * u + m.fx * v) + m.phase) *
                           std::cos(M_PI * t * m.spectral_freq + m.spectral_phase);
                cube.at(i, j, b) = val;
                lo = std::min(lo, val);
                hi = std::max(hi, val);
            }
    if (hi - lo < 1e-12) {
        for (auto& v : cube.data) v = 0.5;
        return cube;
    }
    for (auto& v : cube.data) v = 0.05 + 0.9 * (v - lo) / (hi - lo);
    return cube;
}

}  // namespace hsf
