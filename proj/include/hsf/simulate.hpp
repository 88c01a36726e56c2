#pragma once

#include <cstdint>
#include <vector>

#include "hsf/cube.hpp"

namespace hsf {

// Ground-truth degradation chain: blur, then spatial decimation for the LR
// hyperspectral input, and a spectral projection for the HR guide.

// Per-band convolution with a normalized sampled Gaussian; borders reflect
// half-sample symmetrically (same convention as the resampling kernels).
HsiCube gaussian_blur(const HsiCube& cube, int64_t kernel_size = 3, double sigma = 0.5);

// kDecimate keeps the top-left pixel of each r x r block (default reading of
// "downsample after blur"); kBlockMean averages the block.
enum class DownsampleMethod { kDecimate, kBlockMean };
HsiCube downsample(const HsiCube& cube, int64_t r, DownsampleMethod method = DownsampleMethod::kDecimate);

// Per-pixel spectral projection; output band count = response columns.
HsiCube apply_srf(const HsiCube& cube, const SpectralResponse& srf);

// Row-major sliding windows; count floor((H-size)/stride+1) * same for W.
std::vector<HsiCube> extract_patches(const HsiCube& cube, int64_t size, int64_t stride);

struct SimulatedPair {
    HsiCube lr;   // downsample(gaussian_blur(gt), r)
    HsiCube msi;  // apply_srf(gt)
};
SimulatedPair simulate_pair(const HsiCube& gt, const SpectralResponse& srf, int64_t r,
                            DownsampleMethod method = DownsampleMethod::kDecimate);

// Smooth random test cube: a sum of low-frequency spatial cosines with smooth
// spectral envelopes, min-max scaled into [0.05, 0.95]. Deterministic per
// seed; wavelengths follow default_wavelengths().
HsiCube make_synthetic_cube(int64_t height, int64_t width, int64_t bands, uint64_t seed);

}  // namespace hsf
