#pragma once

#include <cstdint>

#include "hsf/cube.hpp"
#include "hsf/tensor.hpp"

namespace hsf {

// Fixed (non-learned) interpolation kernels. Bicubic is the Keys convolution
// kernel with a = -0.5. Sampling is half-pixel-center aligned: output pixel j
// reads source coordinate (j + 0.5)/r - 0.5, matching the normalized-grid
// convention. Out-of-range taps reflect half-sample symmetrically
// (-1 -> 0, -2 -> 1, n -> n-1, ...). Upsampling is separable and evaluated
// rows first, then columns; the cube and tensor paths share one routine and
// are bit-identical.
enum class ResampleKernel { kBilinear, kBicubic };

double keys_cubic(double x);  // the a = -0.5 kernel, exposed for tests

HsiCube upsample(const HsiCube& cube, int64_t r, ResampleKernel kernel);

// Differentiable fixed upsampling of a channels-last [h,w,C] tensor.
Tensor upsample(const Tensor& hwc, int64_t r, ResampleKernel kernel);

// Sub-pixel rearrangement of a channels-last [h,w,K] tensor, K = r*r*C:
// input channel (dy*r + dx)*C + c lands at output (i*r + dy, j*r + dx, c).
Tensor pixel_shuffle(const Tensor& hwc, int64_t r);

}  // namespace hsf
