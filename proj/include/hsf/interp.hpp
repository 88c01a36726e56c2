#pragma once

#include <array>
#include <cstdint>

#include "hsf/grid.hpp"
#include "hsf/tensor.hpp"

namespace hsf {

// Four interpolation weights aligned with NeighborQuery corner order.
// Non-negative, summing to 1.
struct WeightSet {
    std::array<double, 4> w{};
    // Set when the total opposite-corner area degenerated and the weights
    // fell back to uniform 0.25.
    bool degenerate = false;
};

// Area weights: each corner gets the rectangle area diagonally opposite it,
// normalized by the total. Clamped duplicate corners keep their computed
// shares. Interpolating raw pixel values with these weights reproduces
// half-pixel-center bilinear upsampling.
WeightSet area_weights(const NeighborQuery& query, int64_t lr_height, int64_t lr_width);

// How the similarity logit between two latent vectors is formed.
//   kDotProduct:        |a||b|cos<a,b> == dot(a,b)  (algebraic identity)
//   kNormalizedCosine:  cos<a,b> alone, 0 when either norm is 0
enum class CosineLogitMode { kDotProduct, kNormalizedCosine };

// Softmax over similarity logits between the nearest-center latent vector and
// each corner's latent vector.
WeightSet cosine_weights(const Tensor& nearest, const std::array<Tensor, 4>& neighbors,
                         CosineLogitMode mode = CosineLogitMode::kDotProduct);

// Weighted sum of four value vectors; differentiable through the values.
Tensor interpolate(const WeightSet& weights, const std::array<Tensor, 4>& values);

// Affine map slice used as the interpolation head.
struct AffineHead {
    Tensor weight;  // [D_out, D_in]
    Tensor bias;    // [D_out]
};

// Baseline interpoland: head applied to concat(latent, rel). Kept for the
// upsampling comparisons.
Tensor mlp_value(const Tensor& latent, const std::array<double, 2>& rel, const AffineHead& head);

}  // namespace hsf
