#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hsf/grid.hpp"
#include "hsf/interp.hpp"
#include "hsf/tensor.hpp"

namespace hsf {

enum class WeightMode { kArea, kCosine };

// Switches and widths of the fused-feature-map stage. The ablation switches
// control which parts are concatenated into the per-neighbor fusion vector:
//   spectral (D1) [+ pooled HR-domain spatial (D2)] [+ HR-domain spatial at
//   the query (D2)] [+ relative offset (2)]
struct FusionConfig {
    int64_t d1 = 64;
    int64_t d2 = 64;
    int64_t channels = 64;  // output width of the fusion head
    int64_t scale = 4;
    bool use_lr_injection = true;
    bool use_hr_injection = true;
    bool use_rel_coord = true;
    WeightMode weight_mode = WeightMode::kCosine;
    CosineLogitMode cosine_logit = CosineLogitMode::kDotProduct;
    int mlp_depth = 1;  // 1: single affine, 2: affine-relu-affine

    int64_t mlp_input_width() const {
        return d1 + (use_lr_injection ? d2 : 0) + (use_hr_injection ? d2 : 0) +
               (use_rel_coord ? 2 : 0);
    }
    void validate() const;
};

// The per-neighbor fusion head ("MLP layer"): a single affine map by default,
// optionally affine-relu-affine.
struct FusionMlp {
    int depth = 1;
    Tensor w1, b1;
    Tensor w2, b2;  // depth 2 only

    Tensor apply(const Tensor& x) const;
    int64_t input_width() const { return w1.dim(1); }
    int64_t output_width() const { return depth == 2 ? w2.dim(0) : w1.dim(0); }
};

// Mean over r x r blocks of a channels-last [H,W,D] map -> [H/r,W/r,D].
Tensor downsample_spatial(const Tensor& s_pa, int64_t r);

// Per-pixel feature assembly, applied to single vectors. These are the
// scalar building blocks; fuse_map evaluates the same chain over all queries
// at once.
Tensor assemble_lr_features(const Tensor& spectral, const Tensor& lr_spatial,
                            const FusionConfig& cfg);
Tensor inject_hr_features(const Tensor& lr_features, const Tensor& hr_spatial,
                          const FusionConfig& cfg);
Tensor append_rel_coord(const Tensor& features, const std::array<double, 2>& rel,
                        const FusionConfig& cfg);

// Fused feature map over the full HR raster. For every query pixel the four
// neighboring LR feature vectors run through the assembly chain and the
// fusion head; weights come either from opposite-corner areas or from a
// softmax over similarity logits between each neighbor's pre-injection
// feature vector and the nearest neighbor's. Differentiable end to end.
//   s_pe: [h,w,D1] spectral features, s_pa: [h*r,w*r,D2] spatial features,
//   queries: all_queries() of the HR grid against the h x w raster.
// Returns [H,W,channels].
Tensor fuse_map(const Tensor& s_pe, const Tensor& s_pa,
                const std::vector<NeighborQuery>& queries, const FusionConfig& cfg,
                const FusionMlp& mlp);

}  // namespace hsf
