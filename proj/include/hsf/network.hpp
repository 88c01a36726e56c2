#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsf/cube.hpp"
#include "hsf/fusion.hpp"
#include "hsf/resample.hpp"
#include "hsf/rng.hpp"
#include "hsf/tensor.hpp"

namespace hsf {

// Which stage turns LR features into the HR feature map fed to the decoder.
// kImplicit is the query-based fusion stage; the others are fixed or learned
// upsamplers kept for comparison runs.
enum class UpsampleMode { kBilinear, kBicubic, kPixelShuffle, kImplicit };

std::string upsample_mode_name(UpsampleMode mode);
UpsampleMode upsample_mode_from(const std::string& name);
std::string weight_mode_name(WeightMode mode);
WeightMode weight_mode_from(const std::string& name);

// Architecture descriptor. Serialized as JSON into the checkpoint header so a
// checkpoint is self-describing.
struct ModelConfig {
    int64_t bands_hsi = 31;  // spectral bands of the LR input and the output
    int64_t bands_msi = 3;   // bands of the HR guide image
    int64_t d1 = 64;         // spectral encoder width
    int64_t d2 = 64;         // spatial encoder width
    int64_t channels = 64;   // fused feature width fed to the decoder
    int64_t scale = 4;
    int64_t kernel = 3;      // encoder/decoder conv kernel size
    bool decoder_relu = true;
    int mlp_depth = 1;
    bool use_lr_injection = true;
    bool use_hr_injection = true;
    bool use_rel_coord = true;
    WeightMode weight_mode = WeightMode::kCosine;
    CosineLogitMode cosine_logit = CosineLogitMode::kDotProduct;
    UpsampleMode upsample_mode = UpsampleMode::kImplicit;

    FusionConfig fusion() const;
    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

// Two conv encoders, the fusion stage, and a two-conv decoder with a bicubic
// long skip connection:
//   out = decode(fused_features(encode_spectral(X), encode_spatial(X_up, Y)))
//         + X_up
class FusionModel {
public:
    FusionModel(const ModelConfig& cfg, Rng& init_rng);
    // All-zero parameters (skip-connection identity; used by tests).
    static FusionModel zeros(const ModelConfig& cfg);

    // [h,w,S] -> [h,w,D1]
    Tensor encode_spectral(const Tensor& x) const;
    // ([H,W,S], [H,W,s]) -> [H,W,D2]
    Tensor encode_spatial(const Tensor& x_up, const Tensor& y) const;
    // [H,W,C] -> [H,W,S]
    Tensor decode(const Tensor& e) const;
    // LR features to the HR feature map, per cfg.upsample_mode.
    Tensor fused_features(const Tensor& s_pe, const Tensor& s_pa) const;
    // ([h,w,S], [h*r,w*r,s]) -> [h*r,w*r,S]
    Tensor forward(const Tensor& x, const Tensor& y) const;

    const ModelConfig& config() const { return cfg_; }
    std::vector<Parameter>& params() { return params_; }
    const std::vector<Parameter>& params() const { return params_; }
    int64_t param_count() const;
    FusionMlp fusion_head() const;
    Tensor param(const std::string& name) const;

    void save(const std::string& path) const;
    static FusionModel load(const std::string& path);

private:
    FusionModel() = default;
    void allocate(Rng* rng);  // nullptr -> zeros
    void add_param(const std::string& name, Shape shape, int64_t fan_in, Rng* rng);

    ModelConfig cfg_;
    std::vector<Parameter> params_;
};

// Channels-last bridge between cubes and tensors.
Tensor cube_to_tensor(const HsiCube& cube);
HsiCube tensor_to_cube(const Tensor& hwc, std::vector<double> wavelengths = {},
                       bool clamp_unit = false);

}  // namespace hsf
