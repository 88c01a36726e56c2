#include "hsf/network.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "hsf/checkpoint.hpp"
#include "hsf/error.hpp"
#include "hsf/grid.hpp"

namespace hsf {

using nlohmann::json;

std::string upsample_mode_name(UpsampleMode mode) {
    switch (mode) {
        case UpsampleMode::kBilinear: return "bilinear";
        case UpsampleMode::kBicubic: return "bicubic";
        case UpsampleMode::kPixelShuffle: return "pixel_shuffle";
        case UpsampleMode::kImplicit: return "implicit";
    }
    throw ValueError("unknown upsample mode");
}

UpsampleMode upsample_mode_from(const std::string& name) {
    if (name == "bilinear") return UpsampleMode::kBilinear;
    if (name == "bicubic") return UpsampleMode::kBicubic;
    if (name == "pixel_shuffle") return UpsampleMode::kPixelShuffle;
    if (name == "implicit") return UpsampleMode::kImplicit;
    throw ValueError("unknown upsample mode: " + name);
}

std::string weight_mode_name(WeightMode mode) {
    return mode == WeightMode::kArea ? "area" : "cosine";
}

WeightMode weight_mode_from(const std::string& name) {
    if (name == "area") return WeightMode::kArea;
    if (name == "cosine") return WeightMode::kCosine;
    throw ValueError("unknown weight mode: " + name);
}

FusionConfig ModelConfig::fusion() const {
    FusionConfig f;
    f.d1 = d1;
    f.d2 = d2;
    f.channels = channels;
    f.scale = scale;
    f.use_lr_injection = use_lr_injection;
    f.use_hr_injection = use_hr_injection;
    f.use_rel_coord = use_rel_coord;
    f.weight_mode = weight_mode;
    f.cosine_logit = cosine_logit;
    f.mlp_depth = mlp_depth;
    return f;
}

void ModelConfig::validate() const {
    if (bands_hsi < 1 || bands_msi < 1)
        throw ValueError("model config: band counts must be positive");
    if (kernel < 1 || kernel % 2 == 0)
        throw ValueError("model config: conv kernel size must be odd, got " + std::to_string(kernel));
    fusion().validate();
}

std::string ModelConfig::to_json() const {
    json j;
    j["bands_hsi"] = bands_hsi;
    j["bands_msi"] = bands_msi;
    j["d1"] = d1;
    j["d2"] = d2;
    j["channels"] = channels;
    j["scale"] = scale;
    j["kernel"] = kernel;
    j["decoder_relu"] = decoder_relu;
    j["mlp_depth"] = mlp_depth;
    j["lr_injection"] = use_lr_injection;
    j["hr_injection"] = use_hr_injection;
    j["rel_coord"] = use_rel_coord;
    j["weight_mode"] = weight_mode_name(weight_mode);
    j["cosine_logit"] = cosine_logit == CosineLogitMode::kDotProduct ? "dot" : "cosine";
    j["upsampler"] = upsample_mode_name(upsample_mode);
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValueError(std::string("bad model descriptor: ") + e.what());
    }
    ModelConfig cfg;
    cfg.bands_hsi = j.at("bands_hsi").get<int64_t>();
    cfg.bands_msi = j.at("bands_msi").get<int64_t>();
    cfg.d1 = j.at("d1").get<int64_t>();
    cfg.d2 = j.at("d2").get<int64_t>();
    cfg.channels = j.at("channels").get<int64_t>();
    cfg.scale = j.at("scale").get<int64_t>();
    cfg.kernel = j.at("kernel").get<int64_t>();
    cfg.decoder_relu = j.at("decoder_relu").get<bool>();
    cfg.mlp_depth = j.at("mlp_depth").get<int>();
    cfg.use_lr_injection = j.at("lr_injection").get<bool>();
    cfg.use_hr_injection = j.at("hr_injection").get<bool>();
    cfg.use_rel_coord = j.at("rel_coord").get<bool>();
    cfg.weight_mode = weight_mode_from(j.at("weight_mode").get<std::string>());
    cfg.cosine_logit = j.at("cosine_logit").get<std::string>() == "dot"
                           ? CosineLogitMode::kDotProduct
                           : CosineLogitMode::kNormalizedCosine;
    cfg.upsample_mode = upsample_mode_from(j.at("upsampler").get<std::string>());
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

namespace {

// [h,w,Cin] -> conv with 'same' zero padding -> [h,w,Cout]
Tensor conv_hwc(const Tensor& hwc, const Tensor& weight, const Tensor& bias) {
    const int64_t pad = (weight.dim(2) - 1) / 2;
    Tensor nchw = reshape(permute(hwc, {2, 0, 1}), {1, hwc.dim(2), hwc.dim(0), hwc.dim(1)});
    Tensor out = conv2d(nchw, weight, bias, pad);
    Tensor chw = reshape(out, {out.dim(1), out.dim(2), out.dim(3)});
    return permute(chw, {1, 2, 0});
}

}  // namespace

void FusionModel::add_param(const std::string& name, Shape shape, int64_t fan_in, Rng* rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t = rng ? Tensor::uniform(std::move(shape), *rng, -bound, bound, true)
                   : Tensor::zeros(std::move(shape), true);
    params_.emplace_back(name, std::move(t));
}

void FusionModel::allocate(Rng* rng) {
    const auto& c = cfg_;
    const int64_t k = c.kernel;
    const int64_t fan_spec1 = c.bands_hsi * k * k;
    const int64_t fan_d1 = c.d1 * k * k;
    const int64_t fan_spat1 = (c.bands_hsi + c.bands_msi) * k * k;
    const int64_t fan_d2 = c.d2 * k * k;
    const int64_t fan_c = c.channels * k * k;

    add_param("spectral_encoder.conv1.weight", {c.d1, c.bands_hsi, k, k}, fan_spec1, rng);
    add_param("spectral_encoder.conv1.bias", {c.d1}, fan_spec1, rng);
    add_param("spectral_encoder.conv2.weight", {c.d1, c.d1, k, k}, fan_d1, rng);
    add_param("spectral_encoder.conv2.bias", {c.d1}, fan_d1, rng);

    add_param("spatial_encoder.conv1.weight", {c.d2, c.bands_hsi + c.bands_msi, k, k}, fan_spat1, rng);
    add_param("spatial_encoder.conv1.bias", {c.d2}, fan_spat1, rng);
    add_param("spatial_encoder.conv2.weight", {c.d2, c.d2, k, k}, fan_d2, rng);
    add_param("spatial_encoder.conv2.bias", {c.d2}, fan_d2, rng);

    if (c.upsample_mode == UpsampleMode::kImplicit) {
        const int64_t din = c.fusion().mlp_input_width();
        if (c.mlp_depth == 1) {
            add_param("fusion.head.weight", {c.channels, din}, din, rng);
            add_param("fusion.head.bias", {c.channels}, din, rng);
        } else {
            add_param("fusion.head.weight", {c.channels, din}, din, rng);
            add_param("fusion.head.bias", {c.channels}, din, rng);
            add_param("fusion.head2.weight", {c.channels, c.channels}, c.channels, rng);
            add_param("fusion.head2.bias", {c.channels}, c.channels, rng);
        }
    } else if (c.upsample_mode == UpsampleMode::kPixelShuffle) {
        const int64_t cout = c.scale * c.scale * c.channels;
        add_param("upsample.conv.weight", {cout, c.d1, k, k}, fan_d1, rng);
        add_param("upsample.conv.bias", {cout}, fan_d1, rng);
    } else {
        add_param("upsample.proj.weight", {c.channels, c.d1}, c.d1, rng);
        add_param("upsample.proj.bias", {c.channels}, c.d1, rng);
    }

    add_param("decoder.conv1.weight", {c.channels, c.channels, k, k}, fan_c, rng);
    add_param("decoder.conv1.bias", {c.channels}, fan_c, rng);
    add_param("decoder.conv2.weight", {c.bands_hsi, c.channels, k, k}, fan_c, rng);
    add_param("decoder.conv2.bias", {c.bands_hsi}, fan_c, rng);
}

FusionModel::FusionModel(const ModelConfig& cfg, Rng& init_rng) : cfg_(cfg) {
    cfg_.validate();
    allocate(&init_rng);
}

FusionModel FusionModel::zeros(const ModelConfig& cfg) {
    FusionModel m;
    m.cfg_ = cfg;
    m.cfg_.validate();
    m.allocate(nullptr);
    return m;
}

Tensor FusionModel::param(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name) return p.tensor;
    throw ValueError("no parameter named " + name);
}

int64_t FusionModel::param_count() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
}

FusionMlp FusionModel::fusion_head() const {
    if (cfg_.upsample_mode != UpsampleMode::kImplicit)
        throw ValueError("fusion head only exists in implicit upsample mode");
    FusionMlp mlp;
    mlp.depth = cfg_.mlp_depth;
    mlp.w1 = param("fusion.head.weight");
    mlp.b1 = param("fusion.head.bias");
    if (cfg_.mlp_depth == 2) {
        mlp.w2 = param("fusion.head2.weight");
        mlp.b2 = param("fusion.head2.bias");
    }
    return mlp;
}

Tensor FusionModel::encode_spectral(const Tensor& x) const {
    if (x.rank() != 3 || x.dim(2) != cfg_.bands_hsi)
        throw ShapeError("encode_spectral: band axis = " +
                         std::to_string(x.rank() == 3 ? x.dim(2) : -1) + ", expected " +
                         std::to_string(cfg_.bands_hsi));
    Tensor h = conv_hwc(x, param("spectral_encoder.conv1.weight"), param("spectral_encoder.conv1.bias"));
    h = relu(h);
    return conv_hwc(h, param("spectral_encoder.conv2.weight"), param("spectral_encoder.conv2.bias"));
}

Tensor FusionModel::encode_spatial(const Tensor& x_up, const Tensor& y) const {
    if (x_up.rank() != 3 || y.rank() != 3 || x_up.dim(0) != y.dim(0) || x_up.dim(1) != y.dim(1))
        throw ShapeError("encode_spatial: spatial extents differ between inputs");
    if (x_up.dim(2) != cfg_.bands_hsi)
        throw ShapeError("encode_spatial: upsampled band axis = " + std::to_string(x_up.dim(2)) +
                         ", expected " + std::to_string(cfg_.bands_hsi));
    if (y.dim(2) != cfg_.bands_msi)
        throw ShapeError("encode_spatial: guide band axis = " + std::to_string(y.dim(2)) +
                         ", expected " + std::to_string(cfg_.bands_msi));
    Tensor cat = concat_channels({x_up, y});  // channel extent bands_hsi + bands_msi
    Tensor h = conv_hwc(cat, param("spatial_encoder.conv1.weight"), param("spatial_encoder.conv1.bias"));
    h = relu(h);
    return conv_hwc(h, param("spatial_encoder.conv2.weight"), param("spatial_encoder.conv2.bias"));
}

Tensor FusionModel::decode(const Tensor& e) const {
    if (e.rank() != 3 || e.dim(2) != cfg_.channels)
        throw ShapeError("decode: channel axis = " + std::to_string(e.rank() == 3 ? e.dim(2) : -1) +
                         ", expected " + std::to_string(cfg_.channels));
    Tensor h = conv_hwc(e, param("decoder.conv1.weight"), param("decoder.conv1.bias"));
    if (cfg_.decoder_relu) h = relu(h);
    return conv_hwc(h, param("decoder.conv2.weight"), param("decoder.conv2.bias"));
}

Tensor FusionModel::fused_features(const Tensor& s_pe, const Tensor& s_pa) const {
    switch (cfg_.upsample_mode) {
        case UpsampleMode::kImplicit: {
            const auto queries =
                all_queries(normalized_grid(s_pa.dim(0), s_pa.dim(1)), s_pe.dim(0), s_pe.dim(1));
            return fuse_map(s_pe, s_pa, queries, cfg_.fusion(), fusion_head());
        }
        case UpsampleMode::kBilinear:
        case UpsampleMode::kBicubic: {
            const auto kernel = cfg_.upsample_mode == UpsampleMode::kBilinear
                                    ? ResampleKernel::kBilinear
                                    : ResampleKernel::kBicubic;
            Tensor up = upsample(s_pe, cfg_.scale, kernel);
            return linear(up, param("upsample.proj.weight"), param("upsample.proj.bias"));
        }
        case UpsampleMode::kPixelShuffle: {
            Tensor pre = conv_hwc(s_pe, param("upsample.conv.weight"), param("upsample.conv.bias"));
            return pixel_shuffle(pre, cfg_.scale);
        }
    }
    throw ValueError("unknown upsample mode");
}

Tensor FusionModel::forward(const Tensor& x, const Tensor& y) const {
    if (x.rank() != 3 || y.rank() != 3)
        throw ShapeError("forward: inputs must be [h,w,S] and [H,W,s]");
    if (y.dim(0) != x.dim(0) * cfg_.scale || y.dim(1) != x.dim(1) * cfg_.scale)
        throw ShapeError("forward: guide raster " + std::to_string(y.dim(0)) + "x" +
                         std::to_string(y.dim(1)) + " is not scale " + std::to_string(cfg_.scale) +
                         " times input raster " + std::to_string(x.dim(0)) + "x" +
                         std::to_string(x.dim(1)));
    Tensor x_up = upsample(x, cfg_.scale, ResampleKernel::kBicubic);
    Tensor s_pe = encode_spectral(x);
    Tensor s_pa = encode_spatial(x_up, y);
    Tensor e = fused_features(s_pe, s_pa);
    return add(decode(e), x_up);
}

void FusionModel::save(const std::string& path) const {
    save_checkpoint(path, cfg_.to_json(), params_);
}

FusionModel FusionModel::load(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    FusionModel m = FusionModel::zeros(ModelConfig::from_json(ckpt.header));
    if (ckpt.entries.size() != m.params_.size())
        throw ValueError("checkpoint/architecture mismatch: " + std::to_string(ckpt.entries.size()) +
                         " entries, model expects " + std::to_string(m.params_.size()));
    for (size_t i = 0; i < m.params_.size(); ++i) {
        Parameter& p = m.params_[i];
        CheckpointEntry& e = ckpt.entries[i];
        if (e.name != p.name || e.shape != p.tensor.shape())
            throw ValueError("checkpoint/architecture mismatch at entry " + e.name +
                             ": model expects " + p.name + " " + shape_str(p.tensor.shape()));
        std::copy(e.data.begin(), e.data.end(), p.tensor.raw());
        p.moment1 = std::move(e.moment1);
        p.moment2 = std::move(e.moment2);
        p.step = e.step;
    }
    return m;
}

// ---------------------------------------------------------------------------
// cube bridge
// ---------------------------------------------------------------------------

Tensor cube_to_tensor(const HsiCube& cube) {
    cube.validate();
    return Tensor::from_vec({cube.height, cube.width, cube.bands}, cube.data);
}

HsiCube tensor_to_cube(const Tensor& hwc, std::vector<double> wavelengths, bool clamp_unit) {
    if (hwc.rank() != 3) throw ShapeError("tensor_to_cube: expected [H,W,bands]");
    HsiCube cube(hwc.dim(0), hwc.dim(1), hwc.dim(2));
    cube.data = hwc.data();
    if (clamp_unit)
        for (auto& v : cube.data) v = std::clamp(v, 0.0, 1.0);
    cube.wavelengths = std::move(wavelengths);
    cube.validate();
    return cube;
}

}  // namespace hsf
