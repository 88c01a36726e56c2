#include "hsf/fusion.hpp"

#include <string>

#include "hsf/error.hpp"

namespace hsf {

void FusionConfig::validate() const {
    if (d1 < 1 || d2 < 1 || channels < 1)
        throw ValueError("fusion config: widths must be positive (d1 " + std::to_string(d1) +
                         ", d2 " + std::to_string(d2) + ", channels " + std::to_string(channels) + ")");
    if (scale < 1) throw ValueError("fusion config: scale must be >= 1");
    if (mlp_depth != 1 && mlp_depth != 2)
        throw ValueError("fusion config: mlp_depth must be 1 or 2");
}

Tensor FusionMlp::apply(const Tensor& x) const {
    if (x.dim(x.rank() - 1) != input_width())
        throw ShapeError("fusion head: input width " + std::to_string(x.dim(x.rank() - 1)) +
                         " does not match weight D_in " + std::to_string(input_width()));
    Tensor h = linear(x, w1, b1);
    if (depth == 2) h = linear(relu(h), w2, b2);
    return h;
}

Tensor downsample_spatial(const Tensor& s_pa, int64_t r) {
    if (s_pa.rank() != 3)
        throw ShapeError("downsample_spatial: expected [H,W,D], got " + shape_str(s_pa.shape()));
    if (r == 1) return s_pa;
    // mean_pool works on the trailing two axes, so move channels first.
    Tensor chw = permute(s_pa, {2, 0, 1});
    Tensor pooled = mean_pool(chw, r);
    return permute(pooled, {1, 2, 0});
}

Tensor assemble_lr_features(const Tensor& spectral, const Tensor& lr_spatial,
                            const FusionConfig& cfg) {
    if (spectral.dim(spectral.rank() - 1) != cfg.d1)
        throw ShapeError("assemble_lr_features: spectral width " +
                         std::to_string(spectral.dim(spectral.rank() - 1)) + " != d1 " +
                         std::to_string(cfg.d1));
    if (!cfg.use_lr_injection) return spectral;
    if (lr_spatial.dim(lr_spatial.rank() - 1) != cfg.d2)
        throw ShapeError("assemble_lr_features: spatial width " +
                         std::to_string(lr_spatial.dim(lr_spatial.rank() - 1)) + " != d2 " +
                         std::to_string(cfg.d2));
    return concat_channels({spectral, lr_spatial});
}

Tensor inject_hr_features(const Tensor& lr_features, const Tensor& hr_spatial,
                          const FusionConfig& cfg) {
    if (!cfg.use_hr_injection) return lr_features;
    if (hr_spatial.dim(hr_spatial.rank() - 1) != cfg.d2)
        throw ShapeError("inject_hr_features: spatial width " +
                         std::to_string(hr_spatial.dim(hr_spatial.rank() - 1)) + " != d2 " +
                         std::to_string(cfg.d2));
    return concat_channels({lr_features, hr_spatial});
}

Tensor append_rel_coord(const Tensor& features, const std::array<double, 2>& rel,
                        const FusionConfig& cfg) {
    if (!cfg.use_rel_coord) return features;
    return concat_channels({features, Tensor::from_vec({2}, {rel[0], rel[1]})});
}

Tensor fuse_map(const Tensor& s_pe, const Tensor& s_pa,
                const std::vector<NeighborQuery>& queries, const FusionConfig& cfg,
                const FusionMlp& mlp) {
    cfg.validate();
    if (s_pe.rank() != 3 || s_pa.rank() != 3)
        throw ShapeError("fuse_map: expected [h,w,D1] and [H,W,D2] feature maps");
    const int64_t h = s_pe.dim(0), w = s_pe.dim(1);
    const int64_t hr_h = s_pa.dim(0), hr_w = s_pa.dim(1);
    const int64_t r = cfg.scale;
    if (hr_h != h * r || hr_w != w * r)
        throw ShapeError("fuse_map: spatial map " + std::to_string(hr_h) + "x" + std::to_string(hr_w) +
                         " is not scale " + std::to_string(r) + " times spectral map " +
                         std::to_string(h) + "x" + std::to_string(w));
    if (s_pe.dim(2) != cfg.d1)
        throw ShapeError("fuse_map: spectral width axis = " + std::to_string(s_pe.dim(2)) +
                         ", config d1 = " + std::to_string(cfg.d1));
    if (s_pa.dim(2) != cfg.d2)
        throw ShapeError("fuse_map: spatial width axis = " + std::to_string(s_pa.dim(2)) +
                         ", config d2 = " + std::to_string(cfg.d2));
    if (mlp.input_width() != cfg.mlp_input_width())
        throw ShapeError("fuse_map: head D_in = " + std::to_string(mlp.input_width()) +
                         " but switches require " + std::to_string(cfg.mlp_input_width()));
    if (mlp.output_width() != cfg.channels)
        throw ShapeError("fuse_map: head D_out = " + std::to_string(mlp.output_width()) +
                         ", config channels = " + std::to_string(cfg.channels));
    const int64_t n_queries = hr_h * hr_w;
    if (static_cast<int64_t>(queries.size()) != n_queries)
        throw ShapeError("fuse_map: got " + std::to_string(queries.size()) + " queries, expected " +
                         std::to_string(n_queries));

    // Pre-injection feature rows shared by values and similarity logits.
    Tensor spe_flat = reshape(s_pe, {h * w, cfg.d1});
    Tensor base;
    if (cfg.use_lr_injection) {
        Tensor spa_down = downsample_spatial(s_pa, r);
        base = concat({spe_flat, reshape(spa_down, {h * w, cfg.d2})}, 1);
    } else {
        base = spe_flat;
    }
    Tensor spa_flat = reshape(s_pa, {n_queries, cfg.d2});

    std::array<std::vector<int64_t>, 4> corner_idx;
    std::vector<int64_t> nearest_idx(static_cast<size_t>(n_queries));
    std::array<std::vector<double>, 4> rel_data;
    for (int c = 0; c < 4; ++c) {
        corner_idx[static_cast<size_t>(c)].resize(static_cast<size_t>(n_queries));
        rel_data[static_cast<size_t>(c)].resize(static_cast<size_t>(n_queries * 2));
    }
    for (int64_t q = 0; q < n_queries; ++q) {
        const NeighborQuery& nq = queries[static_cast<size_t>(q)];
        nearest_idx[static_cast<size_t>(q)] = nq.nearest[0] * w + nq.nearest[1];
        for (int c = 0; c < 4; ++c) {
            corner_idx[static_cast<size_t>(c)][static_cast<size_t>(q)] =
                nq.neighbors[static_cast<size_t>(c)][0] * w + nq.neighbors[static_cast<size_t>(c)][1];
            rel_data[static_cast<size_t>(c)][static_cast<size_t>(q * 2)] = nq.rel[static_cast<size_t>(c)][0];
            rel_data[static_cast<size_t>(c)][static_cast<size_t>(q * 2 + 1)] = nq.rel[static_cast<size_t>(c)][1];
        }
    }

    std::array<Tensor, 4> f1;        // pre-injection vectors per corner
    std::array<Tensor, 4> values;    // head outputs per corner
    for (int c = 0; c < 4; ++c) {
        f1[static_cast<size_t>(c)] = index_select_rows(base, corner_idx[static_cast<size_t>(c)]);
        Tensor feat = f1[static_cast<size_t>(c)];
        if (cfg.use_hr_injection) feat = concat({feat, spa_flat}, 1);
        if (cfg.use_rel_coord)
            feat = concat({feat, Tensor::from_vec({n_queries, 2}, rel_data[static_cast<size_t>(c)])}, 1);
        values[static_cast<size_t>(c)] = mlp.apply(feat);
    }

    Tensor weights;  // [R,4]
    if (cfg.weight_mode == WeightMode::kArea) {
        std::vector<double> wdata(static_cast<size_t>(n_queries * 4));
        for (int64_t q = 0; q < n_queries; ++q) {
            const WeightSet ws = area_weights(queries[static_cast<size_t>(q)], h, w);
            for (int c = 0; c < 4; ++c)
                wdata[static_cast<size_t>(q * 4 + c)] = ws.w[static_cast<size_t>(c)];
        }
        weights = Tensor::from_vec({n_queries, 4}, std::move(wdata));
    } else {
        Tensor f1_hat = index_select_rows(base, nearest_idx);
        std::vector<Tensor> logits;
        logits.reserve(4);
        for (int c = 0; c < 4; ++c) {
            Tensor dot = rowwise_dot(f1_hat, f1[static_cast<size_t>(c)]);
            if (cfg.cosine_logit == CosineLogitMode::kNormalizedCosine) {
                Tensor norm_hat = sqrt_elem(rowwise_dot(f1_hat, f1_hat));
                Tensor norm_c = sqrt_elem(
                    rowwise_dot(f1[static_cast<size_t>(c)], f1[static_cast<size_t>(c)]));
                dot = div_elem(dot, clamp_min(mul(norm_hat, norm_c), 1e-30));
            }
            logits.push_back(dot);
        }
        weights = softmax_lastdim(concat(logits, 1));
    }

    Tensor out = scale_rows(values[0], slice_lastdim(weights, 0, 1));
    for (int c = 1; c < 4; ++c)
        out = add(out, scale_rows(values[static_cast<size_t>(c)], slice_lastdim(weights, c, 1)));
    return reshape(out, {hr_h, hr_w, cfg.channels});
}

}  // namespace hsf
