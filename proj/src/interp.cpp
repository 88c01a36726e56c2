#include "hsf/interp.hpp"

#include <cmath>
#include <string>

#include "hsf/error.hpp"

namespace hsf {

namespace {

double center_coord(int64_t index, int64_t extent) {
    return -1.0 + static_cast<double>(2 * index + 1) / static_cast<double>(extent);
}

}  // namespace

WeightSet area_weights(const NeighborQuery& query, int64_t lr_height, int64_t lr_width) {
    // Rectangle area between the query and the corner diagonally opposite i.
    // With corner order TL,TR,BL,BR the opposite of corner c is 3-c.
    std::array<double, 4> area{};
    double total = 0.0;
    for (int c = 0; c < 4; ++c) {
        const auto& opp = query.neighbors[static_cast<size_t>(3 - c)];
        const double dy = query.query[0] - center_coord(opp[0], lr_height);
        const double dx = query.query[1] - center_coord(opp[1], lr_width);
        area[static_cast<size_t>(c)] = std::abs(dy * dx);
        total += area[static_cast<size_t>(c)];
    }
    WeightSet ws;
    if (total < 1e-15) {
        ws.w = {0.25, 0.25, 0.25, 0.25};
        ws.degenerate = true;
        return ws;
    }
    for (int c = 0; c < 4; ++c) ws.w[static_cast<size_t>(c)] = area[static_cast<size_t>(c)] / total;
    return ws;
}

WeightSet cosine_weights(const Tensor& nearest, const std::array<Tensor, 4>& neighbors,
                         CosineLogitMode mode) {
    const int64_t d = nearest.numel();
    for (const auto& n : neighbors)
        if (n.numel() != d)
            throw ShapeError("cosine_weights: latent width mismatch, nearest has " + std::to_string(d) +
                             " entries but a neighbor has " + std::to_string(n.numel()));

    const auto& a = nearest.data();
    std::array<double, 4> logits{};
    for (int c = 0; c < 4; ++c) {
        const auto& b = neighbors[static_cast<size_t>(c)].data();
        double dot = 0.0;
        for (int64_t i = 0; i < d; ++i) dot += a[static_cast<size_t>(i)] * b[static_cast<size_t>(i)];
        if (mode == CosineLogitMode::kDotProduct) {
            logits[static_cast<size_t>(c)] = dot;
        } else {
            double na = 0.0, nb = 0.0;
            for (int64_t i = 0; i < d; ++i) {
                na += a[static_cast<size_t>(i)] * a[static_cast<size_t>(i)];
                nb += b[static_cast<size_t>(i)] * b[static_cast<size_t>(i)];
            }
            const double denom = std::sqrt(na) * std::sqrt(nb);
            // zero-norm convention: neutral logit
            logits[static_cast<size_t>(c)] = denom > 0.0 ? dot / denom : 0.0;
        }
    }

    double mx = logits[0];
    for (int c = 1; c < 4; ++c) mx = std::max(mx, logits[static_cast<size_t>(c)]);
    WeightSet ws;
    double denom = 0.0;
    for (int c = 0; c < 4; ++c) {
        ws.w[static_cast<size_t>(c)] = std::exp(logits[static_cast<size_t>(c)] - mx);
        denom += ws.w[static_cast<size_t>(c)];
    }
    for (int c = 0; c < 4; ++c) ws.w[static_cast<size_t>(c)] /= denom;
    return ws;
}

Tensor interpolate(const WeightSet& weights, const std::array<Tensor, 4>& values) {
    for (int c = 1; c < 4; ++c)
        if (values[static_cast<size_t>(c)].shape() != values[0].shape())
            throw ShapeError("interpolate: value shapes differ between corners");
    Tensor acc = scale(values[0], weights.w[0]);
    for (int c = 1; c < 4; ++c)
        acc = add(acc, scale(values[static_cast<size_t>(c)], weights.w[static_cast<size_t>(c)]));
    return acc;
}

Tensor mlp_value(const Tensor& latent, const std::array<double, 2>& rel, const AffineHead& head) {
    if (latent.rank() != 1)
        throw ShapeError("mlp_value: latent must be a vector, got " + shape_str(latent.shape()));
    Tensor rel_t = Tensor::from_vec({2}, {rel[0], rel[1]});
    Tensor x = concat_channels({latent, rel_t});
    return linear(x, head.weight, head.bias);
}

}  // namespace hsf
