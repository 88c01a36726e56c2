#include "hsf/train.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <limits>

#include "hsf/error.hpp"

namespace hsf {

void TrainConfig::validate() const {
    model.validate();
    if (lr <= 0.0) throw ValueError("train config: lr must be positive");
    if (epochs < 0) throw ValueError("train config: epochs must be >= 0");
    if (batch < 1) throw ValueError("train config: batch must be >= 1");
    if (checkpoint_every < 0) throw ValueError("train config: checkpoint cadence must be >= 0");
}

namespace {

void check_pairs(const std::vector<TrainPair>& pairs, const ModelConfig& cfg) {
    if (pairs.empty()) throw ValueError("train: no input pairs");
    for (const auto& p : pairs) {
        p.lr.validate();
        p.msi.validate();
        p.gt.validate();
        if (p.lr.bands != cfg.bands_hsi)
            throw ShapeError("pair " + p.name + ": LR bands = " + std::to_string(p.lr.bands) +
                             ", model expects " + std::to_string(cfg.bands_hsi));
        if (p.msi.bands != cfg.bands_msi)
            throw ShapeError("pair " + p.name + ": guide bands = " + std::to_string(p.msi.bands) +
                             ", model expects " + std::to_string(cfg.bands_msi));
        if (p.msi.height != p.lr.height * cfg.scale || p.msi.width != p.lr.width * cfg.scale)
            throw ShapeError("pair " + p.name + ": guide extents are not scale " +
                             std::to_string(cfg.scale) + " times the LR extents");
        if (p.gt.height != p.msi.height || p.gt.width != p.msi.width || p.gt.bands != cfg.bands_hsi)
            throw ShapeError("pair " + p.name + ": ground truth extents do not match");
        if (p.lr.height != pairs[0].lr.height || p.lr.width != pairs[0].lr.width)
            throw ShapeError("pair " + p.name + ": raster extents drift between pairs");
    }
}

}  // namespace

TrainOutcome train(const std::vector<TrainPair>& pairs, const TrainConfig& cfg,
                   const std::string& checkpoint_dir) {
    cfg.validate();
    check_pairs(pairs, cfg.model);

    Rng root(cfg.seed);
    Rng init_rng = root.fork("init");
    Rng shuffle_rng = root.fork("shuffle");

    TrainOutcome out{FusionModel(cfg.model, init_rng), {}};
    FusionModel& model = out.model;

    AdamConfig adam;
    adam.lr = cfg.lr;

    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    int64_t step = 0;
    for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (size_t pos = 0; pos < order.size();) {
            const size_t batch_end = std::min(order.size(), pos + static_cast<size_t>(cfg.batch));
            const double inv_batch = 1.0 / static_cast<double>(batch_end - pos);
            Tensor loss;
            for (size_t b = pos; b < batch_end; ++b) {
                const TrainPair& pair = pairs[order[b]];
                Tensor pred = model.forward(cube_to_tensor(pair.lr), cube_to_tensor(pair.msi));
                Tensor pair_loss = l1_loss(pred, cube_to_tensor(pair.gt), cfg.loss_reduction);
                loss = loss.defined() ? add(loss, pair_loss) : pair_loss;
            }
            if (inv_batch != 1.0) loss = scale(loss, inv_batch);
            zero_grads(model.params());
            backward(loss);
            // alternate upsample stages leave the encoders in place but may
            // not read every branch; those parameters get a zero gradient
            for (auto& p : model.params()) p.tensor.ensure_grad();
            adam_step(model.params(), adam);
            ++step;
            out.history.push_back({step, loss.value()});
            if (!checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
                step % cfg.checkpoint_every == 0) {
                char name[64];
                std::snprintf(name, sizeof(name), "/step_%06lld.ckpt", static_cast<long long>(step));
                model.save(checkpoint_dir + name);
            }
            pos = batch_end;
        }
    }
    return out;
}

void write_loss_csv(std::ostream& os, const std::vector<LossRow>& history) {
    os << "step,loss\n";
    os << std::setprecision(17);
    for (const auto& row : history) os << row.step << "," << row.loss << "\n";
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

ImageMetrics evaluate_pair(const FusionModel& model, const TrainPair& pair, PsnrMode psnr_mode) {
    Tensor pred = model.forward(cube_to_tensor(pair.lr), cube_to_tensor(pair.msi));
    const HsiCube fused = tensor_to_cube(pred, pair.gt.wavelengths, /*clamp_unit=*/true);
    ImageMetrics m;
    m.name = pair.name;
    m.psnr = psnr(fused, pair.gt, psnr_mode);
    m.sam = sam(fused, pair.gt);
    m.ergas = ergas(fused, pair.gt, model.config().scale);
    m.ssim = fused.height >= 11 && fused.width >= 11 ? ssim(fused, pair.gt)
                                                     : std::numeric_limits<double>::quiet_NaN();
    return m;
}

MetricsReport evaluate(const FusionModel& model, const std::vector<TrainPair>& pairs,
                       PsnrMode psnr_mode) {
    MetricsReport report;
    report.param_count = model.param_count();
    for (const auto& pair : pairs) report.rows.push_back(evaluate_pair(model, pair, psnr_mode));
    return report;
}

MetricsReport evaluate_bicubic_baseline(const std::vector<TrainPair>& pairs, PsnrMode psnr_mode) {
    MetricsReport report;
    report.param_count = -1;
    for (const auto& pair : pairs) {
        const int64_t r = pair.gt.height / pair.lr.height;
        HsiCube up = upsample(pair.lr, r, ResampleKernel::kBicubic);
        for (auto& v : up.data) v = std::clamp(v, 0.0, 1.0);
        ImageMetrics m;
        m.name = pair.name;
        m.psnr = psnr(up, pair.gt, psnr_mode);
        m.sam = sam(up, pair.gt);
        m.ergas = ergas(up, pair.gt, r);
        m.ssim = up.height >= 11 && up.width >= 11 ? ssim(up, pair.gt)
                                                   : std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(std::move(m));
    }
    return report;
}

// ---------------------------------------------------------------------------
// ablation driver
// ---------------------------------------------------------------------------

std::string ablation_axis_name(AblationAxis axis) {
    switch (axis) {
        case AblationAxis::kDualFreq: return "dual_freq";
        case AblationAxis::kRelCoord: return "rel_coord";
        case AblationAxis::kWeightMode: return "weight_mode";
        case AblationAxis::kUpsampler: return "upsampler";
    }
    throw ValueError("unknown ablation axis");
}

AblationAxis ablation_axis_from(const std::string& name) {
    if (name == "dual_freq") return AblationAxis::kDualFreq;
    if (name == "rel_coord") return AblationAxis::kRelCoord;
    if (name == "weight_mode") return AblationAxis::kWeightMode;
    if (name == "upsampler") return AblationAxis::kUpsampler;
    throw ValueError("unknown ablation axis: " + name);
}

AblationTable run_ablation(AblationAxis axis, const TrainConfig& base,
                           const std::vector<TrainPair>& train_pairs,
                           const std::vector<TrainPair>& eval_pairs) {
    struct Arm {
        std::string name;
        TrainConfig cfg;
    };
    std::vector<Arm> arms;
    auto with = [&base](auto&& tweak) {
        TrainConfig cfg = base;
        tweak(cfg.model);
        return cfg;
    };

    AblationTable table;
    table.axis = ablation_axis_name(axis);
    switch (axis) {
        case AblationAxis::kDualFreq:
            arms.push_back({"lr_only", with([](ModelConfig& m) {
                                m.use_lr_injection = true;
                                m.use_hr_injection = false;
                            })});
            arms.push_back({"hr_only", with([](ModelConfig& m) {
                                m.use_lr_injection = false;
                                m.use_hr_injection = true;
                            })});
            arms.push_back({"both", with([](ModelConfig& m) {
                                m.use_lr_injection = true;
                                m.use_hr_injection = true;
                            })});
            break;
        case AblationAxis::kRelCoord:
            arms.push_back({"off", with([](ModelConfig& m) { m.use_rel_coord = false; })});
            arms.push_back({"on", with([](ModelConfig& m) { m.use_rel_coord = true; })});
            break;
        case AblationAxis::kWeightMode:
            arms.push_back({"area", with([](ModelConfig& m) { m.weight_mode = WeightMode::kArea; })});
            arms.push_back({"cosine", with([](ModelConfig& m) { m.weight_mode = WeightMode::kCosine; })});
            table.footer = "network-learned weight generation is out of scope; "
                           "this axis covers area and cosine weights";
            break;
        case AblationAxis::kUpsampler:
            arms.push_back({"bilinear", with([](ModelConfig& m) { m.upsample_mode = UpsampleMode::kBilinear; })});
            arms.push_back({"bicubic", with([](ModelConfig& m) { m.upsample_mode = UpsampleMode::kBicubic; })});
            arms.push_back({"pixel_shuffle",
                            with([](ModelConfig& m) { m.upsample_mode = UpsampleMode::kPixelShuffle; })});
            arms.push_back({"implicit", with([](ModelConfig& m) { m.upsample_mode = UpsampleMode::kImplicit; })});
            break;
    }

    for (const auto& arm : arms) {
        TrainOutcome outcome = train(train_pairs, arm.cfg);
        MetricsReport report = evaluate(outcome.model, eval_pairs);
        const auto agg = report.aggregate();
        AblationRow row;
        row.arm = arm.name;
        row.psnr_mean = agg.psnr_mean;
        row.sam_mean = agg.sam_mean;
        row.ergas_mean = agg.ergas_mean;
        row.ssim_mean = agg.ssim_mean;
        row.param_count = report.param_count;
        table.rows.push_back(std::move(row));
    }
    return table;
}

void AblationTable::write_csv(std::ostream& os) const {
    os << "arm,psnr_db,sam_deg,ergas,ssim,params\n";
    os << std::setprecision(10);
    for (const auto& row : rows)
        os << row.arm << "," << row.psnr_mean << "," << row.sam_mean << "," << row.ergas_mean << ","
           << row.ssim_mean << "," << row.param_count << "\n";
    if (!footer.empty()) os << "# " << footer << "\n";
}

void AblationTable::write_text(std::ostream& os) const {
    os << "axis: " << axis << "\n";
    os << std::left << std::setw(16) << "arm" << std::right << std::setw(12) << "PSNR(dB)"
       << std::setw(12) << "SAM(deg)" << std::setw(12) << "ERGAS" << std::setw(12) << "SSIM"
       << std::setw(12) << "params" << "\n";
    os << std::setprecision(4) << std::fixed;
    for (const auto& row : rows)
        os << std::left << std::setw(16) << row.arm << std::right << std::setw(12) << row.psnr_mean
           << std::setw(12) << row.sam_mean << std::setw(12) << row.ergas_mean << std::setw(12)
           << row.ssim_mean << std::setw(12) << row.param_count << "\n";
    if (!footer.empty()) os << "# " << footer << "\n";
    os.unsetf(std::ios::fixed);
}

}  // namespace hsf
