#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hsf/metrics.hpp"
#include "hsf/network.hpp"

namespace hsf {

struct TrainPair {
    std::string name;
    HsiCube lr;
    HsiCube msi;
    HsiCube gt;
};

struct TrainConfig {
    ModelConfig model;
    double lr = 1e-4;
    int64_t epochs = 0;
    int64_t batch = 1;
    uint64_t seed = 0;
    Reduction loss_reduction = Reduction::kMean;
    int64_t checkpoint_every = 0;  // optimizer steps between saves; 0 = none

    void validate() const;
};

struct LossRow {
    int64_t step;
    double loss;
};

struct TrainOutcome {
    FusionModel model;
    std::vector<LossRow> history;
};

// Seeded, deterministic loop: per-epoch shuffle, forward, L1 loss, backward,
// Adam step. Batches larger than one average their per-pair losses before the
// step. Periodic checkpoints land in checkpoint_dir when set.
TrainOutcome train(const std::vector<TrainPair>& pairs, const TrainConfig& cfg,
                   const std::string& checkpoint_dir = "");

void write_loss_csv(std::ostream& os, const std::vector<LossRow>& history);

// Evaluation glue: forward each pair, clamp the fused cube into [0,1], score
// it against the ground truth.
ImageMetrics evaluate_pair(const FusionModel& model, const TrainPair& pair,
                           PsnrMode psnr_mode = PsnrMode::kJoint);
MetricsReport evaluate(const FusionModel& model, const std::vector<TrainPair>& pairs,
                       PsnrMode psnr_mode = PsnrMode::kJoint);
// Plain bicubic upsampling of the LR input, no model.
MetricsReport evaluate_bicubic_baseline(const std::vector<TrainPair>& pairs,
                                        PsnrMode psnr_mode = PsnrMode::kJoint);

// One trained model per switch setting of an axis, scored on the eval pairs.
enum class AblationAxis { kDualFreq, kRelCoord, kWeightMode, kUpsampler };

std::string ablation_axis_name(AblationAxis axis);
AblationAxis ablation_axis_from(const std::string& name);

struct AblationRow {
    std::string arm;
    double psnr_mean = 0.0;
    double sam_mean = 0.0;
    double ergas_mean = 0.0;
    double ssim_mean = 0.0;
    int64_t param_count = 0;
};

struct AblationTable {
    std::string axis;
    std::vector<AblationRow> rows;
    std::string footer;  // empty when there is nothing to note

    void write_csv(std::ostream& os) const;
    void write_text(std::ostream& os) const;
};

AblationTable run_ablation(AblationAxis axis, const TrainConfig& base,
                           const std::vector<TrainPair>& train_pairs,
                           const std::vector<TrainPair>& eval_pairs);

}  // namespace hsf
