#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hsf/cube.hpp"

namespace hsf {

// Quality indices for [0,1]-ranged cubes. Conventions (the usual
// hyperspectral ones):
//   PSNR: 10*log10(1/MSE), peak 1. kJoint pools the MSE over all bands;
//         kPerBand averages per-band PSNRs. Exact match is flagged infinite.
//   SAM: mean per-pixel angle between spectral vectors, degrees. Pixels with
//        a zero-norm vector on either side are skipped and counted. The angle
//        is evaluated in the atan2 form, which equals arccos of the clamped
//        normalized dot product but is exact at 0 and 180 degrees.
//   ERGAS: (100/r) * sqrt(mean_b (RMSE_b / mean_b(gt))^2). Bands whose GT
//          mean is zero are skipped and counted.
//   SSIM: per-band, 11x11 Gaussian window sigma 1.5, C1=0.01^2, C2=0.03^2,
//         valid windows only, averaged over bands. Requires extents >= 11.

enum class PsnrMode { kJoint, kPerBand };

struct PsnrResult {
    double db = 0.0;
    bool infinite = false;
};
PsnrResult psnr(const HsiCube& pred, const HsiCube& gt, PsnrMode mode = PsnrMode::kJoint);

struct SamResult {
    double degrees = 0.0;
    int64_t skipped_pixels = 0;
};
SamResult sam(const HsiCube& pred, const HsiCube& gt);

struct ErgasResult {
    double value = 0.0;
    int64_t skipped_bands = 0;
};
ErgasResult ergas(const HsiCube& pred, const HsiCube& gt, int64_t r);

double ssim(const HsiCube& pred, const HsiCube& gt);

struct ImageMetrics {
    std::string name;
    PsnrResult psnr;
    SamResult sam;
    ErgasResult ergas;
    double ssim = 0.0;
};

// Per-image rows plus mean/std aggregates; emitted as CSV and aligned text.
struct MetricsReport {
    std::vector<ImageMetrics> rows;
    int64_t param_count = -1;  // -1 when not applicable (fixed baselines)

    struct Aggregate {
        double psnr_mean = 0.0, psnr_std = 0.0;
        double sam_mean = 0.0, sam_std = 0.0;
        double ergas_mean = 0.0, ergas_std = 0.0;
        double ssim_mean = 0.0, ssim_std = 0.0;
        int64_t psnr_infinite = 0;  // rows excluded from the PSNR aggregate
    };
    Aggregate aggregate() const;

    void write_csv(std::ostream& os) const;
    void write_text(std::ostream& os) const;
};

// One row per band: band index, then one column per named cube at (row,col).
void write_spectral_profile(std::ostream& os,
                            const std::vector<std::pair<std::string, const HsiCube*>>& cubes,
                            int64_t row, int64_t col);

}  // namespace hsf
