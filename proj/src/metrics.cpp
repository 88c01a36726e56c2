#include "hsf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "hsf/error.hpp"

namespace hsf {

namespace {

void check_same_extents(const HsiCube& a, const HsiCube& b, const char* what) {
    if (a.height != b.height || a.width != b.width || a.bands != b.bands)
        throw ShapeError(std::string(what) + ": cube extents differ, " + std::to_string(a.height) +
                         "x" + std::to_string(a.width) + "x" + std::to_string(a.bands) + " vs " +
                         std::to_string(b.height) + "x" + std::to_string(b.width) + "x" +
                         std::to_string(b.bands));
}

constexpr double kRadToDeg = 180.0 / M_PI;

}  // namespace

PsnrResult psnr(const HsiCube& pred, const HsiCube& gt, PsnrMode mode) {
    check_same_extents(pred, gt, "psnr");
    PsnrResult res;
    if (mode == PsnrMode::kJoint) {
        double mse = 0.0;
        for (size_t i = 0; i < pred.data.size(); ++i) {
            const double d = pred.data[i] - gt.data[i];
            mse += d * d;
        }
        mse /= static_cast<double>(pred.data.size());
        if (mse == 0.0) {
            res.infinite = true;
            res.db = std::numeric_limits<double>::infinity();
        } else {
            res.db = 10.0 * std::log10(1.0 / mse);
        }
        return res;
    }
    // per-band mean of finite band PSNRs
    double acc = 0.0;
    int64_t finite = 0;
    for (int64_t b = 0; b < pred.bands; ++b) {
        double mse = 0.0;
        for (int64_t p = 0; p < pred.pixels(); ++p) {
            const double d = pred.data[static_cast<size_t>(p * pred.bands + b)] -
                             gt.data[static_cast<size_t>(p * pred.bands + b)];
            mse += d * d;
        }
        mse /= static_cast<double>(pred.pixels());
        if (mse > 0.0) {
            acc += 10.0 * std::log10(1.0 / mse);
            ++finite;
        }
    }
    if (finite == 0) {
        res.infinite = true;
        res.db = std::numeric_limits<double>::infinity();
    } else {
        res.db = acc / static_cast<double>(finite);
        res.infinite = finite < pred.bands;
    }
    return res;
}

SamResult sam(const HsiCube& pred, const HsiCube& gt) {
    check_same_extents(pred, gt, "sam");
    SamResult res;
    double acc = 0.0;
    int64_t used = 0;
    for (int64_t p = 0; p < pred.pixels(); ++p) {
        double np = 0.0, ng = 0.0;
        for (int64_t b = 0; b < pred.bands; ++b) {
            const double x = pred.data[static_cast<size_t>(p * pred.bands + b)];
            const double y = gt.data[static_cast<size_t>(p * pred.bands + b)];
            np += x * x;
            ng += y * y;
        }
        if (np == 0.0 || ng == 0.0) {
            ++res.skipped_pixels;
            continue;
        }
        // angle between the unit vectors via 2*atan2(|u-v|, |u+v|); equal to
        // acos of the clamped normalized dot product but exact at 0 and pi
        const double inv_p = 1.0 / std::sqrt(np), inv_g = 1.0 / std::sqrt(ng);
        double diff = 0.0, summ = 0.0;
        for (int64_t b = 0; b < pred.bands; ++b) {
            const double x = pred.data[static_cast<size_t>(p * pred.bands + b)] * inv_p;
            const double y = gt.data[static_cast<size_t>(p * pred.bands + b)] * inv_g;
            diff += (x - y) * (x - y);
            summ += (x + y) * (x + y);
        }
        acc += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(summ)) * kRadToDeg;
        ++used;
    }
    res.degrees = used > 0 ? acc / static_cast<double>(used) : 0.0;
    return res;
}

ErgasResult ergas(const HsiCube& pred, const HsiCube& gt, int64_t r) {
    check_same_extents(pred, gt, "ergas");
    if (r < 1) throw ValueError("ergas: scale must be >= 1");
    ErgasResult res;
    double acc = 0.0;
    int64_t used = 0;
    for (int64_t b = 0; b < pred.bands; ++b) {
        double mse = 0.0, mean = 0.0;
        for (int64_t p = 0; p < pred.pixels(); ++p) {
            const double x = pred.data[static_cast<size_t>(p * pred.bands + b)];
            const double y = gt.data[static_cast<size_t>(p * pred.bands + b)];
            const double d = x - y;
            mse += d * d;
            mean += y;
        }
        mse /= static_cast<double>(pred.pixels());
        mean /= static_cast<double>(pred.pixels());
        if (mean == 0.0) {
            ++res.skipped_bands;
            continue;
        }
        const double ratio = std::sqrt(mse) / mean;
        acc += ratio * ratio;
        ++used;
    }
    res.value = used > 0 ? 100.0 / static_cast<double>(r) * std::sqrt(acc / static_cast<double>(used))
                         : 0.0;
    return res;
}

double ssim(const HsiCube& pred, const HsiCube& gt) {
    check_same_extents(pred, gt, "ssim");
    constexpr int64_t kWin = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    if (pred.height < kWin || pred.width < kWin)
        throw ShapeError("ssim: raster must be at least 11x11 for the window, got " +
                         std::to_string(pred.height) + "x" + std::to_string(pred.width));

    double window[kWin * kWin];
    double total = 0.0;
    for (int64_t dy = 0; dy < kWin; ++dy)
        for (int64_t dx = 0; dx < kWin; ++dx) {
            const double ry = static_cast<double>(dy - kWin / 2);
            const double rx = static_cast<double>(dx - kWin / 2);
            const double v = std::exp(-(ry * ry + rx * rx) / (2.0 * kSigma * kSigma));
            window[dy * kWin + dx] = v;
            total += v;
        }
    for (auto& v : window) v /= total;

    double acc = 0.0;
    int64_t count = 0;
    for (int64_t b = 0; b < pred.bands; ++b)
        for (int64_t y = 0; y + kWin <= pred.height; ++y)
            for (int64_t x = 0; x + kWin <= pred.width; ++x) {
                double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
                for (int64_t dy = 0; dy < kWin; ++dy)
                    for (int64_t dx = 0; dx < kWin; ++dx) {
                        const double w = window[dy * kWin + dx];
                        const double px = pred.at(y + dy, x + dx, b);
                        const double py = gt.at(y + dy, x + dx, b);
                        mx += w * px;
                        my += w * py;
                        sxx += w * px * px;
                        syy += w * py * py;
                        sxy += w * px * py;
                    }
                const double vx = sxx - mx * mx;
                const double vy = syy - my * my;
                const double cxy = sxy - mx * my;
                acc += (2.0 * mx * my + kC1) * (2.0 * cxy + kC2) /
                       ((mx * mx + my * my + kC1) * (vx + vy + kC2));
                ++count;
            }
    return acc / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var)};
}

}  // namespace

MetricsReport::Aggregate MetricsReport::aggregate() const {
    Aggregate agg;
    std::vector<double> psnrs, sams, ergases, ssims;
    for (const auto& row : rows) {
        if (row.psnr.infinite) ++agg.psnr_infinite;
        else psnrs.push_back(row.psnr.db);
        sams.push_back(row.sam.degrees);
        ergases.push_back(row.ergas.value);
        if (!std::isnan(row.ssim)) ssims.push_back(row.ssim);  // rasters below the window size
    }
    std::tie(agg.psnr_mean, agg.psnr_std) = mean_std(psnrs);
    std::tie(agg.sam_mean, agg.sam_std) = mean_std(sams);
    std::tie(agg.ergas_mean, agg.ergas_std) = mean_std(ergases);
    std::tie(agg.ssim_mean, agg.ssim_std) = mean_std(ssims);
    return agg;
}

void MetricsReport::write_csv(std::ostream& os) const {
    os << "image,psnr_db,psnr_infinite,sam_deg,ergas,ssim\n";
    os << std::setprecision(10);
    for (const auto& row : rows) {
        os << row.name << ",";
        if (row.psnr.infinite) os << "inf,1,";
        else os << row.psnr.db << ",0,";
        os << row.sam.degrees << "," << row.ergas.value << "," << row.ssim << "\n";
    }
    const Aggregate agg = aggregate();
    os << "mean," << agg.psnr_mean << ",," << agg.sam_mean << "," << agg.ergas_mean << ","
       << agg.ssim_mean << "\n";
    os << "std," << agg.psnr_std << ",," << agg.sam_std << "," << agg.ergas_std << ","
       << agg.ssim_std << "\n";
}

void MetricsReport::write_text(std::ostream& os) const {
    os << std::left << std::setw(24) << "image" << std::right << std::setw(12) << "PSNR(dB)"
       << std::setw(12) << "SAM(deg)" << std::setw(12) << "ERGAS" << std::setw(12) << "SSIM"
       << "\n";
    os << std::setprecision(4) << std::fixed;
    for (const auto& row : rows) {
        os << std::left << std::setw(24) << row.name << std::right;
        if (row.psnr.infinite) os << std::setw(12) << "inf";
        else os << std::setw(12) << row.psnr.db;
        os << std::setw(12) << row.sam.degrees << std::setw(12) << row.ergas.value << std::setw(12)
           << row.ssim << "\n";
    }
    const Aggregate agg = aggregate();
    os << std::left << std::setw(24) << "mean" << std::right << std::setw(12) << agg.psnr_mean
       << std::setw(12) << agg.sam_mean << std::setw(12) << agg.ergas_mean << std::setw(12)
       << agg.ssim_mean << "\n";
    os << std::left << std::setw(24) << "std" << std::right << std::setw(12) << agg.psnr_std
       << std::setw(12) << agg.sam_std << std::setw(12) << agg.ergas_std << std::setw(12)
       << agg.ssim_std << "\n";
    if (agg.psnr_infinite > 0)
        os << "# " << agg.psnr_infinite << " image(s) matched exactly; PSNR aggregate excludes them\n";
    if (param_count >= 0) os << "# parameters: " << param_count << "\n";
    os.unsetf(std::ios::fixed);
}

void write_spectral_profile(std::ostream& os,
                            const std::vector<std::pair<std::string, const HsiCube*>>& cubes,
                            int64_t row, int64_t col) {
    if (cubes.empty()) throw ValueError("spectral profile: no cubes given");
    const int64_t bands = cubes[0].second->bands;
    for (const auto& [name, cube] : cubes) {
        if (row < 0 || row >= cube->height || col < 0 || col >= cube->width)
            throw ValueError("spectral profile: position (" + std::to_string(row) + "," +
                             std::to_string(col) + ") out of bounds for cube " + name);
        if (cube->bands != bands)
            throw ShapeError("spectral profile: band counts differ between cubes");
    }
    os << "band";
    for (const auto& [name, cube] : cubes) os << "," << name;
    os << "\n";
    os << std::setprecision(10);
    for (int64_t b = 0; b < bands; ++b) {
        os << b;
        for (const auto& [name, cube] : cubes) os << "," << cube->at(row, col, b);
        os << "\n";
    }
}

}  // namespace hsf
