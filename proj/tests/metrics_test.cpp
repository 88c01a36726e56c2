#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hsf/error.hpp"
#include "hsf/metrics.hpp"
#include "hsf/rng.hpp"
#include "hsf/simulate.hpp"

using namespace hsf;

namespace {

HsiCube random_cube(int64_t h, int64_t w, int64_t b, uint64_t seed, double lo = 0.05,
                    double hi = 0.95) {
    HsiCube cube(h, w, b);
    Rng rng(seed);
    for (auto& v : cube.data) v = rng.uniform(lo, hi);
    return cube;
}

}  // namespace

TEST_CASE("psnr closed forms") {
    HsiCube gt(4, 4, 2);
    for (auto& v : gt.data) v = 1.0;
    HsiCube pred = gt;

    PsnrResult same = psnr(pred, gt);
    CHECK(same.infinite);
    CHECK(std::isinf(same.db));

    for (auto& v : pred.data) v = 0.9;
    PsnrResult off = psnr(pred, gt);
    CHECK(!off.infinite);
    CHECK(off.db == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("psnr matches the direct-MSE oracle in both conventions") {
    HsiCube gt = random_cube(6, 5, 3, 1);
    HsiCube pred = random_cube(6, 5, 3, 2);

    double mse = 0.0;
    for (size_t i = 0; i < gt.data.size(); ++i) {
        const double d = pred.data[i] - gt.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(gt.data.size());
    CHECK(psnr(pred, gt).db == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-12));

    double acc = 0.0;
    for (int64_t b = 0; b < 3; ++b) {
        double band_mse = 0.0;
        for (int64_t p = 0; p < 30; ++p) {
            const double d = pred.data[static_cast<size_t>(p * 3 + b)] - gt.data[static_cast<size_t>(p * 3 + b)];
            band_mse += d * d;
        }
        acc += 10.0 * std::log10(30.0 / band_mse);
    }
    CHECK(psnr(pred, gt, PsnrMode::kPerBand).db == doctest::Approx(acc / 3.0).epsilon(1e-12));

    HsiCube other(5, 5, 3);
    CHECK_THROWS_AS(psnr(pred, other), ShapeError);
}

TEST_CASE("sam fixed points and orthogonality") {
    HsiCube gt = random_cube(4, 4, 3, 3, 0.1, 0.9);
    SamResult same = sam(gt, gt);
    CHECK(same.degrees == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(same.skipped_pixels == 0);

    HsiCube a(1, 1, 2), b(1, 1, 2);
    a.at(0, 0, 0) = 1.0;
    b.at(0, 0, 1) = 1.0;
    CHECK(sam(a, b).degrees == doctest::Approx(90.0).epsilon(1e-9));
}

TEST_CASE("sam matches the per-pixel arccos oracle and skips zero-norm pixels") {
    HsiCube gt = random_cube(3, 3, 4, 5);
    HsiCube pred = random_cube(3, 3, 4, 6);
    double acc = 0.0;
    for (int64_t p = 0; p < 9; ++p) {
        double dot = 0.0, np = 0.0, ng = 0.0;
        for (int64_t b = 0; b < 4; ++b) {
            const double x = pred.data[static_cast<size_t>(p * 4 + b)];
            const double y = gt.data[static_cast<size_t>(p * 4 + b)];
            dot += x * y;
            np += x * x;
            ng += y * y;
        }
        acc += std::acos(std::clamp(dot / std::sqrt(np * ng), -1.0, 1.0)) * 180.0 / M_PI;
    }
    CHECK(sam(pred, gt).degrees == doctest::Approx(acc / 9.0).epsilon(1e-9));

    HsiCube zp = pred;
    for (int64_t b = 0; b < 4; ++b) zp.at(0, 0, b) = 0.0;
    SamResult skipped = sam(zp, gt);
    CHECK(skipped.skipped_pixels == 1);
}

TEST_CASE("sam is invariant to positive scaling of the prediction") {
    HsiCube gt = random_cube(4, 4, 5, 7);
    HsiCube pred = random_cube(4, 4, 5, 8);
    const double base = sam(pred, gt).degrees;
    for (double lambda : {0.25, 3.0, 17.5}) {
        HsiCube scaled = pred;
        for (auto& v : scaled.data) v *= lambda;
        CHECK(sam(scaled, gt).degrees == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("ergas closed forms and the band-loop oracle") {
    HsiCube gt(4, 4, 2);
    for (auto& v : gt.data) v = 1.0;
    CHECK(ergas(gt, gt, 4).value == 0.0);

    HsiCube pred = gt;
    for (auto& v : pred.data) v = 0.9;
    CHECK(ergas(pred, gt, 4).value == doctest::Approx(2.5).epsilon(1e-9));

    HsiCube g2 = random_cube(5, 4, 3, 9);
    HsiCube p2 = random_cube(5, 4, 3, 10);
    double acc = 0.0;
    for (int64_t b = 0; b < 3; ++b) {
        double mse = 0.0, mean = 0.0;
        for (int64_t p = 0; p < 20; ++p) {
            const double d = p2.data[static_cast<size_t>(p * 3 + b)] - g2.data[static_cast<size_t>(p * 3 + b)];
            mse += d * d;
            mean += g2.data[static_cast<size_t>(p * 3 + b)];
        }
        mse /= 20.0;
        mean /= 20.0;
        acc += mse / (mean * mean);
    }
    CHECK(ergas(p2, g2, 2).value == doctest::Approx(50.0 * std::sqrt(acc / 3.0)).epsilon(1e-9));
}

TEST_CASE("ergas is invariant to scaling both cubes") {
    HsiCube gt = random_cube(4, 4, 3, 11);
    HsiCube pred = random_cube(4, 4, 3, 12);
    const double base = ergas(pred, gt, 4).value;
    for (double lambda : {0.5, 2.0, 9.0}) {
        HsiCube g = gt, p = pred;
        for (auto& v : g.data) v *= lambda;
        for (auto& v : p.data) v *= lambda;
        CHECK(ergas(p, g, 4).value == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("ssim is exactly one on identical cubes") {
    HsiCube gt = make_synthetic_cube(16, 16, 3, 13);
    CHECK(ssim(gt, gt) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim of a constant offset matches the windowed-statistics oracle") {
    HsiCube gt(12, 12, 1);
    for (auto& v : gt.data) v = 0.5;
    HsiCube pred = gt;
    for (auto& v : pred.data) v = 0.6;
    // constant images: variances and covariance vanish, so
    // ssim = (2*mx*my + C1)/(mx^2 + my^2 + C1) per window
    const double c1 = 1e-4;
    const double expect = (2.0 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1);
    CHECK(ssim(pred, gt) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ssim of anti-correlated checkerboards is below one and matches the oracle") {
    const int64_t n = 13;
    HsiCube a(n, n, 1), b(n, n, 1);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j) {
            const double v = ((i + j) % 2 == 0) ? 0.8 : 0.2;
            a.at(i, j, 0) = v;
            b.at(i, j, 0) = 1.0 - v;
        }
    const double got = ssim(a, b);
    CHECK(got < 1.0);

    // direct windowed-statistics oracle
    const double c1 = 1e-4, c2 = 9e-4;
    double win[11 * 11], total = 0.0;
    for (int dy = 0; dy < 11; ++dy)
        for (int dx = 0; dx < 11; ++dx) {
            const double ry = dy - 5, rx = dx - 5;
            win[dy * 11 + dx] = std::exp(-(ry * ry + rx * rx) / 4.5);
            total += win[dy * 11 + dx];
        }
    for (auto& v : win) v /= total;
    double acc = 0.0;
    int64_t count = 0;
    for (int64_t y = 0; y + 11 <= n; ++y)
        for (int64_t x = 0; x + 11 <= n; ++x) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int dy = 0; dy < 11; ++dy)
                for (int dx = 0; dx < 11; ++dx) {
                    const double w = win[dy * 11 + dx];
                    const double px = a.at(y + dy, x + dx, 0), py = b.at(y + dy, x + dx, 0);
                    mx += w * px;
                    my += w * py;
                    sxx += w * px * px;
                    syy += w * py * py;
                    sxy += w * px * py;
                }
            acc += (2 * mx * my + c1) * (2 * (sxy - mx * my) + c2) /
                   ((mx * mx + my * my + c1) * ((sxx - mx * mx) + (syy - my * my) + c2));
            ++count;
        }
    CHECK(got == doctest::Approx(acc / static_cast<double>(count)).epsilon(1e-12));
}

TEST_CASE("ssim rejects rasters smaller than the window") {
    HsiCube tiny = random_cube(8, 8, 1, 15);
    CHECK_THROWS_AS(ssim(tiny, tiny), ShapeError);
}

// ===========================================================================
// report and profile
// ===========================================================================

TEST_CASE("spectral profile echoes cube values") {
    HsiCube a(1, 1, 3);
    a.at(0, 0, 0) = 0.1;
    a.at(0, 0, 1) = 0.2;
    a.at(0, 0, 2) = 0.3;
    std::ostringstream os;
    write_spectral_profile(os, {{"gt", &a}, {"pred", &a}}, 0, 0);
    CHECK(os.str() == "band,gt,pred\n0,0.1,0.1\n1,0.2,0.2\n2,0.3,0.3\n");

    std::ostringstream os2;
    CHECK_THROWS_AS(write_spectral_profile(os2, {{"gt", &a}}, 1, 0), ValueError);
}

TEST_CASE("single-band cube produces a single profile row") {
    HsiCube a(2, 2, 1);
    a.at(1, 1, 0) = 0.75;
    std::ostringstream os;
    write_spectral_profile(os, {{"only", &a}}, 1, 1);
    CHECK(os.str() == "band,only\n0,0.75\n");
}

TEST_CASE("metrics report aggregates and emits both formats") {
    MetricsReport report;
    report.param_count = 1234;
    for (int i = 0; i < 3; ++i) {
        ImageMetrics m;
        m.name = "img" + std::to_string(i);
        m.psnr.db = 30.0 + i;
        m.sam.degrees = 2.0;
        m.ergas.value = 1.0;
        m.ssim = 0.9;
        report.rows.push_back(m);
    }
    const auto agg = report.aggregate();
    CHECK(agg.psnr_mean == doctest::Approx(31.0));
    CHECK(agg.psnr_std == doctest::Approx(1.0));
    CHECK(agg.ssim_mean == doctest::Approx(0.9));

    std::ostringstream csv, text;
    report.write_csv(csv);
    report.write_text(text);
    CHECK(csv.str().find("image,psnr_db") == 0);
    CHECK(csv.str().find("img0") != std::string::npos);
    CHECK(text.str().find("parameters: 1234") != std::string::npos);
}
