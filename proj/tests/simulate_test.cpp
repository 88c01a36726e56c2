#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hsf/error.hpp"
#include "hsf/rng.hpp"
#include "hsf/simulate.hpp"

using namespace hsf;

namespace {

HsiCube random_cube(int64_t h, int64_t w, int64_t b, uint64_t seed) {
    HsiCube cube(h, w, b);
    Rng rng(seed);
    for (auto& v : cube.data) v = rng.uniform(0.0, 1.0);
    return cube;
}

}  // namespace

// ===========================================================================
// blur
// ===========================================================================

TEST_CASE("gaussian blur keeps a constant cube constant") {
    HsiCube cube(6, 6, 2);
    for (auto& v : cube.data) v = 0.37;
    HsiCube out = gaussian_blur(cube);
    for (double v : out.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("gaussian blur imprints the closed-form kernel on an impulse") {
    HsiCube cube(7, 7, 1);
    cube.at(3, 3, 0) = 1.0;
    HsiCube out = gaussian_blur(cube, 3, 0.5);

    // sampled kernel: exp(-(dy^2+dx^2)/(2*0.25)), normalized
    double k[3][3], total = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            k[dy + 1][dx + 1] = std::exp(-(dy * dy + dx * dx) / 0.5);
            total += k[dy + 1][dx + 1];
        }
    for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx)
            CHECK(out.at(2 + dy, 2 + dx, 0) == doctest::Approx(k[dy][dx] / total).epsilon(1e-12));
    CHECK(out.at(0, 0, 0) == 0.0);
}

TEST_CASE("gaussian blur with tiny sigma approximates the identity") {
    HsiCube cube = random_cube(5, 5, 2, 1);
    HsiCube out = gaussian_blur(cube, 3, 1e-6);
    for (size_t i = 0; i < cube.data.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(cube.data[i]).epsilon(1e-9));
}

TEST_CASE("gaussian blur rejects even kernels and preserves the kernel sum") {
    HsiCube cube = random_cube(4, 4, 1, 2);
    CHECK_THROWS_AS(gaussian_blur(cube, 4, 0.5), ValueError);

    // global mean preserved on a constant-extended case: a constant cube
    HsiCube c(8, 8, 1);
    for (auto& v : c.data) v = 0.6180339887;
    HsiCube blurred = gaussian_blur(c);
    double mean = 0.0;
    for (double v : blurred.data) mean += v;
    mean /= static_cast<double>(blurred.data.size());
    CHECK(mean == doctest::Approx(0.6180339887).epsilon(1e-9));
}

// ===========================================================================
// downsample / srf / patches
// ===========================================================================

TEST_CASE("downsample keeps constants and hits the documented sizes") {
    HsiCube cube(64, 64, 3);
    for (auto& v : cube.data) v = 0.25;
    HsiCube out = downsample(cube, 4);
    CHECK(out.height == 16);
    CHECK(out.width == 16);
    for (double v : out.data) CHECK(v == 0.25);
    CHECK_THROWS_AS(downsample(random_cube(63, 63, 1, 3), 4), ShapeError);
}

TEST_CASE("decimation picks block top-left samples, block mean averages") {
    HsiCube cube(4, 4, 1);
    for (int64_t i = 0; i < 4; ++i)
        for (int64_t j = 0; j < 4; ++j) cube.at(i, j, 0) = static_cast<double>(i * 4 + j);
    HsiCube dec = downsample(cube, 2, DownsampleMethod::kDecimate);
    CHECK(dec.at(0, 0, 0) == 0.0);
    CHECK(dec.at(0, 1, 0) == 2.0);
    CHECK(dec.at(1, 0, 0) == 8.0);
    CHECK(dec.at(1, 1, 0) == 10.0);

    HsiCube avg = downsample(cube, 2, DownsampleMethod::kBlockMean);
    CHECK(avg.at(0, 0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(avg.at(1, 1, 0) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
}

TEST_CASE("apply_srf selects bands under one-hot columns") {
    HsiCube cube = random_cube(3, 3, 4, 5);
    SpectralResponse srf;
    srf.bands_in = 4;
    srf.bands_out = 2;
    srf.matrix = {1, 0, 0, 0, 0, 1, 0, 0};  // col0 -> band0, col1 -> band2
    srf.normalize();
    HsiCube out = apply_srf(cube, srf);
    for (int64_t p = 0; p < 9; ++p) {
        CHECK(out.data[static_cast<size_t>(p * 2)] == cube.data[static_cast<size_t>(p * 4)]);
        CHECK(out.data[static_cast<size_t>(p * 2 + 1)] == cube.data[static_cast<size_t>(p * 4 + 2)]);
    }
}

TEST_CASE("apply_srf keeps constants under any normalized response") {
    HsiCube cube(4, 4, 31);
    for (auto& v : cube.data) v = 0.5;
    SpectralResponse srf = default_srf(default_wavelengths(31));
    HsiCube out = apply_srf(cube, srf);
    CHECK(out.bands == 3);
    for (double v : out.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("apply_srf matches a per-pixel dot-product oracle on a 31->3 response") {
    HsiCube cube = random_cube(4, 5, 31, 7);
    SpectralResponse srf = default_srf(default_wavelengths(31));
    HsiCube out = apply_srf(cube, srf);
    for (int64_t p = 0; p < 20; ++p)
        for (int64_t o = 0; o < 3; ++o) {
            double acc = 0.0;
            for (int64_t b = 0; b < 31; ++b)
                acc += cube.data[static_cast<size_t>(p * 31 + b)] * srf.at(b, o);
            CHECK(out.data[static_cast<size_t>(p * 3 + o)] == doctest::Approx(acc).epsilon(1e-12));
        }
    CHECK_THROWS_AS(apply_srf(random_cube(2, 2, 5, 9), srf), ShapeError);
}

TEST_CASE("extract_patches counts and contents") {
    HsiCube cube = random_cube(64, 64, 2, 11);
    auto one = extract_patches(cube, 64, 64);
    REQUIRE(one.size() == 1);
    CHECK(one[0].data == cube.data);

    HsiCube big = random_cube(128, 128, 1, 13);
    CHECK(extract_patches(big, 64, 64).size() == 4);
    auto nine = extract_patches(big, 64, 32);
    REQUIRE(nine.size() == 9);
    // index oracle: patch (i,j) starts at (32i, 32j)
    for (int64_t pi = 0; pi < 3; ++pi)
        for (int64_t pj = 0; pj < 3; ++pj) {
            const HsiCube& p = nine[static_cast<size_t>(pi * 3 + pj)];
            CHECK(p.at(0, 0, 0) == big.at(pi * 32, pj * 32, 0));
            CHECK(p.at(63, 63, 0) == big.at(pi * 32 + 63, pj * 32 + 63, 0));
        }
    CHECK_THROWS_AS(extract_patches(cube, 65, 1), ShapeError);
}

// ===========================================================================
// simulate_pair
// ===========================================================================

TEST_CASE("simulate_pair produces the documented extents") {
    HsiCube gt = make_synthetic_cube(64, 64, 31, 17);
    SpectralResponse srf = default_srf(gt.wavelengths);
    SimulatedPair pair = simulate_pair(gt, srf, 4);
    CHECK(pair.lr.height == 16);
    CHECK(pair.lr.width == 16);
    CHECK(pair.lr.bands == 31);
    CHECK(pair.msi.height == 64);
    CHECK(pair.msi.width == 64);
    CHECK(pair.msi.bands == 3);
}

TEST_CASE("simulate_pair of a constant cube is the constant pair") {
    HsiCube gt(16, 16, 8);
    for (auto& v : gt.data) v = 0.5;
    gt.wavelengths = default_wavelengths(8);
    SimulatedPair pair = simulate_pair(gt, default_srf(gt.wavelengths), 4);
    for (double v : pair.lr.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    for (double v : pair.msi.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("simulate_pair equals composing the stages by hand") {
    HsiCube gt = make_synthetic_cube(16, 16, 8, 19);
    SpectralResponse srf = default_srf(gt.wavelengths);
    SimulatedPair pair = simulate_pair(gt, srf, 2);
    HsiCube manual_lr = downsample(gaussian_blur(gt), 2);
    HsiCube manual_msi = apply_srf(gt, srf);
    CHECK(pair.lr.data == manual_lr.data);
    CHECK(pair.msi.data == manual_msi.data);
}

TEST_CASE("pipeline output stays within the unit range") {
    HsiCube gt = make_synthetic_cube(32, 32, 8, 23);
    for (double v : gt.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    SimulatedPair pair = simulate_pair(gt, default_srf(gt.wavelengths), 4);
    for (double v : pair.lr.data) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
    for (double v : pair.msi.data) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("simulation is deterministic") {
    HsiCube a = make_synthetic_cube(16, 16, 4, 29);
    HsiCube b = make_synthetic_cube(16, 16, 4, 29);
    CHECK(a.data == b.data);
    SimulatedPair pa = simulate_pair(a, default_srf(a.wavelengths), 2);
    SimulatedPair pb = simulate_pair(b, default_srf(b.wavelengths), 2);
    CHECK(pa.lr.data == pb.lr.data);
    CHECK(pa.msi.data == pb.msi.data);
}

// ===========================================================================
// cube container
// ===========================================================================

TEST_CASE("cube save/load round trips bit-exactly") {
    HsiCube cube = make_synthetic_cube(5, 7, 3, 31);
    const std::string path = "test_roundtrip.cube";
    save_cube(cube, path);
    HsiCube back = load_cube(path);
    CHECK(back.height == cube.height);
    CHECK(back.width == cube.width);
    CHECK(back.bands == cube.bands);
    CHECK(back.data == cube.data);
    CHECK(back.wavelengths == cube.wavelengths);
    std::remove(path.c_str());
}

TEST_CASE("minimal 1x1x1 cube round trips") {
    HsiCube cube(1, 1, 1);
    cube.at(0, 0, 0) = 0.123456789;
    const std::string path = "test_tiny.cube";
    save_cube(cube, path);
    HsiCube back = load_cube(path);
    CHECK(back.data == cube.data);
    CHECK(back.wavelengths.empty());
    std::remove(path.c_str());
}

TEST_CASE("container errors are distinct") {
    const std::string path = "test_bad.cube";
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOTACUBE-----";
    }
    CHECK_THROWS_WITH_AS(load_cube(path), doctest::Contains("bad magic"), IoError);

    HsiCube cube = make_synthetic_cube(4, 4, 2, 37);
    save_cube(cube, path);
    {
        // truncate the payload
        std::ifstream is(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_WITH_AS(load_cube(path), doctest::Contains("truncated"), IoError);
    CHECK_THROWS_WITH_AS(load_cube("does_not_exist.cube"), doctest::Contains("cannot open"), IoError);
    std::remove(path.c_str());
}

// ===========================================================================
// response tables
// ===========================================================================

TEST_CASE("response table round trip and validation") {
    SpectralResponse srf = default_srf(default_wavelengths(8));
    for (int64_t j = 0; j < srf.bands_out; ++j) {
        double col = 0.0;
        for (int64_t i = 0; i < srf.bands_in; ++i) {
            CHECK(srf.at(i, j) >= 0.0);
            col += srf.at(i, j);
        }
        CHECK(col == doctest::Approx(1.0).epsilon(1e-9));
    }

    const std::string path = "test_srf.txt";
    save_srf(srf, path);
    SpectralResponse back = load_srf(path);
    CHECK(back.bands_in == srf.bands_in);
    CHECK(back.bands_out == srf.bands_out);
    for (size_t i = 0; i < srf.matrix.size(); ++i)
        CHECK(back.matrix[i] == doctest::Approx(srf.matrix[i]).epsilon(1e-12));
    std::remove(path.c_str());
}

TEST_CASE("malformed response tables are rejected") {
    const std::string path = "test_srf_bad.txt";
    {
        std::ofstream os(path);
        os << "R G B\n1 0\n";  // short row
    }
    CHECK_THROWS_AS(load_srf(path), ValueError);
    {
        std::ofstream os(path);
        os << "R G B\n1 0 -1\n";  // negative entry
    }
    CHECK_THROWS_AS(load_srf(path), ValueError);
    {
        std::ofstream os(path);
        os << "R G B\n1 0 0\n";  // zero column
    }
    CHECK_THROWS_AS(load_srf(path), ValueError);
    std::remove(path.c_str());
}
