#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsf {

// Hyperspectral image: height x width x bands, values nominally in [0,1],
// stored row-major with the bands of one pixel contiguous. Wavelengths (nm)
// are optional metadata; when present the list length must match bands.
struct HsiCube {
    int64_t height = 0;
    int64_t width = 0;
    int64_t bands = 0;
    std::vector<double> data;
    std::vector<double> wavelengths;  // empty or size == bands

    HsiCube() = default;
    HsiCube(int64_t h, int64_t w, int64_t b);

    double& at(int64_t i, int64_t j, int64_t b) {
        return data[static_cast<size_t>((i * width + j) * bands + b)];
    }
    double at(int64_t i, int64_t j, int64_t b) const {
        return data[static_cast<size_t>((i * width + j) * bands + b)];
    }
    int64_t pixels() const { return height * width; }

    void validate() const;
};

// Column-normalized spectral response: bands_in x bands_out, every column
// sums to 1 so a constant cube maps to the same constant.
struct SpectralResponse {
    int64_t bands_in = 0;
    int64_t bands_out = 0;
    std::vector<double> matrix;  // row-major [bands_in][bands_out]
    std::vector<std::string> output_names;

    double at(int64_t in_band, int64_t out_band) const {
        return matrix[static_cast<size_t>(in_band * bands_out + out_band)];
    }
    // Normalizes columns in place; throws ValueError on negative entries or a
    // column that sums to zero.
    void normalize();
};

// Binary cube container: magic, version, extents, optional wavelengths,
// little-endian float64 samples. Round-trips bit-exactly.
void save_cube(const HsiCube& cube, const std::string& path);
HsiCube load_cube(const std::string& path);

// Plain-text response table: header row of output-band names, then one row
// per input band of non-negative responses. '#' starts a comment line.
SpectralResponse load_srf(const std::string& path);
void save_srf(const SpectralResponse& srf, const std::string& path);

// Built-in 3-column response: triangular responses centered at 450/550/650 nm
// over the given band wavelengths, column-normalized. Used when no response
// table is supplied.
SpectralResponse default_srf(const std::vector<double>& wavelengths);

// Evenly spaced wavelengths over [400, 700] nm, the convention assumed when a
// cube carries no wavelength metadata.
std::vector<double> default_wavelengths(int64_t bands);

}  // namespace hsf
