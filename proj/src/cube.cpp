#include "hsf/cube.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsf/error.hpp"

namespace hsf {

HsiCube::HsiCube(int64_t h, int64_t w, int64_t b) : height(h), width(w), bands(b) {
    if (h < 1 || w < 1 || b < 1)
        throw ShapeError("cube: extents must be positive, got " + std::to_string(h) + "x" +
                         std::to_string(w) + "x" + std::to_string(b));
    data.assign(static_cast<size_t>(h * w * b), 0.0);
}

void HsiCube::validate() const {
    if (height < 1 || width < 1 || bands < 1) throw ShapeError("cube: non-positive extents");
    if (static_cast<int64_t>(data.size()) != height * width * bands)
        throw ShapeError("cube: data size does not match extents");
    if (!wavelengths.empty() && static_cast<int64_t>(wavelengths.size()) != bands)
        throw ShapeError("cube: wavelength list length " + std::to_string(wavelengths.size()) +
                         " does not match band count " + std::to_string(bands));
}

void SpectralResponse::normalize() {
    if (bands_in < 1 || bands_out < 1) throw ValueError("spectral response: empty matrix");
    for (int64_t j = 0; j < bands_out; ++j) {
        double colsum = 0.0;
        for (int64_t i = 0; i < bands_in; ++i) {
            const double v = at(i, j);
            if (v < 0.0)
                throw ValueError("spectral response: negative entry at row " + std::to_string(i) +
                                 ", column " + std::to_string(j));
            colsum += v;
        }
        if (colsum <= 0.0)
            throw ValueError("spectral response: column " + std::to_string(j) + " sums to zero");
        for (int64_t i = 0; i < bands_in; ++i)
            matrix[static_cast<size_t>(i * bands_out + j)] /= colsum;
    }
}

// ---------------------------------------------------------------------------
// cube container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'H', 'S', 'C', 'U', 'B', 'E', '1', '\n'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw IoError("truncated cube file: " + path);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

double get_f64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw IoError("truncated cube file: " + path);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

void save_cube(const HsiCube& cube, const std::string& path) {
    cube.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(cube.height));
    put_u32(os, static_cast<uint32_t>(cube.width));
    put_u32(os, static_cast<uint32_t>(cube.bands));
    put_u32(os, cube.wavelengths.empty() ? 0u : 1u);
    for (double wl : cube.wavelengths) put_f64(os, wl);
    for (double v : cube.data) put_f64(os, v);
    if (!os) throw IoError("write failed: " + path);
}

HsiCube load_cube(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open cube file: " + path);
    char magic[8];
    if (!is.read(magic, 8)) throw IoError("truncated cube file: " + path);
    if (std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad magic, not a cube file: " + path);
    const uint32_t version = get_u32(is, path);
    if (version != kVersion)
        throw IoError("unsupported cube version " + std::to_string(version) + ": " + path);
    const int64_t h = get_u32(is, path);
    const int64_t w = get_u32(is, path);
    const int64_t b = get_u32(is, path);
    if (h < 1 || w < 1 || b < 1) throw IoError("bad extents in cube file: " + path);
    const uint32_t has_wl = get_u32(is, path);
    HsiCube cube(h, w, b);
    if (has_wl) {
        cube.wavelengths.resize(static_cast<size_t>(b));
        for (auto& wl : cube.wavelengths) wl = get_f64(is, path);
    }
    for (auto& v : cube.data) v = get_f64(is, path);
    return cube;
}

// ---------------------------------------------------------------------------
// spectral response tables
// ---------------------------------------------------------------------------

SpectralResponse load_srf(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open response table: " + path);
    SpectralResponse srf;
    std::string line;
    bool header_done = false;
    while (std::getline(is, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (!header_done) {
            std::string name;
            while (ls >> name) srf.output_names.push_back(name);
            if (!srf.output_names.empty()) {
                srf.bands_out = static_cast<int64_t>(srf.output_names.size());
                header_done = true;
            }
            continue;
        }
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) continue;
        if (static_cast<int64_t>(row.size()) != srf.bands_out)
            throw ValueError("response table row " + std::to_string(srf.bands_in + 1) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(srf.bands_out) + ": " + path);
        srf.matrix.insert(srf.matrix.end(), row.begin(), row.end());
        srf.bands_in += 1;
    }
    if (!header_done || srf.bands_in == 0)
        throw ValueError("response table has no header or no rows: " + path);
    srf.normalize();
    return srf;
}

void save_srf(const SpectralResponse& srf, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    for (size_t i = 0; i < srf.output_names.size(); ++i)
        os << (i ? " " : "") << srf.output_names[i];
    os << "\n";
    os.precision(17);
    for (int64_t i = 0; i < srf.bands_in; ++i) {
        for (int64_t j = 0; j < srf.bands_out; ++j) os << (j ? " " : "") << srf.at(i, j);
        os << "\n";
    }
    if (!os) throw IoError("write failed: " + path);
}

SpectralResponse default_srf(const std::vector<double>& wavelengths) {
    if (wavelengths.empty()) throw ValueError("default_srf: empty wavelength list");
    SpectralResponse srf;
    srf.bands_in = static_cast<int64_t>(wavelengths.size());
    srf.bands_out = 3;
    srf.output_names = {"B", "G", "R"};
    srf.matrix.assign(static_cast<size_t>(srf.bands_in * srf.bands_out), 0.0);
    const double centers[3] = {450.0, 550.0, 650.0};
    const double half_width = 100.0;
    for (int64_t i = 0; i < srf.bands_in; ++i)
        for (int64_t j = 0; j < 3; ++j) {
            const double t = 1.0 - std::abs(wavelengths[static_cast<size_t>(i)] - centers[j]) / half_width;
            srf.matrix[static_cast<size_t>(i * 3 + j)] = t > 0.0 ? t : 0.0;
        }
    srf.normalize();
    return srf;
}

std::vector<double> default_wavelengths(int64_t bands) {
    std::vector<double> wl(static_cast<size_t>(bands));
    if (bands == 1) {
        wl[0] = 550.0;
        return wl;
    }
    for (int64_t i = 0; i < bands; ++i)
        wl[static_cast<size_t>(i)] = 400.0 + 300.0 * static_cast<double>(i) / static_cast<double>(bands - 1);
    return wl;
}

}  // namespace hsf
