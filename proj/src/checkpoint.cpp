#include "hsf/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "hsf/error.hpp"

namespace hsf {

namespace {

constexpr char kMagic[8] = {'H', 'S', 'F', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(os, v);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated checkpoint: " + path);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint64_t get_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated checkpoint: " + path);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is, const std::string& path) {
    const uint64_t v = get_u64(is, path);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& header,
                     const std::vector<Parameter>& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(header.size()));
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    put_u32(os, static_cast<uint32_t>(params.size()));
    for (const auto& p : params) {
        put_u32(os, static_cast<uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        const Shape& shape = p.tensor.shape();
        put_u32(os, static_cast<uint32_t>(shape.size()));
        for (int64_t d : shape) put_u32(os, static_cast<uint32_t>(d));
        for (double v : p.tensor.data()) put_f64(os, v);
        put_u64(os, static_cast<uint64_t>(p.step));
        for (double v : p.moment1) put_f64(os, v);
        for (double v : p.moment2) put_f64(os, v);
    }
    if (!os) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    if (!is.read(magic, 8)) throw IoError("truncated checkpoint: " + path);
    if (std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad magic, not a checkpoint: " + path);
    const uint32_t version = get_u32(is, path);
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path);

    Checkpoint ckpt;
    const uint32_t header_len = get_u32(is, path);
    ckpt.header.resize(header_len);
    if (header_len && !is.read(ckpt.header.data(), header_len))
        throw IoError("truncated checkpoint: " + path);

    const uint32_t n = get_u32(is, path);
    ckpt.entries.resize(n);
    for (auto& e : ckpt.entries) {
        const uint32_t name_len = get_u32(is, path);
        e.name.resize(name_len);
        if (name_len && !is.read(e.name.data(), name_len))
            throw IoError("truncated checkpoint: " + path);
        const uint32_t ndim = get_u32(is, path);
        e.shape.resize(ndim);
        int64_t numel = 1;
        for (auto& d : e.shape) {
            d = get_u32(is, path);
            numel *= d;
        }
        e.data.resize(static_cast<size_t>(numel));
        for (auto& v : e.data) v = get_f64(is, path);
        e.step = static_cast<int64_t>(get_u64(is, path));
        e.moment1.resize(static_cast<size_t>(numel));
        for (auto& v : e.moment1) v = get_f64(is, path);
        e.moment2.resize(static_cast<size_t>(numel));
        for (auto& v : e.moment2) v = get_f64(is, path);
    }
    return ckpt;
}

}  // namespace hsf
