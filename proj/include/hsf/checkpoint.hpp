#pragma once

#include <string>
#include <vector>

#include "hsf/tensor.hpp"

namespace hsf {

// Binary parameter container: magic, version, a free-form header blob (the
// architecture descriptor), then named entries with raw little-endian float64
// values and Adam state. Byte-for-byte reproducible for a given seed.
struct CheckpointEntry {
    std::string name;
    Shape shape;
    std::vector<double> data;
    std::vector<double> moment1;
    std::vector<double> moment2;
    int64_t step = 0;
};

struct Checkpoint {
    std::string header;
    std::vector<CheckpointEntry> entries;
};

void save_checkpoint(const std::string& path, const std::string& header,
                     const std::vector<Parameter>& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hsf
