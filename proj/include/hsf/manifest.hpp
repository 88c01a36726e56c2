#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hsf {

// SHA-1 over "blob <size>\0" + file bytes, hex encoded — the same content id
// git assigns the file.
std::string git_blob_sha1(const std::string& path);

std::string iso8601_utc_now();

// One manifest per command run, written next to the outputs. Together with
// the recorded argv and seed it is enough to replay the run bit-identically.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::map<std::string, std::string> config;
    uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, content hash
    std::vector<std::string> outputs;
    std::string started_at;
    std::string finished_at;

    void add_input(const std::string& path);  // hashes the file
    void write(const std::string& path) const;
};

}  // namespace hsf
