#include "hsf/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hsf/error.hpp"

namespace hsf {

std::string git_blob_sha1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for hashing: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    const std::string content = buf.str();
    const std::string header = "blob " + std::to_string(content.size()) + '\0';

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, digest, &digest_len);
    EVP_MD_CTX_free(ctx);

    std::string hex(digest_len * 2, '0');
    static const char* kHex = "0123456789abcdef";
    for (unsigned int i = 0; i < digest_len; ++i) {
        hex[2 * i] = kHex[digest[i] >> 4];
        hex[2 * i + 1] = kHex[digest[i] & 0xf];
    }
    return hex;
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

void RunManifest::add_input(const std::string& path) {
    inputs.emplace_back(path, git_blob_sha1(path));
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["seed"] = seed;
    auto& in = j["inputs"] = nlohmann::json::array();
    for (const auto& [p, hash] : inputs) in.push_back({{"path", p}, {"sha1", hash}});
    j["outputs"] = outputs;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    std::ofstream os(path);
    if (!os) throw IoError("cannot write manifest: " + path);
    os << j.dump(2) << "\n";
}

}  // namespace hsf
