#include "trailforge/hashing.hpp"

#include "trailforge/errors.hpp"

#include <fmt/core.h>
#include <openssl/evp.h>

#include <fstream>
#include <memory>

namespace trailforge {

namespace {

std::string hex(const unsigned char* digest, unsigned len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(digits[digest[i] >> 4]);
        out.push_back(digits[digest[i] & 0xf]);
    }
    return out;
}

struct Sha256Ctx {
    EVP_MD_CTX* ctx;
    Sha256Ctx() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            fail(errc::internal, "sha256 init failed");
    }
    ~Sha256Ctx() { EVP_MD_CTX_free(ctx); }
    void update(const void* data, size_t n) {
        if (EVP_DigestUpdate(ctx, data, n) != 1) fail(errc::internal, "sha256 update failed");
    }
    std::string finish() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned len = 0;
        if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) fail(errc::internal, "sha256 final failed");
        return hex(digest, len);
    }
};

} // namespace

std::string sha256_hex(std::string_view data) {
    Sha256Ctx c;
    c.update(data.data(), data.size());
    return c.finish();
}

std::string sha256_file_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io, fmt::format("cannot open {}", path.string()));
    Sha256Ctx c;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) c.update(buf, static_cast<size_t>(in.gcount()));
    return c.finish();
}

uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace trailforge
