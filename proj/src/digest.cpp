#include "tcmdw/digest.hpp"

#include <fstream>
#include <memory>
#include <vector>

#include <openssl/evp.h>

#include "tcmdw/errors.hpp"

namespace tcmdw {

namespace {

std::string hex_encode(const unsigned char* data, unsigned int len) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

struct CtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using CtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;

CtxPtr make_ctx() {
    CtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "sha256 init failed");
    }
    return ctx;
}

std::string finish(EVP_MD_CTX* ctx) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        throw Error(ErrorCode::IoError, "sha256 final failed");
    }
    return hex_encode(md, len);
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    auto ctx = make_ctx();
    EVP_DigestUpdate(ctx.get(), data.data(), data.size());
    return finish(ctx.get());
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    auto ctx = make_ctx();
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(got));
    }
    return finish(ctx.get());
}

std::string sha256_file_prefix(const std::filesystem::path& path, std::uint64_t bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    auto ctx = make_ctx();
    std::vector<char> buf(1 << 16);
    std::uint64_t remaining = bytes;
    while (remaining > 0 && in) {
        const auto want = static_cast<std::streamsize>(std::min<std::uint64_t>(remaining, buf.size()));
        in.read(buf.data(), want);
        const auto got = in.gcount();
        if (got <= 0) break;
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(got));
        remaining -= static_cast<std::uint64_t>(got);
    }
    if (remaining > 0) {
        throw Error(ErrorCode::DigestMismatch,
                    path.string() + " shorter than manifest records");
    }
    return finish(ctx.get());
}

}  // namespace tcmdw
