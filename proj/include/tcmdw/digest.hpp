#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tcmdw {

// Hex-encoded SHA-256. Backed by OpenSSL's EVP interface.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Digest of the first `bytes` bytes of a file. The fact table is append-only,
// so its manifest entry pins a prefix rather than the whole file.
std::string sha256_file_prefix(const std::filesystem::path& path, std::uint64_t bytes);

}  // namespace tcmdw
