#pragma once

/* SHA-256 digests for run manifests (hex string output). */

#include <cstdint>
#include <string>

namespace ietlab {

std::string sha256_hex(const void* data, size_t len);
inline std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

}  // namespace ietlab
