// ============================================================================
// homog/sha256.hpp
//
// Minimal SHA-256 (FIPS 180-4) used to fingerprint grid files in result
// documents.  Self-contained so results stay reproducible without an
// external crypto dependency.
// ============================================================================
#pragma once

#include <cstddef>
#include <string>

namespace homog {

// Lowercase hex digest (64 characters) of the given bytes.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& bytes);

}  // namespace homog
