#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace suitegen {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// First 8 bytes of SHA-256, big-endian. Platform-stable seed derivation.
std::uint64_t stable_hash64(std::string_view data);

} // namespace suitegen
