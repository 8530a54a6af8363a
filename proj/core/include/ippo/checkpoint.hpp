#pragma once

// Checkpoint layout (all integers little-endian u32):
//   "IPPO" | version | { name_len | name | rank | dims... | f32 values... }*
//   | crc32 of everything before it
// Values are stored as IEEE-754 binary32, so a load rounds to float.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ippo/networks.hpp"

namespace ippo {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const NetworkParameters& params);
/// Throws CheckpointError on bad magic, version, truncation or CRC mismatch.
NetworkParameters decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const NetworkParameters& params,
                     const std::filesystem::path& path);
NetworkParameters load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace ippo
