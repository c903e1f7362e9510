#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "svwa/model/pointnet_lite.hpp"

namespace svwa {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Little-endian layout: "SVWA", u16 version, config block, parameters in
/// definition order (u16 name length, name, u8 dtype, u32 rank, u32 dims,
/// raw values), then running statistics in the same encoding.
std::vector<std::uint8_t> encode_checkpoint(const ModelState& state);

/// Throws FormatError (with byte offset) on malformed input and VersionError
/// on an unsupported version. Never returns a partially decoded state.
ModelState decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path);

}  // namespace svwa
