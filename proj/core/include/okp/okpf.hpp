#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "okp/feature_map.hpp"

namespace okp {

/// OKPF: "OKPF", u8 version, eleven u32 header fields, then float32 payload.
/// All values little-endian; payload is row-major, channel-last.
inline constexpr std::uint8_t kOkpfVersion = 1;
inline constexpr std::size_t kOkpfHeaderSize = 49;

std::vector<std::uint8_t> encode_okpf(const FeatureMap& map);

/// Decodes exactly one OKPF record occupying all of `bytes`.
FeatureMap decode_okpf(std::span<const std::uint8_t> bytes);

FeatureMap read_feature_file(const std::filesystem::path& path);
void write_feature_file(const FeatureMap& map, const std::filesystem::path& path);

}  // namespace okp
