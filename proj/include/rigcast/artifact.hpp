#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rigcast/config.hpp"
#include "rigcast/model.hpp"

namespace rigcast {

// Layout: magic "RIGCAST\0", u32 version, then length-prefixed sections
// (manifest text, model with its codebooks), then a CRC-32 of all preceding
// bytes. Integers and doubles are little-endian; doubles are stored as their
// IEEE-754 bit patterns, so a round trip is exact.
inline constexpr std::uint32_t kArtifactVersion = 1;

struct ModelArtifact {
  PipelineConfig config;
  ForecastModel model;

  bool operator==(const ModelArtifact&) const = default;
};

std::string serialize_artifact(const ModelArtifact& artifact);
// Throws CorruptArtifactError on a bad magic, version, checksum or layout.
ModelArtifact deserialize_artifact(std::string_view bytes);

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace rigcast
