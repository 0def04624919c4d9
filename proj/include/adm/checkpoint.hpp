#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "adm/net.hpp"

namespace adm {

// Checkpoint layout: magic "ADMC", u32 format version, u64 header length,
// JSON header (schema fingerprint + full schema, grid, net config, tensor
// manifest), then raw little-endian f64 tensor data in manifest order.

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelParams& params, const std::string& path);

/// Loads a checkpoint. Distinct errors: CheckpointVersionError on an
/// unsupported version, CheckpointFingerprintError when
/// expected_fingerprint is given and disagrees, CheckpointFormatError on
/// bad magic or truncation.
ModelParams load_checkpoint(const std::string& path,
                            std::optional<std::uint64_t> expected_fingerprint = std::nullopt);

}  // namespace adm
