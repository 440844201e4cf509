#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>

#include "bhavnet/hyperparams.hpp"
#include "bhavnet/params.hpp"

namespace bhavnet {

/// Binary checkpoint layout (all integers little-endian):
///
///   "BHAVNETC"                 8-byte magic
///   u32 version                currently 1
///   u32 n, n bytes             hyperparameters as JSON text
///   u32 count                  number of arrays
///   per array:
///     u32 n, n bytes           name (ParamSet::for_each naming)
///     u32 rank, u64[rank]      extents
///     f32[prod(extents)]       row-major values
///
/// Loading checks every name and extent against the shapes implied by the
/// stored hyperparameters and throws CheckpointError on any mismatch,
/// truncation or trailing data.
inline constexpr std::string_view kCheckpointMagic = "BHAVNETC";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  HyperParams hp;
};

std::string serialize_checkpoint(const ModelParams& params, const HyperParams& hp);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const ModelParams& params, const HyperParams& hp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bhavnet
