#pragma once

// Binary checkpoint, all integers and doubles little-endian:
//
//   magic "TSCMRAR\0", u32 version (=1)
//   u32 k, u32 vocab_size, u32 residents, u32 activities
//   u32 module_count, u32 out_channels[module_count]
//   u32 tensor_count, then per tensor:
//     u32 name_len, name bytes, u8 role (0 weight, 1 bias),
//     u32 rank, u64 extents[rank], f64 values[numel] (IEEE-754 bit patterns)
//   u64 FNV-1a hash of every preceding byte
//
// Values round-trip bit-exactly.

#include <filesystem>

#include "tscmrar/model.hpp"

namespace tscmrar {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Writes to a temporary sibling and renames, so a crash never leaves a
// truncated checkpoint at `path`.
void save_params(const ModelParams& params, const std::filesystem::path& path);

// Rebuilds the layout from the header. Throws DataError on version mismatch,
// truncation or a bad hash, ShapeError when tensors disagree with the header.
ModelParams load_params(const std::filesystem::path& path);

// As above, but additionally requires the checkpoint to match `expected`
// tensor by tensor; the error names the first tensor that differs.
ModelParams load_params(const std::filesystem::path& path, const ModelParams& expected);

}  // namespace tscmrar
