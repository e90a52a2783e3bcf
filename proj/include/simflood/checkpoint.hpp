#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "simflood/flood.hpp"

namespace simflood {

/// Omega checkpoint: four little-endian uint64 header words
/// (n, m, block_height, iteration) followed by n*m little-endian IEEE-754
/// binary32 values in row-major order.
struct OmegaCheckpoint {
  Similarity omega;
  std::uint64_t block_height = 1024;
  std::uint64_t iteration = 0;
};

void write_checkpoint(std::ostream& out, const OmegaCheckpoint& checkpoint);
OmegaCheckpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& file, const OmegaCheckpoint& checkpoint);
OmegaCheckpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace simflood
