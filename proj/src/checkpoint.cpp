#include "simflood/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace simflood {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("checkpoint", 0, "truncated header");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const OmegaCheckpoint& checkpoint) {
  const auto& omega = checkpoint.omega;
  put_u64(out, static_cast<std::uint64_t>(omega.rows()));
  put_u64(out, static_cast<std::uint64_t>(omega.cols()));
  put_u64(out, checkpoint.block_height);
  put_u64(out, checkpoint.iteration);
  std::vector<unsigned char> row(static_cast<std::size_t>(omega.cols()) * 4);
  for (Index i = 0; i < omega.rows(); ++i) {
    for (Index j = 0; j < omega.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint32_t>(omega(i, j));
      for (int k = 0; k < 4; ++k) row[static_cast<std::size_t>(j) * 4 + k] = static_cast<unsigned char>(bits >> (8 * k));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error("failed to write omega checkpoint");
}

OmegaCheckpoint read_checkpoint(std::istream& in) {
  OmegaCheckpoint checkpoint;
  const auto n = get_u64(in);
  const auto m = get_u64(in);
  checkpoint.block_height = get_u64(in);
  checkpoint.iteration = get_u64(in);
  if (n > (1ULL << 31) || m > (1ULL << 31)) throw ParseError("checkpoint", 0, "implausible matrix shape");
  checkpoint.omega.resize(static_cast<Index>(n), static_cast<Index>(m));
  std::vector<unsigned char> row(static_cast<std::size_t>(m) * 4);
  for (Index i = 0; i < static_cast<Index>(n); ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size())))
      throw ParseError("checkpoint", 0, "truncated matrix data");
    for (Index j = 0; j < static_cast<Index>(m); ++j) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(row[static_cast<std::size_t>(j) * 4 + k]) << (8 * k);
      checkpoint.omega(i, j) = std::bit_cast<float>(bits);
    }
  }
  return checkpoint;
}

void save_checkpoint(const std::filesystem::path& file, const OmegaCheckpoint& checkpoint) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  write_checkpoint(out, checkpoint);
}

OmegaCheckpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return read_checkpoint(in);
}

}  // namespace simflood
