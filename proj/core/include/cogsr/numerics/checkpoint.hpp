#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cogsr/numerics/tensor.hpp"

namespace cogsr::numerics {

// Binary parameter container. Layout (all integers little-endian):
//
//   char[8]  magic "COGSRCKP"
//   u32      format version (1)
//   u32      precision in bits (32 or 64)
//   u64      seed
//   u64      entry count
//   entries: u32 name length, name bytes (UTF-8),
//            u32 rank, u64 dims[rank],
//            values as little-endian IEEE-754 of the stated precision
//
// Values are stored in the tensor's native precision, so save/load is exact.
struct CheckpointHeader {
  std::uint32_t version = 1;
  std::uint32_t precision_bits = 0;
  std::uint64_t seed = 0;
};

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

template <typename T>
struct Checkpoint {
  CheckpointHeader header;
  NamedTensors<T> entries;

  // Throws ValidationError when the name is absent.
  Tensor<T> get(const std::string& name) const;
};

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const NamedTensors<T>& entries, std::uint64_t seed);

// Throws IoError on unreadable files and ValidationError when the stored
// precision differs from T or the container is malformed.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

// Reads only the header; useful for dispatching on precision.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

extern template struct Checkpoint<float>;
extern template struct Checkpoint<double>;

}  // namespace cogsr::numerics
