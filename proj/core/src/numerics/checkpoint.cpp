#include "cogsr/numerics/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "cogsr/error.hpp"

namespace cogsr::numerics {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'O', 'G', 'S', 'R', 'C', 'K', 'P'};

template <typename U>
void put_le(std::ostream& os, U value) {
  static_assert(std::is_unsigned_v<U>);
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is, const std::filesystem::path& path) {
  static_assert(std::is_unsigned_v<U>);
  std::array<unsigned char, sizeof(U)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw ValidationError("truncated checkpoint: " + path.string());
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

template <typename T>
using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

CheckpointHeader read_header(std::istream& is, const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw ValidationError("not a checkpoint file: " + path.string());
  CheckpointHeader h;
  h.version = get_le<std::uint32_t>(is, path);
  if (h.version != 1) throw ValidationError("unsupported checkpoint version " + std::to_string(h.version));
  h.precision_bits = get_le<std::uint32_t>(is, path);
  h.seed = get_le<std::uint64_t>(is, path);
  return h;
}

}  // namespace

template <typename T>
Tensor<T> Checkpoint<T>::get(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return t;
  }
  throw ValidationError("checkpoint has no entry named " + name);
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const NamedTensors<T>& entries, std::uint64_t seed) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, 1);
  put_le<std::uint32_t>(os, sizeof(T) * 8);
  put_le<std::uint64_t>(os, seed);
  put_le<std::uint64_t>(os, entries.size());
  for (const auto& [name, tensor] : entries) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensor.ndim()));
    for (std::size_t d : tensor.shape()) put_le<std::uint64_t>(os, d);
    for (T v : tensor.data()) put_le<Bits<T>>(os, std::bit_cast<Bits<T>>(v));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path.string());
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  Checkpoint<T> ck;
  ck.header = read_header(is, path);
  if (ck.header.precision_bits != sizeof(T) * 8) {
    throw ValidationError("checkpoint " + path.string() + " stores " + std::to_string(ck.header.precision_bits) +
                          "-bit values, expected " + std::to_string(sizeof(T) * 8));
  }
  const auto count = get_le<std::uint64_t>(is, path);
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto name_len = get_le<std::uint32_t>(is, path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto rank = get_le<std::uint32_t>(is, path);
    if (rank == 0 || rank > 8) throw ValidationError("bad tensor rank in checkpoint: " + path.string());
    Shape shape(rank);
    for (auto& d : shape) d = get_le<std::uint64_t>(is, path);
    std::vector<T> values(shape_size(shape));
    for (T& v : values) v = std::bit_cast<T>(get_le<Bits<T>>(is, path));
    ck.entries.emplace_back(std::move(name), Tensor<T>::from(std::move(shape), std::move(values)));
  }
  return ck;
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  return read_header(is, path);
}

template struct Checkpoint<float>;
template struct Checkpoint<double>;
template void save_checkpoint<float>(const std::filesystem::path&, const NamedTensors<float>&, std::uint64_t);
template void save_checkpoint<double>(const std::filesystem::path&, const NamedTensors<double>&, std::uint64_t);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace cogsr::numerics
