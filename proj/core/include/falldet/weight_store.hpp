#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "falldet/tensor.hpp"

namespace falldet {

/// IEEE 802.3 CRC-32 (the zlib polynomial) over raw bytes.
std::uint32_t crc32(std::span<const std::byte> bytes);
std::uint32_t crc32_floats(std::span<const float> values);

struct WeightBlob {
  Shape shape;
  std::vector<float> data;
  std::uint32_t crc = 0;
};

/// Named parameter blobs, ordered by name.
///
/// On disk (little-endian):
///   "C3DW" u32 version=1 u32 entry_count
///   per entry: u16 name_len, name bytes, u8 ndim, ndim x u32 dims,
///              prod(dims) x f32, u32 crc32(float bytes)
class WeightStore {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void insert(const std::string& name, Tensor tensor);
  bool contains(const std::string& name) const { return blobs_.contains(name); }
  const WeightBlob& at(const std::string& name) const;
  WeightBlob take(const std::string& name);
  const std::map<std::string, WeightBlob>& blobs() const noexcept { return blobs_; }
  std::size_t size() const noexcept { return blobs_.size(); }

 private:
  std::map<std::string, WeightBlob> blobs_;
};

/// Throws kFormat (magic/version/header), kCorruption (CRC mismatch or
/// truncation) or kIo.
WeightStore load_weights(const std::filesystem::path& path);
void save_weights(const WeightStore& store, const std::filesystem::path& path);

}  // namespace falldet
