#include "falldet/weight_store.hpp"

#include <zlib.h>

#include <limits>

#include "binary_io.hpp"
#include "falldet/error.hpp"

namespace falldet {

namespace {
constexpr char kMagic[4] = {'C', '3', 'D', 'W'};
}

std::uint32_t crc32(std::span<const std::byte> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed large buffers piecewise.
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
    crc = ::crc32(crc, p, n);
    p += n;
    left -= n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32_floats(std::span<const float> values) { return crc32(std::as_bytes(values)); }

void WeightStore::insert(const std::string& name, Tensor tensor) {
  WeightBlob blob;
  blob.shape = tensor.shape();
  blob.data.assign(tensor.data().begin(), tensor.data().end());
  blob.crc = crc32_floats(blob.data);
  blobs_.insert_or_assign(name, std::move(blob));
}

const WeightBlob& WeightStore::at(const std::string& name) const {
  auto it = blobs_.find(name);
  if (it == blobs_.end()) throw Error(ErrorCode::kIncomplete, "missing weight blob " + name);
  return it->second;
}

WeightBlob WeightStore::take(const std::string& name) {
  auto node = blobs_.extract(name);
  if (node.empty()) throw Error(ErrorCode::kIncomplete, "missing weight blob " + name);
  return std::move(node.mapped());
}

WeightStore load_weights(const std::filesystem::path& path) {
  detail::BinaryReader in(path);
  char magic[4];
  try {
    in.read_bytes(magic, 4);
  } catch (const Error&) {
    throw Error(ErrorCode::kFormat, path.string() + " is too short to be a C3DW file");
  }
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::kFormat, path.string() + ": bad magic, expected C3DW");
  const auto version = in.read<std::uint32_t>();
  if (version != WeightStore::kVersion) {
    throw Error(ErrorCode::kFormat, path.string() + ": unsupported C3DW version " + std::to_string(version));
  }
  const auto entries = in.read<std::uint32_t>();

  WeightStore store;
  for (std::uint32_t i = 0; i < entries; ++i) {
    const auto name_len = in.read<std::uint16_t>();
    std::string name = in.read_string(name_len);
    const auto ndim = in.read<std::uint8_t>();
    if (ndim == 0 || ndim > kMaxRank) {
      throw Error(ErrorCode::kFormat, path.string() + ": entry " + name + " has rank " + std::to_string(ndim));
    }
    Shape shape(ndim);
    for (auto& d : shape) d = in.read<std::uint32_t>();
    std::size_t count = 0;
    try {
      count = checked_element_count(shape);
    } catch (const Error&) {
      throw Error(ErrorCode::kFormat, path.string() + ": entry " + name + " has empty shape " + shape_to_string(shape));
    }
    WeightBlob blob;
    blob.shape = std::move(shape);
    blob.data.resize(count);
    in.read_bytes(blob.data.data(), count * sizeof(float));
    blob.crc = in.read<std::uint32_t>();
    const auto actual = crc32_floats(blob.data);
    if (actual != blob.crc) {
      throw Error(ErrorCode::kCorruption, path.string() + ": CRC32 mismatch on " + name);
    }
    if (store.contains(name)) throw Error(ErrorCode::kFormat, path.string() + ": duplicate entry " + name);
    store.insert(name, Tensor(blob.shape, std::move(blob.data)));
  }
  if (!in.at_eof()) throw Error(ErrorCode::kCorruption, path.string() + ": trailing bytes after last entry");
  return store;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  detail::BinaryWriter out(path);
  out.write_bytes(kMagic, 4);
  out.write<std::uint32_t>(WeightStore::kVersion);
  out.write<std::uint32_t>(static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, blob] : store.blobs()) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::kFormat, "blob name too long: " + name);
    }
    out.write<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    out.write_bytes(name.data(), name.size());
    out.write<std::uint8_t>(static_cast<std::uint8_t>(blob.shape.size()));
    for (auto d : blob.shape) out.write<std::uint32_t>(static_cast<std::uint32_t>(d));
    out.write_bytes(blob.data.data(), blob.data.size() * sizeof(float));
    out.write<std::uint32_t>(crc32_floats(blob.data));
  }
  out.close();
}

}  // namespace falldet
