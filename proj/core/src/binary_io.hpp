#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "falldet/error.hpp"

namespace falldet::detail {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }

  void read_bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::kCorruption, path_.string() + " is truncated");
    }
  }

  template <typename T>
  T read() {
    T value;
    read_bytes(&value, sizeof(T));
    return value;
  }

  std::string read_string(std::size_t n) {
    std::string s(n, '\0');
    read_bytes(s.data(), n);
    return s;
  }

  bool at_eof() { return in_.peek() == std::ifstream::traits_type::eof(); }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }

  void write_bytes(const void* src, std::size_t n) {
    out_.write(static_cast<const char*>(src), static_cast<std::streamsize>(n));
    if (!out_) throw Error(ErrorCode::kIo, "write failed for " + path_.string());
  }

  template <typename T>
  void write(T value) {
    write_bytes(&value, sizeof(T));
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::kIo, "write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace falldet::detail
