#pragma once

#include "specdesc/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace specdesc::io {

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Little binary writer/reader used by the cache and pair-set containers.
class BinaryWriter {
 public:
  template <typename T>
  void put(const T& value) {
    buffer_.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void put_bytes(const void* data, std::size_t size) {
    buffer_.append(static_cast<const char*>(data), size);
  }
  void put_string(std::string_view s) {
    put<std::uint64_t>(s.size());
    buffer_.append(s);
  }
  const std::string& data() const { return buffer_; }

 private:
  std::string buffer_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    T value;
    get_bytes(&value, sizeof(T));
    return value;
  }
  void get_bytes(void* out, std::size_t size);
  std::string get_string();
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace specdesc::io
