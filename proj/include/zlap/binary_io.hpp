// Copyright 2026 The zlap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZLAP_BINARY_IO_HPP
#define ZLAP_BINARY_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "zlap/error.hpp"

// Little-endian readers/writers shared by the feature, graph and score file
// formats.

namespace zlap::binary {

template <typename T>
T to_little_endian(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes.data(), sizeof(T));
  }
  return value;
}

class Writer {
 public:
  explicit Writer(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  }

  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }

  template <typename T>
  void put(T value) {
    value = to_little_endian(value);
    raw(&value, sizeof(T));
  }

  template <typename Stored, typename T>
  void put_all(std::span<const T> values) {
    if constexpr (std::is_same_v<Stored, T> &&
                  std::endian::native == std::endian::little) {
      raw(values.data(), values.size_bytes());
    } else {
      for (const T& v : values) put(static_cast<Stored>(v));
    }
  }

  void finish() {
    out_.flush();
    if (!out_) throw Error(ErrorKind::io, "write to '" + path_ + "' failed");
  }

 private:
  void raw(const void* data, std::size_t bytes) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out_) throw Error(ErrorKind::io, "write to '" + path_ + "' failed");
  }

  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorKind::io, "cannot open '" + path + "'");
    in_.seekg(0, std::ios::end);
    remaining_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0, std::ios::beg);
  }

  const std::string& path() const { return path_; }
  std::uint64_t remaining() const { return remaining_; }

  void expect_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    if (remaining_ < tag.size())
      throw Error(ErrorKind::format, "'" + path_ + "' is too short for a header");
    raw(got.data(), got.size());
    if (got != tag)
      throw Error(ErrorKind::format, "'" + path_ + "' does not start with magic '" +
                                         std::string(tag) + "'");
  }

  template <typename T>
  T get() {
    require(sizeof(T));
    T value;
    raw(&value, sizeof(T));
    return to_little_endian(value);
  }

  /// Reads `count` elements stored as `Stored`, after checking that enough
  /// bytes remain (so corrupt counts fail before allocating).
  template <typename Stored, typename T = Stored>
  std::vector<T> get_all(std::uint64_t count) {
    if (count > remaining_ / sizeof(Stored)) {
      throw Error(ErrorKind::size, "'" + path_ + "' payload truncated: need " +
                                       std::to_string(count * sizeof(Stored)) +
                                       " bytes, have " + std::to_string(remaining_));
    }
    std::vector<T> values(static_cast<std::size_t>(count));
    if constexpr (std::is_same_v<Stored, T> &&
                  std::endian::native == std::endian::little) {
      raw(values.data(), values.size() * sizeof(T));
    } else {
      for (auto& v : values) v = static_cast<T>(get<Stored>());
    }
    return values;
  }

  void expect_end() const {
    if (remaining_ != 0)
      throw Error(ErrorKind::size, "'" + path_ + "' has " + std::to_string(remaining_) +
                                       " trailing bytes");
  }

 private:
  void require(std::uint64_t bytes) const {
    if (bytes > remaining_)
      throw Error(ErrorKind::size, "'" + path_ + "' payload truncated");
  }

  void raw(void* data, std::size_t bytes) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (!in_) throw Error(ErrorKind::io, "read from '" + path_ + "' failed");
    remaining_ -= bytes;
  }

  std::string path_;
  std::ifstream in_;
  std::uint64_t remaining_ = 0;
};

}  // namespace zlap::binary

#endif  // ZLAP_BINARY_IO_HPP
