// Copyright 2026 The ResMem Authors.
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

#ifndef RESMEM_SRC_BINARY_IO_H_
#define RESMEM_SRC_BINARY_IO_H_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "resmem/error.h"

// Little-endian encode/decode helpers shared by the RMEM, RMLP, RRES and
// RIVF readers and writers.
namespace resmem::internal {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

class ByteWriter {
 public:
  void Magic(std::string_view magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }

  template <typename T>
  void Put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(raw, raw + sizeof(T));
    }
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }

  template <typename T>
  void PutAll(std::span<const T> values) {
    for (const T& v : values) Put(v);
  }

  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void ExpectMagic(std::string_view magic) {
    if (remaining() < magic.size() ||
        std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0) {
      throw Error(ErrorCode::kBadMagic, "expected magic \"" + std::string(magic) + "\"");
    }
    pos_ += magic.size();
  }

  template <typename T>
  T Get() {
    if (remaining() < sizeof(T)) {
      throw Error(ErrorCode::kShapeMismatch, "file truncated");
    }
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(raw, raw + sizeof(T));
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  template <typename T>
  std::vector<T> GetAll(std::uint64_t count) {
    if (count > remaining() / sizeof(T)) {
      throw Error(ErrorCode::kShapeMismatch, "declared sizes exceed file length");
    }
    std::vector<T> out(count);
    for (auto& v : out) v = Get<T>();
    return out;
  }

  void ExpectEnd() const {
    if (remaining() != 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  std::to_string(remaining()) + " trailing bytes after declared payload");
    }
  }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<char> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::vector<char>& bytes);

// Checked product for declared sizes read from untrusted headers.
std::uint64_t CheckedMul(std::uint64_t a, std::uint64_t b);

}  // namespace resmem::internal

#endif  // RESMEM_SRC_BINARY_IO_H_
