// Copyright 2026 The VOCA-cpp Authors.
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

#ifndef VOCA_BINARY_IO_H_
#define VOCA_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voca/error.h"

namespace voca {

// Little-endian byte sink for the container formats. The host is assumed to
// be little-endian (checked at compile time in binary_io.cc).
class ByteWriter {
 public:
  void Bytes(const void* data, size_t size);
  void Magic(std::string_view magic) { Bytes(magic.data(), magic.size()); }
  void U8(uint8_t v) { Bytes(&v, 1); }
  void U32(uint32_t v) { Bytes(&v, 4); }
  void I32(int32_t v) { Bytes(&v, 4); }
  void U64(uint64_t v) { Bytes(&v, 8); }
  void F32(float v) { Bytes(&v, 4); }
  void F32s(std::span<const float> v) { Bytes(v.data(), v.size() * 4); }
  void String(std::string_view s);

  const std::vector<char>& buffer() const { return buffer_; }
  size_t size() const { return buffer_.size(); }

 private:
  std::vector<char> buffer_;
};

// Bounds-checked reader; any overrun raises a format error naming `what`.
class ByteReader {
 public:
  ByteReader(std::span<const char> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  void Bytes(void* out, size_t size);
  void ExpectMagic(std::string_view magic);
  uint8_t U8();
  uint32_t U32();
  int32_t I32();
  uint64_t U64();
  float F32();
  void F32s(std::span<float> out) { Bytes(out.data(), out.size() * 4); }
  std::string String();

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  void Seek(size_t pos);
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  std::span<const char> data_;
  size_t pos_ = 0;
  std::string what_;
};

std::vector<char> ReadFileBytes(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const char> bytes);
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view text);
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace voca

#endif  // VOCA_BINARY_IO_H_
