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

#include "voca/binary_io.h"

#include <bit>
#include <fstream>
#include <iterator>

namespace voca {

static_assert(std::endian::native == std::endian::little,
              "container formats are written in host order");

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kParameter: return "parameter error";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kNumeric: return "numeric error";
    case ErrorCode::kConfiguration: return "configuration error";
    case ErrorCode::kData: return "data error";
    case ErrorCode::kIo: return "I/O error";
  }
  return "error";
}

void ByteWriter::Bytes(const void* data, size_t size) {
  const char* p = static_cast<const char*>(data);
  buffer_.insert(buffer_.end(), p, p + size);
}

void ByteWriter::String(std::string_view s) {
  U32(static_cast<uint32_t>(s.size()));
  Bytes(s.data(), s.size());
}

void ByteReader::Bytes(void* out, size_t size) {
  if (size > remaining()) {
    Fail(ErrorCode::kFormat, what_ + ": truncated (need " +
                                 std::to_string(size) + " bytes at offset " +
                                 std::to_string(pos_) + ")");
  }
  if (size > 0) std::memcpy(out, data_.data() + pos_, size);
  pos_ += size;
}

void ByteReader::ExpectMagic(std::string_view magic) {
  std::string got(magic.size(), '\0');
  Bytes(got.data(), got.size());
  if (got != magic) {
    Fail(ErrorCode::kFormat,
         what_ + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

uint8_t ByteReader::U8() {
  uint8_t v;
  Bytes(&v, 1);
  return v;
}

uint32_t ByteReader::U32() {
  uint32_t v;
  Bytes(&v, 4);
  return v;
}

int32_t ByteReader::I32() {
  int32_t v;
  Bytes(&v, 4);
  return v;
}

uint64_t ByteReader::U64() {
  uint64_t v;
  Bytes(&v, 8);
  return v;
}

float ByteReader::F32() {
  float v;
  Bytes(&v, 4);
  return v;
}

std::string ByteReader::String() {
  uint32_t n = U32();
  std::string s(n, '\0');
  Bytes(s.data(), n);
  return s;
}

void ByteReader::Seek(size_t pos) {
  if (pos > data_.size()) {
    Fail(ErrorCode::kFormat, what_ + ": offset out of range");
  }
  pos_ = pos;
}

std::vector<char> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const char> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    Fail(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view text) {
  WriteFileAtomic(path, std::span<const char>(text.data(), text.size()));
}

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& text) {
  WriteFileAtomic(path, std::string_view(text));
}

}  // namespace voca
