// Copyright 2026 The MIA Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIA_SRC_BINARY_IO_H_
#define MIA_SRC_BINARY_IO_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "mia/errors.h"

namespace mia::internal {

template <typename U>
void AppendLittleEndian(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

inline void AppendU32(std::string& out, std::uint32_t v) { AppendLittleEndian(out, v); }
inline void AppendU64(std::string& out, std::uint64_t v) { AppendLittleEndian(out, v); }
inline void AppendF32(std::string& out, float v) {
  AppendLittleEndian(out, std::bit_cast<std::uint32_t>(v));
}
inline void AppendF64(std::string& out, double v) {
  AppendLittleEndian(out, std::bit_cast<std::uint64_t>(v));
}

template <typename U>
U LoadLittleEndian(const char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return value;
}

inline std::uint32_t LoadU32(const char* p) { return LoadLittleEndian<std::uint32_t>(p); }
inline std::uint64_t LoadU64(const char* p) { return LoadLittleEndian<std::uint64_t>(p); }
inline float LoadF32(const char* p) { return std::bit_cast<float>(LoadU32(p)); }
inline double LoadF64(const char* p) { return std::bit_cast<double>(LoadU64(p)); }

inline std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw StorageError("read failed: " + path.string());
  return bytes;
}

inline void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot open for writing " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw StorageError("write failed: " + path.string());
}

}  // namespace mia::internal

#endif  // MIA_SRC_BINARY_IO_H_
