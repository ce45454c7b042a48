// Copyright 2026 The regionptr Authors
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

#include "regionptr/binary_io.h"

#include <array>
#include <bit>

#include "regionptr/error.h"

namespace regionptr::io {
namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("unexpected end of binary stream");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

// Strings larger than this are treated as corruption.
constexpr std::uint32_t kMaxString = 1u << 24;

}  // namespace

void write_u32(std::ostream& out, std::uint32_t value) { write_le(out, value); }
void write_u64(std::ostream& out, std::uint64_t value) { write_le(out, value); }

void write_f32(std::ostream& out, float value) {
  write_le(out, std::bit_cast<std::uint32_t>(value));
}

void write_f64(std::ostream& out, double value) {
  write_le(out, std::bit_cast<std::uint64_t>(value));
}

void write_string(std::ostream& out, std::string_view value) {
  write_u32(out, static_cast<std::uint32_t>(value.size()));
  out.write(value.data(), static_cast<std::streamsize>(value.size()));
}

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }

float read_f32(std::istream& in) {
  return std::bit_cast<float>(read_le<std::uint32_t>(in));
}

double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_le<std::uint64_t>(in));
}

std::string read_string(std::istream& in) {
  const std::uint32_t size = read_u32(in);
  if (size > kMaxString) throw DataError("string length out of range");
  std::string value(size, '\0');
  in.read(value.data(), size);
  if (!in) throw DataError("unexpected end of binary stream");
  return value;
}

void expect_magic(std::istream& in, std::string_view magic,
                  std::string_view what) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != magic) {
    throw DataError("not a " + std::string(what) + " file (bad magic)");
  }
}

}  // namespace regionptr::io
