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

#include "regionptr/nn/checkpoint.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "regionptr/binary_io.h"
#include "regionptr/error.h"

namespace regionptr::nn {
namespace {

constexpr std::string_view kMagic = "RPCK";
constexpr std::uint32_t kVersion = 1;

}  // namespace

const Matrix* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : arrays) {
    if (n == name) return &m;
  }
  return nullptr;
}

const Matrix& Checkpoint::array(const std::string& name) const {
  if (const Matrix* m = find(name)) return *m;
  throw DataError("checkpoint has no array '" + name + "'");
}

const std::string& Checkpoint::field(const std::string& key) const {
  auto it = header.find(key);
  if (it == header.end()) {
    throw DataError("checkpoint header has no field '" + key + "'");
  }
  return it->second;
}

void Checkpoint::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp);
    io::write_magic(out, kMagic);
    io::write_u32(out, kVersion);
    io::write_u32(out, static_cast<std::uint32_t>(header.size()));
    for (const auto& [k, v] : header) {
      io::write_string(out, k);
      io::write_string(out, v);
    }
    io::write_u32(out, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& [name, m] : arrays) {
      io::write_string(out, name);
      io::write_u32(out, static_cast<std::uint32_t>(m.rows()));
      io::write_u32(out, static_cast<std::uint32_t>(m.cols()));
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) io::write_f64(out, m(r, c));
      }
    }
    out.flush();
    if (!out) throw DataError("failed writing checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  io::expect_magic(in, kMagic, "checkpoint");
  const std::uint32_t version = io::read_u32(in);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const std::uint32_t fields = io::read_u32(in);
  for (std::uint32_t i = 0; i < fields; ++i) {
    std::string k = io::read_string(in);
    ck.header[k] = io::read_string(in);
  }
  const std::uint32_t count = io::read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_string(in);
    const std::uint32_t rows = io::read_u32(in);
    const std::uint32_t cols = io::read_u32(in);
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 32)) {
      throw DataError("checkpoint array '" + name + "' is implausibly large");
    }
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = io::read_f64(in);
    }
    ck.arrays.emplace_back(std::move(name), std::move(m));
  }
  return ck;
}

}  // namespace regionptr::nn
