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

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "regionptr/nn/parameters.h"

namespace regionptr::nn {

// Versioned header of key/value strings followed by named 64-bit arrays.
//
// File layout, little endian:
//   "RPCK" u32 version=1
//   u32 header_count  header_count x { string key, string value }
//   u32 array_count   array_count x { string name, u32 rows, u32 cols,
//                                     rows*cols f64 in row-major order }
// Strings are u32 length + bytes.
struct Checkpoint {
  std::map<std::string, std::string> header;
  std::vector<std::pair<std::string, Matrix>> arrays;

  const Matrix& array(const std::string& name) const;
  const Matrix* find(const std::string& name) const;
  const std::string& field(const std::string& key) const;

  // Writes to a temporary file then renames it over `path`, so an
  // interrupted write never clobbers an existing checkpoint.
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace regionptr::nn
