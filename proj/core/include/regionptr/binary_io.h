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

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace regionptr::io {

// Little-endian primitives shared by every binary file format in the
// project (feature stores, corpus bundles, checkpoints).

void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f32(std::ostream& out, float value);
void write_f64(std::ostream& out, double value);
void write_string(std::ostream& out, std::string_view value);
void write_magic(std::ostream& out, std::string_view magic);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
// Throws DataError naming `what` if the next bytes differ from `magic`.
void expect_magic(std::istream& in, std::string_view magic,
                  std::string_view what);

}  // namespace regionptr::io
