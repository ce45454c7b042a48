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

#include <string>
#include <string_view>
#include <vector>

namespace regionptr::text {

// Splits on ASCII whitespace; empty fields are dropped.
std::vector<std::string> split_whitespace(std::string_view line);

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view line, char delim);

// Unicode simple lower-case mapping, code point by code point. Invalid
// UTF-8 bytes are copied through unchanged.
std::string to_lower(std::string_view utf8);

// Unicode general category P* plus the ASCII symbol characters
// ($ + < = > ^ ` | ~).
bool is_punctuation(char32_t code_point);

// True when every code point of `token` is punctuation. The empty token
// counts as punctuation-only.
bool is_punctuation_only(std::string_view token);

// Removes leading and trailing punctuation code points; interior ones
// (apostrophes, hyphens) are kept.
std::string strip_edge_punctuation(std::string_view token);

std::string join(const std::vector<std::string>& tokens,
                 std::string_view sep = " ");

}  // namespace regionptr::text
