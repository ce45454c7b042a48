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

#include "regionptr/region_table.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "regionptr/error.h"
#include "regionptr/text.h"

namespace regionptr {
namespace {

double parse_number(const std::string& field, std::size_t line_no) {
  double value = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError("region table line " + std::to_string(line_no) +
                    ": bad number '" + field + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

void canonicalize_boxes(std::vector<BoundingBox>& boxes) {
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const BoundingBox& a, const BoundingBox& b) {
                     return std::tie(a.y_min, a.x_min, a.y_max, a.x_max) <
                            std::tie(b.y_min, b.x_min, b.y_max, b.x_max);
                   });
}

void validate_box(const BoundingBox& box, double width, double height) {
  if (!(width > 0) || !(height > 0)) {
    throw DataError("image size must be positive");
  }
  const bool ok = 0 <= box.x_min && box.x_min <= box.x_max &&
                  box.x_max <= width && 0 <= box.y_min &&
                  box.y_min <= box.y_max && box.y_max <= height;
  if (!ok) throw DataError("bounding box outside image bounds");
}

void RegionTable::add(RegionEntry entry) {
  if (!(entry.image_width > 0) || !(entry.image_height > 0)) {
    throw DataError("region entry " + entry.image_id + "/" + entry.entity_id +
                    " has a non-positive image size");
  }
  for (const auto& box : entry.boxes) {
    validate_box(box, entry.image_width, entry.image_height);
  }
  canonicalize_boxes(entry.boxes);
  auto key = std::make_pair(entry.image_id, entry.entity_id);
  auto [it, inserted] = entries_.emplace(std::move(key), std::move(entry));
  if (!inserted) {
    throw DataError("duplicate region entry " + it->first.first + "/" +
                    it->first.second);
  }
}

const RegionEntry* RegionTable::find(std::string_view image_id,
                                     std::string_view entity_id) const {
  auto it = entries_.find({std::string(image_id), std::string(entity_id)});
  return it == entries_.end() ? nullptr : &it->second;
}

bool RegionTable::has_boxes(std::string_view image_id,
                            std::string_view entity_id) const {
  const RegionEntry* entry = find(image_id, entity_id);
  return entry != nullptr && !entry->boxes.empty();
}

std::pair<double, double> RegionTable::image_size(
    std::string_view image_id) const {
  auto it = entries_.lower_bound({std::string(image_id), std::string()});
  if (it == entries_.end() || it->first.first != image_id) {
    throw DataError("no region entries for image " + std::string(image_id));
  }
  return {it->second.image_width, it->second.image_height};
}

RegionTable RegionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open region table " + path);
  RegionTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 5) {
      throw DataError("region table line " + std::to_string(line_no) +
                      ": expected 5 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    RegionEntry entry;
    entry.image_id = fields[0];
    entry.entity_id = fields[1];
    entry.image_width = parse_number(fields[3], line_no);
    entry.image_height = parse_number(fields[4], line_no);
    if (!fields[2].empty()) {
      for (const auto& box_text : text::split(fields[2], ';')) {
        const auto coords = text::split(box_text, ',');
        if (coords.size() != 4) {
          throw DataError("region table line " + std::to_string(line_no) +
                          ": box needs 4 coordinates");
        }
        entry.boxes.push_back({parse_number(coords[0], line_no),
                               parse_number(coords[1], line_no),
                               parse_number(coords[2], line_no),
                               parse_number(coords[3], line_no)});
      }
    }
    try {
      table.add(std::move(entry));
    } catch (const DataError& e) {
      throw DataError("region table line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return table;
}

void RegionTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write region table " + path);
  for (const auto& [key, entry] : entries_) {
    out << entry.image_id << '\t' << entry.entity_id << '\t';
    for (std::size_t i = 0; i < entry.boxes.size(); ++i) {
      const auto& b = entry.boxes[i];
      if (i) out << ';';
      out << format_number(b.x_min) << ',' << format_number(b.y_min) << ','
          << format_number(b.x_max) << ',' << format_number(b.y_max);
    }
    out << '\t' << format_number(entry.image_width) << '\t'
        << format_number(entry.image_height) << '\n';
  }
}

}  // namespace regionptr
