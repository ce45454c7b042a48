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
#include <string_view>
#include <utility>
#include <vector>

namespace regionptr {

// Pixel coordinates on an image of known size.
struct BoundingBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  bool operator==(const BoundingBox&) const = default;
};

// All boxes of one entity in one image. `boxes` may be empty: the entity
// is annotated in the text but not grounded in the image.
struct RegionEntry {
  std::string image_id;
  std::string entity_id;
  std::vector<BoundingBox> boxes;
  double image_width = 0;
  double image_height = 0;
};

// Orders boxes by (y_min, x_min, y_max, x_max). Applied on every insert so
// pooling over boxes is independent of the order they were listed in.
void canonicalize_boxes(std::vector<BoundingBox>& boxes);

// Throws DataError unless 0 <= min <= max <= size on both axes and the
// image size is positive.
void validate_box(const BoundingBox& box, double width, double height);

// Region table keyed by (image_id, entity_id).
//
// File format, one record per line, tab separated:
//   image_id  entity_id  boxes  image_width  image_height
// where `boxes` is a ';'-separated list of "x_min,y_min,x_max,y_max" and may
// be empty. Lines starting with '#' are comments.
class RegionTable {
 public:
  void add(RegionEntry entry);

  const RegionEntry* find(std::string_view image_id,
                          std::string_view entity_id) const;
  bool has_boxes(std::string_view image_id, std::string_view entity_id) const;

  // Image size for `image_id`, taken from any of its entries.
  std::pair<double, double> image_size(std::string_view image_id) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::pair<std::string, std::string>, RegionEntry>& entries()
      const {
    return entries_;
  }

  static RegionTable load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::map<std::pair<std::string, std::string>, RegionEntry> entries_;
};

}  // namespace regionptr
