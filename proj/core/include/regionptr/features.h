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

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regionptr/region_table.h"

namespace regionptr {

inline constexpr std::size_t kGeometryDims = 5;

// (box_count, max x_max / W, min x_min / W, max y_max / H, min y_min / H).
// The count is stored unnormalized.
using Geometry = std::array<double, kGeometryDims>;

// Geometry of a region covering the whole image.
inline constexpr Geometry kFullImageGeometry = {1.0, 1.0, 0.0, 1.0, 0.0};

// Store key prefix holding each image's full-image appearance vector.
inline constexpr std::string_view kFullImagePrefix = "__full__/";

// Appearance features (dimension D) followed by the five geometry features.
class RegionFeatureVector {
 public:
  RegionFeatureVector() = default;
  RegionFeatureVector(const Eigen::VectorXd& appearance,
                      const Geometry& geometry);
  // Takes a full D + 5 vector.
  explicit RegionFeatureVector(Eigen::VectorXd values);

  static RegionFeatureVector zeros(std::size_t appearance_dim);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  std::size_t appearance_dim() const { return size() - kGeometryDims; }
  Eigen::VectorXd::ConstSegmentReturnType appearance() const {
    return values_.head(static_cast<Eigen::Index>(appearance_dim()));
  }
  Eigen::VectorXd::ConstSegmentReturnType geometry() const {
    return values_.tail(kGeometryDims);
  }
  const Eigen::VectorXd& values() const { return values_; }

  bool operator==(const RegionFeatureVector& o) const {
    return values_.size() == o.values_.size() && values_ == o.values_;
  }

 private:
  Eigen::VectorXd values_;
};

// Throws InvalidArgument for an empty box list or non-positive image size.
Geometry geometry_features(std::span<const BoundingBox> boxes, double width,
                           double height);

// Elementwise mean, summed left to right in list order.
Eigen::VectorXd pool_region(std::span<const Eigen::VectorXd> per_box);

// The all-zero region of dimension D + 5.
RegionFeatureVector empty_region(std::size_t appearance_dim);

// Mean appearance over the sequence with geometry zeroed; the all-zero
// vector for an empty sequence.
RegionFeatureVector ablation_pool(std::span<const RegionFeatureVector> regions,
                                  std::size_t appearance_dim);

// Appearance vectors keyed by entity id. An entity may carry several
// records (one per box, in canonical box order); they are mean-pooled.
//
// File layout, little endian:
//   "RPFS" u32 version=1  u32 D  u64 record_count
//   record_count x { u32 id_len, id bytes, D x f32 }
class FeatureStore {
 public:
  explicit FeatureStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t entity_count() const { return records_.size(); }

  // Appends one per-box record. Throws InvalidArgument on a dimension
  // mismatch.
  void add(const std::string& entity_id, const Eigen::VectorXd& values);

  bool contains(std::string_view entity_id) const;
  // Pooled appearance; throws DataError naming the id if it is missing.
  const Eigen::VectorXd& appearance(std::string_view entity_id) const;
  const std::vector<Eigen::VectorXd>& records(std::string_view entity_id) const;

  static FeatureStore load(const std::string& path);
  // Throws DataError if the stored D differs from `expected_dim`.
  static FeatureStore load(const std::string& path, std::size_t expected_dim);
  void save(const std::string& path) const;

 private:
  std::size_t dim_;
  // Values are kept at f32 precision so save/load round-trips exactly.
  std::map<std::string, std::vector<Eigen::VectorXd>, std::less<>> records_;
  std::map<std::string, Eigen::VectorXd, std::less<>> pooled_;
};

// One record per id with values uniform in [-1, 1), determined only by
// (seed, entity_id).
FeatureStore synth_features(std::uint64_t seed, std::size_t dim,
                            std::span<const std::string> entity_ids);

// Pooled appearance of (image, entity) plus its geometry from the region
// table.
RegionFeatureVector region_features(const FeatureStore& store,
                                    const RegionTable& regions,
                                    std::string_view image_id,
                                    std::string_view entity_id);

// Full-image appearance with kFullImageGeometry.
RegionFeatureVector full_image_features(const FeatureStore& store,
                                        std::string_view image_id);

}  // namespace regionptr
