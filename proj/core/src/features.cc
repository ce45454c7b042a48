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

#include "regionptr/features.h"

#include <algorithm>
#include <fstream>

#include "regionptr/binary_io.h"
#include "regionptr/error.h"
#include "regionptr/random.h"

namespace regionptr {
namespace {

constexpr std::string_view kStoreMagic = "RPFS";
constexpr std::uint32_t kStoreVersion = 1;

Eigen::VectorXd round_to_f32(const Eigen::VectorXd& v) {
  return v.cast<float>().cast<double>();
}

}  // namespace

RegionFeatureVector::RegionFeatureVector(const Eigen::VectorXd& appearance,
                                         const Geometry& geometry)
    : values_(appearance.size() + static_cast<Eigen::Index>(kGeometryDims)) {
  values_.head(appearance.size()) = appearance;
  for (std::size_t i = 0; i < kGeometryDims; ++i) {
    values_[appearance.size() + static_cast<Eigen::Index>(i)] = geometry[i];
  }
}

RegionFeatureVector::RegionFeatureVector(Eigen::VectorXd values)
    : values_(std::move(values)) {
  if (values_.size() <= static_cast<Eigen::Index>(kGeometryDims)) {
    throw InvalidArgument("region feature vector needs D + 5 entries, D > 0");
  }
}

RegionFeatureVector RegionFeatureVector::zeros(std::size_t appearance_dim) {
  return RegionFeatureVector(Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(appearance_dim + kGeometryDims)));
}

Geometry geometry_features(std::span<const BoundingBox> boxes, double width,
                           double height) {
  if (boxes.empty()) {
    throw InvalidArgument("geometry_features needs at least one box");
  }
  if (!(width > 0) || !(height > 0)) {
    throw InvalidArgument("image size must be positive");
  }
  double max_x = boxes[0].x_max;
  double min_x = boxes[0].x_min;
  double max_y = boxes[0].y_max;
  double min_y = boxes[0].y_min;
  for (const auto& b : boxes.subspan(1)) {
    max_x = std::max(max_x, b.x_max);
    min_x = std::min(min_x, b.x_min);
    max_y = std::max(max_y, b.y_max);
    min_y = std::min(min_y, b.y_min);
  }
  return {static_cast<double>(boxes.size()), max_x / width, min_x / width,
          max_y / height, min_y / height};
}

Eigen::VectorXd pool_region(std::span<const Eigen::VectorXd> per_box) {
  if (per_box.empty()) throw InvalidArgument("pool_region needs at least one vector");
  Eigen::VectorXd sum = per_box[0];
  for (const auto& v : per_box.subspan(1)) {
    if (v.size() != sum.size()) {
      throw InvalidArgument("pool_region dimension mismatch");
    }
    sum += v;
  }
  return sum / static_cast<double>(per_box.size());
}

RegionFeatureVector empty_region(std::size_t appearance_dim) {
  if (appearance_dim == 0) throw InvalidArgument("appearance dimension must be positive");
  return RegionFeatureVector::zeros(appearance_dim);
}

RegionFeatureVector ablation_pool(std::span<const RegionFeatureVector> regions,
                                  std::size_t appearance_dim) {
  if (regions.empty()) return empty_region(appearance_dim);
  std::vector<Eigen::VectorXd> appearances;
  appearances.reserve(regions.size());
  for (const auto& r : regions) {
    if (r.appearance_dim() != appearance_dim) {
      throw InvalidArgument("ablation_pool dimension mismatch");
    }
    appearances.emplace_back(r.appearance());
  }
  return RegionFeatureVector(pool_region(appearances), Geometry{});
}

void FeatureStore::add(const std::string& entity_id,
                       const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) != dim_) {
    throw InvalidArgument("feature record for '" + entity_id + "' has dimension " +
                          std::to_string(values.size()) + ", store expects " +
                          std::to_string(dim_));
  }
  auto& list = records_[entity_id];
  list.push_back(round_to_f32(values));
  pooled_[entity_id] = pool_region(list);
}

bool FeatureStore::contains(std::string_view entity_id) const {
  return pooled_.find(entity_id) != pooled_.end();
}

const Eigen::VectorXd& FeatureStore::appearance(
    std::string_view entity_id) const {
  auto it = pooled_.find(entity_id);
  if (it == pooled_.end()) {
    throw DataError("feature store has no entry for '" + std::string(entity_id) +
                    "'");
  }
  return it->second;
}

const std::vector<Eigen::VectorXd>& FeatureStore::records(
    std::string_view entity_id) const {
  auto it = records_.find(entity_id);
  if (it == records_.end()) {
    throw DataError("feature store has no entry for '" + std::string(entity_id) +
                    "'");
  }
  return it->second;
}

FeatureStore FeatureStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature store " + path);
  io::expect_magic(in, kStoreMagic, "feature store");
  const std::uint32_t version = io::read_u32(in);
  if (version != kStoreVersion) {
    throw DataError("unsupported feature store version " + std::to_string(version));
  }
  const std::uint32_t dim = io::read_u32(in);
  if (dim == 0) throw DataError("feature store dimension is zero");
  const std::uint64_t count = io::read_u64(in);
  FeatureStore store(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string id = io::read_string(in);
    Eigen::VectorXd v(dim);
    for (std::uint32_t i = 0; i < dim; ++i) v[i] = io::read_f32(in);
    store.add(id, v);
  }
  return store;
}

FeatureStore FeatureStore::load(const std::string& path,
                                std::size_t expected_dim) {
  FeatureStore store = load(path);
  if (store.dim() != expected_dim) {
    throw DataError("feature store " + path + " has D = " +
                    std::to_string(store.dim()) + ", expected " +
                    std::to_string(expected_dim));
  }
  return store;
}

void FeatureStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature store " + path);
  std::uint64_t count = 0;
  for (const auto& [id, list] : records_) count += list.size();
  io::write_magic(out, kStoreMagic);
  io::write_u32(out, kStoreVersion);
  io::write_u32(out, static_cast<std::uint32_t>(dim_));
  io::write_u64(out, count);
  for (const auto& [id, list] : records_) {
    for (const auto& v : list) {
      io::write_string(out, id);
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        io::write_f32(out, static_cast<float>(v[i]));
      }
    }
  }
}

FeatureStore synth_features(std::uint64_t seed, std::size_t dim,
                            std::span<const std::string> entity_ids) {
  FeatureStore store(dim);
  for (const auto& id : entity_ids) {
    Rng rng(derive_seed(seed, id));
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    store.add(id, v);
  }
  return store;
}

RegionFeatureVector region_features(const FeatureStore& store,
                                    const RegionTable& regions,
                                    std::string_view image_id,
                                    std::string_view entity_id) {
  const RegionEntry* entry = regions.find(image_id, entity_id);
  if (entry == nullptr || entry->boxes.empty()) {
    throw DataError("no boxes for region " + std::string(image_id) + "/" +
                    std::string(entity_id));
  }
  return RegionFeatureVector(
      store.appearance(entity_id),
      geometry_features(entry->boxes, entry->image_width, entry->image_height));
}

RegionFeatureVector full_image_features(const FeatureStore& store,
                                        std::string_view image_id) {
  std::string key(kFullImagePrefix);
  key += image_id;
  return RegionFeatureVector(store.appearance(key), kFullImageGeometry);
}

}  // namespace regionptr
