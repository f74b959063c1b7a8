// Copyright 2026 The faceir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Raster containers shared by every module: tagged multi-channel grids for
// images, albedo and shading, a boolean mask, and a normal map with per-pixel
// validity.

#ifndef FACEIR_GRID_HPP_
#define FACEIR_GRID_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "faceir/error.hpp"

namespace faceir {

using Vec3 = Eigen::Vector3d;

template <typename Tag, int Channels>
class Grid {
 public:
  static constexpr int kChannels = Channels;

  Grid() = default;
  Grid(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    Require(width >= 0 && height >= 0, "grid dimensions must be non-negative");
    values_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return values_.empty(); }

  double& operator()(int x, int y, int c = 0) {
    return values_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
  }
  double operator()(int x, int y, int c = 0) const {
    return values_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
  }
  // Linear pixel index p = y * width + x.
  double& at(std::size_t p, int c = 0) { return values_[p * Channels + c]; }
  double at(std::size_t p, int c = 0) const {
    return values_[p * Channels + c];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  template <typename OtherTag, int OtherChannels>
  bool SameSize(const Grid<OtherTag, OtherChannels>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct ImageTag;
struct AlbedoTag;
struct ShadingTag;

// Linear RGB intensities, nominally in [0,1].
using Image = Grid<ImageTag, 3>;
// Linear RGB reflectance in [0,1].
using AlbedoMap = Grid<AlbedoTag, 3>;
// Single-channel shading, broadcast over RGB when recomposing.
using ShadingMap = Grid<ShadingTag, 1>;

// Reinterprets the values of one grid kind as another of the same channel
// count (e.g. an Image used as an albedo initialisation).
template <typename To, typename FromTag, int Channels>
To GridCast(const Grid<FromTag, Channels>& from) {
  static_assert(To::kChannels == Channels, "channel count must match");
  To out(from.width(), from.height());
  std::copy(from.values().begin(), from.values().end(), out.values().begin());
  return out;
}

class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);

  static Mask Full(int width, int height) { return Mask(width, height, true); }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return bits_.size(); }

  bool operator()(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  bool at(std::size_t p) const { return bits_[p] != 0; }
  void set(int x, int y, bool value) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }
  void set(std::size_t p, bool value) { bits_[p] = value ? 1 : 0; }

  std::size_t count() const;
  // Linear indices of the set pixels, in raster order.
  std::vector<std::size_t> indices() const;

  template <typename G>
  bool SameSize(const G& g) const {
    return width_ == g.width() && height_ == g.height();
  }

  bool operator==(const Mask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Unit surface normals in camera space (x right, y up, z towards the viewer).
// Pixels can be flagged invalid, e.g. after decoding a zero vector.
class NormalMap {
 public:
  NormalMap() = default;
  NormalMap(int width, int height, const Vec3& fill = Vec3(0, 0, 1));

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return normals_.size(); }

  Vec3& operator()(int x, int y) {
    return normals_[static_cast<std::size_t>(y) * width_ + x];
  }
  const Vec3& operator()(int x, int y) const {
    return normals_[static_cast<std::size_t>(y) * width_ + x];
  }
  Vec3& at(std::size_t p) { return normals_[p]; }
  const Vec3& at(std::size_t p) const { return normals_[p]; }

  bool valid(std::size_t p) const { return valid_[p] != 0; }
  void set_valid(std::size_t p, bool v) { valid_[p] = v ? 1 : 0; }
  Mask ValidMask() const;

  template <typename G>
  bool SameSize(const G& g) const {
    return width_ == g.width() && height_ == g.height();
  }

  // Throws kInvalidArgument unless every valid pixel inside `mask` (or every
  // valid pixel when mask is null) is finite, unit length within `tolerance`
  // and camera facing (z >= 0).
  void Validate(const Mask* mask = nullptr, double tolerance = 1e-4) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Vec3> normals_;
  std::vector<std::uint8_t> valid_;
};

// Shape checks shared by the operations; they throw kInvalidArgument.
template <typename A, typename B>
void RequireSameSize(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    ThrowInvalid(std::string("dimension mismatch: ") + what);
  }
}

// Throws kInsufficientData when the mask selects no pixel.
void RequireNonEmpty(const Mask& mask, const char* what);

}  // namespace faceir

#endif  // FACEIR_GRID_HPP_
