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

#include "faceir/grid.hpp"

#include <cmath>

namespace faceir {

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
  Require(width >= 0 && height >= 0, "mask dimensions must be non-negative");
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

std::vector<std::size_t> Mask::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for (std::size_t p = 0; p < bits_.size(); ++p) {
    if (bits_[p]) out.push_back(p);
  }
  return out;
}

NormalMap::NormalMap(int width, int height, const Vec3& fill)
    : width_(width), height_(height) {
  Require(width >= 0 && height >= 0, "normal map dimensions must be non-negative");
  normals_.assign(static_cast<std::size_t>(width) * height, fill);
  valid_.assign(normals_.size(), 1);
}

Mask NormalMap::ValidMask() const {
  Mask m(width_, height_);
  for (std::size_t p = 0; p < valid_.size(); ++p) m.set(p, valid_[p] != 0);
  return m;
}

void NormalMap::Validate(const Mask* mask, double tolerance) const {
  if (mask) RequireSameSize(*this, *mask, "normals vs mask");
  for (std::size_t p = 0; p < normals_.size(); ++p) {
    if (!valid_[p] || (mask && !mask->at(p))) continue;
    const Vec3& n = normals_[p];
    if (!n.allFinite()) ThrowInvalid("normal map contains non-finite values");
    if (std::abs(n.norm() - 1.0) > tolerance) {
      ThrowInvalid("normal map contains a non-unit normal");
    }
    if (n.z() < -tolerance) ThrowInvalid("normal map contains a back-facing normal");
  }
}

void RequireNonEmpty(const Mask& mask, const char* what) {
  if (mask.count() == 0) {
    throw Error(ErrorCode::kInsufficientData, std::string("empty mask: ") + what);
  }
}

}  // namespace faceir
