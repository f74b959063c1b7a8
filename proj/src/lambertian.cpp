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

#include "faceir/lambertian.hpp"

#include <algorithm>
#include <cmath>

namespace faceir {

Image Recompose(const AlbedoMap& albedo, const ShadingMap& shading) {
  RequireSameSize(albedo, shading, "recompose albedo vs shading");
  Image out(albedo.width(), albedo.height());
  for (std::size_t p = 0; p < albedo.pixel_count(); ++p) {
    const double s = shading.at(p);
    for (int c = 0; c < 3; ++c) out.at(p, c) = std::clamp(albedo.at(p, c) * s, 0.0, 1.0);
  }
  return out;
}

Image Render(const AlbedoMap& albedo, const NormalMap& normals,
             const ShCoefficients& light) {
  RequireSameSize(albedo, normals, "render albedo vs normals");
  ShadingMap s = EvalShading(normals, light);
  for (double& v : s.values()) v = std::max(v, 0.0);
  return Recompose(albedo, s);
}

DelightResult Delight(const Image& image, const ShadingMap& shading, double epsilon) {
  RequireSameSize(image, shading, "delight image vs shading");
  if (!(epsilon > 0.0)) ThrowInvalid("delight epsilon must be positive");
  DelightResult r{AlbedoMap(image.width(), image.height()),
                  Mask(image.width(), image.height())};
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    const double s = shading.at(p);
    if (s < epsilon) r.low_confidence.set(p, true);
    const double d = std::max(s, epsilon);
    for (int c = 0; c < 3; ++c) r.albedo.at(p, c) = std::clamp(image.at(p, c) / d, 0.0, 1.0);
  }
  return r;
}

std::array<std::uint8_t, 3> EncodeNormal(const Vec3& n) {
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    const double v = std::round((std::clamp(n[c], -1.0, 1.0) + 1.0) * 0.5 * 255.0);
    rgb[c] = static_cast<std::uint8_t>(v);
  }
  return rgb;
}

Image EncodeNormalMap(const NormalMap& normals) {
  Image out(normals.width(), normals.height());
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    if (!normals.valid(p)) continue;
    const auto rgb = EncodeNormal(normals.at(p));
    for (int c = 0; c < 3; ++c) out.at(p, c) = rgb[c] / 255.0;
  }
  return out;
}

NormalMap DecodeNormalMap(const Image& image) {
  NormalMap out(image.width(), image.height());
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    Vec3 n;
    bool black = true;
    for (int c = 0; c < 3; ++c) {
      const double q = std::round(image.at(p, c) * 255.0);
      black = black && q == 0.0;
      n[c] = q / 255.0 * 2.0 - 1.0;
    }
    const double len = n.norm();
    if (black || !(len > 0.5)) {
      out.at(p) = Vec3::Zero();
      out.set_valid(p, false);
      continue;
    }
    n /= len;
    n.z() = std::abs(n.z());
    out.at(p) = n;
  }
  return out;
}

}  // namespace faceir
