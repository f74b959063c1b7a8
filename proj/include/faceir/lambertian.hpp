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

// Lambertian image formation: recomposition, rendering, de-lighting and the
// 8-bit normal-map color codec.

#ifndef FACEIR_LAMBERTIAN_HPP_
#define FACEIR_LAMBERTIAN_HPP_

#include <array>
#include <cstdint>

#include "faceir/grid.hpp"
#include "faceir/sh_lighting.hpp"

namespace faceir {

// I = A * S per channel, clamped to [0,1].
Image Recompose(const AlbedoMap& albedo, const ShadingMap& shading);

// Recompose(albedo, max(EvalShading(normals, light), 0)). Invalid normal
// pixels render black.
Image Render(const AlbedoMap& albedo, const NormalMap& normals,
             const ShCoefficients& light);

struct DelightResult {
  AlbedoMap albedo;
  // Pixels whose shading fell below epsilon.
  Mask low_confidence;
};

// A = I / max(S, epsilon), clamped to [0,1]. Throws for epsilon <= 0.
DelightResult Delight(const Image& image, const ShadingMap& shading, double epsilon);

// Channel value round((n + 1) / 2 * 255), stored as c / 255 in the image.
Image EncodeNormalMap(const NormalMap& normals);
std::array<std::uint8_t, 3> EncodeNormal(const Vec3& n);

// Inverse affine map followed by renormalization. Pixels decoding to a
// (near) zero vector, and pure black pixels, are marked invalid. Negative z is
// folded onto the camera-facing hemisphere.
NormalMap DecodeNormalMap(const Image& image);

}  // namespace faceir

#endif  // FACEIR_LAMBERTIAN_HPP_
