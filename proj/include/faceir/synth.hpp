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

// Synthetic Lambertian ground truth: sphere-cap geometry, random SH lights,
// procedural albedo, rendered pairs and image noise.

#ifndef FACEIR_SYNTH_HPP_
#define FACEIR_SYNTH_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "faceir/energy.hpp"
#include "faceir/grid.hpp"
#include "faceir/sh_lighting.hpp"

namespace faceir {

struct SphereGeometry {
  NormalMap normals;
  Mask mask;
};

// Orthographic unit-sphere cap centred in a size x size image with radius
// radius_fraction * size / 2. Pixels outside the disk hold invalid normals.
SphereGeometry SphereNormals(int size, double radius_fraction);

struct LightSampling {
  // l1 is drawn from [ambient_floor, ambient_floor + ambient_spread].
  double ambient_spread = 0.0;
  // Bounds of the uniform draws for l2..l4 and l5..l9.
  double band1_bound = 0.5;
  double band2_bound = 0.25;
  double min_shading = 0.05;
  std::optional<double> max_shading;
  int max_attempts = 100000;
};

// Seeded random light whose shading over the hemisphere cap stays within
// [min_shading, max_shading]. Throws kInvalidArgument when no draw satisfies
// the bounds within max_attempts.
ShCoefficients RandomLight(std::uint64_t seed, double ambient_floor,
                           const LightSampling& sampling = {});

AlbedoMap CheckerboardAlbedo(int width, int height, int cell, const Vec3& a, const Vec3& b);
AlbedoMap RadialGradientAlbedo(int width, int height, const Vec3& center, const Vec3& rim);
// Sum of a few seeded random sinusoids mapped into [low, high] per channel.
AlbedoMap SmoothNoiseAlbedo(int width, int height, std::uint64_t seed, double low = 0.3,
                            double high = 0.9);

struct PairGroundTruth {
  AlbedoMap albedo;
  NormalMap normals;
  ShadingMap shading_i;
  ShadingMap shading_j;
  ShCoefficients light_i;
  ShCoefficients light_j;
};

struct SyntheticPair {
  PairInput input;
  PairGroundTruth truth;
};

// Renders both images from shared albedo and normals. The prior (shared by
// both members) is the true normal map, rotated per pixel by an angle drawn
// uniformly from [0, prior_perturbation_deg] about a random tangent axis.
SyntheticPair MakePair(const AlbedoMap& albedo, const NormalMap& normals,
                       const ShCoefficients& l_i, const ShCoefficients& l_j, const Mask& mask,
                       double prior_perturbation_deg = 0.0, std::uint64_t seed = 0);

// Rotates every valid normal by a random angle in [0, max_deg] about a random
// tangent axis, then folds it onto z >= 0.
NormalMap PerturbNormals(const NormalMap& normals, double max_deg, std::uint64_t seed);

// i.i.d. N(0, sigma^2) per channel, clamped to [0,1].
Image AddGaussianNoise(const Image& image, double sigma, std::uint64_t seed);
// round(fraction * pixels) distinct pixels set to black or white with equal
// probability.
Image AddSaltPepper(const Image& image, double fraction, std::uint64_t seed);

// Sphere radius 0.9, checkerboard (kind 0), radial (1) or smooth-noise (2)
// albedo, and two seeded lights with an ambient floor of 0.55 sqrt(4 pi)
// whose shading stays within [0.05, 0.95].
struct SynthScene {
  SphereGeometry geometry;
  AlbedoMap albedo;
  ShCoefficients light_i;
  ShCoefficients light_j;
};
SynthScene DefaultScene(int size, std::uint64_t seed, int albedo_kind = 0);

// Writes image_i.png, image_j.png, mask.png, prior_i.png, prior_j.png,
// pair.tsv and ground_truth/ in the decomposition result layout.
void WriteSyntheticPair(const std::string& directory, const SyntheticPair& pair);

}  // namespace faceir

#endif  // FACEIR_SYNTH_HPP_
