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

#include "faceir/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "faceir/decomposer.hpp"
#include "faceir/io.hpp"
#include "faceir/lambertian.hpp"

namespace faceir {

SphereGeometry SphereNormals(int size, double radius_fraction) {
  Require(size >= 16, "sphere size must be at least 16");
  Require(radius_fraction > 0.0 && radius_fraction <= 1.0, "radius fraction must be in (0,1]");
  SphereGeometry g{NormalMap(size, size), Mask(size, size)};
  const double radius = radius_fraction * size / 2.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x - size / 2.0) / radius;
      const double v = -(y - size / 2.0) / radius;
      const double rr = u * u + v * v;
      const std::size_t p = static_cast<std::size_t>(y) * size + x;
      if (rr < 1.0) {
        g.normals.at(p) = Vec3(u, v, std::sqrt(1.0 - rr));
        g.mask.set(p, true);
      } else {
        g.normals.at(p) = Vec3::Zero();
        g.normals.set_valid(p, false);
      }
    }
  }
  return g;
}

ShCoefficients RandomLight(std::uint64_t seed, double ambient_floor, const LightSampling& s) {
  Require(std::isfinite(ambient_floor), "ambient floor must be finite");
  Require(s.ambient_spread >= 0.0 && s.band1_bound >= 0.0 && s.band2_bound >= 0.0,
          "light sampling bounds must be non-negative");
  static const std::vector<ShVector> cap = [] {
    const SphereGeometry g = SphereNormals(64, 1.0);
    std::vector<ShVector> rows;
    for (std::size_t p : g.mask.indices()) rows.push_back(ShBasisPolynomial(g.normals.at(p)));
    return rows;
  }();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> ambient(0.0, 1.0);
  for (int attempt = 0; attempt < s.max_attempts; ++attempt) {
    ShCoefficients l;
    l[0] = ambient_floor + s.ambient_spread * ambient(rng);
    for (int k = 1; k < 4; ++k) l[k] = s.band1_bound * unit(rng);
    for (int k = 4; k < kShCount; ++k) l[k] = s.band2_bound * unit(rng);
    const ShVector v = l.vector();
    double lo = INFINITY, hi = -INFINITY;
    for (const ShVector& h : cap) {
      const double sh = h.dot(v);
      lo = std::min(lo, sh);
      hi = std::max(hi, sh);
    }
    if (lo >= s.min_shading && (!s.max_shading || hi <= *s.max_shading)) return l;
  }
  ThrowInvalid("random light: no draw satisfied the shading bounds");
}

AlbedoMap CheckerboardAlbedo(int width, int height, int cell, const Vec3& a, const Vec3& b) {
  Require(cell > 0, "checker cell must be positive");
  AlbedoMap out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec3& c = ((x / cell + y / cell) % 2 == 0) ? a : b;
      for (int ch = 0; ch < 3; ++ch) out(x, y, ch) = std::clamp(c[ch], 0.0, 1.0);
    }
  }
  return out;
}

AlbedoMap RadialGradientAlbedo(int width, int height, const Vec3& center, const Vec3& rim) {
  AlbedoMap out(width, height);
  const double cx = width / 2.0, cy = height / 2.0;
  const double rmax = std::hypot(cx, cy);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = std::hypot(x - cx, y - cy) / rmax;
      for (int ch = 0; ch < 3; ++ch) {
        out(x, y, ch) = std::clamp((1.0 - t) * center[ch] + t * rim[ch], 0.0, 1.0);
      }
    }
  }
  return out;
}

AlbedoMap SmoothNoiseAlbedo(int width, int height, std::uint64_t seed, double low, double high) {
  Require(low <= high, "noise albedo range is empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.5, 3.0), phase(0.0, 2.0 * std::numbers::pi);
  struct Wave { double fx, fy, ph; };
  AlbedoMap out(width, height);
  for (int ch = 0; ch < 3; ++ch) {
    Wave waves[4];
    for (Wave& w : waves) w = {freq(rng), freq(rng), phase(rng)};
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const Wave& w : waves) {
          v += std::sin(2.0 * std::numbers::pi * (w.fx * x / width + w.fy * y / height) + w.ph);
        }
        out(x, y, ch) = low + (high - low) * (0.5 + v / 8.0);
      }
    }
  }
  return out;
}

NormalMap PerturbNormals(const NormalMap& normals, double max_deg, std::uint64_t seed) {
  Require(max_deg >= 0.0, "perturbation angle must be non-negative");
  NormalMap out = normals;
  if (max_deg == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, max_deg * std::numbers::pi / 180.0);
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    if (!normals.valid(p)) continue;
    const Vec3 n = normals.at(p);
    Vec3 axis;
    do {
      axis = Vec3(gauss(rng), gauss(rng), gauss(rng));
      axis -= axis.dot(n) * n;
    } while (axis.norm() < 1e-9);
    axis.normalize();
    const double t = angle(rng);
    Vec3 q = std::cos(t) * n + std::sin(t) * axis;
    q.z() = std::abs(q.z());
    out.at(p) = q.normalized();
  }
  return out;
}

SyntheticPair MakePair(const AlbedoMap& albedo, const NormalMap& normals,
                       const ShCoefficients& l_i, const ShCoefficients& l_j, const Mask& mask,
                       double prior_perturbation_deg, std::uint64_t seed) {
  RequireSameSize(albedo, normals, "albedo vs normals");
  RequireSameSize(albedo, mask, "albedo vs mask");
  normals.Validate(&mask, 1e-6);
  SyntheticPair out;
  PairGroundTruth& t = out.truth;
  t.albedo = albedo;
  t.normals = normals;
  t.light_i = l_i;
  t.light_j = l_j;
  t.shading_i = EvalShading(normals, l_i, &mask);
  t.shading_j = EvalShading(normals, l_j, &mask);
  AlbedoMap masked = albedo;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (mask.at(p)) continue;
    for (int c = 0; c < 3; ++c) masked.at(p, c) = 0.0;
  }
  PairInput& in = out.input;
  in.image_i = Render(masked, normals, l_i);
  in.image_j = Render(masked, normals, l_j);
  in.mask = mask;
  in.prior_i = PerturbNormals(normals, prior_perturbation_deg, seed);
  in.prior_j = in.prior_i;
  return out;
}

Image AddGaussianNoise(const Image& image, double sigma, std::uint64_t seed) {
  Require(sigma >= 0.0, "noise sigma must be non-negative");
  Image out = image;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (double& v : out.values()) v = std::clamp(v + gauss(rng), 0.0, 1.0);
  return out;
}

Image AddSaltPepper(const Image& image, double fraction, std::uint64_t seed) {
  Require(fraction > 0.0 && fraction <= 1.0, "salt-pepper fraction must be in (0,1]");
  Image out = image;
  const std::size_t n = image.pixel_count();
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(order[k], order[pick(rng)]);
    const double v = coin(rng) ? 1.0 : 0.0;
    for (int c = 0; c < 3; ++c) out.at(order[k], c) = v;
  }
  return out;
}

void WriteSyntheticPair(const std::string& directory, const SyntheticPair& pair) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  const fs::path gt = dir / "ground_truth";
  std::error_code ec;
  fs::create_directories(gt, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + gt.string() + ": " + ec.message());
  const PairInput& in = pair.input;
  WriteImagePng((dir / "image_i.png").string(), in.image_i);
  WriteImagePng((dir / "image_j.png").string(), in.image_j);
  WriteMaskPng((dir / "mask.png").string(), in.mask);
  WriteNormalPng((dir / "prior_i.png").string(), in.prior_i);
  WriteNormalPng((dir / "prior_j.png").string(), in.prior_j);
  {
    std::ofstream tsv(dir / "pair.tsv");
    if (!tsv) throw Error(ErrorCode::kIo, "cannot write pair.tsv");
    tsv << "image_i.png\timage_j.png\tmask.png\tprior_i.png\tprior_j.png\n";
  }
  const PairGroundTruth& t = pair.truth;
  NormalMap normals = t.normals;
  for (std::size_t p = 0; p < in.mask.pixel_count(); ++p) {
    if (!in.mask.at(p)) normals.set_valid(p, false);
  }
  const Image albedo = GridCast<Image>(t.albedo);
  WriteImagePng((gt / "albedo_i.png").string(), albedo);
  WriteImagePng((gt / "albedo_j.png").string(), albedo);
  WriteGrayPng((gt / "shading_i.png").string(), t.shading_i);
  WriteGrayPng((gt / "shading_j.png").string(), t.shading_j);
  WriteNormalPng((gt / "normal_i.png").string(), normals);
  WriteNormalPng((gt / "normal_j.png").string(), normals);
  WriteShFile((gt / "light_i.txt").string(), t.light_i);
  WriteShFile((gt / "light_j.txt").string(), t.light_j);
  WriteImagePng((gt / "recon.png").string(), in.image_i);
}

SynthScene DefaultScene(int size, std::uint64_t seed, int albedo_kind) {
  SynthScene scene;
  scene.geometry = SphereNormals(size, 0.9);
  switch (albedo_kind) {
    case 0:
      scene.albedo = CheckerboardAlbedo(size, size, std::max(size / 8, 1), Vec3(1.0, 0.85, 0.7),
                                        Vec3(0.55, 0.4, 0.35));
      break;
    case 1:
      scene.albedo = RadialGradientAlbedo(size, size, Vec3(0.9, 0.75, 0.65), Vec3(0.5, 0.35, 0.3));
      break;
    case 2:
      scene.albedo = SmoothNoiseAlbedo(size, size, seed);
      break;
    default:
      ThrowInvalid("unknown albedo kind");
  }
  LightSampling sampling;
  sampling.max_shading = 0.95;
  const double floor = 0.55 * std::sqrt(4.0 * std::numbers::pi);
  scene.light_i = RandomLight(seed * 2 + 11, floor, sampling);
  scene.light_j = RandomLight(seed * 2 + 12, floor, sampling);
  return scene;
}

}  // namespace faceir
