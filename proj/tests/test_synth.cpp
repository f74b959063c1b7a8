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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "faceir/error.hpp"
#include "faceir/io.hpp"
#include "faceir/metrics.hpp"
#include "test_util.hpp"

namespace faceir {
namespace {

double MinCapZ(int size) {
  const SphereGeometry g = SphereNormals(size, 1.0);
  double lo = 1.0;
  for (std::size_t p : g.mask.indices()) lo = std::min(lo, g.normals.at(p).z());
  return lo;
}

TEST(SphereNormals, Geometry) {
  const SphereGeometry g = SphereNormals(64, 0.8);
  EXPECT_EQ(g.normals(32, 32), Vec3(0, 0, 1));
  EXPECT_TRUE(g.mask(32, 32));
  EXPECT_FALSE(g.mask(0, 0));
  EXPECT_FALSE(g.normals.valid(0));
  for (std::size_t p : g.mask.indices()) {
    EXPECT_NEAR(g.normals.at(p).norm(), 1.0, 1e-9);
    EXPECT_GT(g.normals.at(p).z(), 0.0);
  }
  // Up in the image is +y.
  EXPECT_GT(g.normals(32, 10).y(), 0.0);
  EXPECT_GT(g.normals(50, 32).x(), 0.0);
}

TEST(SphereNormals, RimApproachesGrazing) {
  EXPECT_GT(MinCapZ(64), 0.0);
  EXPECT_LT(MinCapZ(256), MinCapZ(64));
  EXPECT_LT(MinCapZ(1024), 0.1);
}

TEST(SphereNormals, Errors) {
  EXPECT_THROW(SphereNormals(15, 0.5), Error);
  EXPECT_THROW(SphereNormals(32, 0.0), Error);
  EXPECT_THROW(SphereNormals(32, 1.5), Error);
}

TEST(RandomLight, PureAmbient) {
  LightSampling s;
  s.band1_bound = s.band2_bound = 0.0;
  const ShCoefficients l = RandomLight(5, std::sqrt(4.0 * std::numbers::pi), s);
  const SphereGeometry g = SphereNormals(32, 1.0);
  const ShadingMap sh = EvalShading(g.normals, l, &g.mask);
  for (std::size_t p : g.mask.indices()) EXPECT_NEAR(sh.at(p), 1.0, 1e-12);
}

TEST(RandomLight, DeterministicAndBounded) {
  const double floor = 0.5 * std::sqrt(4.0 * std::numbers::pi);
  const SphereGeometry g = SphereNormals(96, 1.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ShCoefficients a = RandomLight(seed, floor), b = RandomLight(seed, floor);
    EXPECT_EQ(a, b);
    EXPECT_GE(a[0], floor);
    const ShadingMap sh = EvalShading(g.normals, a, &g.mask);
    for (std::size_t p : g.mask.indices()) ASSERT_GE(sh.at(p), 0.05 - 1e-3);
  }
  EXPECT_NE(RandomLight(1, floor), RandomLight(2, floor));
}

TEST(RandomLight, MaxShadingBound) {
  LightSampling s;
  s.max_shading = 0.95;
  const SphereGeometry g = SphereNormals(64, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ShCoefficients l = RandomLight(seed, 0.55 * std::sqrt(4.0 * std::numbers::pi), s);
    const ShadingMap sh = EvalShading(g.normals, l, &g.mask);
    for (std::size_t p : g.mask.indices()) ASSERT_LE(sh.at(p), 0.95 + 1e-2);
  }
}

TEST(RandomLight, RejectionCapRaises) {
  LightSampling s;
  s.min_shading = 10.0;
  s.max_attempts = 50;
  EXPECT_THROW(RandomLight(1, 1.0, s), Error);
}

TEST(Albedo, Textures) {
  const AlbedoMap c = CheckerboardAlbedo(8, 8, 2, Vec3(1, 0, 0), Vec3(0, 0, 1));
  EXPECT_EQ(c(0, 0, 0), 1.0);
  EXPECT_EQ(c(2, 0, 2), 1.0);
  EXPECT_EQ(c(2, 2, 0), 1.0);
  const AlbedoMap r = RadialGradientAlbedo(16, 16, Vec3(0.9, 0.9, 0.9), Vec3(0.1, 0.1, 0.1));
  EXPECT_NEAR(r(8, 8, 0), 0.9, 1e-12);
  EXPECT_GT(r(8, 8, 1), r(15, 15, 1));
  const AlbedoMap n = SmoothNoiseAlbedo(32, 32, 3);
  EXPECT_EQ(n, SmoothNoiseAlbedo(32, 32, 3));
  for (double v : n.values()) {
    EXPECT_GE(v, 0.3);
    EXPECT_LE(v, 0.9);
  }
}

TEST(MakePair, EqualLightsGiveEqualImages) {
  const SynthScene sc = DefaultScene(32, 1);
  const SyntheticPair p =
      MakePair(sc.albedo, sc.geometry.normals, sc.light_i, sc.light_i, sc.geometry.mask);
  EXPECT_EQ(p.input.image_i, p.input.image_j);
}

TEST(MakePair, AmbientLightsReproduceAlbedo) {
  const SynthScene sc = DefaultScene(32, 2, 1);
  const ShCoefficients amb = ShCoefficients::Ambient(1.0);
  const SyntheticPair p = MakePair(sc.albedo, sc.geometry.normals, amb, amb, sc.geometry.mask);
  for (std::size_t q : sc.geometry.mask.indices()) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(p.input.image_i.at(q, c), sc.albedo.at(q, c), 1e-12);
      EXPECT_NEAR(p.input.image_j.at(q, c), sc.albedo.at(q, c), 1e-12);
    }
  }
}

TEST(MakePair, ImagesFollowTheModel) {
  for (int kind = 0; kind < 3; ++kind) {
    const SynthScene sc = DefaultScene(48, 3, kind);
    const SyntheticPair p =
        MakePair(sc.albedo, sc.geometry.normals, sc.light_i, sc.light_j, sc.geometry.mask);
    for (std::size_t q : sc.geometry.mask.indices()) {
      const double si = EvaluateShBasis(sc.geometry.normals.at(q)).vector().dot(sc.light_i.vector());
      const double sj = EvaluateShBasis(sc.geometry.normals.at(q)).vector().dot(sc.light_j.vector());
      EXPECT_NEAR(p.truth.shading_i.at(q), si, 1e-12);
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(p.input.image_i.at(q, c), sc.albedo.at(q, c) * si, 1e-12);
        EXPECT_NEAR(p.input.image_j.at(q, c), sc.albedo.at(q, c) * sj, 1e-12);
      }
    }
  }
}

TEST(MakePair, PriorPerturbationIsBounded) {
  const SynthScene sc = DefaultScene(48, 4);
  const SyntheticPair p = MakePair(sc.albedo, sc.geometry.normals, sc.light_i, sc.light_j,
                                   sc.geometry.mask, 10.0, 4);
  double worst = 0.0;
  for (std::size_t q : sc.geometry.mask.indices()) {
    const double e = AngularErrorDeg(p.input.prior_i.at(q), sc.geometry.normals.at(q));
    worst = std::max(worst, e);
    EXPECT_NEAR(p.input.prior_i.at(q).norm(), 1.0, 1e-12);
    EXPECT_GE(p.input.prior_i.at(q).z(), 0.0);
  }
  EXPECT_LE(worst, 10.0 + 1e-9);
  EXPECT_GT(worst, 5.0);
  const SyntheticPair exact =
      MakePair(sc.albedo, sc.geometry.normals, sc.light_i, sc.light_j, sc.geometry.mask);
  for (std::size_t q : sc.geometry.mask.indices()) {
    EXPECT_EQ(exact.input.prior_i.at(q), sc.geometry.normals.at(q));
  }
}

TEST(MakePair, Deterministic) {
  const SyntheticPair a = testing::ScenePair(32, 9, 7.0), b = testing::ScenePair(32, 9, 7.0);
  EXPECT_EQ(a.input.image_i, b.input.image_i);
  for (std::size_t q = 0; q < a.input.mask.pixel_count(); ++q) {
    EXPECT_EQ(a.input.prior_i.at(q), b.input.prior_i.at(q));
  }
}

TEST(Noise, ZeroSigmaIsIdentity) {
  const SyntheticPair p = testing::ScenePair(24, 1);
  EXPECT_EQ(AddGaussianNoise(p.input.image_i, 0.0, 5), p.input.image_i);
}

TEST(Noise, GaussianMeanOnMidGray) {
  const Image gray(1000, 334, 0.5);  // 1,002,000 samples
  const Image noisy = AddGaussianNoise(gray, 0.1, 17);
  double sum = 0.0;
  for (std::size_t k = 0; k < gray.values().size(); ++k) {
    sum += noisy.values()[k] - gray.values()[k];
  }
  const double n = static_cast<double>(gray.values().size());
  EXPECT_LT(std::abs(sum / n), 3.0 * 0.1 / std::sqrt(n));
  for (double v : noisy.values()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  EXPECT_EQ(noisy, AddGaussianNoise(gray, 0.1, 17));
  EXPECT_THROW(AddGaussianNoise(gray, -1.0, 1), Error);
}

TEST(Noise, SaltPepperFraction) {
  const Image gray(100, 100, 0.5);
  const Image all = AddSaltPepper(gray, 1.0, 3);
  for (double v : all.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  const Image some = AddSaltPepper(gray, 0.01, 3);
  int changed = 0, white = 0;
  for (std::size_t p = 0; p < some.pixel_count(); ++p) {
    if (some.at(p, 0) != 0.5) {
      ++changed;
      white += some.at(p, 0) == 1.0;
      EXPECT_EQ(some.at(p, 1), some.at(p, 0));
    }
  }
  EXPECT_EQ(changed, 100);
  EXPECT_GT(white, 20);
  EXPECT_LT(white, 80);
  EXPECT_EQ(some, AddSaltPepper(gray, 0.01, 3));
  EXPECT_THROW(AddSaltPepper(gray, 0.0, 3), Error);
  EXPECT_THROW(AddSaltPepper(gray, 1.5, 3), Error);
}

TEST(WriteSyntheticPair, Layout) {
  testing::TempDir dir("synth");
  const SyntheticPair p = testing::ScenePair(24, 2, 5.0);
  WriteSyntheticPair(dir.path().string(), p);
  for (const char* f : {"image_i.png", "image_j.png", "mask.png", "prior_i.png", "prior_j.png",
                        "pair.tsv", "ground_truth/albedo_i.png", "ground_truth/shading_j.png",
                        "ground_truth/normal_i.png", "ground_truth/light_i.txt",
                        "ground_truth/light_j.txt", "ground_truth/trace.csv"}) {
    const bool want = std::string(f) != "ground_truth/trace.csv";
    EXPECT_EQ(std::filesystem::exists(dir.path() / f), want) << f;
  }
  EXPECT_EQ(ReadShFile(dir.file("ground_truth/light_j.txt")), p.truth.light_j);
  EXPECT_EQ(ReadMaskPng(dir.file("mask.png")), p.input.mask);
}

}  // namespace
}  // namespace faceir
