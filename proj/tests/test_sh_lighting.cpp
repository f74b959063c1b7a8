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

#include "faceir/sh_lighting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "faceir/error.hpp"
#include "faceir/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace faceir {
namespace {

using testing::RandomSh;
using testing::RandomUnit;

constexpr double kPi = std::numbers::pi;

TEST(ShBasis, ConstantsMatchClosedForms) {
  EXPECT_NEAR(sh::kC1, 0.28209479177387814, 1e-15);
  EXPECT_NEAR(sh::kC2, 0.48860251190291992, 1e-15);
  EXPECT_NEAR(sh::kC3, 1.0925484305920792, 1e-14);
  EXPECT_NEAR(sh::kC4, 0.31539156525252005, 1e-15);
  EXPECT_NEAR(sh::kC5, 0.54627421529603959, 1e-15);
}

TEST(ShBasis, MatchesWrittenFormulas) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 2000; ++t) {
    const Vec3 n = RandomUnit(rng);
    const ShBasis b = EvaluateShBasis(n);
    const ShVector ref = oracle::ShBasisBrute(n);
    for (int k = 0; k < kShCount; ++k) EXPECT_NEAR(b.h[k], ref[k], 1e-14);
  }
}

TEST(ShBasis, FrontalNormal) {
  const ShBasis b = EvaluateShBasis(Vec3(0, 0, 1));
  EXPECT_NEAR(b.h[0], sh::kC1, 1e-15);
  EXPECT_NEAR(b.h[2], sh::kC2, 1e-15);
  EXPECT_NEAR(b.h[6], 2.0 * sh::kC4, 1e-15);
  for (int k : {1, 3, 4, 5, 7, 8}) EXPECT_EQ(b.h[k], 0.0);
}

TEST(ShBasis, RejectsNonUnitNormals) {
  EXPECT_THROW(EvaluateShBasis(Vec3(0, 0, 1.01)), Error);
  EXPECT_THROW(EvaluateShBasis(Vec3(0, 0, 0)), Error);
  EXPECT_THROW(EvaluateShBasis(Vec3(NAN, 0, 1)), Error);
}

TEST(ShBasis, OrthonormalOnTheSphere) {
  // Fibonacci quadrature of the Gram matrix of the basis.
  const int n = 200000;
  Eigen::Matrix<double, kShCount, kShCount> gram = Eigen::Matrix<double, kShCount, kShCount>::Zero();
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    const Vec3 v(r * std::cos(golden * i), r * std::sin(golden * i), z);
    const ShVector h = ShBasisPolynomial(v);
    gram += h * h.transpose();
  }
  gram *= 4.0 * kPi / n;
  for (int a = 0; a < kShCount; ++a) {
    for (int b = 0; b < kShCount; ++b) EXPECT_NEAR(gram(a, b), a == b ? 1.0 : 0.0, 1e-4);
  }
}

TEST(ShBasis, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Vec3 n = RandomUnit(rng);
    const ShJacobian j = ShBasisJacobian(n);
    for (int c = 0; c < 3; ++c) {
      Vec3 a = n, b = n;
      a[c] += 1e-6;
      b[c] -= 1e-6;
      const ShVector fd = (ShBasisPolynomial(a) - ShBasisPolynomial(b)) / 2e-6;
      for (int k = 0; k < kShCount; ++k) EXPECT_NEAR(j(k, c), fd[k], 1e-8);
    }
  }
}

TEST(ShCoefficients, AmbientGivesConstantShading) {
  std::mt19937_64 rng(3);
  const ShCoefficients l = ShCoefficients::Ambient(0.7);
  EXPECT_NEAR(l[0], 0.7 * std::sqrt(4.0 * kPi), 1e-15);
  for (int t = 0; t < 100; ++t) {
    EXPECT_NEAR(EvaluateShBasis(RandomUnit(rng)).vector().dot(l.vector()), 0.7, 1e-14);
  }
}

TEST(EvalShading, MatchesPerPixelBasisAndRespectsMask) {
  std::mt19937_64 rng(4);
  NormalMap normals(7, 5);
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) normals.at(p) = RandomUnit(rng);
  normals.set_valid(3, false);
  Mask mask = Mask::Full(7, 5);
  mask.set(2, 2, false);
  const ShCoefficients l = RandomSh(rng);
  const ShadingMap s = EvalShading(normals, l, &mask);
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    const bool inside = mask.at(p) && normals.valid(p);
    const double expected = inside ? oracle::ShBasisBrute(normals.at(p)).dot(l.vector()) : 0.0;
    EXPECT_NEAR(s.at(p), expected, 1e-13);
  }
}

TEST(EvalShading, IsLinearInTheLight) {
  std::mt19937_64 rng(5);
  NormalMap normals(4, 4);
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) normals.at(p) = RandomUnit(rng);
  const ShCoefficients a = RandomSh(rng), b = RandomSh(rng);
  const ShadingMap sa = EvalShading(normals, a), sb = EvalShading(normals, b);
  const ShadingMap sab = EvalShading(normals, ShCoefficients::FromVector(2.0 * a.vector() - b.vector()));
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    EXPECT_NEAR(sab.at(p), 2.0 * sa.at(p) - sb.at(p), 1e-13);
  }
}

TEST(SolveLightLsq, RecoversLightOnSphereCap) {
  const SphereGeometry g = SphereNormals(64, 0.9);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 5; ++t) {
    const ShCoefficients l = RandomSh(rng);
    const LightSolve s = SolveLightLsq(EvalShading(g.normals, l, &g.mask), g.normals, g.mask);
    EXPECT_EQ(s.rank, kShCount);
    EXPECT_LT((s.light.vector() - l.vector()).norm() / l.vector().norm(), 1e-9);
  }
}

TEST(SolveLightLsq, MinimumNormOnDegenerateNormals) {
  // Every pixel sees the same normal: rank one, solution along h.
  NormalMap normals(4, 4, Vec3(0, 0, 1));
  ShadingMap s(4, 4, 0.6);
  const LightSolve r = SolveLightLsq(s, normals, Mask::Full(4, 4));
  EXPECT_EQ(r.rank, 1);
  EXPECT_TRUE(r.rank_deficient());
  const ShVector h = oracle::ShBasisBrute(Vec3(0, 0, 1));
  const ShVector expected = h * (0.6 / h.squaredNorm());
  EXPECT_LT((r.light.vector() - expected).norm(), 1e-12);
}

TEST(SolveLightLsq, NeedsNinePixels) {
  NormalMap normals(3, 3);
  std::mt19937_64 rng(7);
  for (std::size_t p = 0; p < 9; ++p) normals.at(p) = testing::RandomFrontUnit(rng);
  ShadingMap s(3, 3, 0.5);
  Mask mask = Mask::Full(3, 3);
  EXPECT_NO_THROW(SolveLightLsq(s, normals, mask));
  mask.set(1, 1, false);
  try {
    SolveLightLsq(s, normals, mask);
    FAIL() << "expected insufficient data";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(SolveLightLsq, RejectsMismatchedSizes) {
  EXPECT_THROW(SolveLightLsq(ShadingMap(4, 4), NormalMap(4, 5), Mask::Full(4, 4)), Error);
}

TEST(ShFile, RoundTripIsExact) {
  std::mt19937_64 rng(8);
  const ShCoefficients l = RandomSh(rng, 3.0);
  std::stringstream ss;
  FormatSh(ss, l);
  const ShCoefficients back = ParseSh(ss);
  for (int k = 0; k < kShCount; ++k) EXPECT_EQ(back[k], l[k]);
}

TEST(ShFile, AcceptsAnyWhitespace) {
  std::istringstream in("1 2\t3\n4\n\n5 6 7 8\r\n9\n");
  const ShCoefficients l = ParseSh(in);
  for (int k = 0; k < kShCount; ++k) EXPECT_EQ(l[k], k + 1.0);
}

TEST(ShFile, RejectsMalformedInput) {
  for (const char* text : {"1 2 3 4 5 6 7 8", "1 2 3 4 5 6 7 8 x", "1 2 3 4 5 6 7 8 9 10",
                           "1 2 3 4 5 6 7 8 nan", ""}) {
    std::istringstream in(text);
    EXPECT_THROW(ParseSh(in), Error) << text;
  }
}

TEST(ShFile, MissingFileIsAnIoError) {
  try {
    ReadShFile("/nonexistent/dir/light.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(ShFile, WriteThenRead) {
  testing::TempDir dir("sh");
  std::mt19937_64 rng(9);
  const ShCoefficients l = RandomSh(rng);
  WriteShFile(dir.file("l.txt"), l);
  EXPECT_EQ(ReadShFile(dir.file("l.txt")).vector(), l.vector());
}

}  // namespace
}  // namespace faceir
