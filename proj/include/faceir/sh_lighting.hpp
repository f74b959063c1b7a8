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

// Second-order spherical-harmonic lighting: basis evaluation, shading
// synthesis and least-squares light recovery.

#ifndef FACEIR_SH_LIGHTING_HPP_
#define FACEIR_SH_LIGHTING_HPP_

#include <array>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "faceir/grid.hpp"

namespace faceir {

inline constexpr int kShCount = 9;

using ShVector = Eigen::Matrix<double, kShCount, 1>;
// Derivative of the nine basis values with respect to (x, y, z).
using ShJacobian = Eigen::Matrix<double, kShCount, 3>;

// Nine basis values h = [h1..h9] at one normal.
struct ShBasis {
  std::array<double, kShCount> h{};

  double operator[](int k) const { return h[k]; }
  ShVector vector() const { return Eigen::Map<const ShVector>(h.data()); }
};

// Lighting coefficients l = [l1..l9], shared by the three color channels.
struct ShCoefficients {
  std::array<double, kShCount> l{};

  ShCoefficients() = default;
  explicit ShCoefficients(const std::array<double, kShCount>& values) : l(values) {}
  static ShCoefficients FromVector(const ShVector& v);
  // Uniform light producing shading s everywhere (l1 = s * sqrt(4 pi)).
  static ShCoefficients Ambient(double s = 1.0);

  double& operator[](int k) { return l[k]; }
  double operator[](int k) const { return l[k]; }
  ShVector vector() const { return Eigen::Map<const ShVector>(l.data()); }
  bool AllFinite() const;

  bool operator==(const ShCoefficients&) const = default;
};

// Basis constants.
namespace sh {
extern const double kC1;  // 1 / sqrt(4 pi)
extern const double kC2;  // sqrt(3 / (4 pi))
extern const double kC3;  // 3 sqrt(5 / (12 pi))
extern const double kC4;  // 1/2 sqrt(5 / (4 pi))
extern const double kC5;  // 3/2 sqrt(5 / (12 pi))
}  // namespace sh

// Evaluates the basis at a unit normal. Throws kInvalidArgument for a
// non-finite input or one whose norm differs from 1 by more than 1e-6.
ShBasis EvaluateShBasis(const Vec3& normal);

// Unchecked polynomial evaluation, also valid off the unit sphere.
ShVector ShBasisPolynomial(const Vec3& n);
ShJacobian ShBasisJacobian(const Vec3& n);

// S(p) = h(N(p)) . l on masked (or all) pixels; zero elsewhere. Invalid normal
// pixels also receive zero. Values are not clamped.
ShadingMap EvalShading(const NormalMap& normals, const ShCoefficients& light,
                       const Mask* mask = nullptr);

struct LightSolve {
  ShCoefficients light;
  int rank = 0;
  bool rank_deficient() const { return rank < kShCount; }
};

// Pseudo-inverse of a symmetric positive semi-definite 9x9 matrix; eigenvalues
// below 1e-10 times the largest are treated as zero.
struct ShGramInverse {
  Eigen::Matrix<double, kShCount, kShCount> inverse;
  int rank = 0;
};
ShGramInverse PseudoInvertGram(const Eigen::Matrix<double, kShCount, kShCount>& gram);

// argmin_l sum_p (h_p . l - S(p))^2 over masked pixels with valid normals.
// Rank-deficient systems return the minimum-norm solution. Throws
// kInsufficientData for fewer than nine usable pixels.
LightSolve SolveLightLsq(const ShadingMap& shading, const NormalMap& normals,
                         const Mask& mask);

// SH light file: nine whitespace-separated decimal numbers.
ShCoefficients ReadShFile(const std::string& path);
void WriteShFile(const std::string& path, const ShCoefficients& light);
ShCoefficients ParseSh(std::istream& in);
void FormatSh(std::ostream& out, const ShCoefficients& light);

}  // namespace faceir

#endif  // FACEIR_SH_LIGHTING_HPP_
