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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace faceir {

namespace sh {
const double kC1 = 1.0 / std::sqrt(4.0 * std::numbers::pi);
const double kC2 = std::sqrt(3.0 / (4.0 * std::numbers::pi));
const double kC3 = 3.0 * std::sqrt(5.0 / (12.0 * std::numbers::pi));
const double kC4 = 0.5 * std::sqrt(5.0 / (4.0 * std::numbers::pi));
const double kC5 = 1.5 * std::sqrt(5.0 / (12.0 * std::numbers::pi));
}  // namespace sh

ShCoefficients ShCoefficients::FromVector(const ShVector& v) {
  ShCoefficients c;
  for (int k = 0; k < kShCount; ++k) c.l[k] = v[k];
  return c;
}

ShCoefficients ShCoefficients::Ambient(double s) {
  ShCoefficients c;
  c.l[0] = s * std::sqrt(4.0 * std::numbers::pi);
  return c;
}

bool ShCoefficients::AllFinite() const {
  for (double v : l) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ShVector ShBasisPolynomial(const Vec3& n) {
  using namespace sh;
  const double x = n.x(), y = n.y(), z = n.z();
  ShVector h;
  h << kC1, kC2 * y, kC2 * z, kC2 * x, kC3 * x * y, kC3 * y * z,
      kC4 * (3.0 * z * z - 1.0), kC3 * x * z, kC5 * (x * x - y * y);
  return h;
}

ShJacobian ShBasisJacobian(const Vec3& n) {
  using namespace sh;
  const double x = n.x(), y = n.y(), z = n.z();
  ShJacobian j = ShJacobian::Zero();
  j(1, 1) = kC2;
  j(2, 2) = kC2;
  j(3, 0) = kC2;
  j(4, 0) = kC3 * y;
  j(4, 1) = kC3 * x;
  j(5, 1) = kC3 * z;
  j(5, 2) = kC3 * y;
  j(6, 2) = 6.0 * kC4 * z;
  j(7, 0) = kC3 * z;
  j(7, 2) = kC3 * x;
  j(8, 0) = 2.0 * kC5 * x;
  j(8, 1) = -2.0 * kC5 * y;
  return j;
}

ShBasis EvaluateShBasis(const Vec3& normal) {
  if (!normal.allFinite()) ThrowInvalid("sh basis: non-finite normal");
  if (std::abs(normal.norm() - 1.0) > 1e-6) ThrowInvalid("sh basis: normal is not unit length");
  ShBasis b;
  Eigen::Map<ShVector>(b.h.data()) = ShBasisPolynomial(normal);
  return b;
}

ShadingMap EvalShading(const NormalMap& normals, const ShCoefficients& light,
                       const Mask* mask) {
  if (mask) RequireSameSize(normals, *mask, "eval_shading normals vs mask");
  ShadingMap s(normals.width(), normals.height());
  const ShVector l = light.vector();
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    if ((mask && !mask->at(p)) || !normals.valid(p)) continue;
    s.at(p) = ShBasisPolynomial(normals.at(p)).dot(l);
  }
  return s;
}

ShGramInverse PseudoInvertGram(const Eigen::Matrix<double, kShCount, kShCount>& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kShCount, kShCount>> eig(gram);
  const ShVector& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  ShGramInverse out;
  ShVector inv = ShVector::Zero();
  for (int k = 0; k < kShCount; ++k) {
    if (largest > 0.0 && values[k] > 1e-10 * largest) {
      inv[k] = 1.0 / values[k];
      ++out.rank;
    }
  }
  out.inverse = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

LightSolve SolveLightLsq(const ShadingMap& shading, const NormalMap& normals,
                         const Mask& mask) {
  RequireSameSize(shading, normals, "light solve shading vs normals");
  RequireSameSize(shading, mask, "light solve shading vs mask");
  Eigen::Matrix<double, kShCount, kShCount> gram = Eigen::Matrix<double, kShCount, kShCount>::Zero();
  ShVector rhs = ShVector::Zero();
  std::size_t used = 0;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p) || !normals.valid(p)) continue;
    const ShVector h = ShBasisPolynomial(normals.at(p));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(h);
    rhs += h * shading.at(p);
    ++used;
  }
  if (used < static_cast<std::size_t>(kShCount)) {
    throw Error(ErrorCode::kInsufficientData,
                "light solve needs at least 9 masked pixels, got " + std::to_string(used));
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  const ShGramInverse inv = PseudoInvertGram(gram);
  LightSolve out;
  out.light = ShCoefficients::FromVector(inv.inverse * rhs);
  out.rank = inv.rank;
  return out;
}

ShCoefficients ParseSh(std::istream& in) {
  ShCoefficients c;
  int count = 0;
  std::string token;
  while (in >> token) {
    if (count == kShCount) ThrowInvalid("sh file: more than nine values");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      ThrowInvalid("sh file: malformed number '" + token + "'");
    }
    if (used != token.size() || !std::isfinite(v)) {
      ThrowInvalid("sh file: malformed number '" + token + "'");
    }
    c.l[count++] = v;
  }
  if (count != kShCount) {
    ThrowInvalid("sh file: expected nine values, got " + std::to_string(count));
  }
  return c;
}

void FormatSh(std::ostream& out, const ShCoefficients& light) {
  out << std::setprecision(17);
  for (double v : light.l) out << v << '\n';
}

ShCoefficients ReadShFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open sh file: " + path);
  return ParseSh(in);
}

void WriteShFile(const std::string& path, const ShCoefficients& light) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write sh file: " + path);
  FormatSh(out, light);
  if (!out) throw Error(ErrorCode::kIo, "failed writing sh file: " + path);
}

}  // namespace faceir
