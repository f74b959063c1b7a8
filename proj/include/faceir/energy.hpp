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

// Loss terms of the decomposition energy, their weighted total and analytic
// gradients with respect to albedo, shading, normals and lights.
//
// Every per-pixel term is a mean over masked pixels; the light term is a plain
// l1 distance between 9-vectors. Absolute values use subgradient 0 at 0.

#ifndef FACEIR_ENERGY_HPP_
#define FACEIR_ENERGY_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "faceir/grid.hpp"
#include "faceir/sh_lighting.hpp"

namespace faceir {

struct LossWeights {
  double lambda_a = 0.25;
  double lambda_s = 0.1;
  double lambda_n = 0.5;
  double lambda_l = 0.01;
  double lambda_irec = 0.25;
  double lambda_srec = 0.01;
  double xi = 0.01;

  static LossWeights Default() { return {}; }
  static LossWeights Dpr();
  // "default" or "dpr"; throws kInvalidArgument otherwise.
  static LossWeights Preset(const std::string& name);

  // Throws kInvalidArgument for negative or non-finite weights or xi <= 0.
  void Validate() const;
  LossWeights Scaled(double factor) const;

  // Sets one field by its key: lambda_a, lambda_s, lambda_n, lambda_l,
  // lambda_irec, lambda_srec, xi.
  void Set(const std::string& key, double value);
  // key=value lines; '#' starts a comment. Unknown keys are errors.
  static LossWeights Parse(std::istream& in, LossWeights base);
  static LossWeights Parse(std::istream& in) { return Parse(in, LossWeights()); }
  static LossWeights Load(const std::string& path, LossWeights base);
  static LossWeights Load(const std::string& path) { return Load(path, LossWeights()); }
  std::string ToString() const;

  bool operator==(const LossWeights&) const = default;
};

struct PairInput {
  Image image_i;
  Image image_j;
  Mask mask;
  NormalMap prior_i;
  NormalMap prior_j;

  // Throws kInvalidArgument on size mismatch and kInsufficientData on an
  // empty mask.
  void Validate() const;
};

struct DecompositionState {
  AlbedoMap albedo_i;
  AlbedoMap albedo_j;
  ShadingMap shading_i;
  ShadingMap shading_j;
  NormalMap normals_i;
  NormalMap normals_j;
  ShCoefficients light_i;
  ShCoefficients light_j;
};

// Reference normals used for the least-squares light target: the prior during
// the coarse phase, the current estimate during refinement.
enum class Phase { kCoarse = 1, kRefine = 2 };

// Which derived quantities are treated as constants under differentiation.
enum class DetachMode {
  kNone,                   // gradients flow through the least-squares light
  kDetachLight,            // the least-squares light is a constant target
  kDetachLightAndShading,  // additionally no shading-reconstruction gradient to S
};

const char* DetachModeName(DetachMode mode);
DetachMode ParseDetachMode(const std::string& name);

using NormalGradient = std::vector<Vec3>;

struct AlbedoLoss {
  double value = 0.0;
  AlbedoMap grad_i;
  AlbedoMap grad_j;
};
// mean over masked pixels and channels of |A_i - A_j|.
AlbedoLoss LossAlbedoConsistency(const AlbedoMap& a_i, const AlbedoMap& a_j, const Mask& mask);

struct SmoothnessLoss {
  double value = 0.0;
  ShadingMap grad;
};
// mean over masked pixels of |dx S| / max(|dx S|, xi) + |dy S| / max(|dy S|, xi)
// with forward differences; a difference is 0 when the neighbor lies outside
// the image or the mask. The denominator is constant under differentiation.
SmoothnessLoss LossShadingSmoothness(const ShadingMap& s, const Mask& mask, double xi);

struct NormalLoss {
  double value = 0.0;
  NormalGradient grad_i;
  NormalGradient grad_j;
};
// mean over masked pixels of |Nbar_i - N_i|^2 + |Nbar_j - N_j|^2.
NormalLoss LossNormalPrior(const NormalMap& n_i, const NormalMap& n_j,
                           const NormalMap& nbar_i, const NormalMap& nbar_j,
                           const Mask& mask);

struct LightLoss {
  double value = 0.0;
  ShVector grad_i;
  ShVector grad_j;
};
// |l_i - lhat_i|_1 + |l_j - lhat_j|_1; gradients are with respect to l only.
LightLoss LossLightFidelity(const ShCoefficients& l_i, const ShCoefficients& l_j,
                            const ShCoefficients& lhat_i, const ShCoefficients& lhat_j);

struct ImageReconLoss {
  double value = 0.0;
  AlbedoMap grad_a_i;
  AlbedoMap grad_a_j;
  ShadingMap grad_s_i;
  ShadingMap grad_s_j;
};
// sum over both images of the mean over masked pixels and channels of |I - A S|.
ImageReconLoss LossImageRecon(const Image& i_i, const Image& i_j, const AlbedoMap& a_i,
                              const AlbedoMap& a_j, const ShadingMap& s_i,
                              const ShadingMap& s_j, const Mask& mask);

struct ShadingReconLoss {
  double value = 0.0;
  ShadingMap grad_s_i;
  ShadingMap grad_s_j;
  // Gradient with respect to the reconstructed shading maps.
  ShadingMap grad_shat_i;
  ShadingMap grad_shat_j;
};
// sum over both images of the mean over masked pixels of |S - Shat|.
ShadingReconLoss LossShadingRecon(const ShadingMap& s_i, const ShadingMap& s_j,
                                  const ShadingMap& shat_i, const ShadingMap& shat_j,
                                  const Mask& mask);

struct ShadingReconFullLoss {
  double value = 0.0;
  ShadingMap grad_s_i;
  ShadingMap grad_s_j;
  NormalGradient grad_n_i;
  NormalGradient grad_n_j;
  ShVector grad_l_i;
  ShVector grad_l_j;
};
// Same loss with Shat = EvalShading(N, l); gradients also flow to N and l.
ShadingReconFullLoss LossShadingReconFull(const ShadingMap& s_i, const ShadingMap& s_j,
                                          const NormalMap& n_i, const NormalMap& n_j,
                                          const ShCoefficients& l_i,
                                          const ShCoefficients& l_j, const Mask& mask);

// Unweighted term values.
struct EnergyTerms {
  double albedo = 0.0;
  double smoothness = 0.0;  // summed over both shading maps
  double normal = 0.0;
  double light = 0.0;
  double image_recon = 0.0;
  double shading_recon = 0.0;

  double Weighted(const LossWeights& w) const;
};

struct StateGradient {
  AlbedoMap albedo_i;
  AlbedoMap albedo_j;
  ShadingMap shading_i;
  ShadingMap shading_j;
  NormalGradient normals_i;
  NormalGradient normals_j;
  ShVector light_i = ShVector::Zero();
  ShVector light_j = ShVector::Zero();

  double SquaredNorm() const;
};

struct EnergyEvaluation {
  double total = 0.0;
  EnergyTerms terms;
  ShCoefficients lhat_i;
  ShCoefficients lhat_j;
  bool has_gradient = false;
  StateGradient gradient;
};

// Least-squares light targets for the given phase.
void LightTargets(const DecompositionState& state, const PairInput& input, Phase phase,
                  ShCoefficients& lhat_i, ShCoefficients& lhat_j);

// Weighted sum of every term. With with_gradient, the full gradient with
// respect to A, S, N and l (in R^3 for normals, before reprojection) is
// returned; the detach mode selects which dependencies of the least-squares
// light targets and shading reconstruction are differentiated.
EnergyEvaluation TotalEnergy(const DecompositionState& state, const PairInput& input,
                             const LossWeights& weights, Phase phase,
                             DetachMode detach = DetachMode::kNone,
                             bool with_gradient = true);

}  // namespace faceir

#endif  // FACEIR_ENERGY_HPP_
