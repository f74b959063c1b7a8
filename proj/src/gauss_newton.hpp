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

// Damped, iteratively reweighted Gauss-Newton steps on the decomposition
// energy. Per-pixel unknowns are eliminated block by block and the 18 light
// coefficients are solved through the Schur complement; the coupling of the
// least-squares light targets to every shading value enters as a low-rank
// update. Every accepted step lowers (or keeps) the true energy.

#ifndef FACEIR_SRC_GAUSS_NEWTON_HPP_
#define FACEIR_SRC_GAUSS_NEWTON_HPP_

#include <functional>
#include <string>

#include "faceir/energy.hpp"

namespace faceir::detail {

struct ActiveBlocks {
  bool albedo = true;
  bool shading = true;
  bool normals = true;
  bool light = true;
};

struct GnOptions {
  LossWeights weights;
  Phase phase = Phase::kCoarse;
  DetachMode detach = DetachMode::kDetachLight;
  ActiveBlocks active;
  double step_size = 1.0;
  int max_iterations = 100;
  double tolerance = 1e-6;
  int window = 50;
  // Reweighting floor: starts at delta_start, shrinks by 10 every
  // delta_period iterations, never below delta_min.
  double delta_start = 1e-3;
  double delta_min = 1e-7;
  int delta_period = 15;
  // Energies at or below this value count as converged; negative selects
  // 1e-11 times the starting energy.
  double energy_floor = -1.0;
};

struct GnRun {
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  int fallback_steps = 0;
  double initial_total = 0.0;
  double final_total = 0.0;
};

using AcceptCallback = std::function<void(int iteration, const EnergyEvaluation&)>;

// Minimizes TotalEnergy(state, input, weights, phase) over the active blocks.
// Throws kDiverged when the energy becomes non-finite.
GnRun RunGaussNewton(DecompositionState& state, const PairInput& input,
                     const GnOptions& options, const AcceptCallback& on_accept = {});

}  // namespace faceir::detail

#endif  // FACEIR_SRC_GAUSS_NEWTON_HPP_
