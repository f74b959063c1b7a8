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

// Two-phase pair decomposer, relighting and result (de)serialization.

#ifndef FACEIR_DECOMPOSER_HPP_
#define FACEIR_DECOMPOSER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "faceir/energy.hpp"
#include "faceir/grid.hpp"
#include "faceir/sh_lighting.hpp"

namespace faceir {

enum class Schedule {
  kJoint,        // every step updates all variables
  kAlternating,  // albedo/shading steps interleaved with normal/light steps
};

struct SolverConfig {
  LossWeights weights;
  int phase1_iters = 300;
  int phase2_iters = 100;
  // Initial step fraction of each Gauss-Newton update.
  double step_size_phase1 = 1.0;
  double step_size_phase2 = 0.5;
  double convergence_tol = 1e-6;
  DetachMode detach_mode = DetachMode::kDetachLight;
  Schedule schedule = Schedule::kJoint;
  int asd_steps_per_nld = 1;
  // Keep normals fixed during the refinement polish.
  bool freeze_normals_phase2 = false;
  // Light-only refit when switching to refinement targets.
  int refit_iters = 50;
  double delight_epsilon = 1e-3;
  // Rescale shading and light so that the brightest albedo is 1.
  bool normalize_albedo_scale = true;

  void Validate() const;
};

struct TraceEntry {
  int iteration = 0;
  int phase = 1;
  std::string step;  // joint, asd, nld, refit, polish
  double total = 0.0;
  EnergyTerms terms;
};

struct SolverTrace {
  double initial_total = 0.0;
  EnergyTerms initial_terms;
  std::vector<TraceEntry> entries;
  bool converged = false;
  std::string stop_reason;
  // Steps that fell back to the detached model after the full one failed.
  int fallback_steps = 0;
  // False when the refinement targets raised the energy and were rejected.
  bool refine_targets_accepted = true;
  int phase1_iterations = 0;
  int phase2_iterations = 0;

  std::size_t size() const { return entries.size(); }
  double final_total() const { return entries.empty() ? initial_total : entries.back().total; }
  bool Monotone() const;
};

struct DecompositionResult {
  // Final state: de-lit albedo, rescaled shading and light, refined normals.
  DecompositionState state;
  // State at the end of the coarse phase (before rescaling).
  DecompositionState phase1_state;
  Mask mask;
  Mask low_confidence_i;
  Mask low_confidence_j;
  Image reconstruction_i;
  Image reconstruction_j;
  double scale = 1.0;
  SolverTrace trace;
  LossWeights weights;
  std::string preset = "custom";
};

// A = clamp(I), S = 1 inside the mask (0 outside), N = prior, l = LSQ(S, prior).
DecompositionState InitState(const PairInput& input);

// Gradient-based steps on albedo and shading for the image objective
// lambda_irec Irec + lambda_a La + lambda_s Ls.
SolverTrace StageAsd(DecompositionState& state, const PairInput& input,
                     const SolverConfig& config, int iterations);

// Steps on normals and lights for lambda_n Ln + lambda_l Ll + lambda_srec Srec.
// The phase selects the reference normals of the least-squares light target.
SolverTrace StageNld(DecompositionState& state, const PairInput& input,
                     const SolverConfig& config, Phase phase, int iterations);

using ProgressCallback = std::function<void(const TraceEntry&)>;

DecompositionResult DecomposePair(const PairInput& input, const SolverConfig& config,
                                  const ProgressCallback& progress = {});

Image Relight(const AlbedoMap& albedo, const NormalMap& normals,
              const ShCoefficients& target_light);

enum class Member { kI, kJ };

// Relights the target member's albedo and normals with the source member's light.
Image TransferLight(const DecompositionResult& source, Member source_member,
                    const DecompositionResult& target, Member target_member);

// Result directory: albedo_{i,j}.png, shading_{i,j}.png, normal_{i,j}.png,
// light_{i,j}.txt, trace.csv and recon.png (reconstruction of image i).
void WriteResult(const std::string& directory, const DecompositionResult& result);
void WriteTraceCsv(const std::string& path, const SolverTrace& trace,
                   const LossWeights& weights, const std::string& preset);

struct ResultFiles {
  AlbedoMap albedo_i;
  AlbedoMap albedo_j;
  ShadingMap shading_i;
  ShadingMap shading_j;
  NormalMap normals_i;
  NormalMap normals_j;
  ShCoefficients light_i;
  ShCoefficients light_j;
};
ResultFiles ReadResult(const std::string& directory);

}  // namespace faceir

#endif  // FACEIR_DECOMPOSER_HPP_
