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

#include "faceir/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "faceir/io.hpp"
#include "faceir/lambertian.hpp"
#include "gauss_newton.hpp"

namespace faceir {
namespace {

using detail::ActiveBlocks;
using detail::GnOptions;
using detail::GnRun;

TraceEntry MakeEntry(int iteration, int phase, const char* step, const EnergyEvaluation& e) {
  TraceEntry t;
  t.iteration = iteration;
  t.phase = phase;
  t.step = step;
  t.total = e.total;
  t.terms = e.terms;
  return t;
}

GnOptions BaseOptions(const SolverConfig& config, Phase phase) {
  GnOptions o;
  o.weights = config.weights;
  o.phase = phase;
  o.detach = config.detach_mode;
  o.tolerance = config.convergence_tol;
  o.step_size = phase == Phase::kCoarse ? config.step_size_phase1 : config.step_size_phase2;
  return o;
}

void Record(SolverTrace& trace, const TraceEntry& e, const ProgressCallback& progress) {
  trace.entries.push_back(e);
  if (progress) progress(e);
}

// Block-coordinate variant: asd_steps_per_nld albedo/shading steps, then one
// normal/light step, each accepted only if the total energy does not rise.
GnRun RunAlternating(DecompositionState& state, const PairInput& input,
                     const SolverConfig& config, GnOptions o, int budget, int phase_id,
                     SolverTrace& trace, const ProgressCallback& progress) {
  GnRun total;
  EnergyEvaluation start = TotalEnergy(state, input, o.weights, o.phase, o.detach, false);
  total.initial_total = start.total;
  std::vector<double> history{start.total};
  int it = 0;
  int idle = 0;
  const int cycle = config.asd_steps_per_nld + 1;
  while (it < budget) {
    const bool asd = (it % cycle) < config.asd_steps_per_nld;
    GnOptions step = o;
    step.active = asd ? ActiveBlocks{true, true, false, false} : ActiveBlocks{false, false, true, true};
    step.max_iterations = 1;
    step.delta_start = std::max(o.delta_start * std::pow(0.1, it / (cycle * o.delta_period)),
                                o.delta_min);
    bool moved = false;
    const GnRun r = detail::RunGaussNewton(
        state, input, step, [&](int, const EnergyEvaluation& e) {
          moved = true;
          Record(trace, MakeEntry(static_cast<int>(trace.entries.size()) + 1, phase_id,
                                  asd ? "asd" : "nld", e),
                 progress);
        });
    total.fallback_steps += r.fallback_steps;
    ++it;
    if (!moved) {
      if (++idle >= cycle) {
        total.converged = true;
        total.stop_reason = "stationary";
        break;
      }
      continue;
    }
    idle = 0;
    ++total.iterations;
    history.push_back(r.final_total);
    if (r.final_total <= step.energy_floor) {
      total.converged = true;
      total.stop_reason = "zero energy";
      break;
    }
    if (static_cast<int>(history.size()) > o.window) {
      const double old = history[history.size() - 1 - o.window];
      if (old - r.final_total <= o.tolerance * std::max(old, 1e-300)) {
        total.converged = true;
        total.stop_reason = "tolerance";
        break;
      }
    }
  }
  if (total.stop_reason.empty()) total.stop_reason = "iteration limit";
  total.final_total = history.back();
  return total;
}

GnRun RunPhase(DecompositionState& state, const PairInput& input, const SolverConfig& config,
               GnOptions o, int budget, int phase_id, const char* label, SolverTrace& trace,
               const ProgressCallback& progress) {
  if (config.schedule == Schedule::kAlternating) {
    return RunAlternating(state, input, config, o, budget, phase_id, trace, progress);
  }
  o.max_iterations = budget;
  return detail::RunGaussNewton(state, input, o, [&](int, const EnergyEvaluation& e) {
    Record(trace, MakeEntry(static_cast<int>(trace.entries.size()) + 1, phase_id, label, e),
           progress);
  });
}

void Finalize(DecompositionResult& res, const PairInput& input, const SolverConfig& config) {
  DecompositionState& st = res.state;
  const Mask& mask = input.mask;
  const double eps = config.delight_epsilon;
  if (config.normalize_albedo_scale) {
    std::vector<double> ratios;
    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
      if (!mask.at(p)) continue;
      for (const auto& [im, s] : {std::pair{&input.image_i, &st.shading_i},
                                  std::pair{&input.image_j, &st.shading_j}}) {
        if (s->at(p) < eps) continue;
        double best = 0.0;
        for (int c = 0; c < 3; ++c) best = std::max(best, im->at(p, c) / s->at(p));
        ratios.push_back(best);
      }
    }
    if (!ratios.empty()) {
      const std::size_t k = static_cast<std::size_t>(0.99 * (ratios.size() - 1));
      std::nth_element(ratios.begin(), ratios.begin() + k, ratios.end());
      const double g = ratios[k];
      if (g > 1e-12 && std::isfinite(g)) {
        res.scale = g;
        for (ShadingMap* s : {&st.shading_i, &st.shading_j}) {
          for (double& v : s->values()) v *= g;
        }
        for (ShCoefficients* l : {&st.light_i, &st.light_j}) {
          for (double& v : l->l) v *= g;
        }
      }
    }
  }
  const DelightResult di = Delight(input.image_i, st.shading_i, eps);
  const DelightResult dj = Delight(input.image_j, st.shading_j, eps);
  st.albedo_i = di.albedo;
  st.albedo_j = dj.albedo;
  const int w = mask.width(), h = mask.height();
  res.low_confidence_i = Mask(w, h);
  res.low_confidence_j = Mask(w, h);
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p)) {
      for (int c = 0; c < 3; ++c) {
        st.albedo_i.at(p, c) = 0.0;
        st.albedo_j.at(p, c) = 0.0;
      }
      st.shading_i.at(p) = 0.0;
      st.shading_j.at(p) = 0.0;
      st.normals_i.set_valid(p, false);
      st.normals_j.set_valid(p, false);
      continue;
    }
    double peak = 0.0;
    for (int c = 0; c < 3; ++c) {
      peak = std::max({peak, input.image_i.at(p, c), input.image_j.at(p, c)});
    }
    const bool dark = peak < 0.5 / 255.0;
    res.low_confidence_i.set(p, dark || di.low_confidence.at(p));
    res.low_confidence_j.set(p, dark || dj.low_confidence.at(p));
  }
  res.reconstruction_i = Render(st.albedo_i, st.normals_i, st.light_i);
  res.reconstruction_j = Render(st.albedo_j, st.normals_j, st.light_j);
}

}  // namespace

void SolverConfig::Validate() const {
  weights.Validate();
  Require(phase1_iters > 0, "phase1_iters must be positive");
  Require(phase2_iters >= 0, "phase2_iters must be non-negative");
  Require(step_size_phase1 > 0.0 && step_size_phase2 > 0.0, "step sizes must be positive");
  Require(step_size_phase2 <= step_size_phase1, "phase-2 step must not exceed phase-1 step");
  Require(convergence_tol > 0.0, "convergence tolerance must be positive");
  Require(asd_steps_per_nld >= 1, "asd_steps_per_nld must be at least 1");
  Require(refit_iters >= 0, "refit_iters must be non-negative");
  Require(delight_epsilon > 0.0, "delight epsilon must be positive");
}

bool SolverTrace::Monotone() const {
  double prev = initial_total;
  for (const TraceEntry& e : entries) {
    if (e.total > prev) return false;
    prev = e.total;
  }
  return true;
}

DecompositionState InitState(const PairInput& input) {
  input.Validate();
  const Mask& mask = input.mask;
  const int w = mask.width(), h = mask.height();
  DecompositionState st;
  st.albedo_i = GridCast<AlbedoMap>(input.image_i);
  st.albedo_j = GridCast<AlbedoMap>(input.image_j);
  for (AlbedoMap* a : {&st.albedo_i, &st.albedo_j}) {
    for (double& v : a->values()) v = std::clamp(v, 0.0, 1.0);
  }
  st.shading_i = ShadingMap(w, h);
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) st.shading_i.at(p) = mask.at(p) ? 1.0 : 0.0;
  st.shading_j = st.shading_i;
  st.normals_i = input.prior_i;
  st.normals_j = input.prior_j;
  st.light_i = SolveLightLsq(st.shading_i, input.prior_i, mask).light;
  st.light_j = SolveLightLsq(st.shading_j, input.prior_j, mask).light;
  return st;
}

SolverTrace StageAsd(DecompositionState& state, const PairInput& input,
                     const SolverConfig& config, int iterations) {
  config.Validate();
  GnOptions o = BaseOptions(config, Phase::kCoarse);
  o.weights.lambda_n = o.weights.lambda_l = o.weights.lambda_srec = 0.0;
  o.active = ActiveBlocks{true, true, false, false};
  o.max_iterations = iterations;
  SolverTrace trace;
  const EnergyEvaluation e0 = TotalEnergy(state, input, o.weights, o.phase, o.detach, false);
  trace.initial_total = e0.total;
  trace.initial_terms = e0.terms;
  const GnRun r = detail::RunGaussNewton(state, input, o, [&](int it, const EnergyEvaluation& e) {
    trace.entries.push_back(MakeEntry(it, 1, "asd", e));
  });
  trace.converged = r.converged;
  trace.stop_reason = r.stop_reason;
  trace.fallback_steps = r.fallback_steps;
  trace.phase1_iterations = r.iterations;
  return trace;
}

SolverTrace StageNld(DecompositionState& state, const PairInput& input,
                     const SolverConfig& config, Phase phase, int iterations) {
  config.Validate();
  GnOptions o = BaseOptions(config, phase);
  o.weights.lambda_irec = o.weights.lambda_a = o.weights.lambda_s = 0.0;
  o.active = ActiveBlocks{false, false, true, true};
  o.max_iterations = iterations;
  SolverTrace trace;
  const EnergyEvaluation e0 = TotalEnergy(state, input, o.weights, o.phase, o.detach, false);
  trace.initial_total = e0.total;
  trace.initial_terms = e0.terms;
  const int phase_id = static_cast<int>(phase);
  const GnRun r = detail::RunGaussNewton(state, input, o, [&](int it, const EnergyEvaluation& e) {
    trace.entries.push_back(MakeEntry(it, phase_id, "nld", e));
  });
  trace.converged = r.converged;
  trace.stop_reason = r.stop_reason;
  trace.fallback_steps = r.fallback_steps;
  (phase == Phase::kCoarse ? trace.phase1_iterations : trace.phase2_iterations) = r.iterations;
  return trace;
}

DecompositionResult DecomposePair(const PairInput& input, const SolverConfig& config,
                                  const ProgressCallback& progress) {
  config.Validate();
  DecompositionResult res;
  res.weights = config.weights;
  res.mask = input.mask;
  res.state = InitState(input);
  SolverTrace& trace = res.trace;
  DecompositionState& st = res.state;

  const EnergyEvaluation e0 = TotalEnergy(st, input, config.weights, Phase::kCoarse,
                                          config.detach_mode, false);
  trace.initial_total = e0.total;
  trace.initial_terms = e0.terms;

  GnOptions o1 = BaseOptions(config, Phase::kCoarse);
  o1.energy_floor = 1e-11 * e0.total;
  const GnRun r1 = RunPhase(st, input, config, o1, config.phase1_iters, 1, "joint", trace, progress);
  trace.phase1_iterations = r1.iterations;
  trace.fallback_steps += r1.fallback_steps;
  trace.converged = r1.converged;
  trace.stop_reason = r1.stop_reason;
  res.phase1_state = st;

  if (config.phase2_iters > 0) {
    Phase phase = Phase::kRefine;
    const double before = trace.final_total();
    DecompositionState candidate = st;
    GnOptions refit = BaseOptions(config, Phase::kRefine);
    refit.active = ActiveBlocks{false, false, false, true};
    refit.max_iterations = config.refit_iters;
    refit.energy_floor = o1.energy_floor;
    if (config.refit_iters > 0) detail::RunGaussNewton(candidate, input, refit);
    const EnergyEvaluation switched = TotalEnergy(candidate, input, config.weights,
                                                  Phase::kRefine, config.detach_mode, false);
    if (std::isfinite(switched.total) && switched.total <= before) {
      st = std::move(candidate);
      Record(trace, MakeEntry(static_cast<int>(trace.entries.size()) + 1, 2, "refit", switched),
             progress);
    } else {
      trace.refine_targets_accepted = false;
      phase = Phase::kCoarse;
    }
    GnOptions o2 = BaseOptions(config, Phase::kRefine);
    o2.phase = phase;
    o2.delta_start = 1e-5;
    o2.energy_floor = o1.energy_floor;
    if (config.freeze_normals_phase2) o2.active.normals = false;
    const GnRun r2 =
        RunPhase(st, input, config, o2, config.phase2_iters, 2, "polish", trace, progress);
    trace.phase2_iterations = r2.iterations;
    trace.fallback_steps += r2.fallback_steps;
    trace.converged = r2.converged;
    trace.stop_reason = r2.stop_reason;
  }
  Finalize(res, input, config);
  return res;
}

Image Relight(const AlbedoMap& albedo, const NormalMap& normals,
              const ShCoefficients& target_light) {
  if (!target_light.AllFinite()) ThrowInvalid("relight: non-finite light");
  return Render(albedo, normals, target_light);
}

Image TransferLight(const DecompositionResult& source, Member source_member,
                    const DecompositionResult& target, Member target_member) {
  const ShCoefficients& light =
      source_member == Member::kI ? source.state.light_i : source.state.light_j;
  const bool ti = target_member == Member::kI;
  return Relight(ti ? target.state.albedo_i : target.state.albedo_j,
                 ti ? target.state.normals_i : target.state.normals_j, light);
}

void WriteTraceCsv(const std::string& path, const SolverTrace& trace,
                   const LossWeights& weights, const std::string& preset) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "# preset=" << preset << ' ' << weights.ToString() << '\n';
  out << "iteration,phase,step,total,albedo,smoothness,normal,light,image_recon,shading_recon\n";
  out << std::setprecision(17);
  auto row = [&](int it, int phase, const std::string& step, double total,
                 const EnergyTerms& t) {
    out << it << ',' << phase << ',' << step << ',' << total << ',' << t.albedo << ','
        << t.smoothness << ',' << t.normal << ',' << t.light << ',' << t.image_recon << ','
        << t.shading_recon << '\n';
  };
  row(0, 1, "init", trace.initial_total, trace.initial_terms);
  for (const TraceEntry& e : trace.entries) row(e.iteration, e.phase, e.step, e.total, e.terms);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

void WriteResult(const std::string& directory, const DecompositionResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + directory + ": " + ec.message());
  const fs::path dir(directory);
  const DecompositionState& st = result.state;
  WriteImagePng((dir / "albedo_i.png").string(), GridCast<Image>(st.albedo_i));
  WriteImagePng((dir / "albedo_j.png").string(), GridCast<Image>(st.albedo_j));
  WriteGrayPng((dir / "shading_i.png").string(), st.shading_i);
  WriteGrayPng((dir / "shading_j.png").string(), st.shading_j);
  WriteNormalPng((dir / "normal_i.png").string(), st.normals_i);
  WriteNormalPng((dir / "normal_j.png").string(), st.normals_j);
  WriteShFile((dir / "light_i.txt").string(), st.light_i);
  WriteShFile((dir / "light_j.txt").string(), st.light_j);
  WriteTraceCsv((dir / "trace.csv").string(), result.trace, result.weights, result.preset);
  WriteImagePng((dir / "recon.png").string(), result.reconstruction_i);
}

ResultFiles ReadResult(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  ResultFiles r;
  r.albedo_i = GridCast<AlbedoMap>(ReadImagePng((dir / "albedo_i.png").string()));
  r.albedo_j = GridCast<AlbedoMap>(ReadImagePng((dir / "albedo_j.png").string()));
  r.shading_i = ReadGrayPng((dir / "shading_i.png").string());
  r.shading_j = ReadGrayPng((dir / "shading_j.png").string());
  r.normals_i = ReadNormalPng((dir / "normal_i.png").string());
  r.normals_j = ReadNormalPng((dir / "normal_j.png").string());
  r.light_i = ReadShFile((dir / "light_i.txt").string());
  r.light_j = ReadShFile((dir / "light_j.txt").string());
  return r;
}

}  // namespace faceir
