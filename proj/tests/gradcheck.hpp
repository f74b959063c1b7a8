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

// Central finite-difference checks of the energy gradients on small random
// states kept away from the non-differentiable points of every term.

#ifndef FACEIR_TESTS_GRADCHECK_HPP_
#define FACEIR_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "faceir/energy.hpp"
#include "faceir/sh_lighting.hpp"

namespace faceir::gradcheck {

struct Problem {
  PairInput input;
  DecompositionState state;
};

// Flattened view: A_i, A_j, S_i, S_j, N_i, N_j, l_i, l_j.
inline Eigen::VectorXd Pack(const DecompositionState& s) {
  const std::size_t n = s.shading_i.pixel_count();
  Eigen::VectorXd x(static_cast<Eigen::Index>(14 * n + 18));
  Eigen::Index k = 0;
  for (const AlbedoMap* a : {&s.albedo_i, &s.albedo_j}) {
    for (double v : a->values()) x[k++] = v;
  }
  for (const ShadingMap* m : {&s.shading_i, &s.shading_j}) {
    for (double v : m->values()) x[k++] = v;
  }
  for (const NormalMap* m : {&s.normals_i, &s.normals_j}) {
    for (std::size_t p = 0; p < n; ++p) {
      for (int c = 0; c < 3; ++c) x[k++] = m->at(p)[c];
    }
  }
  for (const ShCoefficients* l : {&s.light_i, &s.light_j}) {
    for (double v : l->l) x[k++] = v;
  }
  return x;
}

inline void Unpack(const Eigen::VectorXd& x, DecompositionState& s) {
  const std::size_t n = s.shading_i.pixel_count();
  Eigen::Index k = 0;
  for (AlbedoMap* a : {&s.albedo_i, &s.albedo_j}) {
    for (double& v : a->values()) v = x[k++];
  }
  for (ShadingMap* m : {&s.shading_i, &s.shading_j}) {
    for (double& v : m->values()) v = x[k++];
  }
  for (NormalMap* m : {&s.normals_i, &s.normals_j}) {
    for (std::size_t p = 0; p < n; ++p) {
      for (int c = 0; c < 3; ++c) m->at(p)[c] = x[k++];
    }
  }
  for (ShCoefficients* l : {&s.light_i, &s.light_j}) {
    for (double& v : l->l) v = x[k++];
  }
}

// Packs per-block gradients in the layout of Pack; missing blocks are zero.
struct GradientParts {
  const AlbedoMap* a_i = nullptr;
  const AlbedoMap* a_j = nullptr;
  const ShadingMap* s_i = nullptr;
  const ShadingMap* s_j = nullptr;
  const NormalGradient* n_i = nullptr;
  const NormalGradient* n_j = nullptr;
  const ShVector* l_i = nullptr;
  const ShVector* l_j = nullptr;
};

inline Eigen::VectorXd PackGradient(const GradientParts& g, std::size_t n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(14 * n + 18));
  Eigen::Index k = 0;
  for (const AlbedoMap* a : {g.a_i, g.a_j}) {
    for (std::size_t q = 0; q < 3 * n; ++q, ++k) {
      if (a) x[k] = a->values()[q];
    }
  }
  for (const ShadingMap* m : {g.s_i, g.s_j}) {
    for (std::size_t q = 0; q < n; ++q, ++k) {
      if (m) x[k] = m->values()[q];
    }
  }
  for (const NormalGradient* m : {g.n_i, g.n_j}) {
    for (std::size_t p = 0; p < n; ++p) {
      for (int c = 0; c < 3; ++c, ++k) {
        if (m) x[k] = (*m)[p][c];
      }
    }
  }
  for (const ShVector* l : {g.l_i, g.l_j}) {
    for (int c = 0; c < kShCount; ++c, ++k) {
      if (l) x[k] = (*l)[c];
    }
  }
  return x;
}

// Value and packed analytic gradient of one term at a state.
using Term = std::function<std::pair<double, Eigen::VectorXd>(const DecompositionState&,
                                                              const PairInput&)>;

struct NamedTerm {
  std::string name;
  Term term;
};

inline Vec3 FrontUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v(g(rng), g(rng), std::abs(g(rng)) + 0.5);
  return v.normalized();
}

// Smallest distance of any term argument from its kink.
inline double KinkMargin(const Problem& pr, double xi) {
  const DecompositionState& s = pr.state;
  const PairInput& in = pr.input;
  const int w = in.mask.width(), h = in.mask.height();
  double m = 1e300;
  for (std::size_t p = 0; p < in.mask.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      m = std::min(m, std::abs(in.image_i.at(p, c) - s.albedo_i.at(p, c) * s.shading_i.at(p)));
      m = std::min(m, std::abs(in.image_j.at(p, c) - s.albedo_j.at(p, c) * s.shading_j.at(p)));
      m = std::min(m, std::abs(s.albedo_i.at(p, c) - s.albedo_j.at(p, c)));
    }
  }
  for (const auto& [sm, nm, l] :
       {std::tuple{&s.shading_i, &s.normals_i, &s.light_i},
        std::tuple{&s.shading_j, &s.normals_j, &s.light_j}}) {
    const ShadingMap shat = EvalShading(*nm, *l);
    for (std::size_t p = 0; p < in.mask.pixel_count(); ++p) {
      m = std::min(m, std::abs(sm->at(p) - shat.at(p)));
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
          if (x + dx >= w || y + dy >= h) continue;
          const double d = std::abs((*sm)(x + dx, y + dy) - (*sm)(x, y));
          m = std::min({m, d, std::abs(xi - d)});
        }
      }
    }
  }
  for (Phase phase : {Phase::kCoarse, Phase::kRefine}) {
    ShCoefficients lhat_i, lhat_j;
    LightTargets(s, in, phase, lhat_i, lhat_j);
    for (int k = 0; k < kShCount; ++k) {
      m = std::min(m, std::abs(s.light_i[k] - lhat_i[k]));
      m = std::min(m, std::abs(s.light_j[k] - lhat_j[k]));
    }
  }
  return m;
}

// Random size x size problem whose smoothness differences stay below xi and
// whose every kink argument is at least `margin` away from zero.
inline Problem RandomProblem(std::mt19937_64& rng, int size = 8, double xi = 0.01,
                             double margin = 1e-4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Problem pr;
    PairInput& in = pr.input;
    DecompositionState& s = pr.state;
    in.mask = Mask::Full(size, size);
    in.image_i = Image(size, size);
    in.image_j = Image(size, size);
    for (double& v : in.image_i.values()) v = u(rng);
    for (double& v : in.image_j.values()) v = u(rng);
    in.prior_i = NormalMap(size, size);
    in.prior_j = NormalMap(size, size);
    s.normals_i = NormalMap(size, size);
    s.normals_j = NormalMap(size, size);
    for (NormalMap* nm : {&in.prior_i, &in.prior_j, &s.normals_i, &s.normals_j}) {
      for (std::size_t p = 0; p < nm->pixel_count(); ++p) nm->at(p) = FrontUnit(rng);
    }
    s.albedo_i = AlbedoMap(size, size);
    s.albedo_j = AlbedoMap(size, size);
    for (double& v : s.albedo_i.values()) v = 0.1 + 0.8 * u(rng);
    for (double& v : s.albedo_j.values()) v = 0.1 + 0.8 * u(rng);
    for (ShadingMap* sm : {&s.shading_i, &s.shading_j}) {
      *sm = ShadingMap(size, size);
      std::vector<double> ax(size), by(size);
      auto step = [&] { return (u(rng) < 0.5 ? -1.0 : 1.0) * (0.15 + 0.25 * u(rng)) * xi; };
      ax[0] = by[0] = 0.0;
      for (int k = 1; k < size; ++k) {
        ax[k] = ax[k - 1] + step();
        by[k] = by[k - 1] + step();
      }
      const double base = 0.4 + 0.4 * u(rng);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) (*sm)(x, y) = base + ax[x] + by[y];
      }
    }
    for (ShCoefficients* l : {&s.light_i, &s.light_j}) {
      for (double& v : l->l) v = u(rng) - 0.5;
      (*l)[0] += 1.5;
    }
    if (KinkMargin(pr, xi) >= margin) return pr;
  }
}

// Relative error ||fd - g|| / max(||fd||, ||g||, floor).
inline double CheckTerm(const Term& term, const Problem& pr, double h = 1e-7) {
  const auto [value, analytic] = term(pr.state, pr.input);
  (void)value;
  Eigen::VectorXd x = Pack(pr.state);
  Eigen::VectorXd fd(x.size());
  DecompositionState probe = pr.state;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    Unpack(x, probe);
    const double fp = term(probe, pr.input).first;
    x[k] = keep - h;
    Unpack(x, probe);
    const double fm = term(probe, pr.input).first;
    x[k] = keep;
    fd[k] = (fp - fm) / (2.0 * h);
  }
  Unpack(x, probe);
  const double scale = std::max({fd.norm(), analytic.norm(), 1e-12});
  return (fd - analytic).norm() / scale;
}

// The light term with targets fixed at the given values.
inline Term LightTerm(const ShCoefficients& lhat_i, const ShCoefficients& lhat_j) {
  return [lhat_i, lhat_j](const DecompositionState& s, const PairInput& in) {
    const LightLoss l = LossLightFidelity(s.light_i, s.light_j, lhat_i, lhat_j);
    GradientParts g;
    g.l_i = &l.grad_i;
    g.l_j = &l.grad_j;
    return std::pair{l.value, PackGradient(g, in.mask.pixel_count())};
  };
}

// Every term plus both totals; the light term uses the given fixed targets.
inline std::vector<NamedTerm> AllTerms(const LossWeights& w, const ShCoefficients& lhat_i,
                                       const ShCoefficients& lhat_j) {
  std::vector<NamedTerm> terms;
  terms.push_back({"albedo consistency", [](const DecompositionState& s, const PairInput& in) {
                     const AlbedoLoss l = LossAlbedoConsistency(s.albedo_i, s.albedo_j, in.mask);
                     GradientParts g;
                     g.a_i = &l.grad_i;
                     g.a_j = &l.grad_j;
                     return std::pair{l.value, PackGradient(g, in.mask.pixel_count())};
                   }});
  terms.push_back({"shading smoothness", [w](const DecompositionState& s, const PairInput& in) {
                     const SmoothnessLoss li = LossShadingSmoothness(s.shading_i, in.mask, w.xi);
                     const SmoothnessLoss lj = LossShadingSmoothness(s.shading_j, in.mask, w.xi);
                     GradientParts g;
                     g.s_i = &li.grad;
                     g.s_j = &lj.grad;
                     return std::pair{li.value + lj.value, PackGradient(g, in.mask.pixel_count())};
                   }});
  terms.push_back({"normal prior", [](const DecompositionState& s, const PairInput& in) {
                     const NormalLoss l = LossNormalPrior(s.normals_i, s.normals_j, in.prior_i,
                                                          in.prior_j, in.mask);
                     GradientParts g;
                     g.n_i = &l.grad_i;
                     g.n_j = &l.grad_j;
                     return std::pair{l.value, PackGradient(g, in.mask.pixel_count())};
                   }});
  terms.push_back({"light fidelity", LightTerm(lhat_i, lhat_j)});
  terms.push_back({"image reconstruction", [](const DecompositionState& s, const PairInput& in) {
                     const ImageReconLoss l =
                         LossImageRecon(in.image_i, in.image_j, s.albedo_i, s.albedo_j,
                                        s.shading_i, s.shading_j, in.mask);
                     GradientParts g;
                     g.a_i = &l.grad_a_i;
                     g.a_j = &l.grad_a_j;
                     g.s_i = &l.grad_s_i;
                     g.s_j = &l.grad_s_j;
                     return std::pair{l.value, PackGradient(g, in.mask.pixel_count())};
                   }});
  terms.push_back({"shading reconstruction", [](const DecompositionState& s, const PairInput& in) {
                     const ShadingReconFullLoss l =
                         LossShadingReconFull(s.shading_i, s.shading_j, s.normals_i, s.normals_j,
                                              s.light_i, s.light_j, in.mask);
                     GradientParts g;
                     g.s_i = &l.grad_s_i;
                     g.s_j = &l.grad_s_j;
                     g.n_i = &l.grad_n_i;
                     g.n_j = &l.grad_n_j;
                     g.l_i = &l.grad_l_i;
                     g.l_j = &l.grad_l_j;
                     return std::pair{l.value, PackGradient(g, in.mask.pixel_count())};
                   }});
  for (Phase phase : {Phase::kCoarse, Phase::kRefine}) {
    terms.push_back(
        {phase == Phase::kCoarse ? "total energy, coarse targets" : "total energy, refine targets",
         [w, phase](const DecompositionState& s, const PairInput& in) {
           const EnergyEvaluation e = TotalEnergy(s, in, w, phase, DetachMode::kNone, true);
           const StateGradient& sg = e.gradient;
           GradientParts g{&sg.albedo_i, &sg.albedo_j, &sg.shading_i, &sg.shading_j,
                           &sg.normals_i, &sg.normals_j, &sg.light_i, &sg.light_j};
           return std::pair{e.total, PackGradient(g, in.mask.pixel_count())};
         }});
  }
  return terms;
}

}  // namespace faceir::gradcheck

#endif  // FACEIR_TESTS_GRADCHECK_HPP_
