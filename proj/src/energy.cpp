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

#include "faceir/energy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace faceir {
namespace {

constexpr double kKink = 1e-12;

double Sign(double r) { return r > kKink ? 1.0 : (r < -kKink ? -1.0 : 0.0); }

double PixelCount(const Mask& mask, const char* what) {
  RequireNonEmpty(mask, what);
  return static_cast<double>(mask.count());
}

NormalGradient ZeroNormals(std::size_t n) { return NormalGradient(n, Vec3::Zero()); }

struct LsqSystem {
  ShGramInverse gram_inverse;
  ShCoefficients lhat;
};

LsqSystem SolveTarget(const ShadingMap& s, const NormalMap& ref, const Mask& mask) {
  Eigen::Matrix<double, kShCount, kShCount> gram =
      Eigen::Matrix<double, kShCount, kShCount>::Zero();
  ShVector rhs = ShVector::Zero();
  std::size_t used = 0;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p) || !ref.valid(p)) continue;
    const ShVector h = ShBasisPolynomial(ref.at(p));
    gram.noalias() += h * h.transpose();
    rhs += h * s.at(p);
    ++used;
  }
  if (used < static_cast<std::size_t>(kShCount)) {
    throw Error(ErrorCode::kInsufficientData, "light target needs at least 9 pixels");
  }
  LsqSystem sys;
  sys.gram_inverse = PseudoInvertGram(gram);
  sys.lhat = ShCoefficients::FromVector(sys.gram_inverse.inverse * rhs);
  return sys;
}

// Adds the gradient of w . lhat(S, ref) to S and, when ref is the free
// normal map, to the normals.
void BackpropTarget(const LsqSystem& sys, const ShVector& w, const ShadingMap& s,
                    const NormalMap& ref, const Mask& mask, ShadingMap& grad_s,
                    NormalGradient* grad_n) {
  const ShVector u = sys.gram_inverse.inverse * w;
  const ShVector lhat = sys.lhat.vector();
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p) || !ref.valid(p)) continue;
    const ShVector h = ShBasisPolynomial(ref.at(p));
    const double hu = h.dot(u);
    grad_s.at(p) += hu;
    if (grad_n) {
      const double r = s.at(p) - h.dot(lhat);
      (*grad_n)[p] += ShBasisJacobian(ref.at(p)).transpose() * (r * u - hu * lhat);
    }
  }
}

}  // namespace

LossWeights LossWeights::Dpr() {
  LossWeights w;
  w.lambda_s = 0.01;
  w.lambda_irec = 0.25;
  w.lambda_a = 0.15;
  return w;
}

LossWeights LossWeights::Preset(const std::string& name) {
  if (name == "default") return Default();
  if (name == "dpr") return Dpr();
  ThrowInvalid("unknown weight preset '" + name + "' (expected default or dpr)");
}

void LossWeights::Validate() const {
  for (double v : {lambda_a, lambda_s, lambda_n, lambda_l, lambda_irec, lambda_srec}) {
    if (!(v >= 0.0) || !std::isfinite(v)) ThrowInvalid("loss weights must be finite and non-negative");
  }
  if (!(xi > 0.0) || !std::isfinite(xi)) ThrowInvalid("xi must be positive");
}

LossWeights LossWeights::Scaled(double factor) const {
  LossWeights w = *this;
  w.lambda_a *= factor;
  w.lambda_s *= factor;
  w.lambda_n *= factor;
  w.lambda_l *= factor;
  w.lambda_irec *= factor;
  w.lambda_srec *= factor;
  return w;
}

void LossWeights::Set(const std::string& key, double value) {
  if (key == "lambda_a") lambda_a = value;
  else if (key == "lambda_s") lambda_s = value;
  else if (key == "lambda_n") lambda_n = value;
  else if (key == "lambda_l") lambda_l = value;
  else if (key == "lambda_irec") lambda_irec = value;
  else if (key == "lambda_srec") lambda_srec = value;
  else if (key == "xi") xi = value;
  else ThrowInvalid("unknown weight key '" + key + "'");
}

LossWeights LossWeights::Parse(std::istream& in, LossWeights base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      ThrowInvalid("weights line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "preset") {
      base = Preset(value);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      ThrowInvalid("weights line " + std::to_string(lineno) + ": bad number '" + value + "'");
    }
    base.Set(key, v);
  }
  base.Validate();
  return base;
}

LossWeights LossWeights::Load(const std::string& path, LossWeights base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open weights file: " + path);
  return Parse(in, base);
}

std::string LossWeights::ToString() const {
  std::ostringstream out;
  out.precision(10);
  out << "lambda_a=" << lambda_a << " lambda_s=" << lambda_s << " lambda_n=" << lambda_n
      << " lambda_l=" << lambda_l << " lambda_irec=" << lambda_irec
      << " lambda_srec=" << lambda_srec << " xi=" << xi;
  return out.str();
}

void PairInput::Validate() const {
  RequireSameSize(image_i, image_j, "pair images");
  RequireSameSize(image_i, mask, "image vs mask");
  RequireSameSize(image_i, prior_i, "image vs prior_i");
  RequireSameSize(image_i, prior_j, "image vs prior_j");
  for (const Image* im : {&image_i, &image_j}) {
    for (double v : im->values()) {
      if (!std::isfinite(v)) ThrowInvalid("input image contains non-finite values");
    }
  }
  prior_i.Validate(&mask);
  prior_j.Validate(&mask);
  RequireNonEmpty(mask, "pair input");
}

const char* DetachModeName(DetachMode mode) {
  switch (mode) {
    case DetachMode::kNone: return "none";
    case DetachMode::kDetachLight: return "dl";
    case DetachMode::kDetachLightAndShading: return "dls";
  }
  return "?";
}

DetachMode ParseDetachMode(const std::string& name) {
  if (name == "none") return DetachMode::kNone;
  if (name == "dl" || name == "detach_light") return DetachMode::kDetachLight;
  if (name == "dls" || name == "detach_light_and_shading") {
    return DetachMode::kDetachLightAndShading;
  }
  ThrowInvalid("unknown detach mode '" + name + "' (expected none, dl or dls)");
}

AlbedoLoss LossAlbedoConsistency(const AlbedoMap& a_i, const AlbedoMap& a_j, const Mask& mask) {
  RequireSameSize(a_i, a_j, "albedo pair");
  RequireSameSize(a_i, mask, "albedo vs mask");
  const double scale = 1.0 / (3.0 * PixelCount(mask, "albedo consistency"));
  AlbedoLoss out{0.0, AlbedoMap(a_i.width(), a_i.height()), AlbedoMap(a_i.width(), a_i.height())};
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p)) continue;
    for (int c = 0; c < 3; ++c) {
      const double r = a_i.at(p, c) - a_j.at(p, c);
      out.value += std::abs(r);
      out.grad_i.at(p, c) = scale * Sign(r);
      out.grad_j.at(p, c) = -scale * Sign(r);
    }
  }
  out.value *= scale;
  return out;
}

SmoothnessLoss LossShadingSmoothness(const ShadingMap& s, const Mask& mask, double xi) {
  RequireSameSize(s, mask, "shading vs mask");
  if (!(xi > 0.0)) ThrowInvalid("xi must be positive");
  const double scale = 1.0 / PixelCount(mask, "shading smoothness");
  SmoothnessLoss out{0.0, ShadingMap(s.width(), s.height())};
  const int w = s.width(), h = s.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const double here = s(x, y);
      auto edge = [&](int qx, int qy) {
        if (qx >= w || qy >= h || !mask(qx, qy)) return;
        const double d = s(qx, qy) - here;
        const double denom = std::max(std::abs(d), xi);
        out.value += std::abs(d) / denom;
        const double g = scale * Sign(d) / denom;
        out.grad(qx, qy) += g;
        out.grad(x, y) -= g;
      };
      edge(x + 1, y);
      edge(x, y + 1);
    }
  }
  out.value *= scale;
  return out;
}

NormalLoss LossNormalPrior(const NormalMap& n_i, const NormalMap& n_j, const NormalMap& nbar_i,
                           const NormalMap& nbar_j, const Mask& mask) {
  RequireSameSize(n_i, n_j, "normal pair");
  RequireSameSize(n_i, nbar_i, "normals vs prior_i");
  RequireSameSize(n_i, nbar_j, "normals vs prior_j");
  RequireSameSize(n_i, mask, "normals vs mask");
  const double scale = 1.0 / PixelCount(mask, "normal prior");
  NormalLoss out{0.0, ZeroNormals(mask.pixel_count()), ZeroNormals(mask.pixel_count())};
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p)) continue;
    const Vec3 di = n_i.at(p) - nbar_i.at(p);
    const Vec3 dj = n_j.at(p) - nbar_j.at(p);
    out.value += di.squaredNorm() + dj.squaredNorm();
    out.grad_i[p] = 2.0 * scale * di;
    out.grad_j[p] = 2.0 * scale * dj;
  }
  out.value *= scale;
  return out;
}

LightLoss LossLightFidelity(const ShCoefficients& l_i, const ShCoefficients& l_j,
                            const ShCoefficients& lhat_i, const ShCoefficients& lhat_j) {
  for (const ShCoefficients* c : {&l_i, &l_j, &lhat_i, &lhat_j}) {
    if (!c->AllFinite()) ThrowInvalid("light fidelity: non-finite coefficients");
  }
  LightLoss out{0.0, ShVector::Zero(), ShVector::Zero()};
  for (int k = 0; k < kShCount; ++k) {
    const double ri = l_i[k] - lhat_i[k];
    const double rj = l_j[k] - lhat_j[k];
    out.value += std::abs(ri) + std::abs(rj);
    out.grad_i[k] = Sign(ri);
    out.grad_j[k] = Sign(rj);
  }
  return out;
}

ImageReconLoss LossImageRecon(const Image& i_i, const Image& i_j, const AlbedoMap& a_i,
                              const AlbedoMap& a_j, const ShadingMap& s_i,
                              const ShadingMap& s_j, const Mask& mask) {
  RequireSameSize(i_i, i_j, "image pair");
  RequireSameSize(i_i, a_i, "image vs albedo_i");
  RequireSameSize(i_i, a_j, "image vs albedo_j");
  RequireSameSize(i_i, s_i, "image vs shading_i");
  RequireSameSize(i_i, s_j, "image vs shading_j");
  RequireSameSize(i_i, mask, "image vs mask");
  const double scale = 1.0 / (3.0 * PixelCount(mask, "image reconstruction"));
  const int w = i_i.width(), h = i_i.height();
  ImageReconLoss out{0.0, AlbedoMap(w, h), AlbedoMap(w, h), ShadingMap(w, h), ShadingMap(w, h)};
  auto one = [&](const Image& im, const AlbedoMap& a, const ShadingMap& s, AlbedoMap& ga,
                 ShadingMap& gs) {
    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
      if (!mask.at(p)) continue;
      for (int c = 0; c < 3; ++c) {
        const double r = im.at(p, c) - a.at(p, c) * s.at(p);
        out.value += std::abs(r);
        const double g = -scale * Sign(r);
        ga.at(p, c) = g * s.at(p);
        gs.at(p) += g * a.at(p, c);
      }
    }
  };
  one(i_i, a_i, s_i, out.grad_a_i, out.grad_s_i);
  one(i_j, a_j, s_j, out.grad_a_j, out.grad_s_j);
  out.value *= scale;
  return out;
}

ShadingReconLoss LossShadingRecon(const ShadingMap& s_i, const ShadingMap& s_j,
                                  const ShadingMap& shat_i, const ShadingMap& shat_j,
                                  const Mask& mask) {
  RequireSameSize(s_i, s_j, "shading pair");
  RequireSameSize(s_i, shat_i, "shading vs reconstruction_i");
  RequireSameSize(s_i, shat_j, "shading vs reconstruction_j");
  RequireSameSize(s_i, mask, "shading vs mask");
  const double scale = 1.0 / PixelCount(mask, "shading reconstruction");
  const int w = s_i.width(), h = s_i.height();
  ShadingReconLoss out{0.0, ShadingMap(w, h), ShadingMap(w, h), ShadingMap(w, h), ShadingMap(w, h)};
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p)) continue;
    const double ri = s_i.at(p) - shat_i.at(p);
    const double rj = s_j.at(p) - shat_j.at(p);
    out.value += std::abs(ri) + std::abs(rj);
    out.grad_s_i.at(p) = scale * Sign(ri);
    out.grad_shat_i.at(p) = -scale * Sign(ri);
    out.grad_s_j.at(p) = scale * Sign(rj);
    out.grad_shat_j.at(p) = -scale * Sign(rj);
  }
  out.value *= scale;
  return out;
}

ShadingReconFullLoss LossShadingReconFull(const ShadingMap& s_i, const ShadingMap& s_j,
                                          const NormalMap& n_i, const NormalMap& n_j,
                                          const ShCoefficients& l_i,
                                          const ShCoefficients& l_j, const Mask& mask) {
  RequireSameSize(s_i, s_j, "shading pair");
  RequireSameSize(s_i, n_i, "shading vs normals_i");
  RequireSameSize(s_i, n_j, "shading vs normals_j");
  RequireSameSize(s_i, mask, "shading vs mask");
  const double scale = 1.0 / PixelCount(mask, "shading reconstruction");
  const int w = s_i.width(), h = s_i.height();
  const std::size_t n = mask.pixel_count();
  ShadingReconFullLoss out{0.0, ShadingMap(w, h), ShadingMap(w, h), ZeroNormals(n),
                           ZeroNormals(n), ShVector::Zero(), ShVector::Zero()};
  auto one = [&](const ShadingMap& s, const NormalMap& nm, const ShCoefficients& light,
                 ShadingMap& gs, NormalGradient& gn, ShVector& gl) {
    const ShVector l = light.vector();
    for (std::size_t p = 0; p < n; ++p) {
      if (!mask.at(p)) continue;
      const ShVector hp = ShBasisPolynomial(nm.at(p));
      const double r = s.at(p) - hp.dot(l);
      out.value += std::abs(r);
      const double g = scale * Sign(r);
      if (g == 0.0) continue;
      gs.at(p) = g;
      gl -= g * hp;
      gn[p] = -g * (ShBasisJacobian(nm.at(p)).transpose() * l);
    }
  };
  one(s_i, n_i, l_i, out.grad_s_i, out.grad_n_i, out.grad_l_i);
  one(s_j, n_j, l_j, out.grad_s_j, out.grad_n_j, out.grad_l_j);
  out.value *= scale;
  return out;
}

double EnergyTerms::Weighted(const LossWeights& w) const {
  return w.lambda_a * albedo + w.lambda_s * smoothness + w.lambda_n * normal +
         w.lambda_l * light + w.lambda_irec * image_recon + w.lambda_srec * shading_recon;
}

double StateGradient::SquaredNorm() const {
  double s = light_i.squaredNorm() + light_j.squaredNorm();
  for (const auto* g : {&albedo_i, &albedo_j}) {
    for (double v : g->values()) s += v * v;
  }
  for (const auto* g : {&shading_i, &shading_j}) {
    for (double v : g->values()) s += v * v;
  }
  for (const auto* g : {&normals_i, &normals_j}) {
    for (const Vec3& v : *g) s += v.squaredNorm();
  }
  return s;
}

void LightTargets(const DecompositionState& state, const PairInput& input, Phase phase,
                  ShCoefficients& lhat_i, ShCoefficients& lhat_j) {
  const bool refine = phase == Phase::kRefine;
  lhat_i = SolveTarget(state.shading_i, refine ? state.normals_i : input.prior_i, input.mask).lhat;
  lhat_j = SolveTarget(state.shading_j, refine ? state.normals_j : input.prior_j, input.mask).lhat;
}

EnergyEvaluation TotalEnergy(const DecompositionState& state, const PairInput& input,
                             const LossWeights& weights, Phase phase, DetachMode detach,
                             bool with_gradient) {
  const Mask& mask = input.mask;
  const bool refine = phase == Phase::kRefine;
  const NormalMap& ref_i = refine ? state.normals_i : input.prior_i;
  const NormalMap& ref_j = refine ? state.normals_j : input.prior_j;
  const LsqSystem sys_i = SolveTarget(state.shading_i, ref_i, mask);
  const LsqSystem sys_j = SolveTarget(state.shading_j, ref_j, mask);

  const AlbedoLoss la = LossAlbedoConsistency(state.albedo_i, state.albedo_j, mask);
  const SmoothnessLoss ls_i = LossShadingSmoothness(state.shading_i, mask, weights.xi);
  const SmoothnessLoss ls_j = LossShadingSmoothness(state.shading_j, mask, weights.xi);
  const NormalLoss ln =
      LossNormalPrior(state.normals_i, state.normals_j, input.prior_i, input.prior_j, mask);
  const LightLoss ll = LossLightFidelity(state.light_i, state.light_j, sys_i.lhat, sys_j.lhat);
  const ImageReconLoss li =
      LossImageRecon(input.image_i, input.image_j, state.albedo_i, state.albedo_j,
                     state.shading_i, state.shading_j, mask);
  const ShadingReconFullLoss lsr =
      LossShadingReconFull(state.shading_i, state.shading_j, state.normals_i, state.normals_j,
                           state.light_i, state.light_j, mask);

  EnergyEvaluation out;
  out.terms.albedo = la.value;
  out.terms.smoothness = ls_i.value + ls_j.value;
  out.terms.normal = ln.value;
  out.terms.light = ll.value;
  out.terms.image_recon = li.value;
  out.terms.shading_recon = lsr.value;
  out.total = out.terms.Weighted(weights);
  out.lhat_i = sys_i.lhat;
  out.lhat_j = sys_j.lhat;
  if (!with_gradient) return out;

  const LossWeights& w = weights;
  const int width = mask.width(), height = mask.height();
  const std::size_t n = mask.pixel_count();
  StateGradient& g = out.gradient;
  out.has_gradient = true;
  g.albedo_i = AlbedoMap(width, height);
  g.albedo_j = AlbedoMap(width, height);
  g.shading_i = ShadingMap(width, height);
  g.shading_j = ShadingMap(width, height);
  g.normals_i = ZeroNormals(n);
  g.normals_j = ZeroNormals(n);

  for (std::size_t p = 0; p < n; ++p) {
    if (!mask.at(p)) continue;
    for (int c = 0; c < 3; ++c) {
      g.albedo_i.at(p, c) = w.lambda_a * la.grad_i.at(p, c) + w.lambda_irec * li.grad_a_i.at(p, c);
      g.albedo_j.at(p, c) = w.lambda_a * la.grad_j.at(p, c) + w.lambda_irec * li.grad_a_j.at(p, c);
    }
    g.shading_i.at(p) = w.lambda_s * ls_i.grad.at(p) + w.lambda_irec * li.grad_s_i.at(p);
    g.shading_j.at(p) = w.lambda_s * ls_j.grad.at(p) + w.lambda_irec * li.grad_s_j.at(p);
    if (detach != DetachMode::kDetachLightAndShading) {
      g.shading_i.at(p) += w.lambda_srec * lsr.grad_s_i.at(p);
      g.shading_j.at(p) += w.lambda_srec * lsr.grad_s_j.at(p);
    }
    g.normals_i[p] = w.lambda_n * ln.grad_i[p] + w.lambda_srec * lsr.grad_n_i[p];
    g.normals_j[p] = w.lambda_n * ln.grad_j[p] + w.lambda_srec * lsr.grad_n_j[p];
  }
  g.light_i = w.lambda_l * ll.grad_i + w.lambda_srec * lsr.grad_l_i;
  g.light_j = w.lambda_l * ll.grad_j + w.lambda_srec * lsr.grad_l_j;

  if (detach == DetachMode::kNone && w.lambda_l != 0.0) {
    // d/d lhat of |l - lhat|_1 is -sign(l - lhat).
    const ShVector wi = -w.lambda_l * ll.grad_i;
    const ShVector wj = -w.lambda_l * ll.grad_j;
    BackpropTarget(sys_i, wi, state.shading_i, ref_i, mask, g.shading_i,
                   refine ? &g.normals_i : nullptr);
    BackpropTarget(sys_j, wj, state.shading_j, ref_j, mask, g.shading_j,
                   refine ? &g.normals_j : nullptr);
  }
  return out;
}

}  // namespace faceir
