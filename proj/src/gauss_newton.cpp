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

#include "gauss_newton.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace faceir::detail {
namespace {

constexpr int kLocal = 14;
constexpr int kGlobal = 18;
using LocalVec = Eigen::Matrix<double, kLocal, 1>;
using LocalMat = Eigen::Matrix<double, kLocal, kLocal>;
using Coupling = Eigen::Matrix<double, kLocal, kGlobal>;
using GlobalVec = Eigen::Matrix<double, kGlobal, 1>;
using GlobalMat = Eigen::Matrix<double, kGlobal, kGlobal>;

// Local slots: albedo_i (3), albedo_j (3), shading_i, shading_j,
// normals_i (3), normals_j (3). Global slots: light_i (9), light_j (9).
constexpr int kAlbedo[2] = {0, 3};
constexpr int kShading[2] = {6, 7};
constexpr int kNormal[2] = {8, 11};
constexpr int kLight[2] = {0, 9};

struct Direction {
  std::vector<LocalVec> local;
  GlobalVec global = GlobalVec::Zero();
};

class Engine {
 public:
  Engine(const PairInput& input, const GnOptions& options)
      : in_(input), o_(options), pix_(input.mask.indices()) {
    const int w = input.mask.width();
    const int h = input.mask.height();
    std::vector<int> compact(input.mask.pixel_count(), -1);
    for (std::size_t q = 0; q < pix_.size(); ++q) compact[pix_[q]] = static_cast<int>(q);
    right_.assign(pix_.size(), -1);
    down_.assign(pix_.size(), -1);
    for (std::size_t q = 0; q < pix_.size(); ++q) {
      const int x = static_cast<int>(pix_[q] % w);
      const int y = static_cast<int>(pix_[q] / w);
      if (x + 1 < w) right_[q] = compact[pix_[q] + 1];
      if (y + 1 < h) down_[q] = compact[pix_[q] + w];
    }
    for (int k = 0; k < kLocal; ++k) {
      local_active_[k] = k < 6    ? o_.active.albedo
                         : k < 8  ? o_.active.shading
                                  : o_.active.normals;
    }
  }

  bool Compute(const DecompositionState& st, double mu, double delta, bool full,
               Direction& dir) const;
  DecompositionState Apply(const DecompositionState& st, const Direction& dir, double t) const;

 private:
  const PairInput& in_;
  const GnOptions& o_;
  std::vector<std::size_t> pix_;
  std::vector<int> right_;
  std::vector<int> down_;
  bool local_active_[kLocal];
};

bool Engine::Compute(const DecompositionState& st, double mu, double delta, bool full,
                     Direction& dir) const {
  const std::size_t n = pix_.size();
  const double count = static_cast<double>(n);
  const LossWeights& lw = o_.weights;
  const double w_irec = lw.lambda_irec / (3.0 * count);
  const double w_a = lw.lambda_a / (3.0 * count);
  const double w_srec = lw.lambda_srec / count;
  const double w_n = lw.lambda_n / count;
  const double w_s = lw.lambda_s / count;
  const double w_l = lw.lambda_l;
  const bool refine = o_.phase == Phase::kRefine;
  const bool srec_to_shading = full || o_.detach != DetachMode::kDetachLightAndShading;
  auto irls = [delta](double w, double r) { return w / std::max(std::abs(r), delta); };

  std::vector<LocalMat> b(n, LocalMat::Zero());
  std::vector<LocalVec> g(n, LocalVec::Zero());
  std::vector<Coupling> c(n, Coupling::Zero());
  GlobalMat d = GlobalMat::Zero();
  GlobalVec gl = GlobalVec::Zero();

  const Image* images[2] = {&in_.image_i, &in_.image_j};
  const AlbedoMap* albedo[2] = {&st.albedo_i, &st.albedo_j};
  const ShadingMap* shading[2] = {&st.shading_i, &st.shading_j};
  const NormalMap* normals[2] = {&st.normals_i, &st.normals_j};
  const NormalMap* priors[2] = {&in_.prior_i, &in_.prior_j};
  const ShVector light[2] = {st.light_i.vector(), st.light_j.vector()};

  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t p = pix_[q];
    LocalMat& bq = b[q];
    LocalVec& gq = g[q];
    for (int m = 0; m < 2; ++m) {
      const double s = shading[m]->at(p);
      const int si = kShading[m];
      for (int ch = 0; ch < 3; ++ch) {
        const double a = albedo[m]->at(p, ch);
        const double r = images[m]->at(p, ch) - a * s;
        const double om = irls(w_irec, r);
        const int ai = kAlbedo[m] + ch;
        gq[ai] -= om * r * s;
        gq[si] -= om * r * a;
        bq(ai, ai) += om * s * s;
        bq(si, si) += om * a * a;
        bq(ai, si) += om * s * a;
        bq(si, ai) += om * s * a;
      }
      // Shading reconstruction against h(N) . l.
      const Vec3& nv = normals[m]->at(p);
      const ShVector h = ShBasisPolynomial(nv);
      const Vec3 jn = -(ShBasisJacobian(nv).transpose() * light[m]);
      const double r = s - h.dot(light[m]);
      const double om = irls(w_srec, r);
      Eigen::Matrix<double, 4, 1> jp;
      jp << (srec_to_shading ? 1.0 : 0.0), jn;
      const int idx[4] = {si, kNormal[m], kNormal[m] + 1, kNormal[m] + 2};
      for (int a = 0; a < 4; ++a) {
        gq[idx[a]] += om * r * jp[a];
        for (int e = 0; e < 4; ++e) bq(idx[a], idx[e]) += om * jp[a] * jp[e];
        c[q].block<1, kShCount>(idx[a], kLight[m]) -= om * jp[a] * h.transpose();
      }
      gl.segment<kShCount>(kLight[m]) -= om * r * h;
      d.block<kShCount, kShCount>(kLight[m], kLight[m]).noalias() += om * h * h.transpose();
      // Normal prior.
      const Vec3 dn = nv - priors[m]->at(p);
      for (int k = 0; k < 3; ++k) {
        gq[kNormal[m] + k] += 2.0 * w_n * dn[k];
        bq(kNormal[m] + k, kNormal[m] + k) += 2.0 * w_n;
      }
    }
    for (int ch = 0; ch < 3; ++ch) {
      const double r = albedo[0]->at(p, ch) - albedo[1]->at(p, ch);
      const double om = irls(w_a, r);
      const int ai = kAlbedo[0] + ch, aj = kAlbedo[1] + ch;
      gq[ai] += om * r;
      gq[aj] -= om * r;
      bq(ai, ai) += om;
      bq(aj, aj) += om;
      bq(ai, aj) -= om;
      bq(aj, ai) -= om;
    }
  }

  if (w_s > 0.0) {
    // Separable majorizer of each difference term keeps the blocks per pixel.
    for (std::size_t q = 0; q < n; ++q) {
      for (int nb : {right_[q], down_[q]}) {
        if (nb < 0) continue;
        for (int m = 0; m < 2; ++m) {
          const double diff = shading[m]->at(pix_[nb]) - shading[m]->at(pix_[q]);
          const double om = irls(w_s / std::max(std::abs(diff), lw.xi), diff);
          const int si = kShading[m];
          g[q][si] -= om * diff;
          g[nb][si] += om * diff;
          b[q](si, si) += 2.0 * om;
          b[nb](si, si) += 2.0 * om;
        }
      }
    }
  }

  // Light fidelity. The target depends on the shading values and, in the
  // refine phase, on the normals; column 0 of a target row block is the
  // shading derivative and columns 1..3 the normal derivative.
  using TargetRows = Eigen::Matrix<double, kShCount, 4>;
  std::vector<TargetRows> target_rows[2];
  GlobalVec omega_inv = GlobalVec::Ones();
  GlobalVec fid_r = GlobalVec::Zero();
  const bool coupled = full && w_l > 0.0;
  if (w_l > 0.0) {
    for (int m = 0; m < 2; ++m) {
      const NormalMap& ref = refine ? *normals[m] : *priors[m];
      Eigen::Matrix<double, kShCount, kShCount> gram =
          Eigen::Matrix<double, kShCount, kShCount>::Zero();
      ShVector rhs = ShVector::Zero();
      for (std::size_t q = 0; q < n; ++q) {
        if (!ref.valid(pix_[q])) continue;
        const ShVector h = ShBasisPolynomial(ref.at(pix_[q]));
        gram.noalias() += h * h.transpose();
        rhs += h * shading[m]->at(pix_[q]);
      }
      const ShGramInverse gi = PseudoInvertGram(gram);
      const ShVector lhat = gi.inverse * rhs;
      for (int k = 0; k < kShCount; ++k) {
        const double r = light[m][k] - lhat[k];
        const double om = irls(w_l, r);
        gl[kLight[m] + k] += om * r;
        fid_r[kLight[m] + k] = r;
        omega_inv[kLight[m] + k] = 1.0 / om;
        if (!coupled) d(kLight[m] + k, kLight[m] + k) += om;
      }
      if (coupled) {
        const ShVector weighted =
            fid_r.segment<kShCount>(kLight[m]).cwiseQuotient(omega_inv.segment<kShCount>(kLight[m]));
        target_rows[m].assign(n, TargetRows::Zero());
        for (std::size_t q = 0; q < n; ++q) {
          if (!ref.valid(pix_[q])) continue;
          const Vec3& nv = ref.at(pix_[q]);
          const ShVector h = ShBasisPolynomial(nv);
          TargetRows& t = target_rows[m][q];
          t.col(0) = gi.inverse * h;
          if (refine) {
            const ShJacobian jac = ShBasisJacobian(nv);
            const double res = shading[m]->at(pix_[q]) - h.dot(lhat);
            t.rightCols<3>() =
                gi.inverse * (res * jac - h * (lhat.transpose() * jac));
          }
          // d r_k / d x = -t(k, x).
          const Eigen::Matrix<double, 1, 4> gx = -weighted.transpose() * t;
          g[q][kShading[m]] += gx[0];
          if (refine) {
            for (int k = 0; k < 3; ++k) g[q][kNormal[m] + k] += gx[1 + k];
          }
        }
      }
    }
  }

  // Normal steps are kept in the tangent plane; the unit-sphere projection
  // would otherwise discard the radial part the model relies on.
  for (std::size_t q = 0; q < n; ++q) {
    for (int m = 0; m < 2; ++m) {
      const Vec3& nv = normals[m]->at(pix_[q]);
      auto blk = b[q].block<3, 3>(kNormal[m], kNormal[m]);
      const double radial = 1e3 * std::max(blk.cwiseAbs().maxCoeff(), 1e-12);
      blk.noalias() += radial * nv * nv.transpose();
    }
  }

  // Frozen variables become identity rows with zero right-hand side.
  for (std::size_t q = 0; q < n; ++q) {
    for (int k = 0; k < kLocal; ++k) {
      if (local_active_[k]) continue;
      b[q].row(k).setZero();
      b[q].col(k).setZero();
      b[q](k, k) = 1.0;
      g[q][k] = 0.0;
      c[q].row(k).setZero();
    }
    if (!o_.active.light) c[q].setZero();
    b[q].diagonal().array() += mu;
  }
  if (!o_.active.light) {
    d.setIdentity();
    gl.setZero();
  }
  d.diagonal().array() += mu;
  if (o_.active.light && o_.active.shading) {
    GlobalVec e = GlobalVec::Zero();
    e[kLight[0]] = e[kLight[1]] = 1.0;
    d.noalias() += 1e3 * d.cwiseAbs().maxCoeff() * e * e.transpose();
  }

  std::vector<Eigen::LDLT<LocalMat>> fact(n);
  std::vector<Coupling> bic(n);
  GlobalMat schur = d;
  for (std::size_t q = 0; q < n; ++q) {
    fact[q].compute(b[q]);
    bic[q] = fact[q].solve(c[q]);
    schur.noalias() -= c[q].transpose() * bic[q];
  }
  const Eigen::LDLT<GlobalMat> schur_fact(schur);

  dir.local.assign(n, LocalVec::Zero());
  GlobalVec rhs = -gl;
  for (std::size_t q = 0; q < n; ++q) {
    dir.local[q] = fact[q].solve(-g[q]);
    rhs.noalias() -= c[q].transpose() * dir.local[q];
  }
  dir.global = schur_fact.solve(rhs);
  for (std::size_t q = 0; q < n; ++q) dir.local[q].noalias() -= bic[q] * dir.global;

  if (coupled) {
    // Woodbury update for the rank-18 term V Omega V^T, where column k of V
    // holds e_k on the light and the negated target derivative on every
    // free shading and normal value.
    GlobalMat vl = GlobalMat::Identity();
    if (!o_.active.light) vl.setZero();
    std::vector<Coupling> vps(n, Coupling::Zero());
    std::vector<Coupling> zp(n, Coupling::Zero());
    GlobalMat zrhs = vl;
    for (std::size_t q = 0; q < n; ++q) {
      Coupling& vp = vps[q];
      for (int m = 0; m < 2; ++m) {
        const TargetRows& t = target_rows[m][q];
        if (o_.active.shading) {
          vp.block<1, kShCount>(kShading[m], kLight[m]) = -t.col(0).transpose();
        }
        if (refine && o_.active.normals) {
          vp.block<3, kShCount>(kNormal[m], kLight[m]) = -t.rightCols<3>().transpose();
        }
      }
      zp[q] = fact[q].solve(vp);
      zrhs.noalias() -= c[q].transpose() * zp[q];
    }
    const GlobalMat zl = schur_fact.solve(zrhs);
    GlobalMat k = vl.transpose() * zl;
    k.diagonal() += omega_inv;
    GlobalVec t = vl.transpose() * dir.global;
    for (std::size_t q = 0; q < n; ++q) {
      zp[q].noalias() -= bic[q] * zl;
      k.noalias() += vps[q].transpose() * zp[q];
      t.noalias() += vps[q].transpose() * dir.local[q];
    }
    const GlobalVec coef = k.partialPivLu().solve(t);
    for (std::size_t q = 0; q < n; ++q) dir.local[q].noalias() -= zp[q] * coef;
    dir.global.noalias() -= zl * coef;
  }

  if (!dir.global.allFinite()) return false;
  for (const LocalVec& v : dir.local) {
    if (!v.allFinite()) return false;
  }
  return true;
}

DecompositionState Engine::Apply(const DecompositionState& st, const Direction& dir,
                                 double t) const {
  DecompositionState out = st;
  AlbedoMap* albedo[2] = {&out.albedo_i, &out.albedo_j};
  ShadingMap* shading[2] = {&out.shading_i, &out.shading_j};
  NormalMap* normals[2] = {&out.normals_i, &out.normals_j};
  ShCoefficients* light[2] = {&out.light_i, &out.light_j};
  for (std::size_t q = 0; q < pix_.size(); ++q) {
    const std::size_t p = pix_[q];
    const LocalVec& dq = dir.local[q];
    for (int m = 0; m < 2; ++m) {
      if (o_.active.albedo) {
        for (int ch = 0; ch < 3; ++ch) {
          double& a = albedo[m]->at(p, ch);
          a = std::clamp(a + t * dq[kAlbedo[m] + ch], 0.0, 1.0);
        }
      }
      if (o_.active.shading) {
        double& s = shading[m]->at(p);
        s = std::clamp(s + t * dq[kShading[m]], 0.0, 4.0);
      }
      if (o_.active.normals) {
        Vec3 v = normals[m]->at(p) + t * dq.segment<3>(kNormal[m]);
        v.z() = std::max(v.z(), 0.0);
        const double len = v.norm();
        if (len > 1e-12) normals[m]->at(p) = v / len;
      }
    }
  }
  if (o_.active.light) {
    for (int m = 0; m < 2; ++m) {
      for (int k = 0; k < kShCount; ++k) (*light[m])[k] += t * dir.global[kLight[m] + k];
    }
  }
  return out;
}

}  // namespace

GnRun RunGaussNewton(DecompositionState& state, const PairInput& input,
                     const GnOptions& options, const AcceptCallback& on_accept) {
  options.weights.Validate();
  Require(options.step_size > 0.0, "step size must be positive");
  const Engine engine(input, options);
  auto energy = [&](const DecompositionState& s) {
    return TotalEnergy(s, input, options.weights, options.phase, options.detach, false);
  };

  GnRun run;
  double e = energy(state).total;
  if (!std::isfinite(e)) throw Error(ErrorCode::kDiverged, "initial energy is not finite");
  run.initial_total = e;
  run.final_total = e;
  std::vector<double> history{e};
  const double floor = options.energy_floor >= 0.0 ? options.energy_floor : 1e-11 * e;
  if (e <= floor) {
    run.converged = true;
    run.stop_reason = "zero energy";
    return run;
  }

  const bool can_fall_back = options.detach != DetachMode::kNone &&
                             options.weights.lambda_l > 0.0 && options.active.shading;
  double mu = 1e-12;
  Direction dir;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double delta = std::max(
        options.delta_start * std::pow(0.1, it / std::max(options.delta_period, 1)),
        options.delta_min);
    bool accepted = false;
    bool fallback = false;
    DecompositionState candidate;
    EnergyEvaluation eval;
    // The undetached model drives the iteration; the detach mode's model is
    // only tried once the former finds no acceptable step at any damping.
    for (int kind = 0; kind < (can_fall_back ? 2 : 1) && !accepted; ++kind) {
      double damping = kind == 0 ? mu : 1e-12;
      for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
        if (engine.Compute(state, damping, delta, kind == 0, dir)) {
          candidate = engine.Apply(state, dir, options.step_size);
          eval = energy(candidate);
          if (std::isfinite(eval.total) && eval.total < e) {
            accepted = true;
            fallback = kind == 1;
            break;
          }
        }
        damping *= 4.0;
      }
      if (kind == 0) mu = accepted ? damping : 1e-12;
    }
    if (!accepted) {
      run.converged = true;
      run.stop_reason = "stationary";
      break;
    }
    if (fallback) ++run.fallback_steps;
    state = std::move(candidate);
    e = eval.total;
    mu = std::max(mu / 3.0, 1e-12);
    ++run.iterations;
    history.push_back(e);
    if (on_accept) on_accept(run.iterations, eval);
    if (e <= floor) {
      run.converged = true;
      run.stop_reason = "zero energy";
      break;
    }
    if (static_cast<int>(history.size()) > options.window) {
      const double old = history[history.size() - 1 - options.window];
      if (old - e <= options.tolerance * std::max(old, 1e-300)) {
        run.converged = true;
        run.stop_reason = "tolerance";
        break;
      }
    }
  }
  if (run.stop_reason.empty()) run.stop_reason = "iteration limit";
  run.final_total = e;
  return run;
}

}  // namespace faceir::detail
