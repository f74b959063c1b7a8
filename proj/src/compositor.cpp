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

#include "faceir/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace faceir {
namespace {

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

double GuidanceAt(const Image& f, int x, int y, int c) {
  double div = 0.0;
  for (int k = 0; k < 4; ++k) div += f(x, y, c) - f(x + kDx[k], y + kDy[k], c);
  return div;
}

}  // namespace

double PoissonResidual(const Image& result, const Image& foreground, const Mask& mask) {
  RequireSameSize(result, foreground, "residual operands");
  RequireSameSize(result, mask, "residual vs mask");
  double worst = 0.0;
  for (int y = 1; y + 1 < mask.height(); ++y) {
    for (int x = 1; x + 1 < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        double lap = 4.0 * result(x, y, c);
        for (int k = 0; k < 4; ++k) lap -= result(x + kDx[k], y + kDy[k], c);
        worst = std::max(worst, std::abs(lap - GuidanceAt(foreground, x, y, c)));
      }
    }
  }
  return worst;
}

BlendResult PoissonBlend(const Image& foreground, const Image& background, const Mask& mask,
                         double tolerance) {
  RequireSameSize(foreground, background, "blend foreground vs background");
  RequireSameSize(foreground, mask, "blend image vs mask");
  Require(tolerance > 0.0, "blend tolerance must be positive");
  const int w = mask.width(), h = mask.height();
  std::vector<int> index(mask.pixel_count(), -1);
  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        ThrowInvalid("blend mask touches the image border");
      }
      index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(cells.size());
      cells.emplace_back(x, y);
    }
  }
  BlendResult out{background, 0, 0.0};
  const std::size_t n = cells.size();
  if (n == 0) return out;
  const int cap = static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 1000;

  using Vec = Eigen::VectorXd;
  auto apply = [&](const Vec& u, Vec& au) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, y] = cells[i];
      double v = 4.0 * u[i];
      for (int k = 0; k < 4; ++k) {
        const int j = index[static_cast<std::size_t>(y + kDy[k]) * w + x + kDx[k]];
        if (j >= 0) v -= u[j];
      }
      au[i] = v;
    }
  };

  for (int c = 0; c < 3; ++c) {
    Vec b(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, y] = cells[i];
      double v = GuidanceAt(foreground, x, y, c);
      for (int k = 0; k < 4; ++k) {
        const int qx = x + kDx[k], qy = y + kDy[k];
        if (index[static_cast<std::size_t>(qy) * w + qx] < 0) v += background(qx, qy, c);
      }
      b[i] = v;
      u[i] = background(x, y, c);
    }
    Vec au(n);
    apply(u, au);
    Vec r = b - au;
    Vec d = r;
    double rr = r.squaredNorm();
    double res = r.lpNorm<Eigen::Infinity>();
    int it = 0;
    while (res >= tolerance) {
      if (it >= cap) {
        throw Error(ErrorCode::kNotConverged,
                    "poisson blend did not converge; residual " + std::to_string(res));
      }
      apply(d, au);
      const double alpha = rr / d.dot(au);
      u += alpha * d;
      r -= alpha * au;
      const double rr_next = r.squaredNorm();
      d = r + (rr_next / rr) * d;
      rr = rr_next;
      ++it;
      if (r.lpNorm<Eigen::Infinity>() < tolerance) {
        // Confirm against the true residual to avoid recurrence drift.
        apply(u, au);
        r = b - au;
        rr = r.squaredNorm();
        d = r;
      }
      res = r.lpNorm<Eigen::Infinity>();
    }
    out.iterations = std::max(out.iterations, it);
    out.residual = std::max(out.residual, res);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, y] = cells[i];
      out.image(x, y, c) = std::clamp(u[i], 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace faceir
