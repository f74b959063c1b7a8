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

// Seamless cloning: the masked region of the output solves the discrete
// Poisson equation guided by the foreground gradient, with the background as
// Dirichlet boundary.

#ifndef FACEIR_COMPOSITOR_HPP_
#define FACEIR_COMPOSITOR_HPP_

#include "faceir/grid.hpp"

namespace faceir {

struct BlendResult {
  Image image;
  int iterations = 0;   // largest conjugate-gradient count over channels
  double residual = 0;  // largest residual infinity norm over channels
};

// Conjugate gradient on the 5-point Laplacian until the residual infinity
// norm is below tolerance; at most 10 sqrt(n) + 1000 iterations for n
// unknowns. The output equals the background outside the mask and is clamped
// to [0,1] inside. Throws kInvalidArgument for a mask touching the border and
// kNotConverged when the cap is reached.
BlendResult PoissonBlend(const Image& foreground, const Image& background, const Mask& mask,
                         double tolerance = 1e-6);

// Largest |(4 u_p - sum u_q) - sum (f_p - f_q)| over masked pixels.
double PoissonResidual(const Image& result, const Image& foreground, const Mask& mask);

}  // namespace faceir

#endif  // FACEIR_COMPOSITOR_HPP_
