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

// Evaluation metrics: normal angular error statistics, MAE/RMSE and k-means
// light classification.

#ifndef FACEIR_METRICS_HPP_
#define FACEIR_METRICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "faceir/grid.hpp"
#include "faceir/sh_lighting.hpp"

namespace faceir {

struct AngularStats {
  double mean_deg = 0.0;
  double std_deg = 0.0;  // population standard deviation over pixels
  std::size_t count = 0;
  // (threshold in degrees, fraction of pixels with error strictly below it),
  // sorted by threshold.
  std::vector<std::pair<double, double>> pct_under;

  double FractionUnder(double threshold_deg) const;
};

// Per-pixel error acos(clamp(dot(pred, gt), -1, 1)) in degrees over the mask.
// Both maps must hold valid normals on every masked pixel.
AngularStats AngularErrorStats(const NormalMap& pred, const NormalMap& gt, const Mask& mask,
                               std::vector<double> thresholds = {20.0, 25.0, 30.0});

double AngularErrorDeg(const Vec3& a, const Vec3& b);

// Masked mean absolute / root-mean-square difference over all channels of
// two interleaved buffers with the given channel count.
double Mae(std::span<const double> x, std::span<const double> y, int channels, const Mask& mask);
double Rmse(std::span<const double> x, std::span<const double> y, int channels, const Mask& mask);

template <typename Tag, int C>
double Mae(const Grid<Tag, C>& x, const Grid<Tag, C>& y, const Mask& mask) {
  RequireSameSize(x, y, "mae operands");
  RequireSameSize(x, mask, "mae operand vs mask");
  return Mae(x.values(), y.values(), C, mask);
}

template <typename Tag, int C>
double Rmse(const Grid<Tag, C>& x, const Grid<Tag, C>& y, const Mask& mask) {
  RequireSameSize(x, y, "rmse operands");
  RequireSameSize(x, mask, "rmse operand vs mask");
  return Rmse(x.values(), y.values(), C, mask);
}

struct KMeansResult {
  std::vector<ShVector> centroids;
  std::vector<int> assignments;
  // Sum of squared distances after each assignment step.
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

// Lloyd iterations in 9-d from k-means++ seeding; stops at an assignment
// fixpoint or after max_iterations. An emptied cluster keeps its centroid.
KMeansResult KMeansLights(const std::vector<ShCoefficients>& lights, int k, std::uint64_t seed,
                          int max_iterations = 300);

// Index of the closest centroid (lowest index on ties).
int NearestCentroid(const ShVector& x, const std::vector<ShVector>& centroids);

// Fraction of predictions whose nearest centroid equals the label.
double LightClassificationAccuracy(const std::vector<ShCoefficients>& predicted,
                                   const std::vector<int>& labels,
                                   const std::vector<ShVector>& centroids);

struct MetricRow {
  std::string metric;
  double value = 0.0;
};
// "metric,value" header followed by one row per metric.
void WriteMetricsCsv(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace faceir

#endif  // FACEIR_METRICS_HPP_
