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

#include "faceir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace faceir {

double AngularStats::FractionUnder(double threshold_deg) const {
  for (const auto& [t, f] : pct_under) {
    if (t == threshold_deg) return f;
  }
  ThrowInvalid("threshold was not evaluated");
}

double AngularErrorDeg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

AngularStats AngularErrorStats(const NormalMap& pred, const NormalMap& gt, const Mask& mask,
                               std::vector<double> thresholds) {
  RequireSameSize(pred, gt, "angular error operands");
  RequireSameSize(pred, mask, "angular error vs mask");
  RequireNonEmpty(mask, "angular error");
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<double> errors;
  errors.reserve(mask.count());
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p)) continue;
    if (!pred.valid(p) || !gt.valid(p)) ThrowInvalid("angular error: invalid normal inside mask");
    errors.push_back(AngularErrorDeg(pred.at(p), gt.at(p)));
  }
  AngularStats s;
  s.count = errors.size();
  const double n = static_cast<double>(errors.size());
  for (double e : errors) s.mean_deg += e;
  s.mean_deg /= n;
  double var = 0.0;
  for (double e : errors) var += (e - s.mean_deg) * (e - s.mean_deg);
  s.std_deg = std::sqrt(var / n);
  for (double t : thresholds) {
    const auto below = std::count_if(errors.begin(), errors.end(), [t](double e) { return e < t; });
    s.pct_under.emplace_back(t, static_cast<double>(below) / n);
  }
  return s;
}

namespace {

template <typename F>
double MaskedMean(std::span<const double> x, std::span<const double> y, int channels,
                  const Mask& mask, F f) {
  Require(channels > 0, "channel count must be positive");
  Require(x.size() == y.size(), "metric operands differ in size");
  Require(x.size() == mask.pixel_count() * static_cast<std::size_t>(channels),
          "metric operand does not match mask");
  RequireNonEmpty(mask, "metric");
  double sum = 0.0;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.at(p)) continue;
    for (int c = 0; c < channels; ++c) {
      const std::size_t k = p * channels + c;
      sum += f(x[k] - y[k]);
    }
  }
  return sum / (static_cast<double>(mask.count()) * channels);
}

}  // namespace

double Mae(std::span<const double> x, std::span<const double> y, int channels, const Mask& mask) {
  return MaskedMean(x, y, channels, mask, [](double d) { return std::abs(d); });
}

double Rmse(std::span<const double> x, std::span<const double> y, int channels, const Mask& mask) {
  return std::sqrt(MaskedMean(x, y, channels, mask, [](double d) { return d * d; }));
}

int NearestCentroid(const ShVector& x, const std::vector<ShVector>& centroids) {
  Require(!centroids.empty(), "no centroids");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = (x - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult KMeansLights(const std::vector<ShCoefficients>& lights, int k, std::uint64_t seed,
                          int max_iterations) {
  Require(k >= 1, "k must be positive");
  Require(static_cast<std::size_t>(k) <= lights.size(), "k exceeds the number of lights");
  Require(max_iterations >= 1, "max_iterations must be positive");
  std::vector<ShVector> x;
  x.reserve(lights.size());
  for (const ShCoefficients& l : lights) {
    if (!l.AllFinite()) ThrowInvalid("k-means: non-finite light");
    x.push_back(l.vector());
  }
  const std::size_t n = x.size();
  std::mt19937_64 rng(seed);
  KMeansResult r;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  r.centroids.push_back(x[first(rng)]);
  std::vector<double> d2(n);
  while (r.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = (x[i] - r.centroids[NearestCentroid(x[i], r.centroids)]).squaredNorm();
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> weighted(d2.begin(), d2.end());
      pick = weighted(rng);
    } else {
      pick = first(rng);
    }
    r.centroids.push_back(x[pick]);
  }

  r.assignments.assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = NearestCentroid(x[i], r.centroids);
      changed = changed || a != r.assignments[i];
      r.assignments[i] = a;
      inertia += (x[i] - r.centroids[a]).squaredNorm();
    }
    r.inertia_history.push_back(inertia);
    r.iterations = it + 1;
    if (!changed) {
      r.converged = true;
      break;
    }
    std::vector<ShVector> sum(k, ShVector::Zero());
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[r.assignments[i]] += x[i];
      ++count[r.assignments[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) r.centroids[c] = sum[c] / count[c];
    }
  }
  return r;
}

double LightClassificationAccuracy(const std::vector<ShCoefficients>& predicted,
                                   const std::vector<int>& labels,
                                   const std::vector<ShVector>& centroids) {
  Require(predicted.size() == labels.size(), "prediction and label counts differ");
  Require(!predicted.empty(), "no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (NearestCentroid(predicted[i].vector(), centroids) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

void WriteMetricsCsv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "metric,value\n";
  out.precision(12);
  for (const MetricRow& r : rows) out << r.metric << ',' << r.value << '\n';
}

}  // namespace faceir
