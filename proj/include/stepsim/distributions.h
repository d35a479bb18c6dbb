/* Copyright 2026 The stepsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Latency distributions and their algebra: fitting, quantiles, sampling,
// serial composition (sum of independent latencies, moment matched to a
// Gaussian), parallel composition (maximum, via the product of CDFs) and the
// two-sample Kolmogorov-Smirnov distance.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stepsim/random.h"

namespace stepsim {

struct Gaussian {
  double mu = 0.0;     // seconds
  double sigma = 0.0;  // seconds, >= 0
  bool operator==(const Gaussian&) const = default;
};

struct Empirical {
  std::vector<double> samples;  // ascending, non-empty
  bool operator==(const Empirical&) const = default;
};

struct PointMass {
  double value = 0.0;
  bool operator==(const PointMass&) const = default;
};

// Whether Gaussian mass below zero is folded onto zero. Latencies are always
// non-negative; kUnbounded exists for closed-form checks on textbook normals.
enum class Support { kNonNegative, kUnbounded };

struct PercentileAnchor {
  double p;      // in (0, 1)
  double value;  // seconds
};

class LatencyDistribution {
 public:
  using Variant = std::variant<Gaussian, Empirical, PointMass>;

  LatencyDistribution() : v_(PointMass{0.0}) {}

  static LatencyDistribution gaussian(double mu, double sigma);
  // Sorts `samples`. Negative values are rejected unless support is unbounded.
  static LatencyDistribution empirical(std::vector<double> samples,
                                       Support support = Support::kNonNegative);
  static LatencyDistribution point_mass(double value);

  // Piecewise-linear quantile function through the anchors, flat beyond the
  // outermost ones, discretized into `resolution` evenly spaced
  // probabilities. Each anchor is hit exactly when its probability is a
  // multiple of 1 / (resolution - 1).
  static LatencyDistribution from_percentiles(std::span<const PercentileAnchor> anchors,
                                              std::size_t resolution = 2001);

  const Variant& variant() const { return v_; }
  bool is_gaussian() const { return std::holds_alternative<Gaussian>(v_); }
  bool is_empirical() const { return std::holds_alternative<Empirical>(v_); }
  bool is_point_mass() const { return std::holds_alternative<PointMass>(v_); }

  // Moments of the unclamped law (sample moments for Empirical).
  double mean() const;
  double stddev() const;

  // True when every draw is the same value.
  bool is_degenerate() const;

  double cdf(double t, Support support = Support::kNonNegative) const;
  // Left limit F(t-).
  double cdf_left(double t, Support support = Support::kNonNegative) const;

  // Same law moved by `delta` seconds; Gaussian mean shifts, Empirical
  // samples shift (clamped at zero when the support is non-negative).
  LatencyDistribution shifted(double delta,
                              Support support = Support::kNonNegative) const;

  std::string describe() const;

  bool operator==(const LatencyDistribution&) const = default;

 private:
  explicit LatencyDistribution(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

double standard_normal_cdf(double z);
// Inverse standard normal CDF, p in (0, 1).
double standard_normal_quantile(double p);

// Mean and population standard deviation. Throws InputError on empty input
// ("no samples") or negative values ("negative latency").
LatencyDistribution fit_gaussian(std::span<const double> samples);

// Throws InputError unless 0 < p < 1.
double quantile(const LatencyDistribution& dist, double p,
                Support support = Support::kNonNegative);

// One draw by inverse transform of a single uniform from `rng`.
double sample(const LatencyDistribution& dist, Rng& rng,
              Support support = Support::kNonNegative);

// Gaussian(sum of means, sqrt(sum of variances)). Empirical inputs enter via
// their sample mean and standard deviation.
LatencyDistribution compose_serial(std::span<const LatencyDistribution> dists);

struct ParallelGrid {
  std::size_t points = 4096;
  double tail = 1e-4;  // grid spans [min q(tail), max q(1 - tail)]
  Support support = Support::kNonNegative;
};

// Law of the maximum: F(t) = prod_i F_i(t) evaluated on a shared uniform grid,
// returned as `grid.points` inverse-transform representatives.
LatencyDistribution compose_parallel(std::span<const LatencyDistribution> dists,
                                     const ParallelGrid& grid = {});

// Two-sample KS statistic sup_t |F_a(t) - F_b(t)|, evaluated at every ECDF
// step. Throws InputError on empty input.
double ks_distance(std::span<const double> a, std::span<const double> b);
// Distribution vs sample. Empirical distributions contribute their sample
// ECDF; Gaussian and point-mass laws their exact CDF.
double ks_distance(const LatencyDistribution& a, std::span<const double> b,
                   Support support = Support::kNonNegative);
double ks_distance(const LatencyDistribution& a, const LatencyDistribution& b,
                   Support support = Support::kNonNegative);

}  // namespace stepsim
