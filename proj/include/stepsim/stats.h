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

#include <span>
#include <utility>
#include <vector>

namespace stepsim {

struct Summary {
  double mean = 0.0;
  double sigma = 0.0;  // population standard deviation
};

// Shifted two-pass moments: a constant input yields exactly (x, 0).
Summary summarize(std::span<const double> xs);

// Type-7 quantile (linear interpolation between order statistics, endpoints
// clamped) of an ascending sequence. p is clamped to [0, 1].
double sorted_quantile(std::span<const double> sorted, double p);

// Inverse of sorted_quantile: the piecewise-linear CDF through
// (x_(i), i / (n - 1)). Values below the minimum map to 0, at or above the
// maximum to 1. A single-element input is a step at that element.
double sorted_interpolated_cdf(std::span<const double> sorted, double t);

// Step points of the empirical CDF: (distinct x, fraction of samples <= x).
std::vector<std::pair<double, double>> ecdf_steps(std::span<const double> sorted);

// Sample skewness (population moments). Zero for constant input.
double skewness(std::span<const double> xs);

}  // namespace stepsim
