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

#include "stepsim/stats.h"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace stepsim {

Summary summarize(std::span<const double> xs) {
  if (xs.empty()) return {};
  const double n = static_cast<double>(xs.size());
  const double x0 = xs.front();
  double shift = 0.0;
  for (double x : xs) shift += x - x0;
  const double mean = x0 + shift / n;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / n)};
}

double sorted_quantile(std::span<const double> sorted, double p) {
  assert(!sorted.empty());
  if (sorted.size() == 1) return sorted.front();
  p = std::clamp(p, 0.0, 1.0);
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  const double a = sorted[lo];
  const double b = sorted[lo + 1];
  // a == b keeps ties exact
  return a == b ? a : a + frac * (b - a);
}

double sorted_interpolated_cdf(std::span<const double> sorted, double t) {
  assert(!sorted.empty());
  if (t < sorted.front()) return 0.0;
  if (t >= sorted.back()) return 1.0;
  // first element strictly greater than t; t < back() so it exists and i >= 1
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  const auto i = static_cast<std::size_t>(it - sorted.begin());
  const double a = sorted[i - 1];
  const double b = sorted[i];
  const double frac = (t - a) / (b - a);
  return (static_cast<double>(i - 1) + frac) /
         static_cast<double>(sorted.size() - 1);
}

std::vector<std::pair<double, double>> ecdf_steps(std::span<const double> sorted) {
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

double skewness(std::span<const double> xs) {
  const Summary s = summarize(xs);
  if (xs.empty() || s.sigma == 0.0) return 0.0;
  double m3 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    m3 += d * d * d;
  }
  m3 /= static_cast<double>(xs.size());
  return m3 / (s.sigma * s.sigma * s.sigma);
}

}  // namespace stepsim
