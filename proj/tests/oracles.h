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

// Independent reference implementations used as test oracles. None of them
// calls into the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

// Standard normal CDF from the complementary error function.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse standard normal CDF by bisection on phi.
inline double phi_inv(double p) {
  // Bisect on the smaller tail so 1 - p keeps its precision.
  if (p > 0.5) return -phi_inv(1.0 - p);
  double lo = -40.0;
  double hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Two-sample KS by brute force: at every observed value t, count how many
// samples of each set are <= t.
inline double ks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> ts = a;
  ts.insert(ts.end(), b.begin(), b.end());
  double best = 0.0;
  for (double t : ts) {
    std::size_t ca = 0;
    std::size_t cb = 0;
    for (double x : a) ca += x <= t;
    for (double x : b) cb += x <= t;
    const double d = std::abs(static_cast<double>(ca) / static_cast<double>(a.size()) -
                              static_cast<double>(cb) / static_cast<double>(b.size()));
    best = std::max(best, d);
  }
  return best;
}

// Longest path by repeated relaxation over the edge list until nothing
// changes. finish[v] = dur[v] + max(finish[u] for u -> v), 0 with no preds.
inline double longest_path(std::size_t n, const std::vector<std::pair<int, int>>& edges,
                           const std::vector<double>& dur) {
  std::vector<std::vector<int>> preds(n);
  for (auto [u, v] : edges) preds[static_cast<std::size_t>(v)].push_back(u);
  std::vector<double> finish(n, 0.0);
  std::vector<char> known(n, 0);
  for (std::size_t round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      bool ready = true;
      double start = 0.0;
      for (int u : preds[v]) {
        if (!known[static_cast<std::size_t>(u)]) {
          ready = false;
          break;
        }
        start = std::max(start, finish[static_cast<std::size_t>(u)]);
      }
      if (!ready || known[v]) continue;
      finish[v] = start + dur[v];
      known[v] = 1;
      changed = true;
    }
    if (!changed) break;
  }
  double best = 0.0;
  for (double f : finish) best = std::max(best, f);
  return best;
}

// Classic 1F1B step time with equal stages.
inline double one_f_one_b_step(int p, int m, double tf, double tb) {
  return (m + p - 1) * (tf + tb);
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double stddev(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace oracle
