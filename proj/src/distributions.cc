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

#include "stepsim/distributions.h"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "stepsim/error.h"
#include "stepsim/kernels.h"
#include "stepsim/stats.h"

namespace stepsim {
namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw InputError(std::string(what) + " must be finite");
  }
}

// Location of the single atom of a degenerate law under `support`.
double atom(const LatencyDistribution& d, Support support) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return (support == Support::kNonNegative && v.mu < 0.0) ? 0.0 : v.mu;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return v.value;
        } else {
          return v.samples.front();
        }
      },
      d.variant());
}

// Points where the CDF of a non-empirical law jumps.
std::vector<double> jump_points(const LatencyDistribution& d, Support support) {
  if (d.is_empirical()) return {};
  if (d.is_degenerate()) return {atom(d, support)};
  if (support == Support::kNonNegative) return {0.0};
  return {};
}

void cdf_on_grid(const LatencyDistribution& d, double lo, double step,
                 std::span<double> out, Support support) {
  if (const auto* e = std::get_if<Empirical>(&d.variant())) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = sorted_interpolated_cdf(e->samples, lo + step * static_cast<double>(j));
    }
    return;
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = d.cdf(lo + step * static_cast<double>(j), support);
  }
}

}  // namespace

double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double standard_normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

LatencyDistribution LatencyDistribution::gaussian(double mu, double sigma) {
  require_finite(mu, "mu");
  require_finite(sigma, "sigma");
  if (sigma < 0.0) throw InputError("sigma must be >= 0");
  return LatencyDistribution(Gaussian{mu, sigma});
}

LatencyDistribution LatencyDistribution::empirical(std::vector<double> samples,
                                                   Support support) {
  if (samples.empty()) throw InputError("no samples");
  for (double x : samples) {
    require_finite(x, "sample");
    if (support == Support::kNonNegative && x < 0.0) {
      throw InputError("negative latency");
    }
  }
  std::sort(samples.begin(), samples.end());
  return LatencyDistribution(Empirical{std::move(samples)});
}

LatencyDistribution LatencyDistribution::point_mass(double value) {
  require_finite(value, "value");
  if (value < 0.0) throw InputError("negative latency");
  return LatencyDistribution(PointMass{value});
}

LatencyDistribution LatencyDistribution::from_percentiles(
    std::span<const PercentileAnchor> anchors, std::size_t resolution) {
  if (anchors.empty()) throw InputError("no percentile anchors");
  if (resolution < 2) throw InputError("resolution must be >= 2");
  std::vector<PercentileAnchor> a(anchors.begin(), anchors.end());
  std::sort(a.begin(), a.end(),
            [](const auto& x, const auto& y) { return x.p < y.p; });
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].p > 0.0 && a[i].p < 1.0)) {
      throw InputError("percentile anchor probability must be in (0, 1)");
    }
    if (i > 0 && a[i].p == a[i - 1].p) {
      throw InputError("duplicate percentile anchor");
    }
    if (i > 0 && a[i].value < a[i - 1].value) {
      throw InputError("percentile anchors must be nondecreasing");
    }
  }
  std::vector<double> samples(resolution);
  const double denom = static_cast<double>(resolution - 1);
  for (std::size_t k = 0; k < resolution; ++k) {
    const double p = static_cast<double>(k) / denom;
    double v;
    if (p <= a.front().p) {
      v = a.front().value;
    } else if (p >= a.back().p) {
      v = a.back().value;
    } else {
      auto hi = std::upper_bound(a.begin(), a.end(), p,
                                 [](double q, const auto& x) { return q < x.p; });
      auto lo = hi - 1;
      if (lo->p == p) {
        v = lo->value;
      } else {
        const double f = (p - lo->p) / (hi->p - lo->p);
        v = lo->value + f * (hi->value - lo->value);
      }
    }
    samples[k] = v;
  }
  return empirical(std::move(samples));
}

double LatencyDistribution::mean() const {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return v.mu;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return v.value;
        } else {
          return summarize(v.samples).mean;
        }
      },
      v_);
}

double LatencyDistribution::stddev() const {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return v.sigma;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return 0.0;
        } else {
          return summarize(v.samples).sigma;
        }
      },
      v_);
}

bool LatencyDistribution::is_degenerate() const {
  if (const auto* g = std::get_if<Gaussian>(&v_)) return g->sigma == 0.0;
  if (const auto* e = std::get_if<Empirical>(&v_)) {
    return e->samples.front() == e->samples.back();
  }
  return true;
}

double LatencyDistribution::cdf(double t, Support support) const {
  if (const auto* e = std::get_if<Empirical>(&v_)) {
    return sorted_interpolated_cdf(e->samples, t);
  }
  if (is_degenerate()) return t >= atom(*this, support) ? 1.0 : 0.0;
  const auto& g = std::get<Gaussian>(v_);
  if (support == Support::kNonNegative && t < 0.0) return 0.0;
  return standard_normal_cdf((t - g.mu) / g.sigma);
}

double LatencyDistribution::cdf_left(double t, Support support) const {
  if (const auto* e = std::get_if<Empirical>(&v_)) {
    if (e->samples.size() == 1) return t > e->samples.front() ? 1.0 : 0.0;
    return sorted_interpolated_cdf(e->samples, t);
  }
  if (is_degenerate()) return t > atom(*this, support) ? 1.0 : 0.0;
  const auto& g = std::get<Gaussian>(v_);
  if (support == Support::kNonNegative && t <= 0.0) return 0.0;
  return standard_normal_cdf((t - g.mu) / g.sigma);
}

LatencyDistribution LatencyDistribution::shifted(double delta,
                                                 Support support) const {
  require_finite(delta, "shift");
  const auto clampv = [&](double x) {
    return (support == Support::kNonNegative && x < 0.0) ? 0.0 : x;
  };
  if (const auto* g = std::get_if<Gaussian>(&v_)) {
    return LatencyDistribution(Gaussian{g->mu + delta, g->sigma});
  }
  if (const auto* p = std::get_if<PointMass>(&v_)) {
    return LatencyDistribution(PointMass{clampv(p->value + delta)});
  }
  std::vector<double> s = std::get<Empirical>(v_).samples;
  for (double& x : s) x = clampv(x + delta);
  return LatencyDistribution(Empirical{std::move(s)});
}

std::string LatencyDistribution::describe() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          os << "gaussian(mu=" << v.mu << ", sigma=" << v.sigma << ")";
        } else if constexpr (std::is_same_v<T, PointMass>) {
          os << "point(" << v.value << ")";
        } else {
          os << "empirical(n=" << v.samples.size() << ", min=" << v.samples.front()
             << ", max=" << v.samples.back() << ")";
        }
      },
      v_);
  return os.str();
}

LatencyDistribution fit_gaussian(std::span<const double> samples) {
  if (samples.empty()) throw InputError("no samples");
  for (double x : samples) {
    require_finite(x, "sample");
    if (x < 0.0) throw InputError("negative latency");
  }
  const Summary s = summarize(samples);
  return LatencyDistribution::gaussian(s.mean, s.sigma);
}

double quantile(const LatencyDistribution& dist, double p, Support support) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("quantile probability must be in (0, 1)");
  }
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          // Same expression as kernels::affine_clamp so engine draws match.
          const double x = v.mu + v.sigma * standard_normal_quantile(p);
          return (support == Support::kNonNegative && x < 0.0) ? 0.0 : x;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return v.value;
        } else {
          return sorted_quantile(v.samples, p);
        }
      },
      dist.variant());
}

double sample(const LatencyDistribution& dist, Rng& rng, Support support) {
  return quantile(dist, uniform_open(rng), support);
}

LatencyDistribution compose_serial(std::span<const LatencyDistribution> dists) {
  if (dists.empty()) throw InputError("compose_serial: empty list");
  double mu = 0.0;
  double var = 0.0;
  for (const auto& d : dists) {
    mu += d.mean();
    const double s = d.stddev();
    var += s * s;
  }
  return LatencyDistribution::gaussian(mu, std::sqrt(var));
}

LatencyDistribution compose_parallel(std::span<const LatencyDistribution> dists,
                                     const ParallelGrid& grid) {
  if (dists.empty()) throw InputError("compose_parallel: empty list");
  if (grid.points < 2) throw InputError("compose_parallel: grid too small");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& d : dists) {
    lo = std::min(lo, quantile(d, grid.tail, grid.support));
    hi = std::max(hi, quantile(d, 1.0 - grid.tail, grid.support));
  }
  const std::size_t n = grid.points;
  if (!(hi > lo)) {
    return LatencyDistribution::empirical(std::vector<double>(n, hi), grid.support);
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> total(n, 1.0);
  std::vector<double> f(n);
  for (const auto& d : dists) {
    cdf_on_grid(d, lo, step, f, grid.support);
    kernels::multiply_inplace(total, f);
  }
  const auto grid_at = [&](std::size_t j) {
    return j + 1 == n ? hi : lo + step * static_cast<double>(j);
  };
  std::vector<double> out(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    // Knots at k/(n-1) so the type-7 quantile of the result reproduces the
    // grid inverse CDF.
    const double p = static_cast<double>(k) / static_cast<double>(n - 1);
    while (j < n && total[j] < p) ++j;
    if (j == 0) {
      out[k] = lo;
    } else if (j == n) {
      out[k] = hi;
    } else {
      const double f0 = total[j - 1];
      const double f1 = total[j];
      const double t0 = grid_at(j - 1);
      out[k] = t0 + (p - f0) / (f1 - f0) * (grid_at(j) - t0);
    }
  }
  return LatencyDistribution::empirical(std::move(out), grid.support);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("ks_distance: empty sample set");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double t;
    if (i == x.size()) {
      t = y[j];
    } else if (j == y.size()) {
      t = x[i];
    } else {
      t = std::min(x[i], y[j]);
    }
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  return d;
}

double ks_distance(const LatencyDistribution& a, std::span<const double> b,
                   Support support) {
  if (b.empty()) throw InputError("ks_distance: empty sample set");
  if (const auto* e = std::get_if<Empirical>(&a.variant())) {
    return ks_distance(e->samples, b);
  }
  std::vector<double> y(b.begin(), b.end());
  std::sort(y.begin(), y.end());
  std::vector<double> points = y;
  for (double t : jump_points(a, support)) points.push_back(t);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  const double n = static_cast<double>(y.size());
  double d = 0.0;
  for (double t : points) {
    const auto below = std::lower_bound(y.begin(), y.end(), t) - y.begin();
    const auto upto = std::upper_bound(y.begin(), y.end(), t) - y.begin();
    d = std::max(d, std::abs(a.cdf(t, support) - static_cast<double>(upto) / n));
    d = std::max(d,
                 std::abs(a.cdf_left(t, support) - static_cast<double>(below) / n));
  }
  return d;
}

double ks_distance(const LatencyDistribution& a, const LatencyDistribution& b,
                   Support support) {
  if (const auto* e = std::get_if<Empirical>(&b.variant())) {
    return ks_distance(a, e->samples, support);
  }
  if (const auto* e = std::get_if<Empirical>(&a.variant())) {
    return ks_distance(b, e->samples, support);
  }
  // Both laws are Gaussian or atoms: scan a fine grid plus every jump.
  constexpr std::size_t kPoints = 8192;
  constexpr double kTail = 1e-7;
  const double lo = std::min(quantile(a, kTail, support), quantile(b, kTail, support));
  const double hi = std::max(quantile(a, 1 - kTail, support),
                             quantile(b, 1 - kTail, support));
  std::vector<double> points;
  for (std::size_t j = 0; j < kPoints; ++j) {
    points.push_back(lo + (hi - lo) * static_cast<double>(j) /
                              static_cast<double>(kPoints - 1));
  }
  for (double t : jump_points(a, support)) points.push_back(t);
  for (double t : jump_points(b, support)) points.push_back(t);
  double d = 0.0;
  for (double t : points) {
    d = std::max(d, std::abs(a.cdf(t, support) - b.cdf(t, support)));
    d = std::max(d, std::abs(a.cdf_left(t, support) - b.cdf_left(t, support)));
  }
  return d;
}

}  // namespace stepsim
