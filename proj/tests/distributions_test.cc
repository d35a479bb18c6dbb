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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.h"
#include "stepsim/error.h"
#include "stepsim/random.h"
#include "stepsim/stats.h"

namespace stepsim {
namespace {

using LD = LatencyDistribution;

TEST(StandardNormal, QuantileMatchesBisectionOracle) {
  for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.05, 0.2, 0.5, 0.7, 0.95, 0.999, 1 - 1e-9}) {
    const double want = oracle::phi_inv(p);
    EXPECT_NEAR(standard_normal_quantile(p), want, 1e-9 * std::max(1.0, std::abs(want)))
        << "p=" << p;
  }
  EXPECT_EQ(standard_normal_quantile(0.5), 0.0);
  EXPECT_NEAR(standard_normal_quantile(0.95), 1.6448536269514722, 1e-14);
}

TEST(StandardNormal, CdfMatchesErfcOracle) {
  for (double x : {-6.0, -1.0, 0.0, 0.3, 2.5}) {
    EXPECT_NEAR(standard_normal_cdf(x), oracle::phi(x), 1e-15);
  }
}

TEST(FitGaussian, MomentsAndErrors) {
  const std::vector<double> xs{2.0, 2.0, 2.0};
  EXPECT_EQ(fit_gaussian(xs), LD::gaussian(2.0, 0.0));
  const std::vector<double> ys{1.0, 3.0};
  EXPECT_EQ(fit_gaussian(ys), LD::gaussian(2.0, 1.0));
  EXPECT_THROW(fit_gaussian(std::vector<double>{}), InputError);
  EXPECT_THROW(fit_gaussian(std::vector<double>{1.0, -0.5}), InputError);
}

TEST(Quantile, RangeAndSemantics) {
  const LD g = LD::gaussian(10.0, 2.0);
  EXPECT_THROW(quantile(g, 0.0), InputError);
  EXPECT_THROW(quantile(g, 1.0), InputError);
  EXPECT_NEAR(quantile(g, 0.95), 10.0 + 2.0 * 1.6448536269514722, 1e-12);
  // Clamped at zero unless the support is unbounded.
  const LD neg = LD::gaussian(-1.0, 0.1);
  EXPECT_EQ(quantile(neg, 0.5), 0.0);
  EXPECT_EQ(quantile(neg, 0.5, Support::kUnbounded), -1.0);
  EXPECT_EQ(quantile(LD::point_mass(3.0), 0.01), 3.0);
  const LD e = LD::empirical({4.0, 1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(quantile(e, 0.5), 2.5);
}

TEST(Sample, IsQuantileOfOneUniform) {
  const LD laws[] = {LD::gaussian(5.0, 1.0), LD::empirical({1.0, 2.0, 7.0}),
                     LD::point_mass(0.25)};
  for (const auto& d : laws) {
    Rng a = make_replicate_rng(9, 4, 0);
    Rng b = make_replicate_rng(9, 4, 0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(d, a), quantile(d, uniform_open(b)));
  }
}

TEST(Sample, GaussianMatchesCdf) {
  const LD g = LD::gaussian(3.0, 0.5);
  Rng rng = make_replicate_rng(1, 0, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample(g, rng);
  // 99.9% KS critical value for n = 1e5 is about 0.0062.
  EXPECT_LT(ks_distance(g, xs), 0.0062);
  EXPECT_NEAR(oracle::mean(xs), 3.0, 0.01);
  EXPECT_NEAR(oracle::stddev(xs), 0.5, 0.01);
}

TEST(Random, StreamsAreIndependentAndReproducible) {
  Rng a = make_replicate_rng(1, 2, 3);
  Rng b = make_replicate_rng(1, 2, 3);
  Rng c = make_replicate_rng(1, 2, 4);
  Rng d = make_replicate_rng(1, 3, 3);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform_open(a);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(ComposeSerial, GaussianSumIsExact) {
  const LD parts[] = {LD::gaussian(3.0, 0.4), LD::gaussian(5.0, 0.3)};
  EXPECT_EQ(compose_serial(parts), LD::gaussian(8.0, 0.5));
  EXPECT_THROW(compose_serial(std::span<const LD>{}), InputError);
}

TEST(ComposeSerial, EmpiricalEntersByMoments) {
  const LD parts[] = {LD::empirical({1.0, 3.0}), LD::point_mass(2.0)};
  EXPECT_EQ(compose_serial(parts), LD::gaussian(4.0, 1.0));
}

TEST(ComposeParallel, MaxOfTwoStandardNormals) {
  const LD n01 = LD::gaussian(0.0, 1.0);
  ParallelGrid grid;
  grid.support = Support::kUnbounded;
  const LD parts[] = {n01, n01};
  const LD m = compose_parallel(parts, grid);
  const double want = 1.0 / std::sqrt(std::numbers::pi);
  EXPECT_NEAR(m.mean(), want, 0.01 * want);
}

TEST(ComposeParallel, MatchesSampledMaximum) {
  const LD a = LD::gaussian(10.0, 1.0);
  const LD b = LD::empirical({8.0, 9.0, 10.5, 11.0, 13.0});
  const LD parts[] = {a, b};
  const LD m = compose_parallel(parts);
  Rng rng = make_replicate_rng(5, 0, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = std::max(sample(a, rng), sample(b, rng));
  EXPECT_LT(ks_distance(m, LD::empirical(xs)), 0.02);
}

TEST(ComposeParallel, DegenerateInputsStayExact) {
  const LD parts[] = {LD::point_mass(2.5), LD::gaussian(2.5, 0.0)};
  const LD m = compose_parallel(parts);
  EXPECT_TRUE(m.is_degenerate());
  EXPECT_EQ(quantile(m, 0.3), 2.5);
}

// Property: every quantile of the maximum is at least every input's
// quantile, up to one grid step.
TEST(ComposeParallel, StochasticDominanceProperty) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> mu(0.0, 10.0);
  std::uniform_real_distribution<double> sd(0.0, 3.0);
  std::uniform_int_distribution<int> count(1, 5);
  for (int c = 0; c < 120; ++c) {
    std::vector<LD> parts;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      if (i % 3 == 2) {
        std::vector<double> s(20);
        for (auto& x : s) x = mu(rng);
        parts.push_back(LD::empirical(s));
      } else {
        parts.push_back(LD::gaussian(mu(rng), sd(rng)));
      }
    }
    const ParallelGrid grid;
    const LD m = compose_parallel(parts, grid);
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& d : parts) {
      lo = std::min(lo, quantile(d, grid.tail));
      hi = std::max(hi, quantile(d, 1 - grid.tail));
    }
    const double step = (hi - lo) / static_cast<double>(grid.points - 1);
    for (double p : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      for (const auto& d : parts) {
        EXPECT_GE(quantile(m, p), quantile(d, p) - step - 1e-12) << "case " << c << " p " << p;
      }
    }
  }
}

TEST(FromPercentiles, AnchorsAreExact) {
  const PercentileAnchor anchors[] = {{0.05, 1.0}, {0.5, 2.0}, {0.95, 5.0}};
  const LD d = LD::from_percentiles(anchors);
  EXPECT_DOUBLE_EQ(quantile(d, 0.5), 2.0);
  EXPECT_NEAR(quantile(d, 0.05), 1.0, 1e-12);
  EXPECT_NEAR(quantile(d, 0.95), 5.0, 1e-12);
  // Flat beyond the outermost anchors.
  EXPECT_EQ(quantile(d, 0.01), 1.0);
  EXPECT_EQ(quantile(d, 0.99), 5.0);
  const PercentileAnchor bad[] = {{0.5, 2.0}, {0.9, 1.0}};
  EXPECT_THROW(LD::from_percentiles(bad), InputError);
}

TEST(Shifted, MovesTheLaw) {
  EXPECT_EQ(LD::gaussian(1.0, 2.0).shifted(3.0), LD::gaussian(4.0, 2.0));
  EXPECT_EQ(LD::empirical({1.0, 2.0}).shifted(-1.5), LD::empirical({0.0, 0.5}));
  EXPECT_EQ(LD::point_mass(1.0).shifted(0.5), LD::point_mass(1.5));
}

TEST(Empirical, RejectsNegativeUnlessUnbounded) {
  EXPECT_THROW(LD::empirical({-1.0, 2.0}), InputError);
  EXPECT_NO_THROW(LD::empirical({-1.0, 2.0}, Support::kUnbounded));
  EXPECT_THROW(LD::empirical({}), InputError);
}

TEST(Ks, Fixtures) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{2.0, 3.0, 4.0};
  const std::vector<double> far{10.0, 11.0};
  EXPECT_EQ(ks_distance(a, a), 0.0);
  EXPECT_EQ(ks_distance(a, far), 1.0);
  EXPECT_NEAR(ks_distance(a, b), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(ks_distance(a, std::vector<double>{}), InputError);
}

TEST(Ks, MatchesBruteForceOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 30);
  std::uniform_int_distribution<int> val(0, 12);  // small range forces ties
  for (int c = 0; c < 200; ++c) {
    std::vector<double> a(static_cast<std::size_t>(len(rng)));
    std::vector<double> b(static_cast<std::size_t>(len(rng)));
    for (auto& x : a) x = val(rng) * 0.5;
    for (auto& x : b) x = val(rng) * 0.5 + 0.25 * (c % 2);
    EXPECT_NEAR(ks_distance(a, b), oracle::ks(a, b), 1e-12);
  }
}

TEST(Ks, DistributionAgainstSamples) {
  const LD pm = LD::point_mass(1.0);
  EXPECT_EQ(ks_distance(pm, std::vector<double>{1.0, 1.0}), 0.0);
  EXPECT_EQ(ks_distance(pm, std::vector<double>{2.0}), 1.0);
  EXPECT_LT(ks_distance(LD::gaussian(0, 1), LD::gaussian(0, 1)), 1e-12);
  EXPECT_NEAR(ks_distance(LD::gaussian(0, 1), LD::gaussian(1, 1)),
              2 * oracle::phi(0.5) - 1, 1e-3);
}

TEST(Cdf, EmpiricalIsInterpolatedInverse) {
  const LD e = LD::empirical({1.0, 2.0, 3.0});
  EXPECT_EQ(e.cdf(0.5), 0.0);
  EXPECT_DOUBLE_EQ(e.cdf(1.5), 0.25);
  EXPECT_EQ(e.cdf(3.0), 1.0);
  EXPECT_DOUBLE_EQ(LD::gaussian(0, 1).cdf(0.0, Support::kUnbounded), 0.5);
}

}  // namespace
}  // namespace stepsim
