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

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.h"

namespace stepsim {
namespace {

TEST(Summarize, ConstantInputIsExact) {
  const std::vector<double> xs(1000, 0.1);
  const Summary s = summarize(xs);
  EXPECT_EQ(s.mean, 0.1);
  EXPECT_EQ(s.sigma, 0.0);
}

TEST(Summarize, MatchesTwoPassOracle) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d(0.0, 0.5);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = d(rng);
  const Summary s = summarize(xs);
  EXPECT_NEAR(s.mean, oracle::mean(xs), 1e-12);
  EXPECT_NEAR(s.sigma, oracle::stddev(xs), 1e-12);
}

TEST(SortedQuantile, Type7) {
  const std::vector<double> xs{1.0, 2.0, 4.0, 8.0};
  EXPECT_EQ(sorted_quantile(xs, 0.0), 1.0);
  EXPECT_EQ(sorted_quantile(xs, 1.0), 8.0);
  // h = (n - 1) p = 1.5 -> halfway between 2 and 4.
  EXPECT_DOUBLE_EQ(sorted_quantile(xs, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(xs, 0.25), 1.75);
  const std::vector<double> ties(7, 2.5);
  for (double p : {0.01, 0.3, 0.77, 0.99}) EXPECT_EQ(sorted_quantile(ties, p), 2.5);
}

TEST(SortedInterpolatedCdf, InvertsQuantile) {
  const std::vector<double> xs{1.0, 2.0, 4.0, 8.0, 9.0};
  for (double p : {0.1, 0.25, 0.4, 0.6, 0.9}) {
    EXPECT_NEAR(sorted_interpolated_cdf(xs, sorted_quantile(xs, p)), p, 1e-12);
  }
  EXPECT_EQ(sorted_interpolated_cdf(xs, 0.5), 0.0);
  EXPECT_EQ(sorted_interpolated_cdf(xs, 9.0), 1.0);
  const std::vector<double> one{3.0};
  EXPECT_EQ(sorted_interpolated_cdf(one, 2.9), 0.0);
  EXPECT_EQ(sorted_interpolated_cdf(one, 3.0), 1.0);
}

TEST(EcdfSteps, DistinctValues) {
  const std::vector<double> xs{1.0, 1.0, 2.0, 3.0};
  const auto steps = ecdf_steps(xs);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0], (std::pair{1.0, 0.5}));
  EXPECT_EQ(steps[1], (std::pair{2.0, 0.75}));
  EXPECT_EQ(steps[2], (std::pair{3.0, 1.0}));
}

TEST(Skewness, SignAndZero) {
  EXPECT_EQ(skewness(std::vector<double>(5, 1.0)), 0.0);
  EXPECT_GT(skewness(std::vector<double>{1, 1, 1, 1, 10}), 1.0);
  EXPECT_LT(skewness(std::vector<double>{-10, 1, 1, 1, 1}), -1.0);
  EXPECT_NEAR(skewness(std::vector<double>{1, 2, 3}), 0.0, 1e-15);
}

}  // namespace
}  // namespace stepsim
