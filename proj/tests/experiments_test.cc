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

#include "stepsim/experiments.h"

#include <gtest/gtest.h>

#include <limits>

#include "fixtures.h"
#include "oracles.h"
#include "stepsim/error.h"

namespace stepsim {
namespace {

using LD = LatencyDistribution;

Scenario desk(std::size_t replicates, const std::string& topology = "topology.json") {
  Scenario s = fixtures::desk_scenario(topology);
  s.sim.replicates = replicates;
  s.sim.seed = 42;
  s.sim.threads = 0;
  return s;
}

TEST(Slowdown, Modes) {
  const SimulationResult point({2.0, 4.0, 3.0});
  const SimulationResult base({1.0, 2.0, 3.0});
  EXPECT_EQ(slowdown(point, base, SlowdownMode::kQuantileRatio),
            (std::vector<double>{1.3333333333333333, 1.5, 2.0}));
  EXPECT_EQ(slowdown(point, base, SlowdownMode::kMeanRatio),
            (std::vector<double>{1.0, 1.5, 2.0}));
  EXPECT_THROW(slowdown(point, SimulationResult({1.0}), SlowdownMode::kQuantileRatio),
               InputError);
  EXPECT_EQ(parse_slowdown_mode("qq"), SlowdownMode::kQuantileRatio);
  EXPECT_EQ(parse_slowdown_mode("mean"), SlowdownMode::kMeanRatio);
  EXPECT_THROW(parse_slowdown_mode("median"), InputError);
  EXPECT_EQ(experiment_ids(),
            (std::vector<std::string>{"slow-node", "tp-size", "kernel-sensitivity", "cross-dc"}));
}

TEST(SlowNode, MedianPlacementIsIdentity) {
  const Scenario s = desk(500);
  const SweepReport r = slow_node_placement_sweep(s, 0.5);
  ASSERT_EQ(r.points.size(), 5u);  // four stages plus the tp-distributed variant
  for (const auto& p : r.points) {
    // Gaussian laws do not move at their median, so the run is the baseline.
    EXPECT_EQ(p.result.samples(), r.baseline->samples()) << p.label;
    EXPECT_EQ(p.slowdown_quantile(0.5), 1.0);
  }
}

TEST(SlowNode, EarliestStageIsCheapest) {
  const Scenario s = desk(1000);
  const SweepReport r = slow_node_placement_sweep(s, 0.95);
  double best = std::numeric_limits<double>::infinity();
  for (int st = 0; st < s.par.pp; ++st) {
    best = std::min(best, r.point("stage" + std::to_string(st)).result.mean());
  }
  EXPECT_EQ(r.point("stage0").result.mean(), best);
  EXPECT_EQ(r.summary["best_stage"], 0);
  EXPECT_GT(r.summary["placement_spread"].get<double>(), 1.0);
  // Slowing ranks never speeds the step up, up to Monte Carlo noise.
  for (const auto& p : r.points) EXPECT_GE(p.mean_slowdown, 1.0 - 1e-3) << p.label;
  EXPECT_EQ(r.point("tp-distributed").params["ranks"].size(), 4u);
  EXPECT_EQ(r.reference_points["max_min_placement_ratio"], 1.09);

  Scenario single = s;
  single.par.pp = 1;
  EXPECT_THROW(slow_node_placement_sweep(single), InputError);
}

TEST(TpSize, ZeroRateIsAStepAtOne) {
  Scenario s = desk(100000);
  TpSizeOptions o;
  o.sizes = {8};
  o.rate = 0.0;
  const SweepReport r = tp_group_size_sweep(s, o);
  ASSERT_EQ(r.points.size(), 1u);
  const SweepPoint& p = r.points[0];
  EXPECT_EQ(p.slowdown.front(), 1.0);
  EXPECT_EQ(p.slowdown.back(), 1.0);
  EXPECT_EQ(ks_distance(p.result.samples(), p.baseline->samples()), 0.0);
}

TEST(TpSize, VariationSlowsEverySize) {
  Scenario s = desk(2000);
  const SweepReport r = tp_group_size_sweep(s);
  ASSERT_EQ(r.points.size(), 3u);
  for (const auto& p : r.points) {
    EXPECT_GE(p.slowdown_quantile(0.8), 1.0) << p.label;
    EXPECT_EQ(p.baseline->samples().size(), 2000u);
  }
  EXPECT_EQ(r.points[2].label, "tp72");
  EXPECT_EQ(r.reference_points["slowdown_p80"]["72"], 1.04);

  TpSizeOptions fixed;
  fixed.sizes = {16};
  fixed.redraw_per_replicate = false;
  fixed.rate = 0.25;
  const SweepReport f = tp_group_size_sweep(s, fixed);
  const auto slow = f.points[0].params["slow_ranks"].get<std::vector<int>>();
  EXPECT_EQ(slow, selected_ranks({0.25, 0.95, s.sim.seed}, 16));
  EXPECT_GE(f.points[0].mean_slowdown, slow.empty() ? 1.0 : 1.001);

  TpSizeOptions bad;
  bad.sizes = {0};
  EXPECT_THROW(tp_group_size_sweep(s, bad), InputError);
}

// Single stage, two tensor ranks: a small GEMM, then a blocking AllGather,
// then the backward kernel. Everything sits on one chain.
Scenario allgather_fixture() {
  ModelSpec m;
  LayerSpec l;
  OperatorSpec gemm;
  gemm.name = "gemm_small";
  OperatorSpec ag;
  ag.name = "allgather";
  ag.kind = OpKind::kCollective;
  ag.collective = CollectiveKind::kAllGather;
  ag.message_bytes = 1 << 20;
  OperatorSpec b;
  b.name = "bwd";
  b.pass = Pass::kBackward;
  l.ops = {gemm, ag, b};
  m.layers = {l, l};
  Scenario s{m, fixtures::pipeline(1, 1, 2), Topology({{"node", 2, std::nullopt}}), {}, {}, {}};
  s.catalog.set("gemm_small", LD::gaussian(20e-6, 2e-6));
  s.catalog.set("allgather", LD::gaussian(300e-6, 30e-6));
  s.catalog.set("bwd", LD::gaussian(100e-6, 10e-6));
  s.sim.replicates = 8;
  s.sim.threads = 1;
  return s;
}

TEST(Sensitivity, ZeroCvMatchesBaseline) {
  Scenario s = allgather_fixture();
  SensitivityOptions o;
  o.cvs = {0.0};
  const SweepReport r = kernel_sensitivity_sweep(s, o);
  ASSERT_EQ(r.points.size(), 3u);
  for (const auto& p : r.points) EXPECT_EQ(p.result.samples(), r.baseline->samples()) << p.label;
}

TEST(Sensitivity, CriticalCollectiveRanksFirst) {
  Scenario s = allgather_fixture();
  SensitivityOptions o;
  o.cvs = {0.1, 0.4};
  const SweepReport r = kernel_sensitivity_sweep(s, o);
  ASSERT_EQ(r.summary["ranking"].size(), 3u);
  EXPECT_EQ(r.summary["ranking"][0]["kernel"], "allgather");
  EXPECT_EQ(r.summary["ranking"][2]["kernel"], "gemm_small");

  // Oracle: every law is a point mass, so the change is the longest-path
  // change, and each kernel appears twice on the single chain.
  const double z95 = oracle::phi_inv(0.95);
  for (const char* k : {"gemm_small", "allgather", "bwd"}) {
    const double mean = s.catalog.resolve(k, 0).mean();
    const auto& p = r.point(std::string(k) + " cv=0.40");
    EXPECT_NEAR(p.params["delta_s"].get<double>(), 2 * z95 * 0.4 * mean, 1e-12) << k;
  }
  SensitivityOptions unknown;
  unknown.kernels = {"nope"};
  EXPECT_THROW(kernel_sensitivity_sweep(s, unknown), InputError);
}

TEST(Sensitivity, BackwardOutweighsForwardTwin) {
  Scenario s = desk(300);
  SensitivityOptions o;
  o.kernels = {"flash_attn_fwd", "flash_attn_bwd"};
  o.cvs = {0.4};
  const SweepReport r = kernel_sensitivity_sweep(s, o);
  EXPECT_GT(r.point("flash_attn_bwd cv=0.40").params["delta_s"].get<double>(),
            r.point("flash_attn_fwd cv=0.40").params["delta_s"].get<double>());
}

TEST(CrossDc, RequiresTwoDatacenters) {
  const Scenario s = desk(10);
  try {
    cross_dc_bandwidth_sweep(s);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("no cross-DC links"), std::string::npos);
  }
}

TEST(CrossDc, MedianSlowdownFallsWithBandwidth) {
  const Scenario s = desk(1000, "topology_2dc.json");
  const SweepReport r = cross_dc_bandwidth_sweep(s);
  ASSERT_EQ(r.points.size(), 3u);
  const double m5 = r.summary["median_slowdown"]["5Gbps"];
  const double m50 = r.summary["median_slowdown"]["50Gbps"];
  const double m400 = r.summary["median_slowdown"]["400Gbps"];
  EXPECT_GT(m5, m50);
  EXPECT_GT(m50, m400);
  EXPECT_EQ(r.baseline_label, "400Gbps");
  EXPECT_EQ(r.reference_points["5Gbps"]["slowdown"], 1.33);
}

TEST(CrossDc, InfiniteBandwidthIsAStepAtOne) {
  const Scenario s = desk(200, "topology_2dc.json");
  CrossDcOptions o;
  o.bandwidths_gbps = {std::numeric_limits<double>::infinity()};
  o.rtt = LD::point_mass(0.0);
  const SweepReport r = cross_dc_bandwidth_sweep(s, o);
  EXPECT_EQ(r.points[0].slowdown.front(), 1.0);
  EXPECT_EQ(r.points[0].slowdown.back(), 1.0);
  o.bandwidths_gbps = {0.0};
  EXPECT_THROW(cross_dc_bandwidth_sweep(s, o), InputError);
}

TEST(Reports, DeterministicAndExportable) {
  Scenario s = desk(200);
  TpSizeOptions o;
  o.sizes = {8, 16};
  const auto a = report_to_json(tp_group_size_sweep(s, o));
  const auto b = report_to_json(tp_group_size_sweep(s, o));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["experiment"], "tp-size");
  const SweepReport r = tp_group_size_sweep(s, o);
  const std::string summary = report_summary_csv(r);
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "label,mean,sigma,p50,p95,mean_slowdown,slowdown_p50,slowdown_p80,slowdown_p95");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 3);
  const std::string cdf = report_cdf_csv(r);
  EXPECT_EQ(cdf.substr(0, cdf.find('\n')), "label,x,y");
  EXPECT_THROW(r.point("tp3"), InputError);
}

}  // namespace
}  // namespace stepsim
