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

#include "stepsim/topology.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.h"
#include "stepsim/error.h"

namespace stepsim {
namespace {

using LD = LatencyDistribution;

LinkSpec link(double gbps, double rtt = 0.0) {
  LinkSpec l;
  l.bandwidth_bps = gbps * 1e9;
  l.rtt = LD::point_mass(rtt);
  return l;
}

// 2 ranks per node, 2 nodes per rack, 3 racks.
Topology small() {
  return Topology({{"node", 2, link(800, 1e-6)}, {"rack", 2, link(100, 1e-5)},
                   {"cluster", 3, link(50, 1e-4)}});
}

TEST(Topology, WorldAndUnits) {
  const Topology t = small();
  EXPECT_EQ(t.world_size(), 12);
  EXPECT_EQ(t.unit_count(0), 6);
  EXPECT_EQ(t.unit_count(2), 1);
  EXPECT_EQ(t.unit_of(5, 0), 2);
  EXPECT_EQ(t.unit_of(5, 1), 1);
  EXPECT_EQ(t.ranks_of_unit(1, 1), (std::vector<int>{4, 5, 6, 7}));
  EXPECT_EQ(t.tier_index("rack"), 1u);
  EXPECT_FALSE(t.find_tier("datacenter"));
  EXPECT_THROW(t.tier_index("datacenter"), InputError);
}

TEST(Topology, LowestCommonTier) {
  const Topology t = small();
  EXPECT_EQ(t.lowest_common_tier(0, 1), "node");
  EXPECT_EQ(t.lowest_common_tier(0, 3), "rack");
  EXPECT_EQ(t.lowest_common_tier(0, 4), "cluster");
  EXPECT_EQ(t.lowest_common_tier(7, 7), "node");
  const int g[] = {4, 5, 6};
  EXPECT_EQ(t.group_tier_index(g), 1u);
  EXPECT_THROW(t.lowest_common_tier(0, 12), InputError);
}

TEST(Topology, RejectsBadTiers) {
  EXPECT_THROW(Topology({}), InputError);
  EXPECT_THROW(Topology({{"node", 0, std::nullopt}}), InputError);
  EXPECT_THROW(Topology({{"a", 2, std::nullopt}, {"a", 2, std::nullopt}}), InputError);
  EXPECT_THROW(Topology({{"node", 2, link(0.0)}}), InputError);
}

TEST(TransferDelay, OneGigabyteAtFiftyGbps) {
  const LD d = transfer_delay(1e9, link(50));
  EXPECT_EQ(d, LD::point_mass(0.16));
  EXPECT_EQ(transfer_delay(0.0, link(50, 2e-3)), LD::point_mass(2e-3));
  EXPECT_THROW(transfer_delay(1.0, link(0)), InputError);
}

TEST(TransferDelay, AddsRttLaw) {
  LinkSpec l = link(8);
  l.rtt = LD::gaussian(1e-3, 1e-4);
  EXPECT_EQ(transfer_delay(1e9, l), LD::gaussian(1.0 + 1e-3, 1e-4));
}

TEST(TransferDelay, InfiniteBandwidthIsRttOnly) {
  LinkSpec l = link(0, 3e-6);
  l.bandwidth_bps = std::numeric_limits<double>::infinity();
  EXPECT_EQ(transfer_delay(1e12, l), LD::point_mass(3e-6));
}

TEST(Collective, RingModel) {
  const Topology t = small();
  const DistributionCatalog none;
  const int pair[] = {0, 1};
  const int rack[] = {0, 1, 2, 3};
  const double bytes = 1e8;
  // Two ranks on one node: AllReduce moves 2(n-1)/n of the bytes in 2(n-1) steps.
  EXPECT_DOUBLE_EQ(collective_distribution(CollectiveKind::kAllReduce, bytes, pair, t, none).mean(),
                   bytes * 8 / 800e9 + 2 * 1e-6);
  const double n = 4;
  EXPECT_DOUBLE_EQ(
      collective_distribution(CollectiveKind::kAllGather, bytes, rack, t, none).mean(),
      (n - 1) / n * bytes * 8 / 100e9 + (n - 1) * 1e-5);
  EXPECT_DOUBLE_EQ(
      collective_distribution(CollectiveKind::kAllReduce, bytes, rack, t, none).mean(),
      2 * (n - 1) / n * bytes * 8 / 100e9 + 2 * (n - 1) * 1e-5);
  const int one[] = {3};
  EXPECT_EQ(collective_distribution(CollectiveKind::kAllReduce, bytes, one, t, none),
            LD::point_mass(0.0));
}

TEST(Collective, MeasuredEntryWins) {
  const Topology t = small();
  DistributionCatalog c;
  c.set(measured_collective_key(CollectiveKind::kAllReduce, 1048576, "rack"),
        LD::gaussian(2e-3, 1e-4));
  EXPECT_EQ(measured_collective_key(CollectiveKind::kAllReduce, 1048576, "rack"),
            "AllReduce:1048576:rack");
  const int rack[] = {0, 2};
  EXPECT_EQ(collective_distribution(CollectiveKind::kAllReduce, 1048576, rack, t, c),
            LD::gaussian(2e-3, 1e-4));
  // Nearest power-of-two bucket.
  EXPECT_EQ(collective_distribution(CollectiveKind::kAllReduce, 1000000, rack, t, c),
            LD::gaussian(2e-3, 1e-4));
  // Other tiers fall back to the ring model.
  const int node[] = {0, 1};
  EXPECT_TRUE(
      collective_distribution(CollectiveKind::kAllReduce, 1048576, node, t, c).is_point_mass());
}

TEST(Collective, StochasticRttComposesPerStep) {
  Topology t({{"node", 3, LinkSpec{8e9, LD::gaussian(1e-3, 3e-4), std::nullopt}}});
  const int all[] = {0, 1, 2};
  const LD d = collective_distribution(CollectiveKind::kAllGather, 1.5e9, all, t, {});
  EXPECT_TRUE(d.is_gaussian());
  EXPECT_DOUBLE_EQ(d.mean(), 2.0 / 3.0 * 1.5 + 2e-3);
  EXPECT_DOUBLE_EQ(d.stddev(), std::sqrt(2.0) * 3e-4);
}

TEST(Topology, JsonRoundTrip) {
  const Topology t = load_topology(fixtures::desk("topology.json"));
  EXPECT_EQ(t.world_size(), 32);
  EXPECT_EQ(t.gpu_model(), "H100-SXM");
  EXPECT_DOUBLE_EQ(t.link(1).bandwidth_bps, 400e9);
  // Percentile anchors are reproduced.
  EXPECT_NEAR(quantile(t.link(1).rtt, 0.9), 12e-6, 1e-12);
  const Topology back = topology_from_json(topology_to_json(t));
  ASSERT_EQ(back.tiers().size(), t.tiers().size());
  for (std::size_t i = 0; i < t.tiers().size(); ++i) {
    EXPECT_EQ(back.tiers()[i].name, t.tiers()[i].name);
    EXPECT_EQ(back.tiers()[i].count, t.tiers()[i].count);
    EXPECT_EQ(back.tiers()[i].link->bandwidth_bps, t.tiers()[i].link->bandwidth_bps);
    EXPECT_EQ(back.tiers()[i].link->rtt, t.tiers()[i].link->rtt);
  }
}

TEST(Topology, WithLinkReplacesOneTier) {
  const Topology t = small();
  const Topology u = t.with_link("rack", link(5));
  EXPECT_DOUBLE_EQ(u.link(1).bandwidth_bps, 5e9);
  EXPECT_DOUBLE_EQ(u.link(0).bandwidth_bps, 800e9);
  EXPECT_DOUBLE_EQ(t.link(1).bandwidth_bps, 100e9);
}

TEST(Topology, InfBandwidthParses) {
  const Topology t = topology_from_json(
      {{"tiers", {{{"name", "node"}, {"count", 2}, {"bandwidth_gbps", "inf"}}}}});
  EXPECT_TRUE(std::isinf(t.link(0).bandwidth_bps));
  EXPECT_THROW(topology_from_json({{"tiers", {{{"name", "node"}}}}}), InputError);
}

}  // namespace
}  // namespace stepsim
