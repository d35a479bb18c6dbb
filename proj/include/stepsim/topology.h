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

// Hardware hierarchy (ranks grouped into nodes, racks, clusters, datacenters)
// and the network cost model for collectives and point-to-point transfers.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepsim/catalog.h"
#include "stepsim/distributions.h"

namespace stepsim {

enum class CollectiveKind { kAllReduce, kAllGather, kReduceScatter, kP2P };

const char* collective_name(CollectiveKind kind);
CollectiveKind parse_collective(const std::string& name);

struct LinkSpec {
  double bandwidth_bps = 0.0;  // may be +inf
  LatencyDistribution rtt = LatencyDistribution::point_mass(0.0);
  std::optional<double> distance_km;  // metadata only
};

// One level of the hierarchy. A unit of this tier groups `count` units of the
// tier below (ranks, for the innermost tier). `link` carries traffic between
// ranks whose lowest common tier is this one.
struct TierSpec {
  std::string name;
  int count = 1;
  std::optional<LinkSpec> link;
};

class Topology {
 public:
  // Tiers innermost first, e.g. node (ranks per node), rack, cluster,
  // datacenter.
  explicit Topology(std::vector<TierSpec> tiers, std::string gpu_model = {});

  int world_size() const { return world_; }
  const std::vector<TierSpec>& tiers() const { return tiers_; }
  const std::string& gpu_model() const { return gpu_model_; }

  std::optional<std::size_t> find_tier(const std::string& name) const;
  std::size_t tier_index(const std::string& name) const;  // throws

  // Deepest tier whose unit holds both ranks. Throws on unknown rank.
  std::size_t lowest_common_tier_index(int a, int b) const;
  const std::string& lowest_common_tier(int a, int b) const;
  // Deepest tier holding every rank of a non-empty group.
  std::size_t group_tier_index(std::span<const int> group) const;

  // Throws InputError when the tier has no link.
  const LinkSpec& link(std::size_t tier) const;

  int unit_of(int rank, std::size_t tier) const;
  int unit_count(std::size_t tier) const;
  std::vector<int> ranks_of_unit(std::size_t tier, int unit) const;

  // Copy with the named tier's link replaced.
  Topology with_link(const std::string& tier, LinkSpec link) const;

 private:
  void check_rank(int rank) const;

  std::vector<TierSpec> tiers_;
  std::vector<long long> span_;  // ranks per unit, per tier
  int world_ = 0;
  std::string gpu_model_;
};

// (bytes * 8 / bandwidth) + one RTT draw. Throws on zero bandwidth.
LatencyDistribution transfer_delay(double message_bytes, const LinkSpec& link);

// Catalog name for a measured collective: "<Kind>:<bytes>:<tier>".
std::string measured_collective_key(CollectiveKind kind, double message_bytes,
                                    const std::string& tier);

// Latency of a collective over `group`. A measured catalog entry for
// (kind, size, tier) wins, exact size first, then the nearest power-of-two
// bucket. Otherwise the ring cost model on the group's tier link:
// AllReduce 2(n-1)/n, AllGather and ReduceScatter (n-1)/n, P2P 1 times
// bytes / bandwidth, plus one RTT per ring step.
LatencyDistribution collective_distribution(CollectiveKind kind,
                                            double message_bytes,
                                            std::span<const int> group,
                                            const Topology& topo,
                                            const DistributionCatalog& catalog);

Topology topology_from_json(const nlohmann::json& j);
nlohmann::json topology_to_json(const Topology& topo);
Topology load_topology(const std::filesystem::path& path);

}  // namespace stepsim
