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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "stepsim/error.h"

namespace stepsim {

const char* collective_name(CollectiveKind kind) {
  switch (kind) {
    case CollectiveKind::kAllReduce:
      return "AllReduce";
    case CollectiveKind::kAllGather:
      return "AllGather";
    case CollectiveKind::kReduceScatter:
      return "ReduceScatter";
    case CollectiveKind::kP2P:
      return "P2P";
  }
  return "?";
}

CollectiveKind parse_collective(const std::string& name) {
  for (auto k : {CollectiveKind::kAllReduce, CollectiveKind::kAllGather,
                 CollectiveKind::kReduceScatter, CollectiveKind::kP2P}) {
    if (name == collective_name(k)) return k;
  }
  throw InputError("unknown collective: " + name);
}

Topology::Topology(std::vector<TierSpec> tiers, std::string gpu_model)
    : tiers_(std::move(tiers)), gpu_model_(std::move(gpu_model)) {
  if (tiers_.empty()) throw InputError("topology needs at least one tier");
  long long span = 1;
  for (const auto& t : tiers_) {
    if (t.name.empty()) throw InputError("tier without a name");
    if (t.count < 1) throw InputError("tier '" + t.name + "' count must be >= 1");
    if (t.link && !(t.link->bandwidth_bps > 0.0)) {
      throw InputError("tier '" + t.name + "' bandwidth must be > 0");
    }
    if (std::count_if(tiers_.begin(), tiers_.end(),
                      [&](const TierSpec& o) { return o.name == t.name; }) > 1) {
      throw InputError("duplicate tier name: " + t.name);
    }
    span *= t.count;
    if (span > std::numeric_limits<int>::max()) {
      throw InputError("topology too large");
    }
    span_.push_back(span);
  }
  world_ = static_cast<int>(span);
}

std::optional<std::size_t> Topology::find_tier(const std::string& name) const {
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (tiers_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Topology::tier_index(const std::string& name) const {
  if (auto i = find_tier(name)) return *i;
  throw InputError("unknown tier: " + name);
}

void Topology::check_rank(int rank) const {
  if (rank < 0 || rank >= world_) {
    throw InputError("unknown rank " + std::to_string(rank) + " (world size " +
                     std::to_string(world_) + ")");
  }
}

std::size_t Topology::lowest_common_tier_index(int a, int b) const {
  check_rank(a);
  check_rank(b);
  for (std::size_t i = 0; i < span_.size(); ++i) {
    if (a / span_[i] == b / span_[i]) return i;
  }
  return span_.size() - 1;  // unreachable: the top unit holds every rank
}

const std::string& Topology::lowest_common_tier(int a, int b) const {
  return tiers_[lowest_common_tier_index(a, b)].name;
}

std::size_t Topology::group_tier_index(std::span<const int> group) const {
  if (group.empty()) throw InputError("empty rank group");
  // Units are contiguous rank ranges, so the extremes decide.
  const auto [lo, hi] = std::minmax_element(group.begin(), group.end());
  return lowest_common_tier_index(*lo, *hi);
}

const LinkSpec& Topology::link(std::size_t tier) const {
  if (!tiers_.at(tier).link) {
    throw InputError("tier '" + tiers_[tier].name + "' has no link spec");
  }
  return *tiers_[tier].link;
}

int Topology::unit_of(int rank, std::size_t tier) const {
  check_rank(rank);
  return static_cast<int>(rank / span_.at(tier));
}

int Topology::unit_count(std::size_t tier) const {
  return static_cast<int>(world_ / span_.at(tier));
}

std::vector<int> Topology::ranks_of_unit(std::size_t tier, int unit) const {
  if (unit < 0 || unit >= unit_count(tier)) {
    throw InputError("unknown " + tiers_.at(tier).name + " " + std::to_string(unit));
  }
  std::vector<int> out;
  for (long long r = unit * span_[tier]; r < (unit + 1) * span_[tier]; ++r) {
    out.push_back(static_cast<int>(r));
  }
  return out;
}

Topology Topology::with_link(const std::string& tier, LinkSpec link) const {
  auto tiers = tiers_;
  tiers[tier_index(tier)].link = std::move(link);
  return Topology(std::move(tiers), gpu_model_);
}

LatencyDistribution transfer_delay(double message_bytes, const LinkSpec& link) {
  if (!(message_bytes >= 0.0)) throw InputError("message size must be >= 0");
  if (!(link.bandwidth_bps > 0.0)) throw InputError("zero bandwidth");
  return link.rtt.shifted(message_bytes * 8.0 / link.bandwidth_bps);
}

std::string measured_collective_key(CollectiveKind kind, double message_bytes,
                                    const std::string& tier) {
  return std::string(collective_name(kind)) + ":" +
         std::to_string(static_cast<long long>(std::llround(message_bytes))) + ":" +
         tier;
}

LatencyDistribution collective_distribution(CollectiveKind kind,
                                            double message_bytes,
                                            std::span<const int> group,
                                            const Topology& topo,
                                            const DistributionCatalog& catalog) {
  if (group.empty()) throw InputError("collective over an empty group");
  if (!(message_bytes >= 0.0)) throw InputError("message size must be >= 0");
  std::vector<int> members(group.begin(), group.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.size() == 1) return LatencyDistribution::point_mass(0.0);

  const std::size_t tier = topo.group_tier_index(members);
  const std::string& tier_name = topo.tiers()[tier].name;
  if (const auto* d = catalog.find(measured_collective_key(kind, message_bytes, tier_name),
                                   std::nullopt)) {
    return *d;
  }
  if (message_bytes >= 1.0) {
    const double bucket = std::exp2(std::round(std::log2(message_bytes)));
    if (const auto* d = catalog.find(measured_collective_key(kind, bucket, tier_name),
                                     std::nullopt)) {
      return *d;
    }
  }

  const LinkSpec& link = topo.link(tier);
  const double n = static_cast<double>(members.size());
  double volume_factor = 1.0;  // multiples of bytes/bandwidth, times n
  double steps = 1.0;
  switch (kind) {
    case CollectiveKind::kAllReduce:
      volume_factor = 2.0 * (n - 1.0);
      steps = 2.0 * (n - 1.0);
      break;
    case CollectiveKind::kAllGather:
    case CollectiveKind::kReduceScatter:
      volume_factor = n - 1.0;
      steps = n - 1.0;
      break;
    case CollectiveKind::kP2P:
      volume_factor = n;
      steps = 1.0;
      break;
  }
  const double wire = (volume_factor * message_bytes * 8.0) / (n * link.bandwidth_bps);
  if (link.rtt.is_degenerate()) {
    return LatencyDistribution::point_mass(wire + steps * link.rtt.mean());
  }
  if (steps == 1.0) return link.rtt.shifted(wire);
  std::vector<LatencyDistribution> per_step(static_cast<std::size_t>(steps), link.rtt);
  return compose_serial(per_step).shifted(wire);
}

namespace {

double parse_bandwidth_gbps(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw InputError("bad bandwidth_gbps: " + s);
  }
  return v.get<double>();
}

LatencyDistribution parse_rtt(const nlohmann::json& t) {
  if (t.contains("rtt_dist")) return distribution_from_json(t["rtt_dist"]);
  if (t.contains("rtt_samples")) {
    return LatencyDistribution::empirical(t["rtt_samples"].get<std::vector<double>>());
  }
  if (t.contains("rtt_s")) return LatencyDistribution::point_mass(t["rtt_s"].get<double>());
  if (t.contains("rtt")) {
    const auto& r = t["rtt"];
    const double scale = r.value("scale", 1.0);
    std::vector<PercentileAnchor> anchors;
    for (const auto& [name, p] : {std::pair{"p50", 0.50}, std::pair{"p90", 0.90},
                                  std::pair{"p99", 0.99}}) {
      if (r.contains(name)) anchors.push_back({p, r[name].get<double>() * scale});
    }
    if (anchors.empty()) throw InputError("rtt needs at least one of p50/p90/p99");
    return LatencyDistribution::from_percentiles(anchors);
  }
  return LatencyDistribution::point_mass(0.0);
}

}  // namespace

Topology topology_from_json(const nlohmann::json& j) {
  try {
    std::vector<TierSpec> tiers;
    for (const auto& t : j.at("tiers")) {
      TierSpec spec;
      spec.name = t.at("name").get<std::string>();
      spec.count = t.at("count").get<int>();
      if (t.contains("bandwidth_gbps")) {
        LinkSpec link;
        link.bandwidth_bps = parse_bandwidth_gbps(t["bandwidth_gbps"]) * 1e9;
        link.rtt = parse_rtt(t);
        if (t.contains("distance_km")) link.distance_km = t["distance_km"].get<double>();
        spec.link = std::move(link);
      }
      tiers.push_back(std::move(spec));
    }
    return Topology(std::move(tiers), j.value("gpu_model", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad topology: ") + e.what());
  }
}

nlohmann::json topology_to_json(const Topology& topo) {
  nlohmann::json tiers = nlohmann::json::array();
  for (const auto& t : topo.tiers()) {
    nlohmann::json jt{{"name", t.name}, {"count", t.count}};
    if (t.link) {
      if (std::isinf(t.link->bandwidth_bps)) {
        jt["bandwidth_gbps"] = "inf";
      } else {
        jt["bandwidth_gbps"] = t.link->bandwidth_bps / 1e9;
      }
      jt["rtt_dist"] = distribution_to_json(t.link->rtt);
      if (t.link->distance_km) jt["distance_km"] = *t.link->distance_km;
    }
    tiers.push_back(std::move(jt));
  }
  nlohmann::json j{{"tiers", tiers}};
  if (!topo.gpu_model().empty()) j["gpu_model"] = topo.gpu_model();
  return j;
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open topology: " + path.string());
  try {
    return topology_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("topology " + path.string() + ": " + e.what());
  }
}

}  // namespace stepsim
