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

// Monte Carlo step-time simulation over an ExecutionDag.
//
// Replicates are evaluated in blocks of lanes. Every lane owns a generator
// derived from (seed, replicate, stream), so samples do not depend on the
// block size, the thread count or the evaluation order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stepsim/catalog.h"
#include "stepsim/distributions.h"
#include "stepsim/topology.h"
#include "stepsim/workload.h"

namespace stepsim {

// Each rank is slow with probability `rate`, independently per replicate.
// A slow rank's compute kernels are shifted so their mean sits at their own
// quantile(p).
struct RankVariation {
  double rate = 0.1;
  double p = 0.95;
};

struct SimConfig {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  // Serial-chain fusion and data-parallel replica de-duplication.
  bool shortcuts = false;
  int threads = 0;  // 0: hardware concurrency
  std::size_t block = 64;
  // Upper bound on replicates x simulated nodes.
  double max_samples = 2e9;
  ParallelGrid grid;
  std::optional<RankVariation> rank_variation;

  void validate() const;
};

class SimulationResult {
 public:
  SimulationResult() = default;
  explicit SimulationResult(std::vector<double> samples);

  // One makespan per replicate, in replicate order.
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& sorted() const { return sorted_; }
  double mean() const { return summary_.mean; }
  double sigma() const { return summary_.sigma; }
  // Type-7 sample quantile, p in [0, 1].
  double quantile(double p) const;
  std::vector<std::pair<double, double>> ecdf() const;

  std::vector<std::string> notes;  // shortcut decisions, fallbacks

 private:
  std::vector<double> samples_;
  std::vector<double> sorted_;
  struct {
    double mean = 0.0;
    double sigma = 0.0;
  } summary_;
};

// Law used for one DAG node. Compute nodes resolve (kernel, rank) in the
// catalog; communication nodes use the kernel's default entry, else a law
// synthesized from `topo`.
LatencyDistribution node_distribution(const TaskNode& node,
                                      const DistributionCatalog& catalog,
                                      const Topology* topo);

SimulationResult simulate(const ExecutionDag& dag, const DistributionCatalog& catalog,
                          const Topology* topo, const SimConfig& config);

// Longest path with every node at its mean, using the same arithmetic as
// simulate, so the two agree bit for bit when all laws are degenerate.
double critical_path_deterministic(const ExecutionDag& dag,
                                   const DistributionCatalog& catalog,
                                   const Topology* topo = nullptr);

// Same law, moved so its mean equals its own quantile(p). Point masses are
// unchanged.
LatencyDistribution at_percentile(const LatencyDistribution& dist, double p);

// Every catalog kernel on the ranks of one topology node (tier 0 unit).
struct NodeAtPercentile {
  int node = 0;
  double p = 0.95;
};
struct RanksAtPercentile {
  std::vector<int> ranks;
  double p = 0.95;
};
// A fixed, seeded draw: each rank is selected with probability `rate`.
struct PerGpuVariation {
  double rate = 0.1;
  double p = 0.95;
  std::uint64_t seed = 0;
};
// The kernel's standard deviation becomes cv * mean, mean kept.
struct KernelSigmaScale {
  std::string kernel;
  double cv = 0.0;
};
using Perturbation =
    std::variant<NodeAtPercentile, RanksAtPercentile, PerGpuVariation, KernelSigmaScale>;

// Ranks a PerGpuVariation selects in a world of `world_size`.
std::vector<int> selected_ranks(const PerGpuVariation& v, int world_size);

// Returns an edited copy. Not idempotent: applying a percentile shift twice
// shifts twice.
DistributionCatalog apply_perturbation(const DistributionCatalog& catalog,
                                       const Perturbation& perturbation,
                                       const Topology& topo);

struct ValidationMetrics {
  double mean_error_pct = 0.0;
  double ks_distance = 0.0;
};

// |mean(result) - mean(reference)| / mean(reference) * 100 and the
// two-sample KS distance. Throws InputError on empty input.
ValidationMetrics validate_against_reference(std::span<const double> result,
                                             std::span<const double> reference);

nlohmann::json result_to_json(const SimulationResult& result);
// "t,F" header then one row per ECDF step.
std::string result_ecdf_csv(const SimulationResult& result);
// Accepts a result JSON ({"samples": [...]}), a JSON array, or text with one
// number per line (a "t"-style header line is skipped).
std::vector<double> load_samples(const std::filesystem::path& path);

}  // namespace stepsim
