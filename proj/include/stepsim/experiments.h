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

// What-if sweeps over a workload: slow-node placement, tensor-parallel group
// size under per-GPU variation, kernel variance sensitivity and cross-DC
// bandwidth. Each produces a SweepReport with plot-ready slowdown CDFs.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepsim/engine.h"

namespace stepsim {

// Q-Q: ratio of the i-th smallest point sample to the i-th smallest baseline
// sample. Mean: every point sample over the baseline mean.
enum class SlowdownMode { kQuantileRatio, kMeanRatio };

SlowdownMode parse_slowdown_mode(const std::string& name);
const char* slowdown_mode_name(SlowdownMode mode);

// Ascending slowdown ratios of `point` against `baseline` (same length for
// the Q-Q mode).
std::vector<double> slowdown(const SimulationResult& point, const SimulationResult& baseline,
                             SlowdownMode mode);

struct Scenario {
  ModelSpec model;
  ParallelismConfig par;
  Topology topo;
  DistributionCatalog catalog;
  SimConfig sim;
  SlowdownMode mode = SlowdownMode::kQuantileRatio;
};

struct SweepPoint {
  std::string label;
  nlohmann::json params = nlohmann::json::object();
  SimulationResult result;
  // Set when the point has its own baseline instead of the report's.
  std::optional<SimulationResult> baseline;
  std::vector<double> slowdown;  // ascending
  double mean_slowdown = 1.0;    // mean(point) / mean(baseline)

  double slowdown_quantile(double q) const;
};

struct SweepReport {
  std::string experiment;
  std::string axis;
  SlowdownMode mode = SlowdownMode::kQuantileRatio;
  std::string baseline_label;
  std::optional<SimulationResult> baseline;
  std::vector<SweepPoint> points;
  nlohmann::json summary = nlohmann::json::object();  // experiment-specific
  // Published production measurements for the same experiment, kept for
  // comparison only; desk-scale fixtures do not reproduce them.
  nlohmann::json reference_points = nlohmann::json::object();
  std::vector<std::string> notes;

  const SweepPoint& point(const std::string& label) const;
};

// Placement of a degraded node (every kernel on its ranks at quantile p):
// one point per pipeline stage (the node hosting the stage's first rank) and
// a "tp-distributed" point with the same number of slow ranks spread one per
// tensor-parallel group. Baseline: the unperturbed run. Requires pp >= 2.
SweepReport slow_node_placement_sweep(const Scenario& s, double p = 0.95);

struct TpSizeOptions {
  std::vector<int> sizes{8, 16, 72};
  double rate = 0.10;
  double p = 0.95;
  // Slow ranks are redrawn for every replicate; false applies one seeded
  // draw for the whole point.
  bool redraw_per_replicate = true;
};

// The scenario's model on a single node of `size` ranks (tp = size, every
// other degree 1, one microbatch). Each size is compared with its own
// variation-free run.
SweepReport tp_group_size_sweep(const Scenario& s, const TpSizeOptions& options = {});

struct SensitivityOptions {
  std::vector<std::string> kernels;  // empty: every catalog kernel
  std::vector<double> cvs{0.05, 0.10, 0.20, 0.30, 0.40};
};

// Every kernel is pinned to its p50. For each (kernel, cv) the kernel's law is
// rescaled to that CV and the kernel is pinned to p50 plus the rescaled law's
// p95 - p50 excess; for Gaussians that is exactly the rescaled p95. Points
// report the step-time change against the all-p50 baseline; summary.ranking
// orders kernels by their change at the largest CV.
SweepReport kernel_sensitivity_sweep(const Scenario& s, const SensitivityOptions& options = {});

struct CrossDcOptions {
  std::vector<double> bandwidths_gbps{5, 50, 400};
  std::optional<LatencyDistribution> rtt;  // default: the tier's current RTT
  std::string tier = "datacenter";
};

// Replaces the datacenter tier's link per bandwidth. Pipeline transfers are
// synthesized from the topology (catalog entries for them are dropped).
// Baseline: the setting with the lowest mean step time. Throws "no cross-DC
// links" unless the tier exists with count >= 2.
SweepReport cross_dc_bandwidth_sweep(const Scenario& s, const CrossDcOptions& options = {});

std::vector<std::string> experiment_ids();

nlohmann::json report_to_json(const SweepReport& report);
// label,mean,sigma,p50,p95,mean_slowdown,slowdown_p50,slowdown_p80,slowdown_p95
std::string report_summary_csv(const SweepReport& report);
// label,x,y with x the slowdown and y the cumulative probability.
std::string report_cdf_csv(const SweepReport& report);

}  // namespace stepsim
