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

// Shared workload fixtures for the tests.

#include <string>

#include "stepsim/catalog.h"
#include "stepsim/cli.h"
#include "stepsim/engine.h"
#include "stepsim/workload.h"

namespace fixtures {

inline std::string source_dir() { return STEPSIM_SOURCE_DIR; }
inline std::string desk(const std::string& file) {
  return source_dir() + "/configs/desk/" + file;
}

// One compute kernel per pass per layer, free pipeline transfers.
inline stepsim::ModelSpec uniform_model(int layers) {
  stepsim::ModelSpec m;
  m.name = "uniform";
  for (int i = 0; i < layers; ++i) {
    stepsim::LayerSpec l;
    l.name = "l" + std::to_string(i);
    stepsim::OperatorSpec f;
    f.name = "f";
    stepsim::OperatorSpec b;
    b.name = "b";
    b.pass = stepsim::Pass::kBackward;
    l.ops = {f, b};
    m.layers.push_back(l);
  }
  return m;
}

inline stepsim::ParallelismConfig pipeline(int pp, int m, int tp = 1, int dp = 1) {
  stepsim::ParallelismConfig par;
  par.pp = pp;
  par.microbatches = m;
  par.tp = tp;
  par.dp = dp;
  return par;
}

// Stage-level forward time tf and backward time tb, as point masses.
inline stepsim::DistributionCatalog uniform_catalog(double tf, double tb) {
  stepsim::DistributionCatalog c;
  c.set("f", stepsim::LatencyDistribution::point_mass(tf));
  c.set("b", stepsim::LatencyDistribution::point_mass(tb));
  c.set("pp_send_fwd", stepsim::LatencyDistribution::point_mass(0.0));
  c.set("pp_send_bwd", stepsim::LatencyDistribution::point_mass(0.0));
  return c;
}

inline stepsim::Scenario desk_scenario(const std::string& topology = "topology.json") {
  stepsim::cli::RunConfig rc = stepsim::cli::load_run_config(desk("run.json"));
  rc.topology = desk(topology);
  return stepsim::cli::load_scenario(rc);
}

}  // namespace fixtures
