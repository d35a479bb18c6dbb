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

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stepsim/catalog.h"
#include "stepsim/workload.h"

namespace fixtures {

inline stepsim::TaskNode node(const std::string& kernel, int rank) {
  stepsim::TaskNode t;
  t.kernel = kernel;
  t.rank = rank;
  return t;
}

// Random DAGs with edges from lower to higher ids only; the topological order
// is then the identity, and node i takes the i-th draw of each replicate.
struct RandomDag {
  stepsim::ExecutionDag dag;
  stepsim::DistributionCatalog catalog;
  std::vector<std::pair<int, int>> edges;
  std::vector<stepsim::LatencyDistribution> laws;
};

inline RandomDag random_dag(std::mt19937_64& rng, bool degenerate) {
  RandomDag out;
  const int n = std::uniform_int_distribution<int>(1, 50)(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = u(rng) * 0.3;
  for (int i = 0; i < n; ++i) {
    const std::string k = "k" + std::to_string(i);
    out.dag.add_node(node(k, i % 4));
    stepsim::LatencyDistribution law;
    switch (degenerate ? 0 : i % 3) {
      case 0:
        law = stepsim::LatencyDistribution::point_mass(u(rng) * 5);
        break;
      case 1:
        law = stepsim::LatencyDistribution::gaussian(u(rng) * 5, u(rng) * 2);
        break;
      default:
        law = stepsim::LatencyDistribution::empirical({u(rng), u(rng) * 3, u(rng) * 6});
    }
    if (degenerate && i % 2 == 1) law = stepsim::LatencyDistribution::gaussian(u(rng) * 5, 0.0);
    out.catalog.set(k, law);
    out.laws.push_back(law);
    for (int j = 0; j < i; ++j) {
      if (u(rng) < density) {
        out.dag.add_edge(j, i, stepsim::EdgeKind::kSerial);
        out.edges.emplace_back(j, i);
      }
    }
  }
  return out;
}

}  // namespace fixtures
