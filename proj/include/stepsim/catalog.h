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

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepsim/distributions.h"

namespace stepsim {

// A kernel's identity in the catalog. An empty rank is the any-rank default.
struct KernelKey {
  std::string kernel;
  std::optional<int> rank;

  auto operator<=>(const KernelKey&) const = default;

  // "kernel" for the default entry, "kernel@rank" otherwise.
  std::string to_string() const;
  static KernelKey parse(const std::string& text);
};

// Kernel-latency laws keyed by (kernel, rank). Lookup prefers the
// rank-specific entry and falls back to the kernel's default; a miss on both
// is a hard error. Value type: perturbations copy and edit.
class DistributionCatalog {
 public:
  void set(const KernelKey& key, LatencyDistribution dist);
  void set(const std::string& kernel, LatencyDistribution dist) {
    set(KernelKey{kernel, std::nullopt}, std::move(dist));
  }

  const LatencyDistribution* find(const std::string& kernel,
                                  std::optional<int> rank) const;
  // Throws InputError("unresolved kernel key: ...").
  const LatencyDistribution& resolve(const std::string& kernel,
                                     std::optional<int> rank) const;

  bool contains_kernel(const std::string& kernel) const;
  // Distinct kernel names, sorted.
  std::vector<std::string> kernels() const;

  const std::map<KernelKey, LatencyDistribution>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const DistributionCatalog&) const = default;

 private:
  std::map<KernelKey, LatencyDistribution> entries_;
};

nlohmann::json distribution_to_json(const LatencyDistribution& dist);
LatencyDistribution distribution_from_json(const nlohmann::json& j);

// {"<key>": {"type": "gaussian", "mu": .., "sigma": ..} |
//            {"type": "empirical", "samples": [..]} |
//            {"type": "point", "value": ..}, ...}
nlohmann::json catalog_to_json(const DistributionCatalog& catalog);
DistributionCatalog catalog_from_json(const nlohmann::json& j);

DistributionCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const DistributionCatalog& catalog,
                  const std::filesystem::path& path);

}  // namespace stepsim
