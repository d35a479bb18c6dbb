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

#include "stepsim/catalog.h"

#include <fstream>
#include <set>

#include "stepsim/error.h"

namespace stepsim {

std::string KernelKey::to_string() const {
  return rank ? kernel + "@" + std::to_string(*rank) : kernel;
}

KernelKey KernelKey::parse(const std::string& text) {
  const auto at = text.rfind('@');
  if (at == 0 || text.empty()) throw InputError("empty kernel name: '" + text + "'");
  if (at == std::string::npos) return {text, std::nullopt};
  const std::string tail = text.substr(at + 1);
  try {
    std::size_t used = 0;
    const int rank = std::stoi(tail, &used);
    if (used != tail.size() || rank < 0) throw std::invalid_argument(tail);
    return {text.substr(0, at), rank};
  } catch (const std::exception&) {
    throw InputError("bad kernel key (expected name@rank): " + text);
  }
}

void DistributionCatalog::set(const KernelKey& key, LatencyDistribution dist) {
  if (key.kernel.empty()) throw InputError("empty kernel name");
  entries_.insert_or_assign(key, std::move(dist));
}

const LatencyDistribution* DistributionCatalog::find(
    const std::string& kernel, std::optional<int> rank) const {
  if (rank) {
    if (auto it = entries_.find(KernelKey{kernel, rank}); it != entries_.end()) {
      return &it->second;
    }
  }
  auto it = entries_.find(KernelKey{kernel, std::nullopt});
  return it == entries_.end() ? nullptr : &it->second;
}

const LatencyDistribution& DistributionCatalog::resolve(
    const std::string& kernel, std::optional<int> rank) const {
  if (const auto* d = find(kernel, rank)) return *d;
  throw InputError("unresolved kernel key: " +
                   KernelKey{kernel, rank}.to_string());
}

bool DistributionCatalog::contains_kernel(const std::string& kernel) const {
  auto it = entries_.lower_bound(KernelKey{kernel, std::nullopt});
  return it != entries_.end() && it->first.kernel == kernel;
}

std::vector<std::string> DistributionCatalog::kernels() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : entries_) {
    if (out.empty() || out.back() != key.kernel) out.push_back(key.kernel);
  }
  return out;
}

nlohmann::json distribution_to_json(const LatencyDistribution& dist) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {{"type", "gaussian"}, {"mu", v.mu}, {"sigma", v.sigma}};
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return {{"type", "point"}, {"value", v.value}};
        } else {
          return {{"type", "empirical"}, {"samples", v.samples}};
        }
      },
      dist.variant());
}

LatencyDistribution distribution_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "gaussian") {
      return LatencyDistribution::gaussian(j.at("mu").get<double>(),
                                           j.at("sigma").get<double>());
    }
    if (type == "empirical") {
      return LatencyDistribution::empirical(
          j.at("samples").get<std::vector<double>>());
    }
    if (type == "point") {
      return LatencyDistribution::point_mass(j.at("value").get<double>());
    }
    throw InputError("unknown distribution type: " + type);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad distribution: ") + e.what());
  }
}

nlohmann::json catalog_to_json(const DistributionCatalog& catalog) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, dist] : catalog.entries()) {
    j[key.to_string()] = distribution_to_json(dist);
  }
  return j;
}

DistributionCatalog catalog_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("catalog must be a JSON object");
  DistributionCatalog out;
  for (const auto& [key, value] : j.items()) {
    try {
      out.set(KernelKey::parse(key), distribution_from_json(value));
    } catch (const InputError& e) {
      throw InputError("catalog entry '" + key + "': " + e.what());
    }
  }
  return out;
}

DistributionCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open catalog: " + path.string());
  try {
    return catalog_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("catalog " + path.string() + ": " + e.what());
  }
}

void save_catalog(const DistributionCatalog& catalog,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write catalog: " + path.string());
  out << catalog_to_json(catalog).dump(2) << '\n';
}

}  // namespace stepsim
