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

// Command-line front end. Commands live in the library so tests can drive
// them in-process; tools/stepsim_main.cc only forwards argv.
//
// Exit codes: 0 success, 1 validation threshold exceeded, 2 input or schema
// error, 3 internal error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "stepsim/experiments.h"
#include "stepsim/ingest.h"

namespace stepsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr const char* kOutDirEnv = "STEPSIM_OUT_DIR";

// A run configuration file:
//   {"model": "model.json", "topology": "topology.json",
//    "catalog": "catalog.json" | "trace": "trace.jsonl",
//    "fit": {"policy": "auto", "scope": "pooled"},
//    "parallelism": {"tp": 4, ...},
//    "sim": {"replicates": 1000, "seed": 1, "shortcuts": false, "threads": 0},
//    "experiment": {"id": "tp-size", ...},
//    "output": {"dir": "out", "format": "json"}}
// Paths are relative to the file. The model file holds a model, or
// {"model": ..., "parallelism": ...}; the config's parallelism keys override
// the latter.
struct RunConfig {
  std::filesystem::path model;
  std::filesystem::path topology;
  std::filesystem::path catalog;
  std::filesystem::path trace;
  CatalogOptions fit;
  nlohmann::json parallelism = nlohmann::json::object();
  SimConfig sim;
  nlohmann::json experiment = nlohmann::json::object();
  std::filesystem::path out_dir;
  std::string format = "json";
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
// Resolved form, with absolute paths and every default spelled out.
nlohmann::json run_config_to_json(const RunConfig& config);

// Loads model, parallelism, topology and catalog (building it from the
// trace when no catalog is given).
Scenario load_scenario(const RunConfig& config);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stepsim::cli
