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

// Operator-level timing traces: parsing, spatial/temporal aggregation,
// catalog fitting and a seeded synthetic trace generator.
//
// Wire format is JSON Lines, one record per line:
//   {"kernel": "gemm", "rank": 3, "iter": 17, "dur_us": 812.5,
//    "shape": "4096x4096", "module": "mlp"}
// Durations travel in microseconds and are kept that way in TraceRecord so a
// parse/serialize round trip is exact; seconds() converts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepsim/catalog.h"

namespace stepsim {

struct TraceRecord {
  std::string kernel;
  int rank = 0;
  long long iter = 0;
  double dur_us = 0.0;
  std::optional<std::string> shape;
  std::optional<std::string> module;

  double seconds() const { return dur_us * 1e-6; }
  auto operator<=>(const TraceRecord&) const = default;
};

enum class ParseMode { kStrict, kLenient };

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParsedTrace {
  std::vector<TraceRecord> records;
  std::vector<Diagnostic> diagnostics;  // skipped lines (lenient mode)
};

// Strict mode throws InputError("<source>:<line>: ...") on the first bad
// line and "no records" on an empty trace. Lenient mode skips bad lines.
ParsedTrace parse_trace_jsonl(std::istream& in, ParseMode mode = ParseMode::kStrict,
                              const std::string& source = "trace");
// Same columns with a header row: kernel,rank,iter,dur_us[,shape][,module].
ParsedTrace parse_trace_csv(std::istream& in, ParseMode mode = ParseMode::kStrict,
                            const std::string& source = "trace");
// Picks the CSV reader for a .csv extension, JSONL otherwise.
ParsedTrace parse_trace(const std::filesystem::path& path,
                        ParseMode mode = ParseMode::kStrict);

std::string record_to_jsonl(const TraceRecord& record);
void write_trace(const std::vector<TraceRecord>& records, std::ostream& out);
void write_trace(const std::vector<TraceRecord>& records,
                 const std::filesystem::path& path);

struct KernelStats {
  std::string kernel;
  // Seconds, ascending, per rank.
  std::map<int, std::vector<double>> temporal;
  // Per-rank medians in rank order.
  std::vector<double> spatial;
  double spatial_cv = 0.0;   // sd / mean of the per-rank medians
  double temporal_cv = 0.0;  // mean over ranks of the per-rank sd / mean
  double spread = 0.0;       // (max - min) / min of the per-rank medians
  std::vector<std::string> warnings;

  // Gaussian fit of one rank's iterations.
  LatencyDistribution temporal_distribution(int rank) const;
  // Every observation of every rank, ascending.
  std::vector<double> pooled() const;
};

// Throws InputError("no records") on empty input.
std::map<std::string, KernelStats> aggregate(const std::vector<TraceRecord>& records);

enum class FitPolicy { kGaussian, kEmpirical, kAuto };
enum class CatalogScope { kPooled, kPerRank };

struct CatalogOptions {
  FitPolicy policy = FitPolicy::kAuto;
  // Pooled: one any-rank entry per kernel from all observations. Per-rank:
  // one entry per observed (kernel, rank) plus the pooled default.
  CatalogScope scope = CatalogScope::kPooled;
  // Auto picks the empirical law when (p99 - p50) / p50 exceeds tail_ratio
  // or |skewness| exceeds skew.
  double tail_ratio = 0.5;
  double skew = 1.0;
};

FitPolicy parse_fit_policy(const std::string& name);
bool prefers_empirical(const std::vector<double>& sorted, const CatalogOptions& options);
LatencyDistribution fit(const std::vector<double>& sorted, const CatalogOptions& options);
DistributionCatalog build_catalog(const std::map<std::string, KernelStats>& stats,
                                  const CatalogOptions& options = {});

struct SynthKernel {
  std::string name;
  double mean_us = 100.0;
  std::optional<std::string> module;
  std::optional<std::string> shape;
};

struct SynthSpec {
  std::vector<SynthKernel> kernels;
  int ranks = 8;
  int iterations = 100;
  double spatial_cv = 0.0;
  double temporal_cv = 0.0;
  std::uint64_t seed = 0;
};

// rank mean = mean_us * (1 + spatial_cv * z), duration = rank mean *
// (1 + temporal_cv * z'), both clamped at zero. Records are ordered by
// kernel, rank, iteration.
std::vector<TraceRecord> synth_trace(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

}  // namespace stepsim
