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

#include "stepsim/ingest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "stepsim/error.h"
#include "stepsim/random.h"
#include "stepsim/stats.h"

namespace stepsim {

namespace {

// Collects records, enforcing per-line validity and key uniqueness.
class TraceBuilder {
 public:
  TraceBuilder(ParseMode mode, std::string source) : mode_(mode), source_(std::move(source)) {}

  void add(std::size_t line, TraceRecord r) {
    if (r.kernel.empty()) return fail(line, "empty kernel name");
    if (r.rank < 0) return fail(line, "negative rank");
    if (!std::isfinite(r.dur_us)) return fail(line, "non-finite duration");
    if (r.dur_us < 0.0) return fail(line, "negative duration");
    if (!keys_.insert({r.kernel, r.rank, r.iter}).second) {
      return fail(line, "duplicate record (" + r.kernel + ", rank " + std::to_string(r.rank) +
                            ", iter " + std::to_string(r.iter) + ")");
    }
    out_.records.push_back(std::move(r));
  }

  void fail(std::size_t line, const std::string& message) {
    if (mode_ == ParseMode::kStrict) {
      throw InputError(source_ + ":" + std::to_string(line) + ": " + message);
    }
    out_.diagnostics.push_back({line, message});
  }

  ParsedTrace finish() {
    if (out_.records.empty() && mode_ == ParseMode::kStrict) {
      throw InputError(source_ + ": no records");
    }
    return std::move(out_);
  }

 private:
  ParseMode mode_;
  std::string source_;
  ParsedTrace out_;
  std::set<std::tuple<std::string, int, long long>> keys_;
};

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  std::istringstream is(s);
  is >> out;
  return !is.fail() && (is >> std::ws).eof();
}

}  // namespace

ParsedTrace parse_trace_jsonl(std::istream& in, ParseMode mode, const std::string& source) {
  static const std::set<std::string> kFields = {"kernel", "rank",  "iter",
                                                "dur_us", "shape", "module"};
  TraceBuilder b(mode, source);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      b.fail(lineno, "malformed JSON");
      continue;
    }
    std::string bad;
    for (const auto& [k, _] : j.items()) {
      if (!kFields.contains(k)) bad = k;
    }
    if (!bad.empty()) {
      b.fail(lineno, "schema error: unknown field '" + bad + "'");
      continue;
    }
    const auto missing = [&]() -> std::string {
      for (const char* k : {"kernel", "rank", "iter", "dur_us"}) {
        if (!j.contains(k)) return k;
      }
      return {};
    }();
    if (!missing.empty()) {
      b.fail(lineno, "schema error: missing field '" + missing + "'");
      continue;
    }
    if (!j["kernel"].is_string() || !j["rank"].is_number_integer() ||
        !j["iter"].is_number_integer() || !j["dur_us"].is_number() ||
        (j.contains("shape") && !j["shape"].is_string()) ||
        (j.contains("module") && !j["module"].is_string())) {
      b.fail(lineno, "schema error: wrong field type");
      continue;
    }
    TraceRecord r;
    r.kernel = j["kernel"].get<std::string>();
    r.rank = j["rank"].get<int>();
    r.iter = j["iter"].get<long long>();
    r.dur_us = j["dur_us"].get<double>();
    if (j.contains("shape")) r.shape = j["shape"].get<std::string>();
    if (j.contains("module")) r.module = j["module"].get<std::string>();
    b.add(lineno, std::move(r));
  }
  return b.finish();
}

ParsedTrace parse_trace_csv(std::istream& in, ParseMode mode, const std::string& source) {
  TraceBuilder b(mode, source);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (header.empty()) {
      header = split_csv(line);
      for (const auto& h : header) {
        if (h != "kernel" && h != "rank" && h != "iter" && h != "dur_us" && h != "shape" &&
            h != "module") {
          // A bad header makes every row meaningless.
          throw InputError(source + ":" + std::to_string(lineno) +
                           ": schema error: unknown column '" + h + "'");
        }
      }
      for (const char* k : {"kernel", "rank", "iter", "dur_us"}) {
        if (std::find(header.begin(), header.end(), k) == header.end()) {
          throw InputError(source + ":" + std::to_string(lineno) +
                           ": schema error: missing column '" + k + "'");
        }
      }
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      b.fail(lineno, "expected " + std::to_string(header.size()) + " columns, got " +
                         std::to_string(cells.size()));
      continue;
    }
    TraceRecord r;
    bool ok = true;
    for (std::size_t c = 0; c < cells.size() && ok; ++c) {
      const auto& h = header[c];
      if (h == "kernel") {
        r.kernel = cells[c];
      } else if (h == "rank") {
        ok = parse_number(cells[c], r.rank);
      } else if (h == "iter") {
        ok = parse_number(cells[c], r.iter);
      } else if (h == "dur_us") {
        ok = parse_number(cells[c], r.dur_us);
      } else if (h == "shape") {
        if (!cells[c].empty()) r.shape = cells[c];
      } else {
        if (!cells[c].empty()) r.module = cells[c];
      }
      if (!ok) b.fail(lineno, "bad value for '" + h + "'");
    }
    if (ok) b.add(lineno, std::move(r));
  }
  return b.finish();
}

ParsedTrace parse_trace(const std::filesystem::path& path, ParseMode mode) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace: " + path.string());
  if (path.extension() == ".csv") return parse_trace_csv(in, mode, path.string());
  return parse_trace_jsonl(in, mode, path.string());
}

std::string record_to_jsonl(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["kernel"] = r.kernel;
  j["rank"] = r.rank;
  j["iter"] = r.iter;
  j["dur_us"] = r.dur_us;
  if (r.shape) j["shape"] = *r.shape;
  if (r.module) j["module"] = *r.module;
  return j.dump();
}

void write_trace(const std::vector<TraceRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << record_to_jsonl(r) << '\n';
}

void write_trace(const std::vector<TraceRecord>& records,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write trace: " + path.string());
  write_trace(records, out);
}

LatencyDistribution KernelStats::temporal_distribution(int rank) const {
  const auto it = temporal.find(rank);
  if (it == temporal.end()) {
    throw InputError("kernel " + kernel + " has no samples on rank " + std::to_string(rank));
  }
  return fit_gaussian(it->second);
}

std::vector<double> KernelStats::pooled() const {
  std::vector<double> out;
  for (const auto& [_, s] : temporal) out.insert(out.end(), s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, KernelStats> aggregate(const std::vector<TraceRecord>& records) {
  if (records.empty()) throw InputError("no records");
  std::map<std::string, KernelStats> out;
  for (const auto& r : records) {
    auto& k = out[r.kernel];
    k.kernel = r.kernel;
    k.temporal[r.rank].push_back(r.seconds());
  }
  for (auto& [name, k] : out) {
    double cv_sum = 0.0;
    for (auto& [rank, s] : k.temporal) {
      std::sort(s.begin(), s.end());
      k.spatial.push_back(sorted_quantile(s, 0.5));
      if (s.size() == 1) {
        k.warnings.push_back(name + ": rank " + std::to_string(rank) +
                             " has a single iteration, temporal sigma is 0");
      }
      const Summary t = summarize(s);
      cv_sum += t.mean > 0.0 ? t.sigma / t.mean : 0.0;
    }
    k.temporal_cv = cv_sum / static_cast<double>(k.temporal.size());
    const Summary sp = summarize(k.spatial);
    k.spatial_cv = sp.mean > 0.0 ? sp.sigma / sp.mean : 0.0;
    const auto [lo, hi] = std::minmax_element(k.spatial.begin(), k.spatial.end());
    k.spread = *lo > 0.0 ? (*hi - *lo) / *lo : 0.0;
  }
  return out;
}

FitPolicy parse_fit_policy(const std::string& name) {
  if (name == "gaussian") return FitPolicy::kGaussian;
  if (name == "empirical") return FitPolicy::kEmpirical;
  if (name == "auto") return FitPolicy::kAuto;
  throw InputError("unknown fit policy: " + name + " (expected gaussian, empirical or auto)");
}

bool prefers_empirical(const std::vector<double>& sorted, const CatalogOptions& options) {
  if (sorted.size() < 2) return false;
  const double p50 = sorted_quantile(sorted, 0.5);
  const double p99 = sorted_quantile(sorted, 0.99);
  if (p50 > 0.0 && (p99 - p50) / p50 > options.tail_ratio) return true;
  return std::abs(skewness(sorted)) > options.skew;
}

LatencyDistribution fit(const std::vector<double>& sorted, const CatalogOptions& options) {
  const bool empirical =
      options.policy == FitPolicy::kEmpirical ||
      (options.policy == FitPolicy::kAuto && prefers_empirical(sorted, options));
  if (empirical) return LatencyDistribution::empirical(sorted);
  return fit_gaussian(sorted);
}

DistributionCatalog build_catalog(const std::map<std::string, KernelStats>& stats,
                                  const CatalogOptions& options) {
  if (stats.empty()) throw InputError("no kernel statistics");
  DistributionCatalog out;
  for (const auto& [name, k] : stats) {
    out.set(name, fit(k.pooled(), options));
    if (options.scope == CatalogScope::kPerRank) {
      for (const auto& [rank, s] : k.temporal) out.set(KernelKey{name, rank}, fit(s, options));
    }
  }
  return out;
}

std::vector<TraceRecord> synth_trace(const SynthSpec& spec) {
  if (spec.spatial_cv < 0.0 || spec.temporal_cv < 0.0) throw InputError("CVs must be >= 0");
  if (spec.ranks < 1 || spec.iterations < 1) {
    throw InputError("ranks and iterations must be >= 1");
  }
  std::vector<TraceRecord> out;
  out.reserve(spec.kernels.size() * static_cast<std::size_t>(spec.ranks) *
              static_cast<std::size_t>(spec.iterations));
  for (std::size_t k = 0; k < spec.kernels.size(); ++k) {
    const SynthKernel& kernel = spec.kernels[k];
    if (!(kernel.mean_us >= 0.0)) throw InputError("kernel mean must be >= 0: " + kernel.name);
    for (int r = 0; r < spec.ranks; ++r) {
      // Stream 2k + 1 holds a kernel's rank offsets, 2k + 2 its iterations.
      Rng spatial = make_replicate_rng(spec.seed, static_cast<std::uint64_t>(r), 2 * k + 1);
      Rng temporal = make_replicate_rng(spec.seed, static_cast<std::uint64_t>(r), 2 * k + 2);
      const double z = standard_normal_quantile(uniform_open(spatial));
      const double rank_mean = std::max(0.0, kernel.mean_us * (1.0 + spec.spatial_cv * z));
      for (int i = 0; i < spec.iterations; ++i) {
        const double zt = standard_normal_quantile(uniform_open(temporal));
        TraceRecord rec;
        rec.kernel = kernel.name;
        rec.rank = r;
        rec.iter = i;
        rec.dur_us = std::max(0.0, rank_mean * (1.0 + spec.temporal_cv * zt));
        rec.shape = kernel.shape;
        rec.module = kernel.module;
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  try {
    SynthSpec s;
    for (const auto& jk : j.at("kernels")) {
      SynthKernel k;
      k.name = jk.at("name").get<std::string>();
      k.mean_us = jk.at("mean_us").get<double>();
      if (jk.contains("module")) k.module = jk["module"].get<std::string>();
      if (jk.contains("shape")) k.shape = jk["shape"].get<std::string>();
      s.kernels.push_back(std::move(k));
    }
    s.ranks = j.value("ranks", s.ranks);
    s.iterations = j.value("iterations", s.iterations);
    s.spatial_cv = j.value("spatial_cv", s.spatial_cv);
    s.temporal_cv = j.value("temporal_cv", s.temporal_cv);
    s.seed = j.value("seed", s.seed);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad synth spec: ") + e.what());
  }
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["kernels"] = nlohmann::json::array();
  for (const auto& k : s.kernels) {
    nlohmann::json jk = {{"name", k.name}, {"mean_us", k.mean_us}};
    if (k.module) jk["module"] = *k.module;
    if (k.shape) jk["shape"] = *k.shape;
    j["kernels"].push_back(jk);
  }
  j["ranks"] = s.ranks;
  j["iterations"] = s.iterations;
  j["spatial_cv"] = s.spatial_cv;
  j["temporal_cv"] = s.temporal_cv;
  j["seed"] = s.seed;
  return j;
}

}  // namespace stepsim
