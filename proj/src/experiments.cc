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

#include "stepsim/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "stepsim/error.h"
#include "stepsim/stats.h"

namespace stepsim {

SlowdownMode parse_slowdown_mode(const std::string& name) {
  if (name == "qq" || name == "quantile") return SlowdownMode::kQuantileRatio;
  if (name == "mean") return SlowdownMode::kMeanRatio;
  throw InputError("unknown slowdown mode: " + name + " (expected qq or mean)");
}

const char* slowdown_mode_name(SlowdownMode mode) {
  return mode == SlowdownMode::kQuantileRatio ? "qq" : "mean";
}

namespace {

double ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return a / b;
}

}  // namespace

std::vector<double> slowdown(const SimulationResult& point, const SimulationResult& baseline,
                             SlowdownMode mode) {
  const auto& a = point.sorted();
  const auto& b = baseline.sorted();
  std::vector<double> out(a.size());
  if (mode == SlowdownMode::kMeanRatio) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = ratio(a[i], baseline.mean());
    return out;
  }
  if (a.size() != b.size()) {
    throw InputError("Q-Q slowdown needs equal replicate counts");
  }
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ratio(a[i], b[i]);
  std::sort(out.begin(), out.end());
  return out;
}

double SweepPoint::slowdown_quantile(double q) const { return sorted_quantile(slowdown, q); }

const SweepPoint& SweepReport::point(const std::string& label) const {
  for (const auto& p : points) {
    if (p.label == label) return p;
  }
  throw InputError("no sweep point labelled " + label);
}

namespace {

ExecutionDag checked_dag(const ModelSpec& model, const ParallelismConfig& par,
                         const Topology& topo, const DistributionCatalog& catalog) {
  par.check_world(topo);
  ExecutionDag dag = expand_pipeline_schedule(model, par);
  validate_dag(dag, &catalog, &topo);
  return dag;
}

void finish_point(SweepPoint& p, const SimulationResult& baseline, SlowdownMode mode) {
  p.slowdown = slowdown(p.result, baseline, mode);
  p.mean_slowdown = ratio(p.result.mean(), baseline.mean());
}

SweepReport new_report(const std::string& id, const std::string& axis, const Scenario& s) {
  SweepReport r;
  r.experiment = id;
  r.axis = axis;
  r.mode = s.mode;
  return r;
}

}  // namespace

SweepReport slow_node_placement_sweep(const Scenario& s, double p) {
  if (s.par.pp < 2) throw InputError("slow-node sweep needs pp >= 2");
  const ExecutionDag dag = checked_dag(s.model, s.par, s.topo, s.catalog);
  SweepReport report = new_report("slow-node", "placement", s);
  report.baseline_label = "unperturbed";
  report.baseline = simulate(dag, s.catalog, &s.topo, s.sim);

  std::size_t node_size = 0;
  for (int stage = 0; stage < s.par.pp; ++stage) {
    const int first = rank_of({stage, 0, 0, 0}, s.par);
    const int unit = s.topo.unit_of(first, 0);
    const std::vector<int> ranks = s.topo.ranks_of_unit(0, unit);
    node_size = ranks.size();
    SweepPoint pt;
    pt.label = "stage" + std::to_string(stage);
    pt.params = {{"stage", stage}, {"node", unit}, {"ranks", ranks}, {"p", p}};
    const auto cat = apply_perturbation(s.catalog, RanksAtPercentile{ranks, p}, s.topo);
    pt.result = simulate(dag, cat, &s.topo, s.sim);
    finish_point(pt, *report.baseline, s.mode);
    report.points.push_back(std::move(pt));
  }

  // Same number of slow ranks, one per tensor-parallel group, stages first.
  const int groups = s.par.pp * s.par.dp * s.par.cp;
  std::vector<int> spread;
  for (int j = 0; j < static_cast<int>(node_size); ++j) {
    RankCoord c;
    c.stage = j % s.par.pp;
    c.dp = (j / s.par.pp) % s.par.dp;
    c.cp = (j / (s.par.pp * s.par.dp)) % s.par.cp;
    c.tp = j % s.par.tp;
    spread.push_back(rank_of(c, s.par));
  }
  if (static_cast<int>(node_size) > groups) {
    report.notes.push_back("tp-distributed: more slow ranks than tensor-parallel groups");
  }
  std::sort(spread.begin(), spread.end());
  spread.erase(std::unique(spread.begin(), spread.end()), spread.end());
  SweepPoint pt;
  pt.label = "tp-distributed";
  pt.params = {{"ranks", spread}, {"p", p}};
  pt.result = simulate(dag, apply_perturbation(s.catalog, RanksAtPercentile{spread, p}, s.topo),
                       &s.topo, s.sim);
  finish_point(pt, *report.baseline, s.mode);
  report.points.push_back(std::move(pt));

  std::size_t best = 0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(s.par.pp); ++i) {
    if (report.points[i].result.mean() < report.points[best].result.mean()) best = i;
    if (report.points[i].result.mean() > report.points[worst].result.mean()) worst = i;
  }
  report.summary = {
      {"best_stage", best},
      {"worst_stage", worst},
      {"placement_spread",
       ratio(report.points[worst].result.mean(), report.points[best].result.mean())}};
  report.reference_points = {{"max_min_placement_ratio", 1.09}};
  return report;
}

SweepReport tp_group_size_sweep(const Scenario& s, const TpSizeOptions& options) {
  if (options.sizes.empty()) throw InputError("tp-size sweep needs at least one size");
  if (!(options.rate >= 0.0 && options.rate <= 1.0)) {
    throw InputError("variation rate must be in [0, 1]");
  }
  SweepReport report = new_report("tp-size", "tp", s);
  report.baseline_label = "same size without variation";
  const TierSpec& inner = s.topo.tiers().front();
  nlohmann::json p80 = nlohmann::json::object();
  for (int size : options.sizes) {
    if (size < 1) throw InputError("tp sizes must be >= 1");
    ParallelismConfig par;
    par.tp = size;
    Topology topo({TierSpec{inner.name, size, inner.link}}, s.topo.gpu_model());
    const ExecutionDag dag = checked_dag(s.model, par, topo, s.catalog);

    SweepPoint pt;
    pt.label = "tp" + std::to_string(size);
    pt.params = {{"tp", size},
                 {"rate", options.rate},
                 {"p", options.p},
                 {"redraw_per_replicate", options.redraw_per_replicate}};
    SimConfig clean = s.sim;
    if (options.redraw_per_replicate) {
      // A zero-rate variation consumes the same uniforms, so both runs share
      // every kernel draw.
      clean.rank_variation = RankVariation{0.0, options.p};
      SimConfig varied = s.sim;
      varied.rank_variation = RankVariation{options.rate, options.p};
      pt.baseline = simulate(dag, s.catalog, &topo, clean);
      pt.result = simulate(dag, s.catalog, &topo, varied);
    } else {
      clean.rank_variation.reset();
      const PerGpuVariation v{options.rate, options.p, s.sim.seed};
      pt.params["slow_ranks"] = selected_ranks(v, size);
      pt.baseline = simulate(dag, s.catalog, &topo, clean);
      pt.result = simulate(dag, apply_perturbation(s.catalog, v, topo), &topo, clean);
    }
    finish_point(pt, *pt.baseline, s.mode);
    p80[std::to_string(size)] = pt.slowdown_quantile(0.8);
    report.points.push_back(std::move(pt));
  }
  report.summary = {{"slowdown_p80", p80}};
  report.reference_points = {{"slowdown_p80", {{"8", 1.02}, {"16", 1.028}, {"72", 1.04}}}};
  return report;
}

SweepReport kernel_sensitivity_sweep(const Scenario& s, const SensitivityOptions& options) {
  const ExecutionDag dag = checked_dag(s.model, s.par, s.topo, s.catalog);
  std::vector<std::string> kernels = options.kernels;
  if (kernels.empty()) kernels = s.catalog.kernels();
  for (const auto& k : kernels) {
    if (!s.catalog.contains_kernel(k)) throw InputError("unknown kernel: " + k);
  }
  if (options.cvs.empty()) throw InputError("sensitivity sweep needs at least one cv");
  for (double cv : options.cvs) {
    if (!(cv >= 0.0)) throw InputError("cv must be >= 0");
  }

  DistributionCatalog p50;
  for (const auto& [key, d] : s.catalog.entries()) {
    p50.set(key, LatencyDistribution::point_mass(quantile(d, 0.5)));
  }
  SweepReport report = new_report("kernel-sensitivity", "kernel,cv", s);
  report.baseline_label = "all kernels at p50";
  report.baseline = simulate(dag, p50, &s.topo, s.sim);

  const double cv_max = *std::max_element(options.cvs.begin(), options.cvs.end());
  std::vector<std::pair<std::string, double>> ranking;
  for (const auto& k : kernels) {
    double delta_at_max = 0.0;
    for (double cv : options.cvs) {
      const auto scaled = apply_perturbation(s.catalog, KernelSigmaScale{k, cv}, s.topo);
      DistributionCatalog cat = p50;
      for (const auto& [key, d] : s.catalog.entries()) {
        if (key.kernel != k) continue;
        const LatencyDistribution& w = *scaled.find(key.kernel, key.rank);
        const double v = quantile(d, 0.5) + (quantile(w, 0.95) - quantile(w, 0.5));
        cat.set(key, LatencyDistribution::point_mass(std::max(0.0, v)));
      }
      SweepPoint pt;
      char label[64];
      std::snprintf(label, sizeof label, "%s cv=%.2f", k.c_str(), cv);
      pt.label = label;
      pt.result = simulate(dag, cat, &s.topo, s.sim);
      finish_point(pt, *report.baseline, s.mode);
      const double delta = pt.result.mean() - report.baseline->mean();
      pt.params = {{"kernel", k}, {"cv", cv}, {"delta_s", delta}};
      if (cv == cv_max) delta_at_max = delta;
      report.points.push_back(std::move(pt));
    }
    ranking.emplace_back(k, delta_at_max);
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  nlohmann::json jr = nlohmann::json::array();
  for (const auto& [k, d] : ranking) jr.push_back({{"kernel", k}, {"delta_s", d}});
  report.summary = {{"cv", cv_max}, {"ranking", jr}};
  return report;
}

SweepReport cross_dc_bandwidth_sweep(const Scenario& s, const CrossDcOptions& options) {
  const auto tier = s.topo.find_tier(options.tier);
  if (!tier || s.topo.tiers()[*tier].count < 2) {
    throw InputError("no cross-DC links: topology needs a '" + options.tier +
                     "' tier with at least 2 units");
  }
  if (options.bandwidths_gbps.empty()) throw InputError("cross-dc sweep needs bandwidths");

  ExecutionDag dag = expand_pipeline_schedule(s.model, s.par);
  s.par.check_world(s.topo);
  std::set<std::string> transfers;
  for (const auto& n : dag.nodes()) {
    if (n.group == GroupKind::kPipeline) transfers.insert(n.kernel);
  }
  DistributionCatalog catalog;
  for (const auto& [key, d] : s.catalog.entries()) {
    if (!transfers.contains(key.kernel)) catalog.set(key, d);
  }
  SweepReport report = new_report("cross-dc", "bandwidth_gbps", s);
  if (catalog.size() != s.catalog.size()) {
    report.notes.push_back("catalog entries for pipeline transfers replaced by the topology model");
  }

  const auto& current = s.topo.tiers()[*tier].link;
  for (double bw : options.bandwidths_gbps) {
    if (!(bw > 0.0)) throw InputError("bandwidth must be > 0");
    LinkSpec link = current.value_or(LinkSpec{});
    link.bandwidth_bps = bw * 1e9;
    if (options.rtt) link.rtt = *options.rtt;
    const Topology topo = s.topo.with_link(options.tier, link);
    validate_dag(dag, &catalog, &topo);
    SweepPoint pt;
    char label[64];
    std::snprintf(label, sizeof label, "%gGbps", bw);
    pt.label = label;
    pt.params = {{"bandwidth_gbps", bw}};
    pt.result = simulate(dag, catalog, &topo, s.sim);
    report.points.push_back(std::move(pt));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    if (report.points[i].result.mean() < report.points[best].result.mean()) best = i;
  }
  report.baseline_label = report.points[best].label;
  report.baseline = report.points[best].result;
  nlohmann::json medians = nlohmann::json::object();
  for (auto& pt : report.points) {
    finish_point(pt, *report.baseline, s.mode);
    medians[pt.label] = pt.slowdown_quantile(0.5);
  }
  report.summary = {{"median_slowdown", medians}};
  report.reference_points = {
      {"5Gbps", {{"probability", 0.5}, {"slowdown", 1.33}}},
      {"50Gbps_p80", {{"probability", 0.8}, {"slowdown", 1.03}}},
      {"50Gbps_p50", {{"probability", 0.5}, {"slowdown", 1.029}}}};
  return report;
}

std::vector<std::string> experiment_ids() {
  return {"slow-node", "tp-size", "kernel-sensitivity", "cross-dc"};
}

namespace {

nlohmann::json quantiles_json(const SimulationResult& r) {
  return {{"p5", r.quantile(0.05)},
          {"p50", r.quantile(0.50)},
          {"p95", r.quantile(0.95)},
          {"p99", r.quantile(0.99)}};
}

nlohmann::json summary_json(const SimulationResult& r) {
  return {{"mean", r.mean()}, {"sigma", r.sigma()}, {"quantiles", quantiles_json(r)}};
}

// Slowdown CDF sampled at every percent.
std::vector<std::pair<double, double>> cdf_rows(const SweepPoint& p) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k <= 100; ++k) {
    const double y = k / 100.0;
    out.emplace_back(p.slowdown_quantile(y), y);
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const SweepReport& report) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["axis"] = report.axis;
  j["slowdown_mode"] = slowdown_mode_name(report.mode);
  if (report.baseline) {
    j["baseline"] = summary_json(*report.baseline);
    j["baseline"]["label"] = report.baseline_label;
  } else {
    j["baseline"] = {{"label", report.baseline_label}};
  }
  j["points"] = nlohmann::json::array();
  for (const auto& p : report.points) {
    nlohmann::json jp = summary_json(p.result);
    jp["label"] = p.label;
    jp["params"] = p.params;
    if (p.baseline) jp["baseline"] = summary_json(*p.baseline);
    jp["mean_slowdown"] = p.mean_slowdown;
    jp["slowdown_quantiles"] = {{"p50", p.slowdown_quantile(0.5)},
                                {"p80", p.slowdown_quantile(0.8)},
                                {"p95", p.slowdown_quantile(0.95)}};
    nlohmann::json cdf = nlohmann::json::array();
    for (const auto& [x, y] : cdf_rows(p)) cdf.push_back({x, y});
    jp["cdf"] = cdf;
    j["points"].push_back(jp);
  }
  j["summary"] = report.summary;
  j["reference_points"] = report.reference_points;
  j["notes"] = report.notes;
  return j;
}

std::string report_summary_csv(const SweepReport& report) {
  std::string out =
      "label,mean,sigma,p50,p95,mean_slowdown,slowdown_p50,slowdown_p80,slowdown_p95\n";
  for (const auto& p : report.points) {
    out += p.label + "," + fmt(p.result.mean()) + "," + fmt(p.result.sigma()) + "," +
           fmt(p.result.quantile(0.5)) + "," + fmt(p.result.quantile(0.95)) + "," +
           fmt(p.mean_slowdown) + "," + fmt(p.slowdown_quantile(0.5)) + "," +
           fmt(p.slowdown_quantile(0.8)) + "," + fmt(p.slowdown_quantile(0.95)) + "\n";
  }
  return out;
}

std::string report_cdf_csv(const SweepReport& report) {
  std::string out = "label,x,y\n";
  for (const auto& p : report.points) {
    for (const auto& [x, y] : cdf_rows(p)) out += p.label + "," + fmt(x) + "," + fmt(y) + "\n";
  }
  return out;
}

}  // namespace stepsim
