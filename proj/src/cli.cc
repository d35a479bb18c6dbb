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

#include "stepsim/cli.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "stepsim/error.h"
#include "stepsim/kernels.h"

namespace stepsim::cli {

namespace {

namespace fs = std::filesystem;

nlohmann::json read_json(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw InputError(std::string("cannot open ") + what + ": " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return fs::absolute(path.is_absolute() ? path : base / path).lexically_normal();
}

fs::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "stepsim_out";
}

void require_exists(const fs::path& p, const char* what) {
  if (!p.empty() && !fs::exists(p)) {
    throw InputError(std::string(what) + " not found: " + p.string());
  }
}

std::string fmt(double v, int precision = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  static const std::set<std::string> kKeys = {"model",       "topology", "catalog",
                                              "trace",       "fit",      "parallelism",
                                              "sim",         "experiment", "output"};
  for (const auto& [k, _] : j.items()) {
    if (!kKeys.contains(k)) throw InputError("run config: unknown key '" + k + "'");
  }
  try {
    RunConfig c;
    const fs::path base = base_dir.empty() ? fs::current_path() : base_dir;
    for (auto [key, field] : {std::pair{"model", &c.model}, std::pair{"topology", &c.topology},
                              std::pair{"catalog", &c.catalog}, std::pair{"trace", &c.trace}}) {
      if (j.contains(key)) *field = resolve_path(base, j[key].get<std::string>());
    }
    if (j.contains("fit")) {
      const auto& f = j["fit"];
      c.fit.policy = parse_fit_policy(f.value("policy", std::string("auto")));
      const auto scope = f.value("scope", std::string("pooled"));
      if (scope != "pooled" && scope != "per-rank") {
        throw InputError("fit.scope must be pooled or per-rank");
      }
      c.fit.scope = scope == "pooled" ? CatalogScope::kPooled : CatalogScope::kPerRank;
      c.fit.tail_ratio = f.value("tail_ratio", c.fit.tail_ratio);
      c.fit.skew = f.value("skew", c.fit.skew);
    }
    if (j.contains("parallelism")) c.parallelism = j["parallelism"];
    c.sim.seed = kDefaultSeed;
    if (j.contains("sim")) {
      const auto& s = j["sim"];
      c.sim.replicates = s.value("replicates", c.sim.replicates);
      c.sim.seed = s.value("seed", c.sim.seed);
      c.sim.shortcuts = s.value("shortcuts", c.sim.shortcuts);
      c.sim.threads = s.value("threads", c.sim.threads);
      c.sim.max_samples = s.value("max_samples", c.sim.max_samples);
    }
    if (j.contains("experiment")) c.experiment = j["experiment"];
    if (j.contains("output")) {
      const auto& o = j["output"];
      if (o.contains("dir")) c.out_dir = resolve_path(base, o["dir"].get<std::string>());
      c.format = o.value("format", c.format);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("run config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  const auto j = read_json(path, "run config");
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json j;
  auto put = [&](const char* key, const fs::path& p) {
    if (!p.empty()) j[key] = p.string();
  };
  put("model", c.model);
  put("topology", c.topology);
  put("catalog", c.catalog);
  put("trace", c.trace);
  const char* policy = c.fit.policy == FitPolicy::kGaussian    ? "gaussian"
                       : c.fit.policy == FitPolicy::kEmpirical ? "empirical"
                                                               : "auto";
  j["fit"] = {{"policy", policy},
              {"scope", c.fit.scope == CatalogScope::kPooled ? "pooled" : "per-rank"},
              {"tail_ratio", c.fit.tail_ratio},
              {"skew", c.fit.skew}};
  j["parallelism"] = c.parallelism;
  j["sim"] = {{"replicates", c.sim.replicates},
              {"seed", c.sim.seed},
              {"shortcuts", c.sim.shortcuts},
              {"threads", c.sim.threads},
              {"max_samples", c.sim.max_samples}};
  j["experiment"] = c.experiment;
  j["output"] = {{"dir", c.out_dir.string()}, {"format", c.format}};
  return j;
}

Scenario load_scenario(const RunConfig& c) {
  if (c.model.empty()) throw InputError("run config has no model");
  if (c.topology.empty()) throw InputError("run config has no topology");
  if (c.catalog.empty() && c.trace.empty()) {
    throw InputError("run config needs a catalog or a trace");
  }
  const auto jm = read_json(c.model, "model");
  const bool wrapped = jm.contains("layers") == false && jm.contains("model");
  ModelSpec model = model_from_json(wrapped ? jm.at("model") : jm);
  nlohmann::json jp = wrapped && jm.contains("parallelism") ? jm["parallelism"]
                                                           : nlohmann::json::object();
  jp.merge_patch(c.parallelism);
  ParallelismConfig par = parallelism_from_json(jp, c.model.parent_path());

  DistributionCatalog catalog;
  if (!c.catalog.empty()) {
    catalog = load_catalog(c.catalog);
  } else {
    catalog = build_catalog(aggregate(parse_trace(c.trace).records), c.fit);
  }
  Scenario s{std::move(model), std::move(par), load_topology(c.topology), std::move(catalog),
             c.sim, SlowdownMode::kQuantileRatio};
  if (c.experiment.contains("slowdown")) {
    s.mode = parse_slowdown_mode(c.experiment["slowdown"].get<std::string>());
  }
  return s;
}

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool shortcuts = false;
  bool no_shortcuts = false;
  std::optional<std::string> model;
  std::optional<std::string> topology;
  std::optional<std::string> catalog;
  std::optional<std::string> trace;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--replicates,-R", c.replicates, "Monte Carlo replicates");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--out", c.out, "Output directory (default: $STEPSIM_OUT_DIR)");
  app->add_option("--threads", c.threads, "Worker threads (0: all cores)");
  app->add_flag("--shortcuts", c.shortcuts, "Fuse serial chains and data-parallel replicas");
  app->add_flag("--no-shortcuts", c.no_shortcuts, "Disable shortcuts");
}

void add_inputs(CLI::App* app, Common& c) {
  app->add_option("--model", c.model, "Model file (overrides the config)");
  app->add_option("--topology", c.topology, "Topology file (overrides the config)");
  app->add_option("--catalog", c.catalog, "Catalog file (overrides the config)");
  app->add_option("--trace", c.trace, "Trace to fit a catalog from (overrides the config)");
}

// flags > file > defaults
RunConfig resolve(const std::string& config_path, const Common& c) {
  RunConfig rc;
  rc.sim.seed = kDefaultSeed;
  if (!config_path.empty()) rc = load_run_config(config_path);
  if (c.seed) rc.sim.seed = *c.seed;
  if (c.replicates) rc.sim.replicates = *c.replicates;
  if (c.format) rc.format = *c.format;
  if (c.threads) rc.sim.threads = *c.threads;
  auto override_path = [](const std::optional<std::string>& flag, fs::path& field) {
    if (flag) field = fs::absolute(*flag).lexically_normal();
  };
  override_path(c.model, rc.model);
  override_path(c.topology, rc.topology);
  if (c.catalog) rc.trace.clear();
  if (c.trace) rc.catalog.clear();
  override_path(c.catalog, rc.catalog);
  override_path(c.trace, rc.trace);
  require_exists(rc.model, "model");
  require_exists(rc.topology, "topology");
  require_exists(rc.catalog, "catalog");
  require_exists(rc.trace, "trace");
  if (c.shortcuts) rc.sim.shortcuts = true;
  if (c.no_shortcuts) rc.sim.shortcuts = false;
  if (c.out) {
    rc.out_dir = fs::absolute(*c.out).lexically_normal();
  } else if (rc.out_dir.empty()) {
    rc.out_dir = fs::absolute(default_out_dir()).lexically_normal();
  }
  if (rc.format != "json" && rc.format != "csv") {
    throw InputError("format must be json or csv");
  }
  rc.sim.validate();
  return rc;
}

void echo_config(const RunConfig& rc, std::ostream& out) {
  const auto j = run_config_to_json(rc);
  out << "resolved config (seed " << rc.sim.seed << "):\n" << j.dump(2) << "\n";
  write_text(rc.out_dir / "resolved_config.json", j.dump(2) + "\n");
}

int cmd_synth(const std::string& spec_path, const Common& c, const std::optional<int>& ranks,
              const std::optional<int>& iterations, const std::optional<double>& scv,
              const std::optional<double>& tcv, const std::string& output, std::ostream& out) {
  SynthSpec spec = synth_spec_from_json(read_json(spec_path, "synth spec"));
  if (c.seed) spec.seed = *c.seed;
  if (ranks) spec.ranks = *ranks;
  if (iterations) spec.iterations = *iterations;
  if (scv) spec.spatial_cv = *scv;
  if (tcv) spec.temporal_cv = *tcv;
  const fs::path dir = c.out ? fs::path(*c.out) : default_out_dir();
  const fs::path path = output.empty() ? dir / "trace.jsonl" : fs::path(output);
  const auto records = synth_trace(spec);
  std::ostringstream os;
  write_trace(records, os);
  write_text(path, os.str());
  out << "resolved synth spec (seed " << spec.seed << "):\n"
      << synth_spec_to_json(spec).dump(2) << "\n";
  out << "wrote " << records.size() << " records to " << path.string() << "\n";
  return kExitOk;
}

int cmd_ingest(const std::string& trace, const std::string& policy, bool per_rank,
               bool lenient, const Common& c, const std::string& output, std::ostream& out,
               std::ostream& err) {
  const ParsedTrace parsed =
      parse_trace(trace, lenient ? ParseMode::kLenient : ParseMode::kStrict);
  for (const auto& d : parsed.diagnostics) {
    err << "warning: " << trace << ":" << d.line << ": " << d.message << "\n";
  }
  const auto stats = aggregate(parsed.records);
  CatalogOptions opts;
  opts.policy = parse_fit_policy(policy);
  opts.scope = per_rank ? CatalogScope::kPerRank : CatalogScope::kPooled;
  const DistributionCatalog catalog = build_catalog(stats, opts);

  const fs::path dir = c.out ? fs::path(*c.out) : default_out_dir();
  const fs::path path = output.empty() ? dir / "catalog.json" : fs::path(output);
  write_text(path, catalog_to_json(catalog).dump(2) + "\n");

  const bool csv = c.format && *c.format == "csv";
  if (csv) {
    out << "kernel,ranks,samples,spatial_cv,temporal_cv,spread,law\n";
  } else {
    out << std::left << std::setw(24) << "kernel" << std::setw(7) << "ranks" << std::setw(9)
        << "samples" << std::setw(12) << "spatial_cv" << std::setw(13) << "temporal_cv"
        << std::setw(10) << "spread"
        << "law\n";
  }
  for (const auto& [name, k] : stats) {
    std::size_t n = 0;
    for (const auto& [_, s] : k.temporal) n += s.size();
    const auto* law = catalog.find(name, std::nullopt);
    const std::string kind = law->is_empirical() ? "empirical" : "gaussian";
    if (csv) {
      out << name << "," << k.temporal.size() << "," << n << "," << fmt(k.spatial_cv) << ","
          << fmt(k.temporal_cv) << "," << fmt(k.spread) << "," << kind << "\n";
    } else {
      out << std::left << std::setw(24) << name << std::setw(7) << k.temporal.size()
          << std::setw(9) << n << std::setw(12) << fmt(k.spatial_cv, 4) << std::setw(13)
          << fmt(k.temporal_cv, 4) << std::setw(10) << fmt(k.spread, 4) << kind << "\n";
    }
    for (const auto& w : k.warnings) err << "warning: " << w << "\n";
  }
  out << "wrote " << catalog.size() << " catalog entries to " << path.string() << "\n";
  return kExitOk;
}

void print_summary(const SimulationResult& r, std::ostream& out) {
  out << "replicates " << r.samples().size() << "  mean " << fmt(r.mean(), 9) << " s  sigma "
      << fmt(r.sigma(), 6) << " s\n"
      << "p5 " << fmt(r.quantile(0.05), 9) << "  p50 " << fmt(r.quantile(0.5), 9) << "  p95 "
      << fmt(r.quantile(0.95), 9) << "  p99 " << fmt(r.quantile(0.99), 9) << "\n";
}

int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Scenario s = load_scenario(rc);
  s.par.check_world(s.topo);
  const ExecutionDag dag = expand_pipeline_schedule(s.model, s.par);
  for (const auto& w : dag.warnings()) err << "warning: " << w << "\n";
  validate_dag(dag, &s.catalog, &s.topo);
  echo_config(rc, out);
  const SimulationResult r = simulate(dag, s.catalog, &s.topo, s.sim);
  for (const auto& n : r.notes) out << n << "\n";
  out << "nodes " << dag.size() << "  isa " << kernels::isa_name(kernels::active_isa()) << "\n";
  print_summary(r, out);
  if (rc.format == "json") {
    write_text(rc.out_dir / "result.json", result_to_json(r).dump(2) + "\n");
    out << "wrote " << (rc.out_dir / "result.json").string() << "\n";
  } else {
    write_text(rc.out_dir / "result_ecdf.csv", result_ecdf_csv(r));
    out << "wrote " << (rc.out_dir / "result_ecdf.csv").string() << "\n";
  }
  return kExitOk;
}

struct SweepFlags {
  std::vector<int> sizes;
  std::vector<double> bandwidths;
  std::vector<std::string> kernels;
  std::vector<double> cvs;
  std::optional<double> rate;
  std::optional<double> p;
  std::optional<std::string> slowdown;
  bool fixed_draw = false;
};

int cmd_sweep(std::string id, const RunConfig& rc, const SweepFlags& f, std::ostream& out) {
  if (id.empty()) id = rc.experiment.value("id", std::string{});
  const auto ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    std::string list;
    for (const auto& i : ids) list += (list.empty() ? "" : ", ") + i;
    throw InputError("unknown experiment '" + id + "'; valid ids: " + list);
  }
  Scenario s = load_scenario(rc);
  if (f.slowdown) s.mode = parse_slowdown_mode(*f.slowdown);
  const auto& ex = rc.experiment;
  const double p = f.p.value_or(ex.value("p", 0.95));
  RunConfig echoed = rc;
  echoed.experiment["id"] = id;

  SweepReport report;
  if (id == "slow-node") {
    echoed.experiment["p"] = p;
    echo_config(echoed, out);
    report = slow_node_placement_sweep(s, p);
  } else if (id == "tp-size") {
    TpSizeOptions o;
    if (ex.contains("sizes")) o.sizes = ex["sizes"].get<std::vector<int>>();
    if (!f.sizes.empty()) o.sizes = f.sizes;
    o.rate = f.rate.value_or(ex.value("rate", o.rate));
    o.p = p;
    o.redraw_per_replicate = !f.fixed_draw && ex.value("redraw_per_replicate", true);
    echoed.experiment.update({{"sizes", o.sizes},
                              {"rate", o.rate},
                              {"p", o.p},
                              {"redraw_per_replicate", o.redraw_per_replicate}});
    echo_config(echoed, out);
    report = tp_group_size_sweep(s, o);
  } else if (id == "kernel-sensitivity") {
    SensitivityOptions o;
    if (ex.contains("kernels")) o.kernels = ex["kernels"].get<std::vector<std::string>>();
    if (ex.contains("cvs")) o.cvs = ex["cvs"].get<std::vector<double>>();
    if (!f.kernels.empty()) o.kernels = f.kernels;
    if (!f.cvs.empty()) o.cvs = f.cvs;
    echoed.experiment.update({{"kernels", o.kernels}, {"cvs", o.cvs}});
    echo_config(echoed, out);
    report = kernel_sensitivity_sweep(s, o);
  } else {
    CrossDcOptions o;
    if (ex.contains("bandwidths_gbps")) {
      o.bandwidths_gbps = ex["bandwidths_gbps"].get<std::vector<double>>();
    }
    if (!f.bandwidths.empty()) o.bandwidths_gbps = f.bandwidths;
    if (ex.contains("rtt_s")) {
      o.rtt = LatencyDistribution::point_mass(ex["rtt_s"].get<double>());
    }
    echoed.experiment["bandwidths_gbps"] = o.bandwidths_gbps;
    echo_config(echoed, out);
    report = cross_dc_bandwidth_sweep(s, o);
  }

  for (const auto& n : report.notes) out << n << "\n";
  int width = 8;
  for (const auto& pt : report.points) width = std::max(width, static_cast<int>(pt.label.size()) + 2);
  out << std::left << std::setw(width) << "point" << std::setw(14) << "mean_s" << std::setw(12)
      << "slow_p50" << std::setw(12) << "slow_p80"
      << "slow_mean\n";
  for (const auto& pt : report.points) {
    out << std::left << std::setw(width) << pt.label << std::setw(14) << fmt(pt.result.mean(), 8)
        << std::setw(12) << fmt(pt.slowdown_quantile(0.5), 6) << std::setw(12)
        << fmt(pt.slowdown_quantile(0.8), 6) << fmt(pt.mean_slowdown, 6) << "\n";
  }
  out << "summary " << report.summary.dump() << "\n";
  const std::string stem = "sweep_" + id;
  if (rc.format == "json") {
    write_text(rc.out_dir / (stem + ".json"), report_to_json(report).dump(2) + "\n");
    out << "wrote " << (rc.out_dir / (stem + ".json")).string() << "\n";
  } else {
    write_text(rc.out_dir / (stem + "_summary.csv"), report_summary_csv(report));
    write_text(rc.out_dir / (stem + "_cdf.csv"), report_cdf_csv(report));
    out << "wrote " << (rc.out_dir / (stem + "_summary.csv")).string() << " and "
        << (rc.out_dir / (stem + "_cdf.csv")).string() << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& result, const std::string& reference,
                 const std::optional<double>& max_err, const std::optional<double>& max_ks,
                 const Common& c, std::ostream& out) {
  const auto a = load_samples(result);
  const auto b = load_samples(reference);
  const ValidationMetrics m = validate_against_reference(a, b);
  const bool ok = (!max_err || m.mean_error_pct <= *max_err) && (!max_ks || m.ks_distance <= *max_ks);
  if (c.format && *c.format == "csv") {
    out << "mean_error_pct,ks_distance,pass\n"
        << fmt(m.mean_error_pct, 17) << "," << fmt(m.ks_distance, 17) << ","
        << (ok ? "true" : "false") << "\n";
  } else {
    nlohmann::json j = {{"mean_error_pct", m.mean_error_pct},
                        {"ks_distance", m.ks_distance},
                        {"pass", ok}};
    if (max_err) j["max_mean_error_pct"] = *max_err;
    if (max_ks) j["max_ks_distance"] = *max_ks;
    out << j.dump(2) << "\n";
  }
  return ok ? kExitOk : kExitThreshold;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stepsim: Monte Carlo step-time simulator for distributed training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stepsim 1.0.0");

  Common common;
  std::string config;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic kernel-timing trace");
  std::string synth_spec;
  std::string synth_output;
  std::optional<int> ranks;
  std::optional<int> iterations;
  std::optional<double> scv;
  std::optional<double> tcv;
  synth->add_option("--spec", synth_spec, "Synthetic trace spec (JSON)")->required();
  synth->add_option("--ranks", ranks, "Ranks");
  synth->add_option("--iterations", iterations, "Iterations per rank");
  synth->add_option("--spatial-cv", scv, "Spatial coefficient of variation");
  synth->add_option("--temporal-cv", tcv, "Temporal coefficient of variation");
  synth->add_option("-o,--output", synth_output, "Trace file (default: <out>/trace.jsonl)");
  add_common(synth, common);

  auto* ingest = app.add_subcommand("ingest", "Fit a distribution catalog from a trace");
  std::string trace;
  std::string policy = "auto";
  std::string ingest_output;
  bool per_rank = false;
  bool lenient = false;
  ingest->add_option("--trace", trace, "Trace file (.jsonl or .csv)")->required();
  ingest->add_option("--policy", policy, "gaussian, empirical or auto")
      ->check(CLI::IsMember({"gaussian", "empirical", "auto"}));
  ingest->add_flag("--per-rank", per_rank, "Emit (kernel, rank) entries too");
  ingest->add_flag("--lenient", lenient, "Skip malformed lines instead of failing");
  ingest->add_option("-o,--output", ingest_output, "Catalog file (default: <out>/catalog.json)");
  add_common(ingest, common);

  auto* sim = app.add_subcommand("simulate", "Simulate step-time distribution");
  sim->add_option("--config", config, "Run config (JSON)");
  add_common(sim, common);
  add_inputs(sim, common);

  auto* sweep = app.add_subcommand("sweep", "Run a what-if sweep");
  std::string experiment;
  SweepFlags sf;
  sweep->add_option("experiment", experiment,
                    "slow-node, tp-size, kernel-sensitivity or cross-dc");
  sweep->add_option("--config", config, "Run config (JSON)");
  add_inputs(sweep, common);
  sweep->add_option("--sizes", sf.sizes, "TP sizes")->delimiter(',');
  sweep->add_option("--bw", sf.bandwidths, "Cross-DC bandwidths in Gbps")->delimiter(',');
  sweep->add_option("--kernels", sf.kernels, "Kernels to perturb")->delimiter(',');
  sweep->add_option("--cvs", sf.cvs, "Coefficients of variation")->delimiter(',');
  sweep->add_option("--rate", sf.rate, "Per-GPU variation rate");
  sweep->add_option("--p", sf.p, "Percentile for slow kernels");
  sweep->add_option("--slowdown", sf.slowdown, "qq or mean");
  sweep->add_flag("--fixed-draw", sf.fixed_draw, "One slow-rank draw per point");
  add_common(sweep, common);

  auto* validate = app.add_subcommand("validate", "Compare simulated and measured step times");
  std::string result;
  std::string reference;
  std::optional<double> max_err;
  std::optional<double> max_ks;
  validate->add_option("--result", result, "Simulated samples")->required();
  validate->add_option("--reference", reference, "Measured samples")->required();
  validate->add_option("--max-mean-error", max_err, "Threshold on mean error in percent");
  validate->add_option("--max-ks", max_ks, "Threshold on KS distance");
  add_common(validate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*synth) {
      return cmd_synth(synth_spec, common, ranks, iterations, scv, tcv, synth_output, out);
    }
    if (*ingest) {
      return cmd_ingest(trace, policy, per_rank, lenient, common, ingest_output, out, err);
    }
    if (*sim) return cmd_simulate(resolve(config, common), out, err);
    if (*sweep) return cmd_sweep(experiment, resolve(config, common), sf, out);
    if (*validate) return cmd_validate(result, reference, max_err, max_ks, common, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace stepsim::cli
