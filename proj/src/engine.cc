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

#include "stepsim/engine.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <numeric>
#include <sstream>
#include <thread>

#include "stepsim/error.h"
#include "stepsim/kernels.h"
#include "stepsim/random.h"
#include "stepsim/stats.h"

namespace stepsim {

void SimConfig::validate() const {
  if (replicates < 1) throw InputError("replicates must be >= 1");
  if (block < 1) throw InputError("block must be >= 1");
  if (grid.points < 2) throw InputError("grid needs at least 2 points");
  if (rank_variation) {
    if (!(rank_variation->rate >= 0.0 && rank_variation->rate <= 1.0)) {
      throw InputError("variation rate must be in [0, 1]");
    }
    if (!(rank_variation->p > 0.0 && rank_variation->p < 1.0)) {
      throw InputError("variation percentile must be in (0, 1)");
    }
  }
}

SimulationResult::SimulationResult(std::vector<double> samples)
    : samples_(std::move(samples)), sorted_(samples_) {
  if (samples_.empty()) throw InputError("simulation produced no samples");
  std::sort(sorted_.begin(), sorted_.end());
  const Summary s = summarize(samples_);
  summary_.mean = s.mean;
  summary_.sigma = s.sigma;
}

double SimulationResult::quantile(double p) const { return sorted_quantile(sorted_, p); }

std::vector<std::pair<double, double>> SimulationResult::ecdf() const {
  return ecdf_steps(sorted_);
}

LatencyDistribution node_distribution(const TaskNode& node,
                                      const DistributionCatalog& catalog,
                                      const Topology* topo) {
  if (!node.comm) return catalog.resolve(node.kernel, node.rank);
  if (const auto* d = catalog.find(node.kernel, std::nullopt)) return *d;
  if (topo == nullptr) {
    throw InputError("unresolved kernel key: " + node.kernel +
                     " (no topology to synthesize the collective)");
  }
  return collective_distribution(node.comm->kind, node.comm->message_bytes,
                                 node.comm->group, *topo, catalog);
}

LatencyDistribution at_percentile(const LatencyDistribution& dist, double p) {
  if (dist.is_point_mass()) return dist;
  return dist.shifted(quantile(dist, p) - dist.mean());
}

namespace {

// The DAG flattened into topological order with resolved laws.
struct PlanNode {
  std::vector<int> preds;  // indices of earlier plan nodes
  LatencyDistribution law;
  std::optional<LatencyDistribution> slow;  // law on a slow rank
  int rank = -1;                            // rank the variation applies to
  bool data_parallel = false;
  bool pinned = false;     // finish time read outside its plan; never fused away
  std::size_t origin = 0;  // position in the unsplit plan
};
using Plan = std::vector<PlanNode>;

Plan build_plan(const ExecutionDag& dag, const DistributionCatalog& catalog,
                const Topology* topo, const std::optional<RankVariation>& variation) {
  const std::vector<int> order = dag.topological_order();
  std::vector<int> index(dag.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  }
  Plan plan(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TaskNode& t = dag.node(order[i]);
    PlanNode& n = plan[i];
    for (int p : dag.preds(t.id)) n.preds.push_back(index[static_cast<std::size_t>(p)]);
    std::sort(n.preds.begin(), n.preds.end());
    n.law = node_distribution(t, catalog, topo);
    n.data_parallel = t.comm && t.group == GroupKind::kData;
    n.origin = i;
    if (!t.comm) {
      n.rank = t.rank;
      if (variation) n.slow = at_percentile(n.law, variation->p);
    }
  }
  return plan;
}

std::vector<int> sinks_of(const Plan& plan) {
  std::vector<char> has_succ(plan.size(), 0);
  for (const auto& n : plan) {
    for (int p : n.preds) has_succ[static_cast<std::size_t>(p)] = 1;
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!has_succ[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

struct EvalParams {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::optional<RankVariation> variation;
  int world = 0;
  int threads = 1;
  std::size_t block = 64;
};

// Slow-rank flags of one replicate: the first `world` uniforms of its generator.
void draw_slow_flags(Rng& rng, const RankVariation& v, std::size_t world, char* out) {
  for (std::size_t k = 0; k < world; ++k) out[k] = uniform_open(rng) < v.rate;
}

// Replicates [r0, r0 + lanes). Row l of `out` (width 1 + capture.size())
// holds the makespan, then the finish time of every captured node.
void evaluate_block(const Plan& plan, const std::vector<int>& sinks,
                    const std::vector<int>& capture, const EvalParams& ep, std::size_t r0,
                    std::size_t lanes, double* out) {
  std::vector<Rng> rngs;
  rngs.reserve(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    rngs.push_back(make_replicate_rng(ep.seed, r0 + l, ep.stream));
  }
  const auto world = static_cast<std::size_t>(ep.world);
  std::vector<char> slow;
  if (ep.variation) {
    slow.resize(lanes * world);
    for (std::size_t l = 0; l < lanes; ++l) {
      draw_slow_flags(rngs[l], *ep.variation, world, slow.data() + l * world);
    }
  }

  std::vector<double> finish(plan.size() * lanes);
  std::vector<double> z(lanes);
  std::vector<double> draw(lanes);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const PlanNode& n = plan[i];
    const std::span<double> f(finish.data() + i * lanes, lanes);
    if (n.preds.empty()) {
      std::fill(f.begin(), f.end(), 0.0);
    } else {
      const double* first = finish.data() + static_cast<std::size_t>(n.preds[0]) * lanes;
      std::copy(first, first + lanes, f.begin());
      for (std::size_t k = 1; k < n.preds.size(); ++k) {
        kernels::max_inplace(
            f, {finish.data() + static_cast<std::size_t>(n.preds[k]) * lanes, lanes});
      }
    }
    const bool varies = ep.variation && n.slow && n.rank >= 0;
    const auto* g = std::get_if<Gaussian>(&n.law.variant());
    if (!varies && g != nullptr) {
      for (std::size_t l = 0; l < lanes; ++l) {
        z[l] = standard_normal_quantile(uniform_open(rngs[l]));
      }
      kernels::affine_clamp(draw, z, g->mu, g->sigma, true);
    } else {
      for (std::size_t l = 0; l < lanes; ++l) {
        const double u = uniform_open(rngs[l]);
        const bool is_slow = varies && slow[l * world + static_cast<std::size_t>(n.rank)];
        draw[l] = quantile(is_slow ? *n.slow : n.law, u);
      }
    }
    kernels::add(f, f, draw);
  }

  std::vector<double> makespan(lanes, 0.0);
  for (int s : sinks) {
    kernels::max_inplace(makespan,
                         {finish.data() + static_cast<std::size_t>(s) * lanes, lanes});
  }
  const std::size_t width = 1 + capture.size();
  for (std::size_t l = 0; l < lanes; ++l) {
    double* row = out + l * width;
    row[0] = makespan[l];
    for (std::size_t c = 0; c < capture.size(); ++c) {
      row[1 + c] = finish[static_cast<std::size_t>(capture[c]) * lanes + l];
    }
  }
}

// Row-major replicates x (1 + capture.size()).
std::vector<double> evaluate(const Plan& plan, const EvalParams& ep,
                             const std::vector<int>& capture = {}) {
  const std::vector<int> sinks = sinks_of(plan);
  const std::size_t width = 1 + capture.size();
  std::vector<double> out(ep.replicates * width);
  const std::size_t blocks = (ep.replicates + ep.block - 1) / ep.block;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    try {
      for (std::size_t b = next++; b < blocks; b = next++) {
        const std::size_t r0 = b * ep.block;
        evaluate_block(plan, sinks, capture, ep, r0, std::min(ep.block, ep.replicates - r0),
                       out.data() + r0 * width);
      }
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
      next = blocks;
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, ep.threads));
  if (workers <= 1 || blocks <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, blocks); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<int> succ_counts(const Plan& plan) {
  std::vector<int> out(plan.size(), 0);
  for (const auto& n : plan) {
    for (int p : n.preds) ++out[static_cast<std::size_t>(p)];
  }
  return out;
}

// Collapses every maximal chain u -> v (u's only successor is v, v's only
// predecessor is u, same variation rank, u not pinned) into one node. A fused
// node keeps the origin of its chain's last member.
Plan fuse_serial_chains(const Plan& plan) {
  const std::vector<int> succs = succ_counts(plan);
  std::vector<int> head(plan.size());
  for (std::size_t j = 0; j < plan.size(); ++j) {
    head[j] = static_cast<int>(j);
    const auto& n = plan[j];
    if (n.preds.size() != 1) continue;
    const auto i = static_cast<std::size_t>(n.preds[0]);
    if (succs[i] == 1 && plan[i].rank == n.rank && !plan[i].pinned) head[j] = head[i];
  }
  std::vector<int> new_index(plan.size(), -1);
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t j = 0; j < plan.size(); ++j) {
    if (head[j] == static_cast<int>(j)) {
      new_index[j] = static_cast<int>(members.size());
      members.push_back({j});
    } else {
      members[static_cast<std::size_t>(new_index[static_cast<std::size_t>(head[j])])]
          .push_back(j);
    }
  }
  // A chain's tail stands for the whole chain as a predecessor.
  std::vector<int> group_of(plan.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    for (std::size_t m : members[g]) group_of[m] = static_cast<int>(g);
  }
  Plan out(members.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    const PlanNode& h = plan[members[g].front()];
    const PlanNode& last = plan[members[g].back()];
    PlanNode& n = out[g];
    for (int p : h.preds) n.preds.push_back(group_of[static_cast<std::size_t>(p)]);
    std::sort(n.preds.begin(), n.preds.end());
    n.preds.erase(std::unique(n.preds.begin(), n.preds.end()), n.preds.end());
    n.rank = h.rank;
    n.data_parallel = h.data_parallel;
    n.pinned = last.pinned;
    n.origin = last.origin;
    if (members[g].size() == 1) {
      n.law = h.law;
      n.slow = h.slow;
      continue;
    }
    std::vector<LatencyDistribution> laws;
    std::vector<LatencyDistribution> slows;
    bool any_slow = false;
    for (std::size_t m : members[g]) {
      laws.push_back(plan[m].law);
      slows.push_back(plan[m].slow ? *plan[m].slow : plan[m].law);
      any_slow = any_slow || plan[m].slow.has_value();
    }
    n.law = compose_serial(laws);
    if (any_slow) n.slow = compose_serial(slows);
  }
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// The plan cut into replica components plus a shared tail: every
// data-parallel collective and everything downstream of one. Component
// nodes feeding the tail are pinned.
struct Split {
  std::vector<Plan> components;
  std::vector<int> component_of;  // per plan node, -1 for the tail
  std::vector<int> tail;          // plan indices, in plan order
};

Split split_replicas(const Plan& plan) {
  Split s;
  const std::size_t n = plan.size();
  std::vector<char> in_tail(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    bool t = plan[j].data_parallel;
    for (int p : plan[j].preds) t = t || in_tail[static_cast<std::size_t>(p)];
    in_tail[j] = t;
    if (t) s.tail.push_back(static_cast<int>(j));
  }
  UnionFind uf(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (in_tail[j]) continue;
    for (int p : plan[j].preds) uf.unite(p, static_cast<int>(j));
  }
  std::map<int, int> comp_id;
  s.component_of.assign(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    if (in_tail[j]) continue;
    const auto [it, _] =
        comp_id.try_emplace(uf.find(static_cast<int>(j)), static_cast<int>(comp_id.size()));
    s.component_of[j] = it->second;
  }
  s.components.resize(comp_id.size());
  std::vector<int> local(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    if (in_tail[j]) continue;
    Plan& c = s.components[static_cast<std::size_t>(s.component_of[j])];
    PlanNode node = plan[j];
    for (int& p : node.preds) p = local[static_cast<std::size_t>(p)];
    local[j] = static_cast<int>(c.size());
    c.push_back(std::move(node));
  }
  for (int t : s.tail) {
    for (int p : plan[static_cast<std::size_t>(t)].preds) {
      const auto pu = static_cast<std::size_t>(p);
      if (!in_tail[pu]) {
        s.components[static_cast<std::size_t>(s.component_of[pu])]
                    [static_cast<std::size_t>(local[pu])].pinned = true;
      }
    }
  }
  return s;
}

bool same_shape(const Plan& a, const Plan& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].preds != b[i].preds || !(a[i].law == b[i].law) || a[i].slow != b[i].slow ||
        a[i].pinned != b[i].pinned || (a[i].rank >= 0) != (b[i].rank >= 0)) {
      return false;
    }
  }
  return true;
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void check_budget(std::size_t replicates, std::size_t nodes, const SimConfig& config) {
  const double total = static_cast<double>(replicates) * static_cast<double>(nodes);
  if (total > config.max_samples) {
    std::ostringstream os;
    os << "simulation too large: " << replicates << " replicates x " << nodes
       << " nodes exceeds the budget of " << config.max_samples << " samples";
    if (!config.shortcuts) os << "; enable shortcuts to fuse serial chains and data-parallel replicas";
    throw InputError(os.str());
  }
}

// One simulated component standing in for several identical ones.
struct ReplicaClass {
  std::size_t representative = 0;
  std::vector<std::size_t> members;  // component indices
  std::vector<int> capture;          // pinned nodes of the fused plan
  std::vector<double> rows;          // evaluate() output
};

SimulationResult simulate_with_shortcuts(const Plan& plan, const EvalParams& ep,
                                         const SimConfig& config) {
  std::vector<std::string> notes;
  Split split = split_replicas(plan);
  if (split.components.empty() || split.tail.size() * 2 > plan.size()) {
    notes.push_back("replica split skipped: data-parallel work dominates the step");
    split = Split{{plan}, std::vector<int>(plan.size(), 0), {}};
  }
  std::vector<Plan> fused;
  for (const auto& c : split.components) fused.push_back(fuse_serial_chains(c));

  std::vector<ReplicaClass> classes;
  std::vector<std::size_t> class_of(fused.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    std::size_t k = 0;
    while (k < classes.size() && !same_shape(fused[classes[k].representative], fused[i])) ++k;
    if (k == classes.size()) classes.push_back({i, {}, {}, {}});
    classes[k].members.push_back(i);
    class_of[i] = k;
  }
  std::size_t simulated = split.tail.size();
  for (const auto& c : classes) simulated += fused[c.representative].size();
  check_budget(config.replicates, simulated, config);
  {
    std::ostringstream os;
    os << "shortcuts: " << plan.size() << " nodes -> " << fused.size()
       << " component(s), " << classes.size() << " distinct, " << simulated
       << " simulated nodes";
    if (!split.tail.empty()) os << " (" << split.tail.size() << " shared)";
    notes.push_back(os.str());
  }

  if (fused.size() == 1 && split.tail.empty()) {
    SimulationResult r(evaluate(fused[0], ep));
    r.notes = std::move(notes);
    return r;
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    auto& c = classes[k];
    const Plan& rep = fused[c.representative];
    for (std::size_t i = 0; i < rep.size(); ++i) {
      if (rep[i].pinned) c.capture.push_back(static_cast<int>(i));
    }
    EvalParams cp = ep;
    cp.stream = k + 1;
    c.rows = evaluate(rep, cp, c.capture);
  }

  // Independent components: the step is the maximum of their laws.
  if (split.tail.empty()) {
    std::vector<LatencyDistribution> laws;
    for (const auto& c : classes) {
      const LatencyDistribution law = LatencyDistribution::empirical(c.rows);
      for (std::size_t m = 0; m < c.members.size(); ++m) laws.push_back(law);
    }
    const LatencyDistribution combined = compose_parallel(laws, config.grid);
    std::vector<double> samples(config.replicates);
    for (std::size_t r = 0; r < samples.size(); ++r) {
      Rng rng = make_replicate_rng(config.seed, r, 0);
      samples[r] = sample(combined, rng);
    }
    SimulationResult result(std::move(samples));
    result.notes = std::move(notes);
    return result;
  }

  // Shared tail. Instance j > 0 of a class reads the representative's
  // replicates in a seeded random order, so instances are independent draws
  // of the same joint law.
  const std::size_t R = config.replicates;
  struct Instance {
    std::size_t cls = 0;
    std::vector<std::size_t> order;  // empty: identity
    std::map<int, int> rank_to_rep;  // instance rank -> representative rank
  };
  std::vector<Instance> inst(fused.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& c = classes[k];
    const Plan& rep = fused[c.representative];
    for (std::size_t j = 0; j < c.members.size(); ++j) {
      Instance& in = inst[c.members[j]];
      in.cls = k;
      const Plan& mine = fused[c.members[j]];
      for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i].rank >= 0) in.rank_to_rep.try_emplace(mine[i].rank, rep[i].rank);
      }
      if (j == 0) continue;
      in.order.resize(R);
      std::iota(in.order.begin(), in.order.end(), std::size_t{0});
      Rng shuffle = make_replicate_rng(config.seed, j, 0x5851f42d4c957f2dULL + k);
      std::shuffle(in.order.begin(), in.order.end(), shuffle);
    }
  }
  // Where each tail predecessor's finish time lives.
  struct Source {
    int instance = -1;  // -1: another tail node
    int column = 0;     // capture column, or tail position
  };
  std::vector<int> tail_pos(plan.size(), -1);
  for (std::size_t t = 0; t < split.tail.size(); ++t) {
    tail_pos[static_cast<std::size_t>(split.tail[t])] = static_cast<int>(t);
  }
  std::vector<std::vector<Source>> sources(split.tail.size());
  for (std::size_t t = 0; t < split.tail.size(); ++t) {
    for (int p : plan[static_cast<std::size_t>(split.tail[t])].preds) {
      const auto pu = static_cast<std::size_t>(p);
      if (tail_pos[pu] >= 0) {
        sources[t].push_back({-1, tail_pos[pu]});
        continue;
      }
      const int i = split.component_of[pu];
      const Plan& mine = fused[static_cast<std::size_t>(i)];
      const auto& capture = classes[inst[static_cast<std::size_t>(i)].cls].capture;
      for (std::size_t c = 0; c < capture.size(); ++c) {
        if (mine[static_cast<std::size_t>(capture[c])].origin == plan[pu].origin) {
          sources[t].push_back({i, static_cast<int>(c) + 1});
          break;
        }
      }
    }
  }
  std::vector<int> owner(static_cast<std::size_t>(ep.world), -1);
  for (std::size_t i = 0; i < fused.size(); ++i) {
    for (const auto& [r, _] : inst[i].rank_to_rep) owner[static_cast<std::size_t>(r)] = static_cast<int>(i);
  }

  const auto world = static_cast<std::size_t>(ep.world);
  std::vector<double> samples(R);
  std::vector<double> finish(split.tail.size());
  std::vector<std::size_t> row(fused.size());
  std::vector<char> own_flags(world);
  std::vector<std::vector<char>> flags(fused.size(), std::vector<char>(world));
  for (std::size_t r = 0; r < R; ++r) {
    Rng rng = make_replicate_rng(config.seed, r, 0);
    if (ep.variation) draw_slow_flags(rng, *ep.variation, world, own_flags.data());
    double makespan = 0.0;
    for (std::size_t i = 0; i < fused.size(); ++i) {
      row[i] = inst[i].order.empty() ? r : inst[i].order[r];
      const auto& c = classes[inst[i].cls];
      makespan = std::max(makespan, c.rows[row[i] * (1 + c.capture.size())]);
      if (ep.variation) {
        Rng fr = make_replicate_rng(config.seed, row[i], inst[i].cls + 1);
        draw_slow_flags(fr, *ep.variation, world, flags[i].data());
      }
    }
    for (std::size_t t = 0; t < split.tail.size(); ++t) {
      double start = 0.0;
      for (const Source& s : sources[t]) {
        double f;
        if (s.instance < 0) {
          f = finish[static_cast<std::size_t>(s.column)];
        } else {
          const auto iu = static_cast<std::size_t>(s.instance);
          const auto& c = classes[inst[iu].cls];
          f = c.rows[row[iu] * (1 + c.capture.size()) + static_cast<std::size_t>(s.column)];
        }
        start = std::max(start, f);
      }
      const PlanNode& n = plan[static_cast<std::size_t>(split.tail[t])];
      bool is_slow = false;
      if (ep.variation && n.slow && n.rank >= 0) {
        const int o = owner[static_cast<std::size_t>(n.rank)];
        is_slow = o < 0 ? own_flags[static_cast<std::size_t>(n.rank)] != 0
                        : flags[static_cast<std::size_t>(o)][static_cast<std::size_t>(
                              inst[static_cast<std::size_t>(o)].rank_to_rep.at(n.rank))] != 0;
      }
      finish[t] = start + quantile(is_slow ? *n.slow : n.law, uniform_open(rng));
      makespan = std::max(makespan, finish[t]);
    }
    samples[r] = makespan;
  }
  SimulationResult result(std::move(samples));
  result.notes = std::move(notes);
  return result;
}

}  // namespace

SimulationResult simulate(const ExecutionDag& dag, const DistributionCatalog& catalog,
                          const Topology* topo, const SimConfig& config) {
  config.validate();
  const Plan plan = build_plan(dag, catalog, topo, config.rank_variation);
  int world = 0;
  for (const auto& n : plan) world = std::max(world, n.rank + 1);
  if (topo != nullptr) world = std::max(world, topo->world_size());

  EvalParams ep;
  ep.replicates = config.replicates;
  ep.seed = config.seed;
  ep.variation = config.rank_variation;
  ep.world = world;
  ep.threads = resolve_threads(config.threads);
  ep.block = config.block;

  if (config.shortcuts) return simulate_with_shortcuts(plan, ep, config);
  check_budget(config.replicates, plan.size(), config);
  return SimulationResult(evaluate(plan, ep));
}
double critical_path_deterministic(const ExecutionDag& dag,
                                   const DistributionCatalog& catalog,
                                   const Topology* topo) {
  const Plan plan = build_plan(dag, catalog, topo, std::nullopt);
  std::vector<double> finish(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const PlanNode& n = plan[i];
    double start = 0.0;
    if (!n.preds.empty()) {
      start = finish[static_cast<std::size_t>(n.preds[0])];
      for (int p : n.preds) {
        const double f = finish[static_cast<std::size_t>(p)];
        start = f > start ? f : start;
      }
    }
    // Degenerate laws take the value simulate would draw.
    const double v = n.law.is_degenerate() ? quantile(n.law, 0.5) : n.law.mean();
    finish[i] = start + v;
  }
  double makespan = 0.0;
  for (int s : sinks_of(plan)) {
    const double f = finish[static_cast<std::size_t>(s)];
    makespan = f > makespan ? f : makespan;
  }
  return makespan;
}

std::vector<int> selected_ranks(const PerGpuVariation& v, int world_size) {
  if (!(v.rate >= 0.0 && v.rate <= 1.0)) throw InputError("variation rate must be in [0, 1]");
  Rng rng = make_replicate_rng(v.seed, 0, 0x9e3779b97f4a7c15ULL);
  std::vector<int> out;
  for (int r = 0; r < world_size; ++r) {
    if (uniform_open(rng) < v.rate) out.push_back(r);
  }
  return out;
}

namespace {

DistributionCatalog ranks_at_percentile(const DistributionCatalog& catalog,
                                        const std::vector<int>& ranks, double p,
                                        int world_size) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("percentile must be in (0, 1)");
  DistributionCatalog out = catalog;
  for (int r : ranks) {
    if (r < 0 || r >= world_size) throw InputError("unknown rank: " + std::to_string(r));
  }
  for (const auto& kernel : catalog.kernels()) {
    for (int r : ranks) {
      if (const auto* d = catalog.find(kernel, r)) out.set(KernelKey{kernel, r}, at_percentile(*d, p));
    }
  }
  return out;
}

LatencyDistribution rescale(const LatencyDistribution& d, double cv) {
  const double m = d.mean();
  const double target = cv * std::abs(m);
  if (const auto* e = std::get_if<Empirical>(&d.variant()); e && d.stddev() > 0.0) {
    const double k = target / d.stddev();
    std::vector<double> s;
    s.reserve(e->samples.size());
    for (double x : e->samples) s.push_back(std::max(0.0, m + (x - m) * k));
    return LatencyDistribution::empirical(std::move(s));
  }
  return LatencyDistribution::gaussian(m, target);
}

}  // namespace

DistributionCatalog apply_perturbation(const DistributionCatalog& catalog,
                                       const Perturbation& perturbation,
                                       const Topology& topo) {
  return std::visit(
      [&](const auto& v) -> DistributionCatalog {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NodeAtPercentile>) {
          if (v.node < 0 || v.node >= topo.unit_count(0)) {
            throw InputError("unknown node: " + std::to_string(v.node));
          }
          return ranks_at_percentile(catalog, topo.ranks_of_unit(0, v.node), v.p,
                                     topo.world_size());
        } else if constexpr (std::is_same_v<T, RanksAtPercentile>) {
          return ranks_at_percentile(catalog, v.ranks, v.p, topo.world_size());
        } else if constexpr (std::is_same_v<T, PerGpuVariation>) {
          return ranks_at_percentile(catalog, selected_ranks(v, topo.world_size()), v.p,
                                     topo.world_size());
        } else {
          if (!(v.cv >= 0.0)) throw InputError("cv must be >= 0");
          if (!catalog.contains_kernel(v.kernel)) {
            throw InputError("unknown kernel: " + v.kernel);
          }
          DistributionCatalog out = catalog;
          for (const auto& [key, dist] : catalog.entries()) {
            if (key.kernel == v.kernel) out.set(key, rescale(dist, v.cv));
          }
          return out;
        }
      },
      perturbation);
}

ValidationMetrics validate_against_reference(std::span<const double> result,
                                             std::span<const double> reference) {
  if (result.empty() || reference.empty()) throw InputError("validation needs non-empty samples");
  const double ref = summarize(reference).mean;
  if (ref == 0.0) throw InputError("reference mean is zero");
  ValidationMetrics m;
  m.mean_error_pct = std::abs(summarize(result).mean - ref) / ref * 100.0;
  m.ks_distance = ks_distance(result, reference);
  return m;
}

nlohmann::json result_to_json(const SimulationResult& result) {
  nlohmann::json j;
  j["samples"] = result.samples();
  j["mean"] = result.mean();
  j["sigma"] = result.sigma();
  j["quantiles"] = {{"p5", result.quantile(0.05)},
                    {"p50", result.quantile(0.50)},
                    {"p95", result.quantile(0.95)},
                    {"p99", result.quantile(0.99)}};
  return j;
}

std::string result_ecdf_csv(const SimulationResult& result) {
  std::string out = "t,F\n";
  char buf[64];
  for (const auto& [t, f] : result.ecdf()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, f);
    out += buf;
  }
  return out;
}

std::vector<double> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open samples: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<double> out;
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_discarded() && (j.is_object() || j.is_array())) {
    try {
      out = (j.is_object() ? j.at("samples") : j).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("bad samples in " + path.string() + ": " + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      const std::string field = line.substr(0, line.find(','));
      if (field.find_first_not_of(" \t\r") == std::string::npos) continue;
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str()) {
        if (lineno == 1) continue;  // header
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": not a number");
      }
      out.push_back(v);
    }
  }
  if (out.empty()) throw InputError("no samples in " + path.string());
  return out;
}

}  // namespace stepsim
