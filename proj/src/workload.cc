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

#include "stepsim/workload.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "stepsim/error.h"

namespace stepsim {

const char* pass_name(Pass pass) {
  return pass == Pass::kForward ? "fwd" : "bwd";
}

const char* group_name(GroupKind group) {
  switch (group) {
    case GroupKind::kNone:
      return "none";
    case GroupKind::kTensor:
      return "tp";
    case GroupKind::kContext:
      return "cp";
    case GroupKind::kData:
      return "dp";
    case GroupKind::kPipeline:
      return "pp";
  }
  return "?";
}

const char* edge_name(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kSerial:
      return "serial";
    case EdgeKind::kSyncJoin:
      return "sync_join";
    case EdgeKind::kPipeline:
      return "pipeline";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (layers.empty()) throw InputError("model has no layers");
  for (const auto& layer : layers) {
    for (const auto& op : layer.ops) {
      if (op.name.empty()) throw InputError("operator without a name in layer " + layer.name);
      if (op.kind != OpKind::kCompute && !(op.message_bytes > 0.0)) {
        throw InputError("communication op '" + op.name + "' needs message_bytes > 0");
      }
      if (op.kind == OpKind::kCollective &&
          (op.group == GroupKind::kNone || op.group == GroupKind::kPipeline)) {
        throw InputError("collective '" + op.name + "' needs group tp, cp or dp");
      }
    }
  }
  if (p2p_bytes < 0.0) throw InputError("p2p_bytes must be >= 0");
}

std::vector<std::string> ParallelismConfig::validate() const {
  for (auto [name, v] : {std::pair{"tp", tp}, std::pair{"pp", pp}, std::pair{"dp", dp},
                         std::pair{"cp", cp}, std::pair{"microbatches", microbatches}}) {
    if (v < 1) throw InputError(std::string(name) + " must be >= 1");
  }
  std::vector<std::string> warnings;
  if (microbatches < pp) {
    warnings.push_back("microbatches (" + std::to_string(microbatches) +
                       ") < pp (" + std::to_string(pp) + "): pipeline never fills");
  }
  return warnings;
}

void ParallelismConfig::check_world(const Topology& topo) const {
  if (world_size() != topo.world_size()) {
    throw InputError("tp*pp*dp*cp = " + std::to_string(world_size()) +
                     " but topology has " + std::to_string(topo.world_size()) + " ranks");
  }
}

int rank_of(const RankCoord& c, const ParallelismConfig& par) {
  return c.tp + par.tp * (c.cp + par.cp * (c.dp + par.dp * c.stage));
}

RankCoord coord_of(int rank, const ParallelismConfig& par) {
  if (rank < 0 || rank >= par.world_size()) {
    throw InputError("rank " + std::to_string(rank) + " outside world of " +
                     std::to_string(par.world_size()));
  }
  RankCoord c;
  c.tp = rank % par.tp;
  rank /= par.tp;
  c.cp = rank % par.cp;
  rank /= par.cp;
  c.dp = rank % par.dp;
  c.stage = rank / par.dp;
  return c;
}

std::pair<int, int> stage_layers(int num_layers, int pp, int stage) {
  return {stage * num_layers / pp, (stage + 1) * num_layers / pp};
}

PipelineSchedule one_f_one_b(int pp, int microbatches) {
  PipelineSchedule out(static_cast<std::size_t>(pp));
  for (int s = 0; s < pp; ++s) {
    auto& slots = out[static_cast<std::size_t>(s)];
    const int warmup = std::min(pp - s - 1, microbatches);
    int f = 0;
    int b = 0;
    for (; f < warmup; ++f) slots.push_back({f, Pass::kForward});
    while (f < microbatches) {
      slots.push_back({f++, Pass::kForward});
      slots.push_back({b++, Pass::kBackward});
    }
    while (b < microbatches) slots.push_back({b++, Pass::kBackward});
  }
  return out;
}

void validate_schedule(const PipelineSchedule& schedule, int pp, int microbatches) {
  if (static_cast<int>(schedule.size()) != pp) {
    throw InputError("schedule has " + std::to_string(schedule.size()) +
                     " stages, expected pp = " + std::to_string(pp));
  }
  for (int s = 0; s < pp; ++s) {
    std::set<std::pair<int, int>> seen;
    std::set<int> forwarded;
    for (const auto& slot : schedule[static_cast<std::size_t>(s)]) {
      if (slot.microbatch < 0 || slot.microbatch >= microbatches) {
        throw InputError("stage " + std::to_string(s) + ": microbatch " +
                         std::to_string(slot.microbatch) + " out of range");
      }
      if (!seen.insert({slot.microbatch, static_cast<int>(slot.pass)}).second) {
        throw InputError("rank oversubscribed: stage " + std::to_string(s) +
                         " runs " + pass_name(slot.pass) + " of microbatch " +
                         std::to_string(slot.microbatch) + " twice");
      }
      if (slot.pass == Pass::kForward) {
        forwarded.insert(slot.microbatch);
      } else if (!forwarded.contains(slot.microbatch)) {
        throw InputError("stage " + std::to_string(s) + ": backward of microbatch " +
                         std::to_string(slot.microbatch) + " before its forward");
      }
    }
    if (static_cast<int>(seen.size()) != 2 * microbatches) {
      throw InputError("stage " + std::to_string(s) + " schedules " +
                       std::to_string(seen.size()) + " tasks, expected " +
                       std::to_string(2 * microbatches));
    }
  }
}

namespace {

Pass parse_pass(const std::string& s) {
  if (s == "fwd" || s == "forward" || s == "F") return Pass::kForward;
  if (s == "bwd" || s == "backward" || s == "B") return Pass::kBackward;
  throw InputError("unknown pass: " + s);
}

GroupKind parse_group(const std::string& s) {
  if (s == "tp") return GroupKind::kTensor;
  if (s == "cp") return GroupKind::kContext;
  if (s == "dp") return GroupKind::kData;
  throw InputError("unknown group: " + s + " (expected tp, cp or dp)");
}

OpKind parse_kind(const std::string& s) {
  if (s == "compute") return OpKind::kCompute;
  if (s == "collective") return OpKind::kCollective;
  if (s == "p2p") return OpKind::kP2P;
  throw InputError("unknown operator kind: " + s);
}

}  // namespace

PipelineSchedule schedule_from_json(const nlohmann::json& j) {
  try {
    const nlohmann::json& stages = j.is_object() ? j.at("stages") : j;
    PipelineSchedule out;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      // Explicit "slot" indices order the list; two tasks in one slot clash.
      std::vector<std::pair<long, ScheduleSlot>> slots;
      std::set<long> used;
      long next = 0;
      for (const auto& e : stages[s]) {
        const long index = e.contains("slot") ? e["slot"].get<long>() : next;
        next = index + 1;
        if (!used.insert(index).second) {
          throw InputError("rank oversubscribed: stage " + std::to_string(s) +
                           " has two tasks in slot " + std::to_string(index));
        }
        slots.push_back({index, {e.at("mb").get<int>(),
                                 parse_pass(e.at("pass").get<std::string>())}});
      }
      std::stable_sort(slots.begin(), slots.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      auto& dst = out.emplace_back();
      for (const auto& [_, slot] : slots) dst.push_back(slot);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad schedule: ") + e.what());
  }
}

PipelineSchedule schedule_for(const ParallelismConfig& par) {
  if (par.schedule == ScheduleKind::kOneFOneB) return one_f_one_b(par.pp, par.microbatches);
  return par.custom_schedule;
}

namespace {

bool emitted_in_slot(const OperatorSpec& op, Pass pass, bool last_backward) {
  if (op.kind == OpKind::kP2P || op.pass != pass) return false;
  if (op.kind == OpKind::kCollective && op.group == GroupKind::kData) {
    return pass == Pass::kBackward && last_backward;
  }
  return true;
}

// Operators of one slot on a stage, in execution order.
std::vector<const OperatorSpec*> slot_ops(const ModelSpec& model, int pp, int stage,
                                          Pass pass, bool last_backward) {
  const auto [begin, end] = stage_layers(static_cast<int>(model.layers.size()), pp, stage);
  std::vector<const OperatorSpec*> out;
  for (int i = 0; i < end - begin; ++i) {
    const int l = pass == Pass::kForward ? begin + i : end - 1 - i;
    for (const auto& op : model.layers[static_cast<std::size_t>(l)].ops) {
      if (emitted_in_slot(op, pass, last_backward)) out.push_back(&op);
    }
  }
  return out;
}

// What crosses the boundary leaving `stage` in direction `pass`.
std::vector<OperatorSpec> boundary_sends(const ModelSpec& model, int pp, int stage,
                                         Pass pass) {
  const auto [begin, end] = stage_layers(static_cast<int>(model.layers.size()), pp, stage);
  const int l = pass == Pass::kForward ? end - 1 : begin;
  std::vector<OperatorSpec> out;
  for (const auto& op : model.layers[static_cast<std::size_t>(l)].ops) {
    if (op.kind == OpKind::kP2P && op.pass == pass) out.push_back(op);
  }
  if (out.empty()) {
    OperatorSpec op;
    op.name = pass == Pass::kForward ? model.p2p_forward_kernel : model.p2p_backward_kernel;
    op.kind = OpKind::kP2P;
    op.pass = pass;
    op.message_bytes = model.p2p_bytes;
    op.collective = CollectiveKind::kP2P;
    op.group = GroupKind::kPipeline;
    out.push_back(op);
  }
  return out;
}

int last_backward_index(const std::vector<ScheduleSlot>& slots) {
  int idx = -1;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].pass == Pass::kBackward) idx = static_cast<int>(i);
  }
  return idx;
}

bool has_boundary(Pass pass, int stage, int pp) {
  return pass == Pass::kForward ? stage + 1 < pp : stage > 0;
}

int group_index(const RankCoord& c, GroupKind g) {
  switch (g) {
    case GroupKind::kTensor:
      return c.tp;
    case GroupKind::kContext:
      return c.cp;
    case GroupKind::kData:
      return c.dp;
    default:
      return 0;
  }
}

std::vector<int> group_members(const RankCoord& leader, GroupKind g,
                               const ParallelismConfig& par) {
  const int size = g == GroupKind::kTensor    ? par.tp
                   : g == GroupKind::kContext ? par.cp
                                              : par.dp;
  std::vector<int> out;
  for (int i = 0; i < size; ++i) {
    RankCoord c = leader;
    if (g == GroupKind::kTensor) c.tp = i;
    if (g == GroupKind::kContext) c.cp = i;
    if (g == GroupKind::kData) c.dp = i;
    out.push_back(rank_of(c, par));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_inputs(const ModelSpec& model, const ParallelismConfig& par,
                  const PipelineSchedule& sched) {
  model.validate();
  if (static_cast<int>(model.layers.size()) < par.pp) {
    throw InputError("model has " + std::to_string(model.layers.size()) +
                     " layers, fewer than pp = " + std::to_string(par.pp));
  }
  validate_schedule(sched, par.pp, par.microbatches);
}

}  // namespace

std::vector<RankTask> build_rank_graph(const ModelSpec& model,
                                       const ParallelismConfig& par, int rank) {
  par.validate();
  const PipelineSchedule sched = schedule_for(par);
  check_inputs(model, par, sched);
  const RankCoord me = coord_of(rank, par);
  const auto& slots = sched[static_cast<std::size_t>(me.stage)];
  const int last_bwd = last_backward_index(slots);
  std::vector<RankTask> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const ScheduleSlot slot = slots[i];
    for (const OperatorSpec* op :
         slot_ops(model, par.pp, me.stage, slot.pass, static_cast<int>(i) == last_bwd)) {
      RankTask t;
      t.kernel = op->name;
      t.kind = op->kind;
      t.pass = slot.pass;
      t.microbatch = slot.microbatch;
      t.group = op->kind == OpKind::kCollective ? op->group : GroupKind::kNone;
      t.mode = (op->kind == OpKind::kCompute || op->blocking) ? ExecMode::kSerial
                                                              : ExecMode::kParallel;
      out.push_back(std::move(t));
    }
    if (has_boundary(slot.pass, me.stage, par.pp)) {
      for (const auto& send : boundary_sends(model, par.pp, me.stage, slot.pass)) {
        out.push_back({send.name, OpKind::kP2P, slot.pass, slot.microbatch,
                       ExecMode::kParallel, GroupKind::kPipeline});
      }
    }
  }
  for (const auto& k : model.step_kernels) {
    out.push_back({k, OpKind::kCompute, Pass::kBackward, -1, ExecMode::kSerial,
                   GroupKind::kNone});
  }
  return out;
}

std::vector<int> TaskNode::participants() const {
  if (comm && group != GroupKind::kPipeline) return comm->group;
  return {rank};
}

int ExecutionDag::add_node(TaskNode node) {
  node.id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(node));
  preds_.emplace_back();
  succs_.emplace_back();
  return nodes_.back().id;
}

void ExecutionDag::add_edge(int src, int dst, EdgeKind kind) {
  const auto n = static_cast<int>(nodes_.size());
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    throw InputError("edge endpoint out of range");
  }
  auto& p = preds_[static_cast<std::size_t>(dst)];
  if (std::find(p.begin(), p.end(), src) != p.end()) return;
  p.push_back(src);
  succs_[static_cast<std::size_t>(src)].push_back(dst);
  edges_.push_back({src, dst, kind});
}

std::vector<int> ExecutionDag::topological_order() const {
  const std::size_t n = nodes_.size();
  std::vector<int> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = static_cast<int>(preds_[i].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int s : succs_[static_cast<std::size_t>(v)]) {
      if (--indegree[static_cast<std::size_t>(s)] == 0) ready.push(s);
    }
  }
  if (order.size() == n) return order;

  // Every leftover node has a leftover predecessor; walk back until a repeat.
  int v = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] > 0) {
      v = static_cast<int>(i);
      break;
    }
  }
  std::vector<int> path;
  std::map<int, std::size_t> pos;
  while (!pos.contains(v)) {
    pos[v] = path.size();
    path.push_back(v);
    for (int p : preds_[static_cast<std::size_t>(v)]) {
      if (indegree[static_cast<std::size_t>(p)] > 0) {
        v = p;
        break;
      }
    }
  }
  std::vector<int> cycle(path.begin() + static_cast<long>(pos[v]), path.end());
  std::reverse(cycle.begin(), cycle.end());
  std::ostringstream os;
  os << "cycle:";
  for (int c : cycle) os << ' ' << c << " (" << nodes_[static_cast<std::size_t>(c)].kernel << ") ->";
  os << ' ' << cycle.front();
  throw InputError(os.str());
}

ExecutionDag expand_pipeline_schedule(const ModelSpec& model,
                                      const ParallelismConfig& par) {
  ExecutionDag dag;
  dag.warnings() = par.validate();
  const PipelineSchedule sched = schedule_for(par);
  check_inputs(model, par, sched);

  const int world = par.world_size();
  std::vector<int> cursor(static_cast<std::size_t>(world), -1);
  std::vector<std::vector<int>> pending_slot(static_cast<std::size_t>(world));
  std::vector<std::vector<int>> pending_step(static_cast<std::size_t>(world));
  // Overlapped work from finished slots, joined by the next stream node.
  std::vector<std::vector<int>> carry(static_cast<std::size_t>(world));

  struct SlotRecord {
    std::vector<int> entries;  // nodes gated by the incoming pipeline edge
    int last = -1;             // last stream node
    std::vector<int> joins;    // overlapped work that must finish before sending
  };
  std::map<std::tuple<int, int, int>, SlotRecord> records;  // (rank, mb, pass)

  for (int s = 0; s < par.pp; ++s) {
    std::vector<int> ranks;
    for (int r = 0; r < world; ++r) {
      if (coord_of(r, par).stage == s) ranks.push_back(r);
    }
    const auto& slots = sched[static_cast<std::size_t>(s)];
    const int last_bwd = last_backward_index(slots);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const ScheduleSlot slot = slots[i];
      std::map<int, int> slot_start;
      for (int r : ranks) slot_start[r] = cursor[static_cast<std::size_t>(r)];
      auto record = [&](int r) -> SlotRecord& {
        return records[{r, slot.microbatch, static_cast<int>(slot.pass)}];
      };
      // Wires a node into rank r's stream state.
      auto link_rank = [&](int node, int r, EdgeKind from_cursor, bool on_stream) {
        auto& cur = cursor[static_cast<std::size_t>(r)];
        if (cur == slot_start[r]) record(r).entries.push_back(node);
        if (cur >= 0) dag.add_edge(cur, node, from_cursor);
        if (on_stream) {
          for (int j : carry[static_cast<std::size_t>(r)]) {
            dag.add_edge(j, node, EdgeKind::kSyncJoin);
          }
          carry[static_cast<std::size_t>(r)].clear();
          cur = node;
        }
      };

      for (const OperatorSpec* op :
           slot_ops(model, par.pp, s, slot.pass, static_cast<int>(i) == last_bwd)) {
        if (op->kind == OpKind::kCompute) {
          for (int r : ranks) {
            TaskNode t;
            t.kernel = op->name;
            t.rank = r;
            t.stage = s;
            t.microbatch = slot.microbatch;
            t.pass = slot.pass;
            link_rank(dag.add_node(std::move(t)), r, EdgeKind::kSerial, true);
          }
          continue;
        }
        for (int r : ranks) {
          const RankCoord c = coord_of(r, par);
          if (group_index(c, op->group) != 0) continue;  // not the group leader
          TaskNode t;
          t.kernel = op->name;
          t.rank = r;
          t.stage = s;
          t.microbatch = op->group == GroupKind::kData ? -1 : slot.microbatch;
          t.pass = slot.pass;
          t.group = op->group;
          t.comm = CommSpec{op->collective, op->message_bytes,
                            group_members(c, op->group, par)};
          const std::vector<int> members = t.comm->group;
          const int node = dag.add_node(std::move(t));
          for (int m : members) {
            link_rank(node, m, EdgeKind::kSyncJoin, op->blocking);
            if (!op->blocking) {
              auto& pending = op->group == GroupKind::kData ? pending_step : pending_slot;
              pending[static_cast<std::size_t>(m)].push_back(node);
            }
          }
        }
      }

      for (int r : ranks) {
        auto& rec = record(r);
        if (cursor[static_cast<std::size_t>(r)] == slot_start[r]) {
          throw InputError("stage " + std::to_string(s) + " has no blocking " +
                           pass_name(slot.pass) + " operators");
        }
        rec.last = cursor[static_cast<std::size_t>(r)];
        auto& pending = pending_slot[static_cast<std::size_t>(r)];
        rec.joins = pending;
        auto& c = carry[static_cast<std::size_t>(r)];
        c.insert(c.end(), pending.begin(), pending.end());
        pending.clear();
      }
    }
  }

  for (int r = 0; r < world; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    for (std::size_t k = 0; k < model.step_kernels.size(); ++k) {
      TaskNode t;
      t.kernel = model.step_kernels[k];
      t.rank = r;
      t.stage = coord_of(r, par).stage;
      t.pass = Pass::kBackward;
      const int node = dag.add_node(std::move(t));
      if (cursor[ru] >= 0) dag.add_edge(cursor[ru], node, EdgeKind::kSerial);
      for (int j : carry[ru]) dag.add_edge(j, node, EdgeKind::kSyncJoin);
      for (int j : pending_step[ru]) dag.add_edge(j, node, EdgeKind::kSyncJoin);
      carry[ru].clear();
      pending_step[ru].clear();
      cursor[ru] = node;
    }
  }

  for (int s = 0; s < par.pp; ++s) {
    for (const ScheduleSlot& slot : sched[static_cast<std::size_t>(s)]) {
      if (!has_boundary(slot.pass, s, par.pp)) continue;
      const int peer_stage = slot.pass == Pass::kForward ? s + 1 : s - 1;
      const auto sends = boundary_sends(model, par.pp, s, slot.pass);
      for (int r = 0; r < world; ++r) {
        RankCoord c = coord_of(r, par);
        if (c.stage != s) continue;
        c.stage = peer_stage;
        const int peer = rank_of(c, par);
        const auto& src = records.at({r, slot.microbatch, static_cast<int>(slot.pass)});
        const auto& dst = records.at({peer, slot.microbatch, static_cast<int>(slot.pass)});
        for (const auto& send : sends) {
          TaskNode t;
          t.kernel = send.name;
          t.rank = r;
          t.stage = s;
          t.microbatch = slot.microbatch;
          t.pass = slot.pass;
          t.group = GroupKind::kPipeline;
          t.comm = CommSpec{CollectiveKind::kP2P, send.message_bytes,
                            {std::min(r, peer), std::max(r, peer)}};
          const int node = dag.add_node(std::move(t));
          dag.add_edge(src.last, node, EdgeKind::kSerial);
          for (int j : src.joins) dag.add_edge(j, node, EdgeKind::kSyncJoin);
          for (int e : dst.entries) dag.add_edge(node, e, EdgeKind::kPipeline);
        }
      }
    }
  }
  return dag;
}

void validate_dag(const ExecutionDag& dag, const DistributionCatalog* catalog,
                  const Topology* topo) {
  dag.topological_order();  // throws on a cycle

  std::vector<std::set<int>> joined(dag.size());
  for (const auto& e : dag.edges()) {
    const auto& src = dag.node(e.src);
    const auto& dst = dag.node(e.dst);
    if (e.kind == EdgeKind::kPipeline && std::abs(src.stage - dst.stage) != 1) {
      throw InputError("pipeline edge " + std::to_string(e.src) + " -> " +
                       std::to_string(e.dst) + " does not connect adjacent stages");
    }
    if (e.kind == EdgeKind::kSyncJoin) {
      for (int r : src.participants()) joined[static_cast<std::size_t>(e.dst)].insert(r);
    }
  }
  for (const auto& n : dag.nodes()) {
    if (!n.comm || n.group == GroupKind::kPipeline) continue;
    const auto& got = joined[static_cast<std::size_t>(n.id)];
    if (got.empty()) continue;  // first task of the step on every member
    for (int r : n.comm->group) {
      if (!got.contains(r)) {
        throw InputError("incomplete join barrier at node " + std::to_string(n.id) +
                         " (" + n.kernel + "): rank " + std::to_string(r) +
                         " does not join");
      }
    }
  }

  if (catalog == nullptr) return;
  for (const auto& n : dag.nodes()) {
    if (!n.comm) {
      catalog->resolve(n.kernel, n.rank);
      continue;
    }
    if (catalog->find(n.kernel, std::nullopt)) continue;
    if (topo == nullptr) {
      throw InputError("unresolved kernel key: " + n.kernel +
                       " (no catalog entry and no topology to synthesize it)");
    }
    if (n.comm->group.size() > 1) topo->link(topo->group_tier_index(n.comm->group));
  }
}

ModelSpec model_from_json(const nlohmann::json& j) {
  try {
    ModelSpec m;
    m.name = j.value("name", std::string{});
    m.batch = j.value("batch", std::string{});
    m.p2p_bytes = j.value("p2p_bytes", 0.0);
    m.p2p_forward_kernel = j.value("p2p_forward_kernel", m.p2p_forward_kernel);
    m.p2p_backward_kernel = j.value("p2p_backward_kernel", m.p2p_backward_kernel);
    if (j.contains("step_kernels")) {
      m.step_kernels = j["step_kernels"].get<std::vector<std::string>>();
    }
    auto parse_layer = [](const nlohmann::json& jl, const std::string& name) {
      LayerSpec layer;
      layer.name = jl.value("name", name);
      for (const auto& jo : jl.at("ops")) {
        OperatorSpec op;
        op.name = jo.at("name").get<std::string>();
        op.kind = parse_kind(jo.value("kind", std::string("compute")));
        op.pass = parse_pass(jo.value("pass", std::string("fwd")));
        op.message_bytes = jo.value("message_bytes", 0.0);
        op.blocking = jo.value("blocking", true);
        if (op.kind == OpKind::kCollective) {
          op.collective = parse_collective(jo.at("collective").get<std::string>());
          op.group = parse_group(jo.value("group", std::string("tp")));
        } else if (op.kind == OpKind::kP2P) {
          op.collective = CollectiveKind::kP2P;
          op.group = GroupKind::kPipeline;
        }
        layer.ops.push_back(std::move(op));
      }
      return layer;
    };
    if (j.contains("layers")) {
      int i = 0;
      for (const auto& jl : j["layers"]) {
        m.layers.push_back(parse_layer(jl, "layer" + std::to_string(i++)));
      }
    } else {
      const int n = j.at("num_layers").get<int>();
      if (n < 1) throw InputError("num_layers must be >= 1");
      const LayerSpec tmpl = parse_layer(j.at("layer_template"), "layer");
      for (int i = 0; i < n; ++i) {
        LayerSpec l = tmpl;
        l.name = tmpl.name + std::to_string(i);
        m.layers.push_back(std::move(l));
      }
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad model: ") + e.what());
  }
}

ParallelismConfig parallelism_from_json(const nlohmann::json& j,
                                        const std::filesystem::path& base_dir) {
  try {
    ParallelismConfig p;
    p.tp = j.value("tp", 1);
    p.pp = j.value("pp", 1);
    p.dp = j.value("dp", 1);
    p.cp = j.value("cp", 1);
    p.microbatches = j.value("microbatches", 1);
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      if (s.is_string()) {
        const auto name = s.get<std::string>();
        if (name != "1f1b" && name != "1F1B") throw InputError("unknown schedule: " + name);
      } else if (s.contains("file")) {
        const auto path = base_dir / s["file"].get<std::string>();
        std::ifstream in(path);
        if (!in) throw InputError("cannot open schedule: " + path.string());
        p.schedule = ScheduleKind::kFile;
        p.custom_schedule = schedule_from_json(nlohmann::json::parse(in));
      } else {
        p.schedule = ScheduleKind::kFile;
        p.custom_schedule = schedule_from_json(s);
      }
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad parallelism: ") + e.what());
  }
}

WorkloadFile load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open workload: " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    return {model_from_json(j.at("model")),
            parallelism_from_json(j.at("parallelism"), path.parent_path())};
  } catch (const nlohmann::json::exception& e) {
    throw InputError("workload " + path.string() + ": " + e.what());
  }
}

}  // namespace stepsim
