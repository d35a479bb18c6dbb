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

// Model + parallelism description and its expansion into the execution DAG
// that the Monte Carlo engine walks.
//
// Rank layout is tensor-parallel innermost, pipeline outermost:
//   rank = tp + TP * (cp + CP * (dp + DP * stage))
// so a topology node of TP*CP*DP ranks hosts exactly one pipeline stage, and
// pipeline boundaries are the links that cross the outer tiers.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepsim/catalog.h"
#include "stepsim/topology.h"

namespace stepsim {

enum class OpKind { kCompute, kCollective, kP2P };
enum class Pass { kForward, kBackward };
enum class GroupKind { kNone, kTensor, kContext, kData, kPipeline };
enum class EdgeKind { kSerial, kSyncJoin, kPipeline };

const char* pass_name(Pass pass);
const char* group_name(GroupKind group);
const char* edge_name(EdgeKind kind);

struct OperatorSpec {
  std::string name;  // catalog kernel name
  OpKind kind = OpKind::kCompute;
  Pass pass = Pass::kForward;
  // Communication ops only.
  double message_bytes = 0.0;
  CollectiveKind collective = CollectiveKind::kAllReduce;
  GroupKind group = GroupKind::kTensor;
  // Blocking ops sit on the rank's serial stream. Non-blocking ones overlap
  // with later work and are joined at the end of their pipeline slot
  // (tensor/context groups) or at the end of the step (data-parallel).
  bool blocking = true;
};

struct LayerSpec {
  std::string name;
  std::vector<OperatorSpec> ops;  // both passes, in execution order per pass
};

// Data-parallel collectives are emitted once per step, in each stage's last
// backward slot. P2P ops mark what a layer sends across a pipeline boundary:
// forward ones are used when the layer is the last of its stage, backward
// ones when it is the first. Boundaries without one use p2p_bytes and the
// default p2p kernel names.
struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::vector<std::string> step_kernels;  // per rank, after the last backward
  double p2p_bytes = 0.0;
  std::string p2p_forward_kernel = "pp_send_fwd";
  std::string p2p_backward_kernel = "pp_send_bwd";
  std::string batch;  // free-form global batch descriptor

  // Throws InputError on empty layers, missing names, or comm ops with
  // message_bytes <= 0.
  void validate() const;
};

struct ScheduleSlot {
  int microbatch = 0;
  Pass pass = Pass::kForward;
  bool operator==(const ScheduleSlot&) const = default;
};

// Ordered slots per pipeline stage.
using PipelineSchedule = std::vector<std::vector<ScheduleSlot>>;

enum class ScheduleKind { kOneFOneB, kFile };

struct ParallelismConfig {
  int tp = 1;
  int pp = 1;
  int dp = 1;
  int cp = 1;
  int microbatches = 1;
  ScheduleKind schedule = ScheduleKind::kOneFOneB;
  PipelineSchedule custom_schedule;  // used when schedule == kFile

  int world_size() const { return tp * pp * dp * cp; }
  // Throws on degrees < 1; returns warnings (e.g. microbatches < pp).
  std::vector<std::string> validate() const;
  // Throws InputError unless world_size() == topo.world_size().
  void check_world(const Topology& topo) const;
};

struct RankCoord {
  int stage = 0;
  int dp = 0;
  int cp = 0;
  int tp = 0;
  bool operator==(const RankCoord&) const = default;
};

int rank_of(const RankCoord& c, const ParallelismConfig& par);
RankCoord coord_of(int rank, const ParallelismConfig& par);

// Layer indices [begin, end) assigned to a stage (contiguous, balanced).
std::pair<int, int> stage_layers(int num_layers, int pp, int stage);

PipelineSchedule one_f_one_b(int pp, int microbatches);
// Throws InputError("rank oversubscribed: ...") when a stage repeats a slot
// index or a (microbatch, pass) pair, and on missing or out-of-range tasks.
void validate_schedule(const PipelineSchedule& schedule, int pp, int microbatches);
PipelineSchedule schedule_from_json(const nlohmann::json& j);
// The built-in 1F1B schedule or the file-defined one.
PipelineSchedule schedule_for(const ParallelismConfig& par);

enum class ExecMode { kSerial, kParallel };

// One entry of a rank's ordered task list.
struct RankTask {
  std::string kernel;
  OpKind kind = OpKind::kCompute;
  Pass pass = Pass::kForward;
  int microbatch = 0;
  ExecMode mode = ExecMode::kSerial;
  GroupKind group = GroupKind::kNone;
};

std::vector<RankTask> build_rank_graph(const ModelSpec& model,
                                       const ParallelismConfig& par, int rank);

struct CommSpec {
  CollectiveKind kind = CollectiveKind::kAllReduce;
  double message_bytes = 0.0;
  std::vector<int> group;  // ascending ranks
};

struct TaskNode {
  int id = -1;
  std::string kernel;
  int rank = 0;  // group leader for collectives, sender for P2P
  int stage = 0;
  int microbatch = -1;  // -1 for per-step tasks
  Pass pass = Pass::kForward;
  GroupKind group = GroupKind::kNone;
  std::optional<CommSpec> comm;

  std::vector<int> participants() const;
};

struct DagEdge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::kSerial;
};

class ExecutionDag {
 public:
  int add_node(TaskNode node);
  // Duplicate (src, dst) pairs are ignored; the first kind wins.
  void add_edge(int src, int dst, EdgeKind kind);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<TaskNode>& nodes() const { return nodes_; }
  const TaskNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<DagEdge>& edges() const { return edges_; }
  const std::vector<int>& preds(int id) const { return preds_.at(static_cast<std::size_t>(id)); }
  const std::vector<int>& succs(int id) const { return succs_.at(static_cast<std::size_t>(id)); }

  // Kahn's algorithm, lowest id first among ready nodes. Throws
  // InputError("cycle: ...") naming the nodes of one cycle.
  std::vector<int> topological_order() const;

  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<TaskNode> nodes_;
  std::vector<DagEdge> edges_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  std::vector<std::string> warnings_;
};

ExecutionDag expand_pipeline_schedule(const ModelSpec& model,
                                      const ParallelismConfig& par);

// Checks acyclicity, join-barrier completeness and pipeline-edge adjacency;
// with a catalog, that every kernel resolves (collectives may instead be
// synthesized from `topo`). Throws InputError describing the first problem.
void validate_dag(const ExecutionDag& dag, const DistributionCatalog* catalog = nullptr,
                  const Topology* topo = nullptr);

struct WorkloadFile {
  ModelSpec model;
  ParallelismConfig parallelism;
};

ModelSpec model_from_json(const nlohmann::json& j);
ParallelismConfig parallelism_from_json(const nlohmann::json& j,
                                        const std::filesystem::path& base_dir = {});
// {"model": {...}, "parallelism": {...}}
WorkloadFile load_workload(const std::filesystem::path& path);

}  // namespace stepsim
