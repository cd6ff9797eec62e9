#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skillrrt/connector.hpp"
#include "skillrrt/domain.hpp"

namespace skillrrt {

using NodeId = std::size_t;

/// What produced a node from its parent.
struct PolicyTag {
  enum class Kind { kNone, kSkill, kConnector };
  Kind kind = Kind::kNone;
  std::string skill_id;      // skill executed, or skill the connector serves
  std::string connector_id;  // set for kConnector

  static PolicyTag None() { return {}; }
  static PolicyTag Skill(std::string id) { return {Kind::kSkill, std::move(id), {}}; }
  static PolicyTag Connector(std::string skill, std::string conn) {
    return {Kind::kConnector, std::move(skill), std::move(conn)};
  }
  friend bool operator==(const PolicyTag&, const PolicyTag&) = default;
};

using NodeGoal = std::variant<std::monostate, Pose, RobotConfig>;

struct Node {
  NodeId id = 0;
  std::optional<NodeId> parent;
  PolicyTag tag;
  NodeGoal goal;
  State state;
  /// Seed of the rng stream that simulated this node (0 for root/teleport).
  std::uint64_t sim_seed = 0;

  bool is_root() const { return !parent.has_value(); }
};

/// Append-only search tree; parents always precede children.
class PlanTree {
 public:
  NodeId AddRoot(const State& s0);
  NodeId Add(Node node);

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<NodeId>& children(NodeId id) const { return children_.at(id); }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> children_;
};

struct PlannerParams {
  int n_max = 10000;
  double p_g = 0.2;
  double delta_obj = 0.005;
  double delta_goal = 0.005;
  double alpha = kDefaultAlpha;
  int batch_size = 1;
  std::uint64_t seed = 0;
  /// Ablation: with an empty connector set, refuse to teleport and only extend
  /// from nodes whose robot configuration already matches the pre-contact one.
  bool forbid_teleport = false;
  double config_match_tol = 1e-3;

  void Validate() const;
};

struct PlanStep {
  enum class Kind { kTeleport, kConnector, kSkill };
  Kind kind = Kind::kSkill;
  std::string skill_id;
  std::string connector_id;
  Pose goal_pose;                                 // kSkill
  RobotConfig goal_config = RobotConfig::Zero();  // kTeleport / kConnector
  std::uint64_t sim_seed = 0;

  friend bool operator==(const PlanStep& a, const PlanStep& b) {
    return a.kind == b.kind && a.skill_id == b.skill_id && a.connector_id == b.connector_id &&
           a.goal_pose == b.goal_pose && a.goal_config == b.goal_config && a.sim_seed == b.sim_seed;
  }
};

struct SkillPlan {
  State initial_state;
  Pose goal_pose;
  std::vector<PlanStep> steps;
  std::uint64_t seed = 0;
  PlannerParams params;
  /// Connector set used while planning (empty for lazy plans).
  ConnectorSet connectors;

  std::size_t skill_steps() const;
};

struct PlanResult {
  std::optional<SkillPlan> plan;
  int iterations = 0;
  std::size_t tree_size = 0;
  std::int64_t sim_steps = 0;
  std::optional<NodeId> goal_node;
};

struct SkillSample {
  std::size_t skill = 0;
  Pose target;
  bool is_goal = false;
};

SkillSample UnifSampleSkillAndSubgoal(const Domain& domain, const Pose& q_goal,
                                      const PlannerParams& params, Rng& rng);

/// NP skills: nearest node among those where the applicability check holds.
/// P skill: the globally nearest node, returned only if the check holds there.
/// Exact distance ties go to the lowest node id.
std::optional<NodeId> GetApplicableNearestNode(const PlanTree& tree, const SkillSpec& skill,
                                               const Pose& target, const Domain& domain,
                                               const PlannerParams& params);

/// false iff se3_distance(state.q_obj, target) < delta_obj.
bool Failed(const State& state, const Pose& target, const PlannerParams& params);

Node ComputeConnectingNode(const RobotConfig& q_r_target, const SkillSpec& skill,
                           const ConnectorSet& connectors, const Node& v, const Domain& domain,
                           std::uint64_t sim_seed);

/// Connecting node and skill outcome node, not yet attached to a tree.
struct Extension {
  Node connect;
  Node outcome;
  std::int64_t sim_steps = 0;
};

/// Everything Extend does except committing; nullopt means the tree stays
/// unchanged (skill failed, no pre-contact, or config mismatch under the
/// no-teleport ablation).
std::optional<Extension> ComputeExtension(const PlanTree& tree, const SkillSpec& skill, NodeId v_near,
                                          const Pose& target, const ConnectorSet& connectors,
                                          const Domain& domain, const PlannerParams& params,
                                          std::uint64_t extension_seed, std::int64_t* sim_steps = nullptr);

/// Appends connect (parent v_near) then outcome (parent connect). Returns the
/// outcome id.
NodeId CommitExtension(PlanTree& tree, NodeId v_near, Extension ext);

/// ComputeExtension + CommitExtension. Returns the outcome id on success.
std::optional<NodeId> Extend(PlanTree& tree, const SkillSpec& skill, NodeId v_near, const Pose& target,
                             const ConnectorSet& connectors, const Domain& domain,
                             const PlannerParams& params, std::uint64_t extension_seed);

/// Root-first node sequence ending at goal_node.
std::vector<NodeId> Retrace(const PlanTree& tree, NodeId goal_node);

SkillPlan PlanFromPath(const PlanTree& tree, const std::vector<NodeId>& path, const Pose& q_goal,
                       const PlannerParams& params, const ConnectorSet& connectors);

/// Reported after every planner iteration. In batch mode skill, target and
/// v_near describe the last sample of the batch.
struct IterationEvent {
  int iteration = 0;
  std::size_t tree_size_before = 0;
  std::size_t tree_size_after = 0;
  std::size_t skill = 0;
  Pose target;
  std::optional<NodeId> v_near;
};

class SkillRrt {
 public:
  using Observer = std::function<void(const IterationEvent&)>;

  SkillRrt(const Domain& domain, ConnectorSet connectors, PlannerParams params);

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// Sequential Skill-RRT (lazy when the connector set is empty).
  PlanResult Solve(const State& s0, const Pose& q_goal);
  /// Batched variant: batch_size samples per iteration, resolved against the
  /// pre-iteration tree and committed in sample order.
  PlanResult SolveBatch(const State& s0, const Pose& q_goal);

  const PlanTree& tree() const { return tree_; }

 private:
  void Validate(const State& s0, const Pose& q_goal) const;
  std::optional<NodeId> NearGoal(std::size_t from, const Pose& q_goal) const;
  PlanResult Finish(NodeId goal_node, const Pose& q_goal, int iterations, std::int64_t sim_steps) const;

  const Domain& domain_;
  ConnectorSet connectors_;
  PlannerParams params_;
  PlanTree tree_;
  Observer observer_;
};

PlanResult SkillRrtSolve(const State& s0, const Pose& q_goal, const Domain& domain,
                         const ConnectorSet& connectors, const PlannerParams& params);
PlanResult SkillRrtBatchSolve(const State& s0, const Pose& q_goal, const Domain& domain,
                              const ConnectorSet& connectors, const PlannerParams& params);

/// Re-simulates a plan with the recorded per-step seeds and no noise. Returns
/// the state after every step, preceded by the initial state.
std::vector<State> ReplayNoiseless(const SkillPlan& plan, const Domain& domain);

/// Flat baseline: episodes of `horizon` random skills with uniformly sampled
/// subgoals from the current state (robot teleported to pre-contact), no tree
/// and no goal bias. Every skill attempt costs one iteration of n_max.
PlanResult FlatRandomSolve(const State& s0, const Pose& q_goal, const Domain& domain,
                           const PlannerParams& params, int horizon = 10);

}  // namespace skillrrt
