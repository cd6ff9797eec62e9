#include "skillrrt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skillrrt/error.hpp"
#include "skillrrt/simulator.hpp"

namespace skillrrt {

NodeId PlanTree::AddRoot(const State& s0) {
  nodes_.clear();
  children_.clear();
  Node root;
  root.state = s0;
  nodes_.push_back(std::move(root));
  children_.emplace_back();
  return 0;
}

NodeId PlanTree::Add(Node node) {
  if (!node.parent || *node.parent >= nodes_.size()) {
    throw InvalidArgument("PlanTree::Add: parent must already be in the tree");
  }
  node.id = nodes_.size();
  children_.at(*node.parent).push_back(node.id);
  nodes_.push_back(std::move(node));
  children_.emplace_back();
  return nodes_.back().id;
}

void PlannerParams::Validate() const {
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  if (!(p_g >= 0.0 && p_g <= 1.0)) throw InvalidArgument("p_g must lie in [0, 1]");
  if (!(delta_obj > 0.0) || !(delta_goal > 0.0)) throw InvalidArgument("thresholds must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be finite and >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(config_match_tol >= 0.0)) throw InvalidArgument("config_match_tol must be >= 0");
}

std::size_t SkillPlan::skill_steps() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const PlanStep& s) {
    return s.kind == PlanStep::Kind::kSkill;
  }));
}

SkillSample UnifSampleSkillAndSubgoal(const Domain& domain, const Pose& q_goal,
                                      const PlannerParams& params, Rng& rng) {
  SkillSample out;
  out.skill = UniformIndex(rng, domain.skills.size());
  const SkillSpec& skill = domain.skills[out.skill];
  if (Uniform01(rng) < params.p_g) {
    out.target = q_goal;
    out.is_goal = true;
    return out;
  }
  const std::string& rid = skill.region_ids[UniformIndex(rng, skill.region_ids.size())];
  out.target = SamplePose(domain.region(rid), rng);
  return out;
}

namespace {

// Nodes that may start an extension: the root and skill outcomes. Connecting
// nodes are never extended so that skills and connections alternate.
bool Extendable(const Node& n) { return n.is_root() || n.tag.kind == PolicyTag::Kind::kSkill; }

}  // namespace

std::optional<NodeId> GetApplicableNearestNode(const PlanTree& tree, const SkillSpec& skill,
                                               const Pose& target, const Domain& domain,
                                               const PlannerParams& params) {
  double best = std::numeric_limits<double>::infinity();
  std::optional<NodeId> best_id;
  for (const Node& n : tree.nodes()) {
    if (!Extendable(n)) continue;
    const double lower = (n.state.q_obj.position() - target.position()).norm();
    if (lower >= best) continue;
    const double d = Se3Distance(n.state.q_obj, target, params.alpha);
    if (d >= best) continue;
    if (skill.prehensile() || PhiNp(domain, skill, n.state, target)) {
      best = d;
      best_id = n.id;
    }
  }
  if (best_id && skill.prehensile() && !PhiP(domain, tree.node(*best_id).state, target)) {
    return std::nullopt;
  }
  return best_id;
}

bool Failed(const State& state, const Pose& target, const PlannerParams& params) {
  return !(Se3Distance(state.q_obj, target, params.alpha) < params.delta_obj);
}

Node ComputeConnectingNode(const RobotConfig& q_r_target, const SkillSpec& skill,
                           const ConnectorSet& connectors, const Node& v, const Domain& domain,
                           std::uint64_t sim_seed) {
  Node out;
  out.parent = v.id;
  if (connectors.empty()) {
    out.state = v.state;
    out.state.q_r = q_r_target;
    return out;
  }
  const auto& entry = connectors.ForSkill(skill.id);
  Rng rng = MakeRng(sim_seed);
  const SimOutcome sim =
      Simulate(domain, v.state, Invocation::Connector(skill.id, q_r_target, entry.params), nullptr, rng);
  out.state = sim.state;
  out.tag = PolicyTag::Connector(skill.id, entry.connector_id);
  out.goal = q_r_target;
  out.sim_seed = sim_seed;
  return out;
}

std::optional<Extension> ComputeExtension(const PlanTree& tree, const SkillSpec& skill, NodeId v_near,
                                          const Pose& target, const ConnectorSet& connectors,
                                          const Domain& domain, const PlannerParams& params,
                                          std::uint64_t extension_seed, std::int64_t* sim_steps) {
  const Node& v = tree.node(v_near);
  Rng rng_pre = MakeRng(DeriveSeed(extension_seed, 0));
  RobotConfig q_pre;
  try {
    q_pre = PreContactConfig(domain, skill, v.state.q_obj, target, rng_pre);
  } catch (const NoPreContact&) {
    return std::nullopt;
  }
  if (!domain.kinematics.WithinLimits(q_pre)) return std::nullopt;
  if (connectors.empty() && params.forbid_teleport &&
      (v.state.q_r - q_pre).norm() > params.config_match_tol) {
    return std::nullopt;
  }

  Extension ext;
  ext.connect = ComputeConnectingNode(q_pre, skill, connectors, v, domain, DeriveSeed(extension_seed, 1));
  if (!connectors.empty()) ext.sim_steps += connectors.ForSkill(skill.id).params.n_sim;

  const std::uint64_t skill_seed = DeriveSeed(extension_seed, 2);
  Rng rng = MakeRng(skill_seed);
  const SimOutcome sim = Simulate(domain, ext.connect.state, Invocation::Skill(skill.id, target), nullptr, rng);
  ext.sim_steps += sim.steps;
  if (sim_steps != nullptr) *sim_steps += ext.sim_steps;
  if (Failed(sim.state, target, params)) return std::nullopt;

  ext.outcome.tag = PolicyTag::Skill(skill.id);
  ext.outcome.goal = target;
  ext.outcome.state = sim.state;
  ext.outcome.sim_seed = skill_seed;
  return ext;
}

NodeId CommitExtension(PlanTree& tree, NodeId v_near, Extension ext) {
  ext.connect.parent = v_near;
  const NodeId c = tree.Add(std::move(ext.connect));
  ext.outcome.parent = c;
  return tree.Add(std::move(ext.outcome));
}

std::optional<NodeId> Extend(PlanTree& tree, const SkillSpec& skill, NodeId v_near, const Pose& target,
                             const ConnectorSet& connectors, const Domain& domain,
                             const PlannerParams& params, std::uint64_t extension_seed) {
  auto ext = ComputeExtension(tree, skill, v_near, target, connectors, domain, params, extension_seed);
  if (!ext) return std::nullopt;
  return CommitExtension(tree, v_near, std::move(*ext));
}

std::vector<NodeId> Retrace(const PlanTree& tree, NodeId goal_node) {
  std::vector<NodeId> path;
  std::optional<NodeId> cur = goal_node;
  while (cur) {
    path.push_back(*cur);
    cur = tree.node(*cur).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

SkillPlan PlanFromPath(const PlanTree& tree, const std::vector<NodeId>& path, const Pose& q_goal,
                       const PlannerParams& params, const ConnectorSet& connectors) {
  SkillPlan plan;
  plan.initial_state = tree.node(path.front()).state;
  plan.goal_pose = q_goal;
  plan.seed = params.seed;
  plan.params = params;
  plan.connectors = connectors;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Node& n = tree.node(path[i]);
    PlanStep step;
    step.sim_seed = n.sim_seed;
    switch (n.tag.kind) {
      case PolicyTag::Kind::kNone:
        step.kind = PlanStep::Kind::kTeleport;
        step.goal_config = n.state.q_r;
        if (i + 1 < path.size()) step.skill_id = tree.node(path[i + 1]).tag.skill_id;
        break;
      case PolicyTag::Kind::kConnector:
        step.kind = PlanStep::Kind::kConnector;
        step.skill_id = n.tag.skill_id;
        step.connector_id = n.tag.connector_id;
        step.goal_config = std::get<RobotConfig>(n.goal);
        break;
      case PolicyTag::Kind::kSkill:
        step.kind = PlanStep::Kind::kSkill;
        step.skill_id = n.tag.skill_id;
        step.goal_pose = std::get<Pose>(n.goal);
        break;
    }
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

SkillRrt::SkillRrt(const Domain& domain, ConnectorSet connectors, PlannerParams params)
    : domain_(domain), connectors_(std::move(connectors)), params_(params) {
  params_.Validate();
  if (!connectors_.empty() && !connectors_.Covers(domain_)) {
    throw ConfigError("connector set does not cover every skill of domain '" + domain_.name + "'");
  }
}

void SkillRrt::Validate(const State& s0, const Pose& q_goal) const {
  if (!s0.q_obj.IsFinite() || !s0.q_r.allFinite()) throw InvalidArgument("initial state is not finite");
  if (!q_goal.IsFinite()) throw InvalidArgument("goal pose is not finite");
  if (!domain_.InAnyRegion(q_goal)) throw InvalidArgument("goal pose lies outside every region");
}

std::optional<NodeId> SkillRrt::NearGoal(std::size_t from, const Pose& q_goal) const {
  for (std::size_t i = from; i < tree_.size(); ++i) {
    const Node& n = tree_.node(i);
    if (!Extendable(n)) continue;
    if (Se3Distance(n.state.q_obj, q_goal, params_.alpha) < params_.delta_goal) return i;
  }
  return std::nullopt;
}

PlanResult SkillRrt::Finish(NodeId goal_node, const Pose& q_goal, int iterations,
                            std::int64_t sim_steps) const {
  PlanResult r;
  r.plan = PlanFromPath(tree_, Retrace(tree_, goal_node), q_goal, params_, connectors_);
  r.iterations = iterations;
  r.tree_size = tree_.size();
  r.sim_steps = sim_steps;
  r.goal_node = goal_node;
  return r;
}

PlanResult SkillRrt::Solve(const State& s0, const Pose& q_goal) {
  Validate(s0, q_goal);
  tree_.AddRoot(s0);
  std::int64_t sim_steps = 0;
  if (NearGoal(0, q_goal)) return Finish(0, q_goal, 0, sim_steps);

  Rng rng = MakeRng(params_.seed);
  for (int it = 1; it <= params_.n_max; ++it) {
    const SkillSample sample = UnifSampleSkillAndSubgoal(domain_, q_goal, params_, rng);
    const std::uint64_t ext_seed = rng();
    const SkillSpec& skill = domain_.skills[sample.skill];
    const std::size_t before = tree_.size();
    const auto v_near = GetApplicableNearestNode(tree_, skill, sample.target, domain_, params_);
    if (v_near) {
      auto ext = ComputeExtension(tree_, skill, *v_near, sample.target, connectors_, domain_, params_,
                                  ext_seed, &sim_steps);
      if (ext) CommitExtension(tree_, *v_near, std::move(*ext));
    }
    if (observer_) observer_({it, before, tree_.size(), sample.skill, sample.target, v_near});
    if (auto g = NearGoal(before, q_goal)) return Finish(*g, q_goal, it, sim_steps);
  }
  PlanResult r;
  r.iterations = params_.n_max;
  r.tree_size = tree_.size();
  r.sim_steps = sim_steps;
  return r;
}

PlanResult SkillRrt::SolveBatch(const State& s0, const Pose& q_goal) {
  Validate(s0, q_goal);
  tree_.AddRoot(s0);
  std::int64_t sim_steps = 0;
  if (NearGoal(0, q_goal)) return Finish(0, q_goal, 0, sim_steps);

  Rng rng = MakeRng(params_.seed);
  const auto batch = static_cast<std::size_t>(params_.batch_size);
  std::vector<std::optional<std::pair<NodeId, Extension>>> results(batch);
  for (int it = 1; it <= params_.n_max; ++it) {
    // Resolve every sample against the same snapshot, then commit in order.
    IterationEvent event;
    event.iteration = it;
    for (std::size_t b = 0; b < batch; ++b) {
      const SkillSample sample = UnifSampleSkillAndSubgoal(domain_, q_goal, params_, rng);
      const std::uint64_t ext_seed = rng();
      const SkillSpec& skill = domain_.skills[sample.skill];
      results[b].reset();
      const auto v_near = GetApplicableNearestNode(tree_, skill, sample.target, domain_, params_);
      event.skill = sample.skill;
      event.target = sample.target;
      event.v_near = v_near;
      if (v_near) {
        auto ext = ComputeExtension(tree_, skill, *v_near, sample.target, connectors_, domain_, params_,
                                    ext_seed, &sim_steps);
        if (ext) results[b].emplace(*v_near, std::move(*ext));
      }
    }
    const std::size_t before = tree_.size();
    for (auto& r : results) {
      if (r) CommitExtension(tree_, r->first, std::move(r->second));
    }
    if (observer_) {
      event.tree_size_before = before;
      event.tree_size_after = tree_.size();
      observer_(event);
    }
    if (auto g = NearGoal(before, q_goal)) return Finish(*g, q_goal, it, sim_steps);
  }
  PlanResult r;
  r.iterations = params_.n_max;
  r.tree_size = tree_.size();
  r.sim_steps = sim_steps;
  return r;
}

PlanResult SkillRrtSolve(const State& s0, const Pose& q_goal, const Domain& domain,
                         const ConnectorSet& connectors, const PlannerParams& params) {
  return SkillRrt(domain, connectors, params).Solve(s0, q_goal);
}

PlanResult SkillRrtBatchSolve(const State& s0, const Pose& q_goal, const Domain& domain,
                              const ConnectorSet& connectors, const PlannerParams& params) {
  return SkillRrt(domain, connectors, params).SolveBatch(s0, q_goal);
}

std::vector<State> ReplayNoiseless(const SkillPlan& plan, const Domain& domain) {
  std::vector<State> states{plan.initial_state};
  State cur = plan.initial_state;
  for (const PlanStep& step : plan.steps) {
    Rng rng = MakeRng(step.sim_seed);
    switch (step.kind) {
      case PlanStep::Kind::kTeleport:
        cur.q_r = step.goal_config;
        break;
      case PlanStep::Kind::kConnector: {
        const auto& entry = plan.connectors.ForSkill(step.skill_id);
        cur = Simulate(domain, cur, Invocation::Connector(step.skill_id, step.goal_config, entry.params),
                       nullptr, rng)
                  .state;
        break;
      }
      case PlanStep::Kind::kSkill:
        cur = Simulate(domain, cur, Invocation::Skill(step.skill_id, step.goal_pose), nullptr, rng).state;
        break;
    }
    states.push_back(cur);
  }
  return states;
}

PlanResult FlatRandomSolve(const State& s0, const Pose& q_goal, const Domain& domain,
                           const PlannerParams& params, int horizon) {
  params.Validate();
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!domain.InAnyRegion(q_goal)) throw InvalidArgument("goal pose lies outside every region");

  PlanResult result;
  PlannerParams no_goal = params;
  no_goal.p_g = 0.0;
  Rng rng = MakeRng(params.seed);
  int used = 0;
  const auto at_goal = [&](const State& s) {
    return Se3Distance(s.q_obj, q_goal, params.alpha) < params.delta_goal;
  };
  if (at_goal(s0)) {
    result.plan = SkillPlan{s0, q_goal, {}, params.seed, params, {}};
    return result;
  }
  while (used < params.n_max) {
    State cur = s0;
    std::vector<PlanStep> steps;
    for (int h = 0; h < horizon && used < params.n_max; ++h) {
      ++used;
      const SkillSample sample = UnifSampleSkillAndSubgoal(domain, q_goal, no_goal, rng);
      const std::uint64_t ext_seed = rng();
      const SkillSpec& skill = domain.skills[sample.skill];
      if (!Phi(domain, skill, cur, sample.target)) continue;
      Rng rng_pre = MakeRng(DeriveSeed(ext_seed, 0));
      RobotConfig q_pre;
      try {
        q_pre = PreContactConfig(domain, skill, cur.q_obj, sample.target, rng_pre);
      } catch (const NoPreContact&) {
        continue;
      }
      cur.q_r = q_pre;
      steps.push_back({PlanStep::Kind::kTeleport, skill.id, {}, {}, q_pre, 0});
      const std::uint64_t skill_seed = DeriveSeed(ext_seed, 2);
      Rng sim_rng = MakeRng(skill_seed);
      const SimOutcome sim = Simulate(domain, cur, Invocation::Skill(skill.id, sample.target), nullptr, sim_rng);
      result.sim_steps += sim.steps;
      cur = sim.state;
      steps.push_back({PlanStep::Kind::kSkill, skill.id, {}, sample.target, RobotConfig::Zero(), skill_seed});
      if (at_goal(cur)) {
        result.plan = SkillPlan{s0, q_goal, std::move(steps), params.seed, params, {}};
        result.iterations = used;
        return result;
      }
    }
  }
  result.iterations = used;
  return result;
}

}  // namespace skillrrt
