#include "skillrrt/connector.hpp"

#include <cmath>

#include "skillrrt/error.hpp"
#include "skillrrt/planner.hpp"

namespace skillrrt {

void RewardParams::Validate() const {
  const double all[] = {eps_ee_0,  eps_ee_1,     eps_tip_0,    eps_tip_1, w_move,    r_succ_connector,
                        delta_ee,  delta_tip,    eps_obj_0,    eps_obj_1, eps_tipobj_0, eps_tipobj_1,
                        r_succ_np, eps_pobj_0,   eps_pobj_1,   eps_rot_0, eps_rot_1, w_grasp,
                        r_succ_p,  delta_obj,    alpha};
  for (double v : all) {
    if (!std::isfinite(v)) throw ConfigError("reward parameters must be finite");
  }
  if (!(delta_ee > 0.0 && delta_tip > 0.0 && delta_obj > 0.0)) {
    throw ConfigError("reward thresholds must be > 0");
  }
  if (w_move < 0.0 || w_grasp < 0.0) throw ConfigError("w_move and w_grasp are magnitudes and must be >= 0");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
}

const RewardParams& RewardSet::ForSkill(const std::string& skill_id) const {
  auto it = per_skill.find(skill_id);
  return it == per_skill.end() ? base : it->second;
}

double ExpPotentialDelta(double eps0, double eps1, double d_prev, double d_curr) {
  return eps0 * (std::exp(-eps1 * d_curr) - std::exp(-eps1 * d_prev));
}

double RationalPotentialDelta(double eps0, double eps1, double d_prev, double d_curr) {
  if (eps0 == 0.0) return 0.0;
  return eps0 / (d_curr + eps1) - eps0 / (d_prev + eps1);
}

namespace {

void RequireFinite(const State& s, const char* what) {
  if (!s.q_obj.IsFinite() || !s.q_r.allFinite() || !std::isfinite(s.gripper_width)) {
    throw InvalidArgument(std::string(what) + ": non-finite state");
  }
}

double TipDistance(const std::array<Vec3, 2>& a, const std::array<Vec3, 2>& b) {
  return std::sqrt((a[0] - b[0]).squaredNorm() + (a[1] - b[1]).squaredNorm());
}

double TipToObject(const Kinematics& kin, const State& s) {
  const auto tips = kin.TipPositions(s.q_r);
  const Vec3& c = s.q_obj.position();
  return std::sqrt((tips[0] - c).squaredNorm() + (tips[1] - c).squaredNorm());
}

}  // namespace

ConnectorReward EvaluateConnectorReward(const State& prev, const State& curr,
                                        const RobotConfig& goal_config, const RewardParams& params,
                                        const Domain& domain) {
  RequireFinite(prev, "connector_reward");
  RequireFinite(curr, "connector_reward");
  if (!goal_config.allFinite()) throw InvalidArgument("connector_reward: non-finite goal");
  const Kinematics& kin = domain.kinematics;

  const Keypoints goal_ee = kin.EeKeypoints(goal_config);
  const double ee_prev = KeypointDistance(kin.EeKeypoints(prev.q_r), goal_ee);
  const double ee_curr = KeypointDistance(kin.EeKeypoints(curr.q_r), goal_ee);
  const auto goal_tips = kin.TipPositions(goal_config);
  const double tip_prev = TipDistance(kin.TipPositions(prev.q_r), goal_tips);
  const double tip_curr = TipDistance(kin.TipPositions(curr.q_r), goal_tips);

  ConnectorReward r;
  r.r_ee = ExpPotentialDelta(params.eps_ee_0, params.eps_ee_1, ee_prev, ee_curr);
  r.r_tip = ExpPotentialDelta(params.eps_tip_0, params.eps_tip_1, tip_prev, tip_curr);
  // RMS keypoint displacement.
  const double moved = KeypointDistance(KeypointsOf(curr.q_obj, domain.keypoint_template),
                                        KeypointsOf(prev.q_obj, domain.keypoint_template)) /
                       std::sqrt(8.0);
  r.r_obj_move = -params.w_move * moved;
  const bool width_ok = std::abs(curr.gripper_width - kin.FingerWidth(goal_config)) <= 1e-6;
  if (ee_curr < params.delta_ee && tip_curr < params.delta_tip && width_ok) {
    r.r_success = params.r_succ_connector;
  }
  r.total = r.r_ee + r.r_tip + r.r_obj_move + r.r_success;
  return r;
}

NpReward EvaluateNpReward(const State& prev, const State& curr, const Pose& target,
                          const RewardParams& params, const Domain& domain) {
  RequireFinite(prev, "np_reward");
  RequireFinite(curr, "np_reward");
  if (!target.IsFinite()) throw InvalidArgument("np_reward: non-finite target");
  const Keypoints goal = KeypointsOf(target, domain.keypoint_template);
  const double d_prev = KeypointDistance(KeypointsOf(prev.q_obj, domain.keypoint_template), goal);
  const double d_curr = KeypointDistance(KeypointsOf(curr.q_obj, domain.keypoint_template), goal);

  NpReward r;
  r.r_obj = RationalPotentialDelta(params.eps_obj_0, params.eps_obj_1, d_prev, d_curr);
  r.r_tip_contact = RationalPotentialDelta(params.eps_tipobj_0, params.eps_tipobj_1,
                                           TipToObject(domain.kinematics, prev),
                                           TipToObject(domain.kinematics, curr));
  if (Se3Distance(curr.q_obj, target, params.alpha) < params.delta_obj) r.r_success = params.r_succ_np;
  r.total = r.r_obj + r.r_tip_contact + r.r_success;
  return r;
}

Keypoints RelativeEeKeypoints(const Domain& domain, const RobotConfig& q_r, const Pose& q_obj) {
  return TransformPoints(q_obj.Inverse(), domain.kinematics.EeKeypoints(q_r));
}

PReward EvaluatePReward(const State& prev, const State& curr, const Pose& target,
                        const RewardParams& params, const Domain& domain) {
  RequireFinite(prev, "p_reward");
  RequireFinite(curr, "p_reward");
  if (!target.IsFinite()) throw InvalidArgument("p_reward: non-finite target");
  const Keypoints goal = KeypointsOf(target, domain.keypoint_template);
  const double d_prev = KeypointDistance(KeypointsOf(prev.q_obj, domain.keypoint_template), goal);
  const double d_curr = KeypointDistance(KeypointsOf(curr.q_obj, domain.keypoint_template), goal);
  const double rot_prev = RotationAngle(prev.q_obj.orientation(), target.orientation());
  const double rot_curr = RotationAngle(curr.q_obj.orientation(), target.orientation());

  PReward r;
  r.r_obj = RationalPotentialDelta(params.eps_pobj_0, params.eps_pobj_1, d_prev, d_curr);
  r.r_rot = RationalPotentialDelta(params.eps_rot_0, params.eps_rot_1, rot_prev, rot_curr);
  r.r_grasp = -params.w_grasp * KeypointDistance(RelativeEeKeypoints(domain, curr.q_r, curr.q_obj),
                                                 RelativeEeKeypoints(domain, prev.q_r, prev.q_obj));
  if (Se3Distance(curr.q_obj, target, params.alpha) < params.delta_obj) r.r_success = params.r_succ_p;
  r.total = r.r_obj + r.r_rot + r.r_grasp + r.r_success;
  return r;
}

ConnectorSet ConnectorSet::Scripted(const Domain& domain) {
  ConnectorParams p;
  p.disturbance_radius = domain.disturbance.radius;
  p.disturbance_gain = domain.disturbance.gain;
  p.resolution = domain.connector_resolution;
  p.n_sim = domain.connector_n_sim;
  ConnectorSet set;
  for (const auto& [skill, conn] : domain.ConnectorSkillMap()) set.Add(skill, conn, p);
  return set;
}

void ConnectorSet::Add(const std::string& skill_id, const std::string& connector_id,
                       const ConnectorParams& p) {
  if (!(p.resolution > 0.0)) throw ConfigError("connector '" + connector_id + "': resolution must be > 0");
  if (p.disturbance_radius < 0.0 || p.disturbance_gain < 0.0) {
    throw ConfigError("connector '" + connector_id + "': disturbance radius and gain must be >= 0");
  }
  by_skill_[skill_id] = Entry{connector_id, p};
}

bool ConnectorSet::Covers(const Domain& domain) const {
  for (const auto& s : domain.skills) {
    if (!by_skill_.count(s.id)) return false;
  }
  return true;
}

const ConnectorSet::Entry& ConnectorSet::ForSkill(const std::string& skill_id) const {
  auto it = by_skill_.find(skill_id);
  if (it == by_skill_.end()) throw ConfigError("no connector mapped for skill '" + skill_id + "'");
  return it->second;
}

std::vector<State> ScriptedConnector(const Domain& domain, const State& state,
                                     const RobotConfig& goal, const ConnectorParams& params) {
  if (!goal.allFinite() || !domain.kinematics.WithinLimits(goal)) {
    throw InvalidArgument("scripted_connector: goal outside joint limits");
  }
  std::vector<State> traj = ConnectorTrajectory(domain, state, goal, params);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    traj[i].gripper_width = domain.kinematics.FingerWidth(traj[i].q_r);
  }
  return traj;
}

MiningSummary MineConnectorProblems(const std::vector<Problem>& problems, const Domain& domain,
                                    const PlannerParams& params) {
  MiningSummary summary;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    PlannerParams p = params;
    p.seed = DeriveSeed(params.seed, i);
    p.forbid_teleport = false;
    SkillRrt planner(domain, ConnectorSet::Empty(), p);
    const PlanResult result = planner.Solve(problems[i].s0, problems[i].goal);
    if (!result.goal_node) {
      ++summary.unsolved;
      summary.unsolved_indices.push_back(i);
      continue;
    }
    ++summary.solved;
    const PlanTree& tree = planner.tree();
    const auto path = Retrace(tree, *result.goal_node);
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
      const Node& v = tree.node(path[k]);
      if (v.tag.kind != PolicyTag::Kind::kNone) continue;
      ConnectorProblem cp;
      cp.start_state = tree.node(path[k - 1]).state;
      cp.target_robot_config = v.state.q_r;
      cp.skill_id = tree.node(path[k + 1]).tag.skill_id;
      cp.problem_index = i;
      summary.problems.push_back(std::move(cp));
      ++summary.teleport_nodes;
    }
  }
  return summary;
}

}  // namespace skillrrt
