#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillrrt/domain.hpp"
#include "skillrrt/problem.hpp"
#include "skillrrt/simulator.hpp"

namespace skillrrt {

struct PlannerParams;

/// Reward hyperparameters. w_move and w_grasp are stored as magnitudes; the
/// evaluators apply the penalty sign themselves.
struct RewardParams {
  // connector
  double eps_ee_0 = 40.0;
  double eps_ee_1 = 0.9;
  double eps_tip_0 = 40.0;
  double eps_tip_1 = 1.0;
  double w_move = 0.3;
  double r_succ_connector = 1000.0;
  double delta_ee = 0.01;
  double delta_tip = 0.003;
  // non-prehensile
  double eps_obj_0 = 0.02;
  double eps_obj_1 = 0.02;
  double eps_tipobj_0 = 0.0;
  double eps_tipobj_1 = 0.0;
  double r_succ_np = 1000.0;
  // prehensile
  double eps_pobj_0 = 0.2;
  double eps_pobj_1 = 0.02;
  double eps_rot_0 = 0.0;
  double eps_rot_1 = 0.0;
  double w_grasp = 0.0;
  double r_succ_p = 1000.0;
  // shared success threshold
  double delta_obj = 0.005;
  double alpha = kDefaultAlpha;

  void Validate() const;
};

/// Domain-level defaults plus per-skill overrides.
struct RewardSet {
  RewardParams base;
  std::map<std::string, RewardParams> per_skill;

  const RewardParams& ForSkill(const std::string& skill_id) const;
};

struct ConnectorReward {
  double r_ee = 0.0;
  double r_tip = 0.0;
  double r_obj_move = 0.0;
  double r_success = 0.0;
  double total = 0.0;
};

struct NpReward {
  double r_obj = 0.0;
  double r_tip_contact = 0.0;
  double r_success = 0.0;
  double total = 0.0;
};

struct PReward {
  double r_obj = 0.0;
  double r_rot = 0.0;
  double r_grasp = 0.0;
  double r_success = 0.0;
  double total = 0.0;
};

/// Exponential potential difference eps0 * (exp(-eps1*d_curr) - exp(-eps1*d_prev)).
double ExpPotentialDelta(double eps0, double eps1, double d_prev, double d_curr);
/// Rational potential difference eps0/(d_curr+eps1) - eps0/(d_prev+eps1);
/// zero when eps0 is zero.
double RationalPotentialDelta(double eps0, double eps1, double d_prev, double d_curr);

ConnectorReward EvaluateConnectorReward(const State& prev, const State& curr,
                                        const RobotConfig& goal_config, const RewardParams& params,
                                        const Domain& domain);
NpReward EvaluateNpReward(const State& prev, const State& curr, const Pose& target,
                          const RewardParams& params, const Domain& domain);
PReward EvaluatePReward(const State& prev, const State& curr, const Pose& target,
                        const RewardParams& params, const Domain& domain);

/// End-effector keypoints expressed in the object frame.
Keypoints RelativeEeKeypoints(const Domain& domain, const RobotConfig& q_r, const Pose& q_obj);

/// Scripted connectors keyed by skill id. An empty set selects lazy planning.
class ConnectorSet {
 public:
  ConnectorSet() = default;

  static ConnectorSet Empty() { return {}; }
  /// One connector per skill using the domain's disturbance model.
  static ConnectorSet Scripted(const Domain& domain);

  bool empty() const { return by_skill_.empty(); }
  void Add(const std::string& skill_id, const std::string& connector_id, const ConnectorParams& p);
  bool Covers(const Domain& domain) const;

  struct Entry {
    std::string connector_id;
    ConnectorParams params;
  };
  /// Throws ConfigError when the skill has no connector.
  const Entry& ForSkill(const std::string& skill_id) const;
  const std::map<std::string, Entry>& entries() const { return by_skill_; }

 private:
  std::map<std::string, Entry> by_skill_;
};

/// Straight joint-space interpolation to `goal` with the domain disturbance
/// applied per step. Throws InvalidArgument for goals outside joint limits.
std::vector<State> ScriptedConnector(const Domain& domain, const State& state,
                                     const RobotConfig& goal, const ConnectorParams& params);

struct ConnectorProblem {
  State start_state;
  RobotConfig target_robot_config = RobotConfig::Zero();
  std::string skill_id;
  std::size_t problem_index = 0;
};

struct MiningSummary {
  std::vector<ConnectorProblem> problems;
  std::size_t solved = 0;
  std::size_t unsolved = 0;
  std::vector<std::size_t> unsolved_indices;
  std::size_t teleport_nodes = 0;
};

/// Runs lazy planning per problem and turns every teleport on each solution
/// path into a connector problem. Results are ordered by problem index.
MiningSummary MineConnectorProblems(const std::vector<Problem>& problems, const Domain& domain,
                                    const PlannerParams& params);

}  // namespace skillrrt
