#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skillrrt/domain.hpp"

namespace skillrrt {

/// Domain-randomization ranges. Defaults are the card-flip column of the
/// reference randomization table.
struct NoiseConfig {
  double obj_pos_sigma = 0.003;
  double obj_rot_sigma = 0.03;
  double joint_pos_sigma = 0.005;
  double ee_pos_sigma = 0.001;
  double ee_rot_sigma = 0.01;
  Interval friction_scale{0.8, 1.2};
  Interval mass_scale{0.8, 1.2};
  double torque_sigma = 0.03;

  static NoiseConfig Zero();
  void Validate() const;
};

/// Per-episode draw of the multiplicative physical parameters.
struct NoiseContext {
  NoiseConfig config;
  double friction = 1.0;
  double mass = 1.0;

  static NoiseContext Draw(const NoiseConfig& config, Rng& rng);
  double failure_scale() const { return friction * mass; }
};

struct ConnectorParams {
  double disturbance_radius = 0.015;
  double disturbance_gain = 0.001;
  double resolution = 0.05;  // max joint-space step (L2, rad)
  int n_sim = 100;
};

struct Invocation {
  enum class Kind { kSkill, kConnector };

  Kind kind = Kind::kSkill;
  std::string skill_id;  // skill being executed, or the skill a connector serves
  Pose target;           // skill goal
  RobotConfig config_goal = RobotConfig::Zero();  // connector goal
  ConnectorParams connector;

  static Invocation Skill(std::string skill_id, const Pose& target);
  static Invocation Connector(std::string skill_id, const RobotConfig& goal,
                              const ConnectorParams& params);
};

struct SimOutcome {
  State state;
  /// Noisy observation of `state`; present only when noise was supplied.
  std::optional<State> observed;
  int steps = 0;
  /// Whether a skill established contact with the object.
  bool contact = false;
};

/// Scripted kinematic simulator. Deterministic given the rng state.
SimOutcome Simulate(const Domain& domain, const State& state, const Invocation& invocation,
                    const NoiseContext* noise, Rng& rng);

/// Joint-space straight-line path with per-step object disturbance. The first
/// element is `state` itself; the last has q_r == goal.
std::vector<State> ConnectorTrajectory(const Domain& domain, const State& state,
                                       const RobotConfig& goal, const ConnectorParams& params);

/// Push magnitude for an end-effector at distance d from the object.
double DisturbanceMagnitude(double distance, double radius, double gain);

/// Object pose with a planar (x, y, yaw) perturbation applied in the
/// coordinates of the region that contains it, clamped to the region's bounds
/// (world frame, unclamped, if no region contains it).
Pose PerturbPlanar(const Domain& domain, const Pose& pose, double dx, double dy, double dyaw);

State ObserveState(const State& state, const NoiseConfig& noise, Rng& rng);

}  // namespace skillrrt
