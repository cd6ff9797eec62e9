#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skillrrt/geometry.hpp"

namespace skillrrt {

inline constexpr int kArmJoints = 7;
inline constexpr int kRobotDof = 9;

using RobotConfig = Eigen::Matrix<double, kRobotDof, 1>;
using Twist = Eigen::Matrix<double, 6, 1>;

/// Full world state. Finger joints live in q_r[7..8]; gripper_width is the
/// commanded width and is only rewritten by connectors and skills.
struct State {
  Pose q_obj;
  Twist dq_obj = Twist::Zero();
  RobotConfig q_r = RobotConfig::Zero();
  RobotConfig dq_r = RobotConfig::Zero();
  double gripper_width = 0.0;

  friend bool operator==(const State& a, const State& b) {
    return a.q_obj == b.q_obj && a.dq_obj == b.dq_obj && a.q_r == b.q_r && a.dq_r == b.dq_r &&
           a.gripper_width == b.gripper_width;
  }
};

enum class SkillKind { kNonPrehensile, kPrehensile };

struct LockedAxes {
  bool rx = false;
  bool ry = false;
  bool rz = false;
  bool tx = false;
  bool ty = false;
  bool tz = false;
};

struct SuccessNoise {
  double pos = 0.0;  // meters, per planar axis
  double rot = 0.0;  // radians, yaw
};

struct SkillSpec {
  std::string id;
  SkillKind kind = SkillKind::kNonPrehensile;
  std::vector<std::string> region_ids;
  LockedAxes locked;
  SuccessNoise success_noise{0.002, 0.02};
  double failure_prob = 0.05;
  int n_sim = 100;
  /// NP only: end-effector approach point relative to the object position,
  /// rotated by the object yaw.
  Vec3 approach_offset = Vec3(0.0, 0.0, 0.02);
  std::string connector_id;

  bool prehensile() const { return kind == SkillKind::kPrehensile; }
};

struct GraspTemplate {
  Pose offset;  // grasp frame in the object frame
};

struct GraspModel {
  std::vector<GraspTemplate> templates;
  Vec3 reach_center = Vec3::Zero();
  double reach_radius = 1.0;
  /// End-effector-to-grasp-point distance within which contact is established.
  double capture_radius = 0.01;
};

/// Linear forward-kinematics proxy: tool position = base + map * q[0..5],
/// tool yaw = q[6]; the tool points straight down.
struct Kinematics {
  Vec3 base = Vec3::Zero();
  Eigen::Matrix<double, 3, 6> linear_map = Eigen::Matrix<double, 3, 6>::Zero();
  RobotConfig joint_lower = RobotConfig::Constant(-3.0);
  RobotConfig joint_upper = RobotConfig::Constant(3.0);
  double max_gripper_width = 0.08;
  KeypointTemplate ee_keypoints = KeypointTemplate::Box(Vec3(0.02, 0.04, 0.02), Vec3(0, 0, -0.04));
  double tip_depth = 0.0;

  Pose ToolPose(const RobotConfig& q) const;
  double FingerWidth(const RobotConfig& q) const { return q(7) + q(8); }
  std::array<Vec3, 2> TipPositions(const RobotConfig& q) const;
  Keypoints EeKeypoints(const RobotConfig& q) const;
  /// Minimum-norm joint solution placing the tool at `position` with `yaw`.
  RobotConfig Solve(const Vec3& position, double yaw, double width) const;
  bool WithinLimits(const RobotConfig& q, double tol = 1e-9) const;
};

struct DisturbanceModel {
  double radius = 0.015;  // meters
  double gain = 0.001;    // meters of push per interpolation step at zero distance
};

/// Map from domain-randomization torque noise to extra skill outcome noise.
struct TorqueCoupling {
  double to_pos = 0.01;
  double to_rot = 0.1;
};

struct ProblemSpec {
  /// Stable classes as "region/pair" where pair indexes (roll, pitch)
  /// combinations row-major over the region's roll and pitch sets.
  std::vector<std::string> start;
  std::vector<std::string> goal;
  double robot_clearance = 0.05;
};

class Domain {
 public:
  std::string name;
  std::vector<Region> regions;
  std::vector<SkillSpec> skills;
  GraspModel grasp_model;
  KeypointTemplate keypoint_template = KeypointTemplate::Box(Vec3(0.05, 0.05, 0.05));
  Kinematics kinematics;
  DisturbanceModel disturbance;
  TorqueCoupling torque;
  ProblemSpec problem;
  double connector_resolution = 0.05;  // rad per interpolation step
  int connector_n_sim = 100;
  std::uint64_t rng_seed = 0;

  /// Checks cross references and the single-prehensile-skill rule.
  void Validate() const;

  const Region& region(const std::string& id) const;
  std::optional<std::size_t> FindRegion(const std::string& id) const;
  const SkillSpec& skill(const std::string& id) const;
  std::optional<std::size_t> FindSkill(const std::string& id) const;
  std::map<std::string, std::string> ConnectorSkillMap() const;

  /// First region containing the pose (tolerance kRegionTol), or none.
  std::optional<std::size_t> RegionOf(const Pose& pose) const;
  bool InAnyRegion(const Pose& pose) const { return RegionOf(pose).has_value(); }
};

inline constexpr double kRegionTol = 1e-6;

bool PhiNp(const Domain& domain, const SkillSpec& skill, const State& state, const Pose& target);
bool PhiP(const Domain& domain, const State& state, const Pose& target);
bool Phi(const Domain& domain, const SkillSpec& skill, const State& state, const Pose& target);

/// Grasp template world pose at object pose q.
Pose GraspWorldPose(const Domain& domain, const Pose& q, std::size_t index);
bool GraspFeasible(const Domain& domain, const Pose& q, std::size_t index);
std::set<std::size_t> FeasibleGrasps(const Domain& domain, const Pose& q);
std::vector<std::size_t> CommonGrasps(const Domain& domain, const Pose& a, const Pose& b);

/// NP approach point for an object pose.
Vec3 ApproachPoint(const SkillSpec& skill, const Pose& q_obj);
/// Yaw of a pose's x axis projected onto the horizontal plane.
double HeadingYaw(const Pose& pose);

/// Pre-contact robot configuration. Throws NoPreContact for a prehensile
/// skill without a shared feasible grasp.
RobotConfig PreContactConfig(const Domain& domain, const SkillSpec& skill, const Pose& q_obj,
                             const Pose& q_target, Rng& rng);

}  // namespace skillrrt
