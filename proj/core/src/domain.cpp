#include "skillrrt/domain.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "skillrrt/error.hpp"

namespace skillrrt {

Pose Kinematics::ToolPose(const RobotConfig& q) const {
  const Vec3 p = base + linear_map * q.head<6>();
  // Tool z axis points down: Rz(yaw) * Rx(pi).
  return Pose::FromXyzRpy(p, kPi, 0.0, q(6));
}

std::array<Vec3, 2> Kinematics::TipPositions(const RobotConfig& q) const {
  const Pose tool = ToolPose(q);
  const double half = 0.5 * FingerWidth(q);
  return {tool.Transform(Vec3(0.0, half, tip_depth)), tool.Transform(Vec3(0.0, -half, tip_depth))};
}

Keypoints Kinematics::EeKeypoints(const RobotConfig& q) const {
  return KeypointsOf(ToolPose(q), ee_keypoints);
}

RobotConfig Kinematics::Solve(const Vec3& position, double yaw, double width) const {
  const Eigen::Matrix<double, 6, 3> pinv =
      linear_map.completeOrthogonalDecomposition().pseudoInverse();
  RobotConfig q = RobotConfig::Zero();
  q.head<6>() = pinv * (position - base);
  q(6) = WrapAngle(yaw);
  q(7) = 0.5 * width;
  q(8) = 0.5 * width;
  return q;
}

bool Kinematics::WithinLimits(const RobotConfig& q, double tol) const {
  for (int i = 0; i < kRobotDof; ++i) {
    if (!(q(i) >= joint_lower(i) - tol && q(i) <= joint_upper(i) + tol)) return false;
  }
  return true;
}

void Domain::Validate() const {
  if (regions.empty()) throw ConfigError("domain '" + name + "' has no regions");
  for (const auto& r : regions) r.Validate();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (regions[i].id == regions[j].id) throw ConfigError("duplicate region id '" + regions[i].id + "'");
    }
  }
  if (skills.empty()) throw ConfigError("domain '" + name + "' has no skills");
  int prehensile = 0;
  for (const auto& s : skills) {
    if (s.id.empty()) throw ConfigError("skill id must not be empty");
    if (s.region_ids.empty()) throw ConfigError("skill '" + s.id + "' has no regions");
    for (const auto& rid : s.region_ids) {
      if (!FindRegion(rid)) throw ConfigError("skill '" + s.id + "' references unknown region '" + rid + "'");
    }
    if (!(s.failure_prob >= 0.0 && s.failure_prob <= 1.0)) {
      throw ConfigError("skill '" + s.id + "': failure_prob must lie in [0, 1]");
    }
    if (s.n_sim < 1) throw ConfigError("skill '" + s.id + "': n_sim must be >= 1");
    if (s.success_noise.pos < 0.0 || s.success_noise.rot < 0.0) {
      throw ConfigError("skill '" + s.id + "': success noise must be >= 0");
    }
    if (s.prehensile()) ++prehensile;
  }
  if (prehensile != 1) {
    throw ConfigError("domain '" + name + "' must define exactly one prehensile skill, found " +
                      std::to_string(prehensile));
  }
  if (grasp_model.templates.empty()) throw ConfigError("grasp model needs at least one template");
  if (!(grasp_model.reach_radius > 0.0)) throw ConfigError("grasp reach_radius must be > 0");
  if (!(kinematics.max_gripper_width > 0.0)) throw ConfigError("max_gripper_width must be > 0");
  if (!(connector_resolution > 0.0)) throw ConfigError("connector resolution must be > 0");
  if (disturbance.radius < 0.0 || disturbance.gain < 0.0) {
    throw ConfigError("disturbance radius and gain must be >= 0");
  }
}

std::optional<std::size_t> Domain::FindRegion(const std::string& id) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].id == id) return i;
  }
  return std::nullopt;
}

const Region& Domain::region(const std::string& id) const {
  if (auto i = FindRegion(id)) return regions[*i];
  throw ConfigError("unknown region id '" + id + "'");
}

std::optional<std::size_t> Domain::FindSkill(const std::string& id) const {
  for (std::size_t i = 0; i < skills.size(); ++i) {
    if (skills[i].id == id) return i;
  }
  return std::nullopt;
}

const SkillSpec& Domain::skill(const std::string& id) const {
  if (auto i = FindSkill(id)) return skills[*i];
  throw ConfigError("unknown skill id '" + id + "'");
}

std::map<std::string, std::string> Domain::ConnectorSkillMap() const {
  std::map<std::string, std::string> out;
  for (const auto& s : skills) {
    out[s.id] = s.connector_id.empty() ? s.id + "_connector" : s.connector_id;
  }
  return out;
}

std::optional<std::size_t> Domain::RegionOf(const Pose& pose) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (RegionContains(regions[i], pose, kRegionTol)) return i;
  }
  return std::nullopt;
}

namespace {

constexpr double kAxisTol = 1e-6;

bool AngleEqual(double a, double b) { return std::abs(WrapAngle(a - b)) <= kAxisTol; }

}  // namespace

bool PhiNp(const Domain& domain, const SkillSpec& skill, const State& state, const Pose& target) {
  for (const auto& rid : skill.region_ids) {
    const Region& region = domain.region(rid);
    const auto a = DecomposeInRegion(region, state.q_obj, kRegionTol);
    if (!a) continue;
    const auto b = DecomposeInRegion(region, target, kRegionTol);
    if (!b) continue;
    const LockedAxes& lk = skill.locked;
    if (lk.rx && !AngleEqual(a->roll, b->roll)) continue;
    if (lk.ry && !AngleEqual(a->pitch, b->pitch)) continue;
    if (lk.rz && !AngleEqual(a->yaw, b->yaw)) continue;
    if (lk.tx && std::abs(a->x - b->x) > kAxisTol) continue;
    if (lk.ty && std::abs(a->y - b->y) > kAxisTol) continue;
    if (lk.tz && std::abs(a->z - b->z) > kAxisTol) continue;
    return true;
  }
  return false;
}

Pose GraspWorldPose(const Domain& domain, const Pose& q, std::size_t index) {
  return q.Compose(domain.grasp_model.templates.at(index).offset);
}

bool GraspFeasible(const Domain& domain, const Pose& q, std::size_t index) {
  const Vec3 p = GraspWorldPose(domain, q, index).position();
  const GraspModel& gm = domain.grasp_model;
  if ((p - gm.reach_center).norm() > gm.reach_radius) return false;
  const auto region = domain.RegionOf(q);
  if (!region) return false;
  for (const auto& hs : domain.regions[*region].blocked) {
    if (hs.Blocks(p)) return false;
  }
  return true;
}

std::set<std::size_t> FeasibleGrasps(const Domain& domain, const Pose& q) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < domain.grasp_model.templates.size(); ++i) {
    if (GraspFeasible(domain, q, i)) out.insert(i);
  }
  return out;
}

std::vector<std::size_t> CommonGrasps(const Domain& domain, const Pose& a, const Pose& b) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < domain.grasp_model.templates.size(); ++i) {
    if (GraspFeasible(domain, a, i) && GraspFeasible(domain, b, i)) out.push_back(i);
  }
  return out;
}

bool PhiP(const Domain& domain, const State& state, const Pose& target) {
  if (!domain.InAnyRegion(state.q_obj) || !domain.InAnyRegion(target)) return false;
  return !CommonGrasps(domain, state.q_obj, target).empty();
}

bool Phi(const Domain& domain, const SkillSpec& skill, const State& state, const Pose& target) {
  return skill.prehensile() ? PhiP(domain, state, target) : PhiNp(domain, skill, state, target);
}

double HeadingYaw(const Pose& pose) {
  const Vec3 x = pose.rotation().col(0);
  if (x.head<2>().norm() < 1e-12) {
    const Vec3 y = pose.rotation().col(1);
    return std::atan2(y.y(), y.x()) - 0.5 * kPi;
  }
  return std::atan2(x.y(), x.x());
}

Vec3 ApproachPoint(const SkillSpec& skill, const Pose& q_obj) {
  const double yaw = HeadingYaw(q_obj);
  return q_obj.position() + Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * skill.approach_offset;
}

RobotConfig PreContactConfig(const Domain& domain, const SkillSpec& skill, const Pose& q_obj,
                             const Pose& q_target, Rng& rng) {
  const Kinematics& kin = domain.kinematics;
  if (!skill.prehensile()) {
    return kin.Solve(ApproachPoint(skill, q_obj), HeadingYaw(q_obj), 0.0);
  }
  const auto common = CommonGrasps(domain, q_obj, q_target);
  if (common.empty()) {
    throw NoPreContact("skill '" + skill.id + "': no grasp shared by current and desired pose");
  }
  const std::size_t pick = common.size() == 1 ? common.front() : common[UniformIndex(rng, common.size())];
  const Pose grasp = GraspWorldPose(domain, q_obj, pick);
  return kin.Solve(grasp.position(), HeadingYaw(grasp), kin.max_gripper_width);
}

}  // namespace skillrrt
