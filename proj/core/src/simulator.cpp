#include "skillrrt/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "skillrrt/error.hpp"

namespace skillrrt {

NoiseConfig NoiseConfig::Zero() {
  NoiseConfig n;
  n.obj_pos_sigma = n.obj_rot_sigma = n.joint_pos_sigma = n.ee_pos_sigma = n.ee_rot_sigma = 0.0;
  n.friction_scale = {1.0, 1.0};
  n.mass_scale = {1.0, 1.0};
  n.torque_sigma = 0.0;
  return n;
}

void NoiseConfig::Validate() const {
  for (double s : {obj_pos_sigma, obj_rot_sigma, joint_pos_sigma, ee_pos_sigma, ee_rot_sigma, torque_sigma}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise sigmas must be finite and >= 0");
  }
  for (const Interval& r : {friction_scale, mass_scale}) {
    if (!(r.lo <= r.hi) || r.lo < 0.0 || !std::isfinite(r.hi)) {
      throw ConfigError("noise scale ranges must satisfy 0 <= lo <= hi");
    }
  }
}

NoiseContext NoiseContext::Draw(const NoiseConfig& config, Rng& rng) {
  NoiseContext ctx;
  ctx.config = config;
  ctx.friction = UniformIn(rng, config.friction_scale.lo, config.friction_scale.hi);
  ctx.mass = UniformIn(rng, config.mass_scale.lo, config.mass_scale.hi);
  return ctx;
}

Invocation Invocation::Skill(std::string skill_id, const Pose& target) {
  Invocation inv;
  inv.kind = Kind::kSkill;
  inv.skill_id = std::move(skill_id);
  inv.target = target;
  return inv;
}

Invocation Invocation::Connector(std::string skill_id, const RobotConfig& goal,
                                 const ConnectorParams& params) {
  Invocation inv;
  inv.kind = Kind::kConnector;
  inv.skill_id = std::move(skill_id);
  inv.config_goal = goal;
  inv.connector = params;
  return inv;
}

double DisturbanceMagnitude(double distance, double radius, double gain) {
  if (radius <= 0.0) return 0.0;
  return gain * std::max(0.0, 1.0 - distance / radius);
}

Pose PerturbPlanar(const Domain& domain, const Pose& pose, double dx, double dy, double dyaw) {
  if (dx == 0.0 && dy == 0.0 && dyaw == 0.0) return pose;
  const auto index = domain.RegionOf(pose);
  if (!index) {
    const Quat spin(Eigen::AngleAxisd(dyaw, Vec3::UnitZ()));
    return Pose(pose.position() + Vec3(dx, dy, 0.0), spin * pose.orientation());
  }
  // Perturb in region coordinates and clamp back onto the region.
  const Region& region = domain.regions[*index];
  const RegionCoords c = *DecomposeInRegion(region, pose, kRegionTol);
  const double x = std::clamp(c.x + dx, region.x.lo, region.x.hi);
  const double y = std::clamp(c.y + dy, region.y.lo, region.y.hi);
  double yaw = c.yaw + dyaw;
  if (region.yaw.width < 2.0 * kPi) {
    const double offset = WrapAngle(yaw - region.yaw.start - 0.5 * region.yaw.width);
    yaw = region.yaw.start + 0.5 * region.yaw.width +
          std::clamp(offset, -0.5 * region.yaw.width, 0.5 * region.yaw.width);
  }
  return region.PoseAt(x, y, WrapAngle(yaw), c.roll, c.pitch);
}

namespace {

Pose Interpolate(const Pose& a, const Pose& b, double f) {
  return Pose(a.position() + f * (b.position() - a.position()),
              a.orientation().slerp(f, b.orientation()));
}

void ZeroVelocities(State& s) {
  s.dq_obj.setZero();
  s.dq_r.setZero();
}

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct SkillNoise {
  double fail_p;
  double sigma_pos;
  double sigma_rot;
};

SkillNoise EffectiveNoise(const Domain& domain, const SkillSpec& skill, const NoiseContext* noise) {
  SkillNoise out{skill.failure_prob, skill.success_noise.pos, skill.success_noise.rot};
  if (noise != nullptr) {
    // Keeps failure_prob 0 and 1 fixed; equals failure_prob at scale 1.
    out.fail_p = Clamp01(1.0 - std::pow(1.0 - skill.failure_prob, noise->failure_scale()));
    out.sigma_pos += domain.torque.to_pos * noise->config.torque_sigma;
    out.sigma_rot += domain.torque.to_rot * noise->config.torque_sigma;
  }
  return out;
}

// Fixed draw order so outcomes depend only on the rng state, never on branch.
struct OutcomeDraws {
  double u;
  double frac;
  double dx;
  double dy;
  double dyaw;
};

OutcomeDraws DrawOutcome(Rng& rng, const SkillNoise& sn) {
  OutcomeDraws d{};
  d.u = Uniform01(rng);
  d.frac = Uniform01(rng);
  d.dx = Gaussian(rng, sn.sigma_pos);
  d.dy = Gaussian(rng, sn.sigma_pos);
  d.dyaw = Gaussian(rng, sn.sigma_rot);
  return d;
}

SimOutcome SimulateNonPrehensile(const Domain& domain, const SkillSpec& skill, const State& state,
                                 const Pose& target, const NoiseContext* noise, Rng& rng) {
  const Kinematics& kin = domain.kinematics;
  const SkillNoise sn = EffectiveNoise(domain, skill, noise);
  const OutcomeDraws d = DrawOutcome(rng, sn);

  SimOutcome out;
  out.state = state;
  out.steps = skill.n_sim;
  const Vec3 ee = kin.ToolPose(state.q_r).position();
  out.contact = (ee - ApproachPoint(skill, state.q_obj)).norm() <= domain.grasp_model.capture_radius;
  if (out.contact) {
    if (d.u >= sn.fail_p) {
      out.state.q_obj = PerturbPlanar(domain, target, d.dx, d.dy, d.dyaw);
    } else {
      // Pushed part of the way; leaves the object short of the goal.
      out.state.q_obj = Interpolate(state.q_obj, target, 0.2 + 0.6 * d.frac);
    }
    const Pose& obj = out.state.q_obj;
    out.state.q_r = kin.Solve(ApproachPoint(skill, obj), HeadingYaw(obj), kin.FingerWidth(state.q_r));
    out.state.gripper_width = kin.FingerWidth(out.state.q_r);
  }
  ZeroVelocities(out.state);
  return out;
}

SimOutcome SimulatePrehensile(const Domain& domain, const SkillSpec& skill, const State& state,
                              const Pose& target, const NoiseContext* noise, Rng& rng) {
  const Kinematics& kin = domain.kinematics;
  const GraspModel& gm = domain.grasp_model;
  const SkillNoise sn = EffectiveNoise(domain, skill, noise);

  // Perception error of the object pose; the grasp is executed against it.
  double ex = 0.0, ey = 0.0, eyaw = 0.0;
  if (noise != nullptr) {
    ex = Gaussian(rng, noise->config.obj_pos_sigma);
    ey = Gaussian(rng, noise->config.obj_pos_sigma);
    eyaw = Gaussian(rng, noise->config.obj_rot_sigma);
  }
  const OutcomeDraws d = DrawOutcome(rng, sn);

  SimOutcome out;
  out.state = state;
  out.steps = skill.n_sim;

  const Pose perceived = PerturbPlanar(domain, state.q_obj, ex, ey, eyaw);
  const Vec3 ee = kin.ToolPose(state.q_r).position();
  std::optional<std::size_t> grasp;
  double best = gm.capture_radius;
  for (std::size_t j = 0; j < gm.templates.size(); ++j) {
    const double dist = (GraspWorldPose(domain, state.q_obj, j).position() - ee).norm();
    if (dist <= best) {
      best = dist;
      grasp = j;
    }
  }
  const bool open = kin.FingerWidth(state.q_r) >= 0.5 * kin.max_gripper_width;
  const Pose perceived_target = PerturbPlanar(domain, target, ex, ey, eyaw);
  out.contact = grasp && open && GraspFeasible(domain, perceived, *grasp) &&
                GraspFeasible(domain, perceived_target, *grasp);

  if (out.contact) {
    if (d.u >= sn.fail_p) {
      out.state.q_obj = PerturbPlanar(domain, target, d.dx, d.dy, d.dyaw);
      const Pose g = GraspWorldPose(domain, out.state.q_obj, *grasp);
      out.state.q_r = kin.Solve(g.position(), HeadingYaw(g), 0.0);
      out.state.gripper_width = 0.0;
    } else {
      // Dropped somewhere along the carry path.
      const Pose drop = Interpolate(state.q_obj, target, d.frac);
      out.state.q_obj = Pose(drop.position() + Vec3(d.dx, d.dy, 0.0), drop.orientation());
      const Pose g = GraspWorldPose(domain, drop, *grasp);
      out.state.q_r = kin.Solve(g.position(), HeadingYaw(g), kin.max_gripper_width);
      out.state.gripper_width = kin.max_gripper_width;
    }
  }
  ZeroVelocities(out.state);
  return out;
}

}  // namespace

std::vector<State> ConnectorTrajectory(const Domain& domain, const State& state,
                                       const RobotConfig& goal, const ConnectorParams& params) {
  const Kinematics& kin = domain.kinematics;
  std::vector<State> traj{state};
  const RobotConfig delta = goal - state.q_r;
  const double length = delta.norm();
  if (length == 0.0) return traj;
  const int steps = std::max(1, static_cast<int>(std::ceil(length / params.resolution)));

  const Vec3 obj0 = state.q_obj.position();
  Vec3 prev_ee = kin.ToolPose(state.q_r).position();
  State cur = state;
  traj.reserve(steps + 1);
  for (int i = 1; i <= steps; ++i) {
    cur.q_r = i == steps ? goal : RobotConfig(state.q_r + (static_cast<double>(i) / steps) * delta);
    const Vec3 ee = kin.ToolPose(cur.q_r).position();
    const double mag = DisturbanceMagnitude((ee - obj0).norm(), params.disturbance_radius,
                                            params.disturbance_gain);
    if (mag > 0.0) {
      Vec3 dir = ee - prev_ee;
      dir.z() = 0.0;
      if (dir.norm() < 1e-12) {
        dir = obj0 - ee;
        dir.z() = 0.0;
      }
      if (dir.norm() >= 1e-12) {
        cur.q_obj = Pose(cur.q_obj.position() + mag * dir.normalized(), cur.q_obj.orientation());
      }
    }
    prev_ee = ee;
    traj.push_back(cur);
  }
  return traj;
}

SimOutcome Simulate(const Domain& domain, const State& state, const Invocation& inv,
                    const NoiseContext* noise, Rng& rng) {
  const SkillSpec& skill = domain.skill(inv.skill_id);
  SimOutcome out;
  if (inv.kind == Invocation::Kind::kConnector) {
    if (!domain.kinematics.WithinLimits(inv.config_goal)) {
      throw InvalidArgument("connector goal outside joint limits");
    }
    out.state = ConnectorTrajectory(domain, state, inv.config_goal, inv.connector).back();
    if (out.state.q_r != state.q_r) {
      out.state.gripper_width = domain.kinematics.FingerWidth(out.state.q_r);
    }
    out.steps = inv.connector.n_sim;
    ZeroVelocities(out.state);
  } else if (skill.prehensile()) {
    out = SimulatePrehensile(domain, skill, state, inv.target, noise, rng);
  } else {
    out = SimulateNonPrehensile(domain, skill, state, inv.target, noise, rng);
  }
  if (noise != nullptr) out.observed = ObserveState(out.state, noise->config, rng);
  return out;
}

State ObserveState(const State& state, const NoiseConfig& noise, Rng& rng) {
  State obs = state;
  const Vec3 dp(Gaussian(rng, noise.obj_pos_sigma), Gaussian(rng, noise.obj_pos_sigma),
                Gaussian(rng, noise.obj_pos_sigma));
  const Vec3 dr(Gaussian(rng, noise.obj_rot_sigma), Gaussian(rng, noise.obj_rot_sigma),
                Gaussian(rng, noise.obj_rot_sigma));
  Quat rot = Quat::Identity();
  if (dr.norm() > 0.0) rot = Quat(Eigen::AngleAxisd(dr.norm(), dr.normalized()));
  obs.q_obj = Pose(state.q_obj.position() + dp, rot * state.q_obj.orientation());
  for (int i = 0; i < kRobotDof; ++i) obs.q_r(i) += Gaussian(rng, noise.joint_pos_sigma);
  return obs;
}

}  // namespace skillrrt
