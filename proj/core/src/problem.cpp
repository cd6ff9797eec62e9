#include "skillrrt/problem.hpp"

#include <cmath>

#include "skillrrt/error.hpp"

namespace skillrrt {

PoseClass ParsePoseClass(const Domain& domain, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw ConfigError("pose class '" + text + "' must be 'region/pair'");
  const std::string rid = text.substr(0, slash);
  const auto r = domain.FindRegion(rid);
  if (!r) throw ConfigError("pose class '" + text + "' names unknown region '" + rid + "'");
  const Region& region = domain.regions[*r];
  std::size_t pair = 0;
  try {
    std::size_t used = 0;
    pair = std::stoul(text.substr(slash + 1), &used);
    if (used != text.size() - slash - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError("pose class '" + text + "' has a malformed pair index");
  }
  const std::size_t n_pitch = region.pitches.size();
  if (pair >= region.rolls.size() * n_pitch) {
    throw ConfigError("pose class '" + text + "' pair index out of range");
  }
  return {*r, pair / n_pitch, pair % n_pitch};
}

std::string FormatPoseClass(const Domain& domain, const PoseClass& c) {
  const Region& region = domain.regions.at(c.region);
  return region.id + "/" + std::to_string(c.roll_index * region.pitches.size() + c.pitch_index);
}

std::optional<PoseClass> ClassOf(const Domain& domain, const Pose& pose) {
  for (std::size_t i = 0; i < domain.regions.size(); ++i) {
    if (auto rc = DecomposeInRegion(domain.regions[i], pose, kRegionTol)) {
      return PoseClass{i, rc->roll_index, rc->pitch_index};
    }
  }
  return std::nullopt;
}

Pose SampleClassPose(const Domain& domain, const PoseClass& c, Rng& rng) {
  const Region& region = domain.regions.at(c.region);
  const double x = UniformIn(rng, region.x.lo, region.x.hi);
  const double y = UniformIn(rng, region.y.lo, region.y.hi);
  const double yaw = WrapAngle(region.yaw.start + UniformIn(rng, 0.0, region.yaw.width));
  return region.PoseAt(x, y, yaw, region.rolls.at(c.roll_index), region.pitches.at(c.pitch_index));
}

RobotConfig SampleRobotConfig(const Domain& domain, const Pose& q_obj, Rng& rng) {
  const Kinematics& kin = domain.kinematics;
  const GraspModel& gm = domain.grasp_model;
  const double clearance = domain.problem.robot_clearance;
  double floor_z = -1e9;
  for (const auto& r : domain.regions) floor_z = std::max(floor_z, r.frame.Transform(Vec3(0, 0, r.fixed_z)).z());
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vec3 p(UniformIn(rng, -1.0, 1.0), UniformIn(rng, -1.0, 1.0), UniformIn(rng, -1.0, 1.0));
    const double yaw = UniformIn(rng, -kPi, kPi);
    const double width = UniformIn(rng, 0.0, kin.max_gripper_width);
    if (p.norm() > 1.0) continue;
    const Vec3 tool = gm.reach_center + gm.reach_radius * p;
    if (tool.z() < floor_z + clearance) continue;
    if ((tool - q_obj.position()).norm() < clearance) continue;
    const RobotConfig q = kin.Solve(tool, yaw, width);
    if (!kin.WithinLimits(q)) continue;
    return q;
  }
  throw ConfigError("could not sample a collision-free initial robot configuration");
}

Problem GenerateProblem(const Domain& domain, std::uint64_t seed, std::size_t index) {
  const auto& spec = domain.problem;
  if (spec.start.empty() || spec.goal.empty()) throw ConfigError("problem spec needs start and goal classes");
  Rng rng = MakeRng(DeriveSeed(seed, index));
  const std::string start = spec.start[UniformIndex(rng, spec.start.size())];
  std::vector<std::string> goals;
  for (const auto& g : spec.goal) {
    if (g != start) goals.push_back(g);
  }
  if (goals.empty()) throw ConfigError("problem spec has no goal class distinct from '" + start + "'");
  const std::string goal = goals[UniformIndex(rng, goals.size())];

  Problem p;
  p.start_class = start;
  p.goal_class = goal;
  p.s0.q_obj = SampleClassPose(domain, ParsePoseClass(domain, start), rng);
  p.goal = SampleClassPose(domain, ParsePoseClass(domain, goal), rng);
  p.s0.q_r = SampleRobotConfig(domain, p.s0.q_obj, rng);
  p.s0.gripper_width = domain.kinematics.FingerWidth(p.s0.q_r);
  return p;
}

std::vector<Problem> GenerateProblems(const Domain& domain, std::size_t count, std::uint64_t seed) {
  std::vector<Problem> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(GenerateProblem(domain, seed, i));
  return out;
}

}  // namespace skillrrt
