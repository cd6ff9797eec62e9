#include "skillrrt/domain_io.hpp"

#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "skillrrt/error.hpp"

namespace skillrrt {

// Defined in the generated builtin_domains.cpp.
namespace builtin {
extern const char* const kNames[];
extern const char* const kTexts[];
extern const std::size_t kCount;
}  // namespace builtin

namespace {

using config::AllowKeys;
using config::Value;

Vec3 ReadVec3(const Value& v) {
  const auto xs = v.as_numbers();
  if (xs.size() != 3) v.Fail("expected 3 numbers");
  return Vec3(xs[0], xs[1], xs[2]);
}

Vec3 Vec3Or(const Value& table, const char* key, const Vec3& fallback) {
  return table.contains(key) ? ReadVec3(table.at(key)) : fallback;
}

Interval ReadInterval(const Value& v) {
  const auto xs = v.as_numbers();
  if (xs.size() != 2) v.Fail("expected [lo, hi]");
  if (xs[0] > xs[1]) v.Fail("interval lower bound exceeds upper bound");
  return {xs[0], xs[1]};
}

double Positive(const Value& v) {
  const double d = v.as_number();
  if (!(d > 0.0)) v.Fail("must be > 0");
  return d;
}

double NonNegative(const Value& v) {
  const double d = v.as_number();
  if (!(d >= 0.0)) v.Fail("must be >= 0");
  return d;
}

Pose ReadFrame(const Value& r) {
  const Vec3 xyz = Vec3Or(r, "frame_xyz", Vec3::Zero());
  const Vec3 rpy = Vec3Or(r, "frame_rpy", Vec3::Zero());
  return Pose::FromXyzRpy(xyz, rpy.x(), rpy.y(), rpy.z());
}

Region ReadRegion(const Value& r) {
  AllowKeys(r, {"id", "frame_xyz", "frame_rpy", "x", "y", "yaw", "z", "rolls", "pitches", "blocked"});
  Region region;
  region.id = r.at("id").as_string();
  region.frame = ReadFrame(r);
  region.x = ReadInterval(r.at("x"));
  region.y = ReadInterval(r.at("y"));
  const auto yaw = r.at("yaw").as_numbers();
  if (yaw.size() != 2) r.at("yaw").Fail("expected [start, width]");
  region.yaw = {yaw[0], yaw[1]};
  region.fixed_z = r.at("z").as_number();
  if (r.contains("rolls")) region.rolls = r.at("rolls").as_numbers();
  if (r.contains("pitches")) region.pitches = r.at("pitches").as_numbers();
  if (r.contains("blocked")) {
    for (const auto& b : r.at("blocked").as_array()) {
      const auto xs = b.as_numbers();
      if (xs.size() != 4) b.Fail("expected [nx, ny, nz, offset]");
      const Vec3 n(xs[0], xs[1], xs[2]);
      if (n.norm() < 1e-12) b.Fail("half-space normal must be non-zero");
      region.blocked.push_back({n, xs[3]});
    }
  }
  try {
    region.Validate();
  } catch (const ConfigError& e) {
    r.Fail(e.what());
  }
  return region;
}

LockedAxes ReadLocked(const Value& v) {
  LockedAxes lk;
  for (const auto& item : v.as_array()) {
    const std::string& a = item.as_string();
    if (a == "rx") lk.rx = true;
    else if (a == "ry") lk.ry = true;
    else if (a == "rz") lk.rz = true;
    else if (a == "tx") lk.tx = true;
    else if (a == "ty") lk.ty = true;
    else if (a == "tz") lk.tz = true;
    else item.Fail("unknown axis '" + a + "' (expected rx, ry, rz, tx, ty, tz)");
  }
  return lk;
}

SkillSpec ReadSkill(const Value& s) {
  AllowKeys(s, {"id", "kind", "regions", "locked", "success_noise", "failure_prob", "n_sim",
                "approach_offset", "connector"});
  SkillSpec skill;
  skill.id = s.at("id").as_string();
  const std::string& kind = s.at("kind").as_string();
  if (kind == "prehensile") skill.kind = SkillKind::kPrehensile;
  else if (kind == "non_prehensile") skill.kind = SkillKind::kNonPrehensile;
  else s.at("kind").Fail("expected \"prehensile\" or \"non_prehensile\"");
  skill.region_ids = s.at("regions").as_strings();
  if (skill.region_ids.empty()) s.at("regions").Fail("must list at least one region");
  if (s.contains("locked")) skill.locked = ReadLocked(s.at("locked"));
  if (s.contains("success_noise")) {
    const auto xs = s.at("success_noise").as_numbers();
    if (xs.size() != 2 || xs[0] < 0.0 || xs[1] < 0.0) s.at("success_noise").Fail("expected [pos >= 0, rot >= 0]");
    skill.success_noise = {xs[0], xs[1]};
  } else {
    skill.success_noise = {0.002, 0.02};
  }
  skill.failure_prob = s.number_or("failure_prob", 0.05);
  if (!(skill.failure_prob >= 0.0 && skill.failure_prob <= 1.0)) s.at("failure_prob").Fail("must lie in [0, 1]");
  skill.n_sim = static_cast<int>(s.int_or("n_sim", 100));
  if (skill.n_sim < 1) s.at("n_sim").Fail("must be >= 1");
  skill.approach_offset = Vec3Or(s, "approach_offset", skill.approach_offset);
  skill.connector_id = s.string_or("connector", "");
  return skill;
}

RobotConfig ReadConfig9(const Value& v) {
  const auto xs = v.as_numbers();
  if (xs.size() != kRobotDof) v.Fail("expected " + std::to_string(kRobotDof) + " numbers");
  RobotConfig q;
  for (int i = 0; i < kRobotDof; ++i) q(i) = xs[i];
  return q;
}

Kinematics ReadKinematics(const Value& k) {
  AllowKeys(k, {"base", "linear_map", "joint_lower", "joint_upper", "max_gripper_width",
                "ee_half_extents", "ee_center", "tip_depth"});
  Kinematics kin;
  kin.base = ReadVec3(k.at("base"));
  const auto& rows = k.at("linear_map").as_array();
  if (rows.size() != 3) k.at("linear_map").Fail("expected 3 rows");
  for (int r = 0; r < 3; ++r) {
    const auto xs = rows[r].as_numbers();
    if (xs.size() != 6) rows[r].Fail("expected 6 columns");
    for (int c = 0; c < 6; ++c) kin.linear_map(r, c) = xs[c];
  }
  if (std::abs((kin.linear_map * kin.linear_map.transpose()).determinant()) < 1e-12) {
    k.at("linear_map").Fail("must have rank 3");
  }
  kin.joint_lower = ReadConfig9(k.at("joint_lower"));
  kin.joint_upper = ReadConfig9(k.at("joint_upper"));
  for (int i = 0; i < kRobotDof; ++i) {
    if (kin.joint_lower(i) > kin.joint_upper(i)) k.at("joint_lower").Fail("lower limit exceeds upper limit");
  }
  if (k.contains("max_gripper_width")) kin.max_gripper_width = Positive(k.at("max_gripper_width"));
  const Vec3 half = Vec3Or(k, "ee_half_extents", Vec3(0.02, 0.04, 0.02));
  const Vec3 center = Vec3Or(k, "ee_center", Vec3(0.0, 0.0, -0.04));
  kin.ee_keypoints = KeypointTemplate::Box(half, center);
  kin.tip_depth = k.number_or("tip_depth", 0.0);
  return kin;
}

GraspModel ReadGrasps(const Value& g) {
  AllowKeys(g, {"reach_center", "reach_radius", "capture_radius", "templates"});
  GraspModel gm;
  gm.reach_center = ReadVec3(g.at("reach_center"));
  gm.reach_radius = Positive(g.at("reach_radius"));
  if (g.contains("capture_radius")) gm.capture_radius = Positive(g.at("capture_radius"));
  for (const auto& t : g.at("templates").as_array()) {
    const auto xs = t.as_numbers();
    if (xs.size() != 4) t.Fail("expected [x, y, z, yaw]");
    gm.templates.push_back({Pose::FromXyzRpy(Vec3(xs[0], xs[1], xs[2]), 0.0, 0.0, xs[3])});
  }
  if (gm.templates.empty()) g.at("templates").Fail("at least one grasp template is required");
  return gm;
}

RewardParams ReadRewards(const Value& r, const RewardParams& defaults) {
  AllowKeys(r, {"eps_ee_0", "eps_ee_1", "eps_tip_0", "eps_tip_1", "w_move", "r_succ_connector",
                "delta_ee", "delta_tip", "eps_obj_0", "eps_obj_1", "eps_tipobj_0", "eps_tipobj_1",
                "r_succ_np", "eps_pobj_0", "eps_pobj_1", "eps_rot_0", "eps_rot_1", "w_grasp", "r_succ_p",
                "delta_obj", "alpha", "skills"});
  RewardParams p = defaults;
  const auto num = [&r](const char* key, double& field) {
    if (r.contains(key)) field = r.at(key).as_number();
  };
  num("eps_ee_0", p.eps_ee_0);
  num("eps_ee_1", p.eps_ee_1);
  num("eps_tip_0", p.eps_tip_0);
  num("eps_tip_1", p.eps_tip_1);
  num("r_succ_connector", p.r_succ_connector);
  num("delta_ee", p.delta_ee);
  num("delta_tip", p.delta_tip);
  num("eps_obj_0", p.eps_obj_0);
  num("eps_obj_1", p.eps_obj_1);
  num("eps_tipobj_0", p.eps_tipobj_0);
  num("eps_tipobj_1", p.eps_tipobj_1);
  num("r_succ_np", p.r_succ_np);
  num("eps_pobj_0", p.eps_pobj_0);
  num("eps_pobj_1", p.eps_pobj_1);
  num("eps_rot_0", p.eps_rot_0);
  num("eps_rot_1", p.eps_rot_1);
  num("r_succ_p", p.r_succ_p);
  num("delta_obj", p.delta_obj);
  num("alpha", p.alpha);
  // The reference tables list signed penalty weights; only the magnitude is kept.
  if (r.contains("w_move")) p.w_move = std::abs(r.at("w_move").as_number());
  if (r.contains("w_grasp")) p.w_grasp = std::abs(r.at("w_grasp").as_number());
  try {
    p.Validate();
  } catch (const ConfigError& e) {
    r.Fail(e.what());
  }
  return p;
}

}  // namespace

NoiseConfig LoadNoise(const Value& n, const NoiseConfig& defaults) {
  AllowKeys(n, {"obj_pos_sigma", "obj_rot_sigma", "joint_pos_sigma", "ee_pos_sigma", "ee_rot_sigma",
                "friction_scale", "mass_scale", "torque_sigma"});
  NoiseConfig c = defaults;
  const auto sigma = [&n](const char* key, double& field) {
    if (n.contains(key)) field = NonNegative(n.at(key));
  };
  sigma("obj_pos_sigma", c.obj_pos_sigma);
  sigma("obj_rot_sigma", c.obj_rot_sigma);
  sigma("joint_pos_sigma", c.joint_pos_sigma);
  sigma("ee_pos_sigma", c.ee_pos_sigma);
  sigma("ee_rot_sigma", c.ee_rot_sigma);
  sigma("torque_sigma", c.torque_sigma);
  if (n.contains("friction_scale")) c.friction_scale = ReadInterval(n.at("friction_scale"));
  if (n.contains("mass_scale")) c.mass_scale = ReadInterval(n.at("mass_scale"));
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    n.Fail(e.what());
  }
  return c;
}

DomainBundle LoadDomain(const Value& root) {
  AllowKeys(root, {"name", "rng_seed", "object", "regions", "skills", "kinematics", "grasps",
                   "connector", "torque", "rewards", "noise", "problem"});
  DomainBundle out;
  Domain& d = out.domain;
  d.name = root.at("name").as_string();
  d.rng_seed = root.contains("rng_seed") ? root.at("rng_seed").as_uint() : 0;

  const Value& obj = root.at("object");
  AllowKeys(obj, {"keypoint_half_extents", "keypoint_center"});
  d.keypoint_template =
      KeypointTemplate::Box(ReadVec3(obj.at("keypoint_half_extents")), Vec3Or(obj, "keypoint_center", Vec3::Zero()));

  for (const auto& r : root.at("regions").as_array()) d.regions.push_back(ReadRegion(r));
  for (const auto& s : root.at("skills").as_array()) d.skills.push_back(ReadSkill(s));
  d.kinematics = ReadKinematics(root.at("kinematics"));
  d.grasp_model = ReadGrasps(root.at("grasps"));

  if (root.contains("connector")) {
    const Value& c = root.at("connector");
    AllowKeys(c, {"resolution", "n_sim", "disturbance_radius", "disturbance_gain"});
    if (c.contains("resolution")) d.connector_resolution = Positive(c.at("resolution"));
    d.connector_n_sim = static_cast<int>(c.int_or("n_sim", d.connector_n_sim));
    if (d.connector_n_sim < 1) c.at("n_sim").Fail("must be >= 1");
    if (c.contains("disturbance_radius")) d.disturbance.radius = NonNegative(c.at("disturbance_radius"));
    if (c.contains("disturbance_gain")) d.disturbance.gain = NonNegative(c.at("disturbance_gain"));
  }
  if (root.contains("torque")) {
    const Value& t = root.at("torque");
    AllowKeys(t, {"to_pos", "to_rot"});
    if (t.contains("to_pos")) d.torque.to_pos = NonNegative(t.at("to_pos"));
    if (t.contains("to_rot")) d.torque.to_rot = NonNegative(t.at("to_rot"));
  }
  if (root.contains("problem")) {
    const Value& p = root.at("problem");
    AllowKeys(p, {"start", "goal", "robot_clearance"});
    d.problem.start = p.at("start").as_strings();
    d.problem.goal = p.at("goal").as_strings();
    if (p.contains("robot_clearance")) d.problem.robot_clearance = NonNegative(p.at("robot_clearance"));
  }

  if (root.contains("rewards")) {
    const Value& r = root.at("rewards");
    out.rewards.base = ReadRewards(r, RewardParams{});
    if (r.contains("skills")) {
      for (const auto& [sid, table] : r.at("skills").as_table()) {
        out.rewards.per_skill[sid] = ReadRewards(table, out.rewards.base);
      }
    }
  }
  if (root.contains("noise")) out.noise = LoadNoise(root.at("noise"), NoiseConfig{});

  d.Validate();
  for (const auto& [sid, unused] : out.rewards.per_skill) {
    if (!d.FindSkill(sid)) throw ConfigError("reward override for unknown skill", 0, "rewards.skills." + sid);
  }
  return out;
}

DomainBundle LoadDomainText(const std::string& text) { return LoadDomain(config::Parse(text)); }

std::vector<std::string> BuiltinDomainNames() {
  return std::vector<std::string>(builtin::kNames, builtin::kNames + builtin::kCount);
}

const std::string& BuiltinDomainText(const std::string& name) {
  static const std::vector<std::string> texts(builtin::kTexts, builtin::kTexts + builtin::kCount);
  for (std::size_t i = 0; i < builtin::kCount; ++i) {
    if (name == builtin::kNames[i]) return texts[i];
  }
  throw ConfigError("unknown built-in domain '" + name + "'");
}

std::string ReadDomainSource(const std::string& spec) {
  static const std::string kPrefix = "builtin:";
  if (spec.rfind(kPrefix, 0) == 0) return BuiltinDomainText(spec.substr(kPrefix.size()));
  std::ifstream in(spec);
  if (!in) throw IoError("cannot read domain file '" + spec + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace skillrrt
