#include "skillrrt/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skillrrt/error.hpp"
#include "skillrrt/version.hpp"

namespace skillrrt {

using nlohmann::json;

namespace {

json VecToJson(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> VecFromJson(const json& a, const char* what) {
  if (!a.is_array() || a.size() != static_cast<std::size_t>(N)) {
    throw IoError(std::string(what) + ": expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = a.at(i).get<double>();
  return v;
}

json PoseToJson(const Pose& p) {
  const Quat& q = p.orientation();
  return {{"position", VecToJson(p.position())}, {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose PoseFromJson(const json& j) {
  const Vec3 t = VecFromJson<3>(j.at("position"), "position");
  const Eigen::Vector4d q = VecFromJson<4>(j.at("orientation"), "orientation");
  try {
    return Pose::FromCanonical(t, Quat(q(0), q(1), q(2), q(3)));
  } catch (const InvalidArgument& e) {
    throw IoError(e.what());
  }
}

json KeypointsToJson(const auto& pts) {
  json a = json::array();
  for (const Vec3& p : pts) a.push_back(VecToJson(p));
  return a;
}

template <std::size_t N>
std::array<Vec3, N> KeypointsFromJson(const json& a, const char* what) {
  if (!a.is_array() || a.size() != N) throw IoError(std::string(what) + ": wrong keypoint count");
  std::array<Vec3, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = VecFromJson<3>(a.at(i), what);
  return out;
}

json StateToJson(const State& s) {
  return {{"q_obj", PoseToJson(s.q_obj)},
          {"dq_obj", VecToJson(s.dq_obj)},
          {"q_r", VecToJson(s.q_r)},
          {"dq_r", VecToJson(s.dq_r)},
          {"gripper_width", s.gripper_width}};
}

State StateFromJson(const json& j) {
  State s;
  s.q_obj = PoseFromJson(j.at("q_obj"));
  s.dq_obj = VecFromJson<6>(j.at("dq_obj"), "dq_obj");
  s.q_r = VecFromJson<kRobotDof>(j.at("q_r"), "q_r");
  s.dq_r = VecFromJson<kRobotDof>(j.at("dq_r"), "dq_r");
  s.gripper_width = j.at("gripper_width").get<double>();
  return s;
}

json MetaToJson(const ArtifactMeta& m) {
  return {{"seed", m.seed}, {"config_hash", m.config_hash}, {"tool_version", m.tool_version}};
}

ArtifactMeta MetaFromJson(const json& j) {
  ArtifactMeta m;
  if (!j.contains("meta")) return m;
  const json& x = j.at("meta");
  m.seed = x.at("seed").get<std::uint64_t>();
  m.config_hash = x.at("config_hash").get<std::string>();
  m.tool_version = x.at("tool_version").get<std::string>();
  return m;
}

const char* StepKindName(PlanStep::Kind k) {
  switch (k) {
    case PlanStep::Kind::kTeleport:
      return "teleport";
    case PlanStep::Kind::kConnector:
      return "connector";
    case PlanStep::Kind::kSkill:
      return "skill";
  }
  return "skill";
}

PlanStep::Kind StepKindFromName(const std::string& s) {
  if (s == "teleport") return PlanStep::Kind::kTeleport;
  if (s == "connector") return PlanStep::Kind::kConnector;
  if (s == "skill") return PlanStep::Kind::kSkill;
  throw IoError("unknown step kind '" + s + "'");
}

json StepToJson(const PlanStep& s) {
  json j = {{"kind", StepKindName(s.kind)}, {"skill", s.skill_id}, {"sim_seed", s.sim_seed}};
  if (s.kind == PlanStep::Kind::kSkill) {
    j["goal_pose"] = PoseToJson(s.goal_pose);
  } else {
    j["goal_config"] = VecToJson(s.goal_config);
  }
  if (s.kind == PlanStep::Kind::kConnector) j["connector"] = s.connector_id;
  return j;
}

PlanStep StepFromJson(const json& j) {
  PlanStep s;
  s.kind = StepKindFromName(j.at("kind").get<std::string>());
  s.skill_id = j.at("skill").get<std::string>();
  s.sim_seed = j.at("sim_seed").get<std::uint64_t>();
  if (s.kind == PlanStep::Kind::kSkill) {
    s.goal_pose = PoseFromJson(j.at("goal_pose"));
  } else {
    s.goal_config = VecFromJson<kRobotDof>(j.at("goal_config"), "goal_config");
  }
  if (s.kind == PlanStep::Kind::kConnector) s.connector_id = j.at("connector").get<std::string>();
  return s;
}

json ParamsToJson(const PlannerParams& p) {
  return {{"n_max", p.n_max},
          {"p_g", p.p_g},
          {"delta_obj", p.delta_obj},
          {"delta_goal", p.delta_goal},
          {"alpha", p.alpha},
          {"batch_size", p.batch_size},
          {"seed", p.seed},
          {"forbid_teleport", p.forbid_teleport},
          {"config_match_tol", p.config_match_tol}};
}

PlannerParams ParamsFromJson(const json& j) {
  PlannerParams p;
  p.n_max = j.at("n_max").get<int>();
  p.p_g = j.at("p_g").get<double>();
  p.delta_obj = j.at("delta_obj").get<double>();
  p.delta_goal = j.at("delta_goal").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.batch_size = j.at("batch_size").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.forbid_teleport = j.at("forbid_teleport").get<bool>();
  p.config_match_tol = j.at("config_match_tol").get<double>();
  return p;
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

// Runs a decoder, mapping missing keys and type mismatches to IoError.
template <typename F>
auto Decode(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string ToolVersion() { return SKILLRRT_VERSION; }

std::string ConfigHash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string PlanToJson(const SkillPlan& plan, const std::string& plan_id, const ArtifactMeta& meta) {
  json connectors = json::array();
  for (const auto& [skill, entry] : plan.connectors.entries()) {
    connectors.push_back({{"skill", skill},
                          {"connector", entry.connector_id},
                          {"disturbance_radius", entry.params.disturbance_radius},
                          {"disturbance_gain", entry.params.disturbance_gain},
                          {"resolution", entry.params.resolution},
                          {"n_sim", entry.params.n_sim}});
  }
  json steps = json::array();
  for (const auto& s : plan.steps) steps.push_back(StepToJson(s));
  const json j = {{"plan_id", plan_id},
                  {"meta", MetaToJson(meta)},
                  {"seed", plan.seed},
                  {"params", ParamsToJson(plan.params)},
                  {"initial_state", StateToJson(plan.initial_state)},
                  {"goal_pose", PoseToJson(plan.goal_pose)},
                  {"connectors", connectors},
                  {"steps", steps}};
  return j.dump(2) + "\n";
}

LoadedPlan PlanFromJson(const std::string& text) {
  const json j = Parse(text);
  return Decode("plan", [&] {
    LoadedPlan out;
    out.id = j.at("plan_id").get<std::string>();
    out.meta = MetaFromJson(j);
    SkillPlan& p = out.plan;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.params = ParamsFromJson(j.at("params"));
    p.initial_state = StateFromJson(j.at("initial_state"));
    p.goal_pose = PoseFromJson(j.at("goal_pose"));
    for (const auto& c : j.at("connectors")) {
      ConnectorParams cp;
      cp.disturbance_radius = c.at("disturbance_radius").get<double>();
      cp.disturbance_gain = c.at("disturbance_gain").get<double>();
      cp.resolution = c.at("resolution").get<double>();
      cp.n_sim = c.at("n_sim").get<int>();
      try {
        p.connectors.Add(c.at("skill").get<std::string>(), c.at("connector").get<std::string>(), cp);
      } catch (const ConfigError& e) {
        throw IoError(e.what());
      }
    }
    for (const auto& s : j.at("steps")) p.steps.push_back(StepFromJson(s));
    return out;
  });
}

std::string ReplayReportToJson(const ReplayReport& r, const ArtifactMeta& meta) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    outcomes.push_back({{"index", o.index},
                        {"seed", o.seed},
                        {"success", o.success},
                        {"steps_completed", o.steps_completed},
                        {"final_pose", PoseToJson(o.final_pose)}});
  }
  const json j = {{"plan_id", r.plan_id},
                  {"meta", MetaToJson(meta)},
                  {"n_replays", r.n_replays},
                  {"n_success", r.n_success},
                  {"success_rate", r.success_rate},
                  {"seed", r.seed},
                  {"outcomes", outcomes}};
  return j.dump(2) + "\n";
}

ReplayReport ReplayReportFromJson(const std::string& text) {
  const json j = Parse(text);
  return Decode("replay report", [&] {
    ReplayReport r;
    r.plan_id = j.at("plan_id").get<std::string>();
    r.n_replays = j.at("n_replays").get<std::size_t>();
    r.n_success = j.at("n_success").get<std::size_t>();
    r.success_rate = j.at("success_rate").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& o : j.at("outcomes")) {
      ReplayOutcome x;
      x.index = o.at("index").get<std::size_t>();
      x.seed = o.at("seed").get<std::uint64_t>();
      x.success = o.at("success").get<bool>();
      x.steps_completed = o.at("steps_completed").get<std::size_t>();
      x.final_pose = PoseFromJson(o.at("final_pose"));
      r.outcomes.push_back(x);
    }
    return r;
  });
}

std::string ConnectorProblemToJsonLine(const ConnectorProblem& p, const ArtifactMeta& meta) {
  const json j = {{"problem_index", p.problem_index},
                  {"skill", p.skill_id},
                  {"start_state", StateToJson(p.start_state)},
                  {"target_robot_config", VecToJson(p.target_robot_config)},
                  {"meta", MetaToJson(meta)}};
  return j.dump();
}

ConnectorProblem ConnectorProblemFromJsonLine(const std::string& line) {
  const json j = Parse(line);
  return Decode("connector problem", [&] {
    ConnectorProblem p;
    p.problem_index = j.at("problem_index").get<std::size_t>();
    p.skill_id = j.at("skill").get<std::string>();
    p.start_state = StateFromJson(j.at("start_state"));
    p.target_robot_config = VecFromJson<kRobotDof>(j.at("target_robot_config"), "target_robot_config");
    return p;
  });
}

std::string DatasetRecordToJsonLine(const DatasetRecord& r, const ArtifactMeta& meta) {
  const json obs = {{"q_r", VecToJson(r.q_r)},
                    {"q_r_prev", VecToJson(r.q_r_prev)},
                    {"obj_pose", PoseToJson(r.obj_pose)},
                    {"ee_pose", PoseToJson(r.ee_pose)},
                    {"p_ee", KeypointsToJson(r.p_ee)},
                    {"p_tip", KeypointsToJson(r.p_tip)},
                    {"p_ee_rel", KeypointsToJson(r.p_ee_rel)},
                    {"p_tip_rel", KeypointsToJson(r.p_tip_rel)},
                    {"p_obj", KeypointsToJson(r.p_obj)},
                    {"p_goal", KeypointsToJson(r.p_goal)},
                    {"gripper_width", r.gripper_width}};
  const json j = {{"schema_version", r.schema_version},
                  {"plan_id", r.plan_id},
                  {"trajectory", r.trajectory},
                  {"step", r.step},
                  {"seed", r.seed},
                  {"latent", StateToJson(r.latent)},
                  {"observation", obs},
                  {"action", StepToJson(r.action)},
                  {"meta", MetaToJson(meta)}};
  return j.dump();
}

DatasetRecord DatasetRecordFromJsonLine(const std::string& line) {
  const json j = Parse(line);
  return Decode("dataset record", [&] {
    DatasetRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kDatasetSchemaVersion) {
      throw IoError("unsupported dataset schema_version " + std::to_string(r.schema_version));
    }
    r.plan_id = j.at("plan_id").get<std::string>();
    r.trajectory = j.at("trajectory").get<std::size_t>();
    r.step = j.at("step").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.latent = StateFromJson(j.at("latent"));
    const json& o = j.at("observation");
    r.q_r = VecFromJson<kRobotDof>(o.at("q_r"), "q_r");
    r.q_r_prev = VecFromJson<kRobotDof>(o.at("q_r_prev"), "q_r_prev");
    r.obj_pose = PoseFromJson(o.at("obj_pose"));
    r.ee_pose = PoseFromJson(o.at("ee_pose"));
    r.p_ee = KeypointsFromJson<8>(o.at("p_ee"), "p_ee");
    r.p_tip = KeypointsFromJson<2>(o.at("p_tip"), "p_tip");
    r.p_ee_rel = KeypointsFromJson<8>(o.at("p_ee_rel"), "p_ee_rel");
    r.p_tip_rel = KeypointsFromJson<2>(o.at("p_tip_rel"), "p_tip_rel");
    r.p_obj = KeypointsFromJson<8>(o.at("p_obj"), "p_obj");
    r.p_goal = KeypointsFromJson<8>(o.at("p_goal"), "p_goal");
    r.gripper_width = o.at("gripper_width").get<double>();
    r.action = StepFromJson(j.at("action"));
    return r;
  });
}

std::string ManifestToJson(const std::vector<std::string>& kept, double m, std::size_t n_replays,
                           const ArtifactMeta& meta) {
  const json j = {{"m", m}, {"n_replays", n_replays}, {"kept", kept}, {"meta", MetaToJson(meta)}};
  return j.dump(2) + "\n";
}

std::vector<std::string> ManifestFromJson(const std::string& text) {
  const json j = Parse(text);
  return Decode("manifest", [&] { return j.at("kept").get<std::vector<std::string>>(); });
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::istringstream in(ReadTextFile(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string CsvField(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace skillrrt
