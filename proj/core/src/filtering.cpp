#include "skillrrt/filtering.hpp"

#include <cmath>

#include "skillrrt/error.hpp"

namespace skillrrt {

namespace {

constexpr std::size_t kExportAttemptFactor = 50;

void CheckPlan(const SkillPlan& plan, const Domain& domain) {
  for (const PlanStep& step : plan.steps) {
    domain.skill(step.skill_id);
    if (step.kind == PlanStep::Kind::kConnector) plan.connectors.ForSkill(step.skill_id);
  }
}

// Executes the plan once. The noise context is drawn first from the replay
// stream, then skills consume the same stream in step order.
ReplayTrace Run(const SkillPlan& plan, const Domain& domain, const NoiseConfig& noise,
                std::uint64_t replay_seed) {
  ReplayTrace trace;
  trace.seed = replay_seed;
  Rng rng = MakeRng(replay_seed);
  const NoiseContext ctx = NoiseContext::Draw(noise, rng);
  const double alpha = plan.params.alpha;

  State cur = plan.initial_state;
  trace.states.reserve(plan.steps.size() + 1);
  for (const PlanStep& step : plan.steps) {
    trace.states.push_back(cur);
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
        cur = Simulate(domain, cur, Invocation::Skill(step.skill_id, step.goal_pose), &ctx, rng).state;
        break;
    }
    ++trace.steps_completed;
    if (step.kind == PlanStep::Kind::kSkill &&
        !(Se3Distance(cur.q_obj, step.goal_pose, alpha) < plan.params.delta_obj)) {
      trace.aborted = true;
      break;
    }
  }
  trace.states.push_back(cur);
  trace.success = !trace.aborted && Se3Distance(cur.q_obj, plan.goal_pose, alpha) < plan.params.delta_goal;
  return trace;
}

}  // namespace

ReplayTrace ReplayOnce(const SkillPlan& plan, const Domain& domain, const NoiseConfig& noise,
                       std::uint64_t replay_seed) {
  noise.Validate();
  CheckPlan(plan, domain);
  return Run(plan, domain, noise, replay_seed);
}

ReplayReport ReplayPlan(const SkillPlan& plan, const Domain& domain, const NoiseConfig& noise,
                        std::size_t n, std::uint64_t seed, const std::string& plan_id) {
  if (n < 1) throw InvalidArgument("replay_plan: n must be >= 1");
  noise.Validate();
  CheckPlan(plan, domain);
  ReplayReport report;
  report.plan_id = plan_id;
  report.n_replays = n;
  report.seed = seed;
  report.outcomes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ReplayTrace t = Run(plan, domain, noise, DeriveSeed(seed, i));
    ReplayOutcome o;
    o.index = i;
    o.seed = t.seed;
    o.success = t.success;
    o.steps_completed = t.steps_completed;
    o.final_pose = t.states.back().q_obj;
    if (o.success) ++report.n_success;
    report.outcomes.push_back(std::move(o));
  }
  report.success_rate = static_cast<double>(report.n_success) / static_cast<double>(n);
  return report;
}

std::vector<std::string> FilterPlans(const std::vector<ReplayReport>& reports, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw InvalidArgument("filter_plans: m must lie in [0, 1]");
  std::vector<std::string> kept;
  for (const auto& r : reports) {
    if (r.success_rate > m) kept.push_back(r.plan_id);
  }
  return kept;
}

std::uint64_t ExportReplaySeed(std::uint64_t seed, std::size_t plan_index, std::size_t attempt) {
  return DeriveSeed(DeriveSeed(seed, plan_index), attempt);
}

DatasetRecord Observe(const Domain& domain, const NoiseConfig& noise, const State& latent,
                      const RobotConfig& q_r_prev, const Pose& goal, Rng& rng) {
  const Kinematics& kin = domain.kinematics;
  const State obs = ObserveState(latent, noise, rng);
  DatasetRecord rec;
  rec.latent = latent;
  rec.q_r = obs.q_r;
  rec.q_r_prev = q_r_prev;
  rec.obj_pose = obs.q_obj;

  const Pose tool = kin.ToolPose(obs.q_r);
  const Vec3 dp(Gaussian(rng, noise.ee_pos_sigma), Gaussian(rng, noise.ee_pos_sigma),
                Gaussian(rng, noise.ee_pos_sigma));
  const Vec3 dr(Gaussian(rng, noise.ee_rot_sigma), Gaussian(rng, noise.ee_rot_sigma),
                Gaussian(rng, noise.ee_rot_sigma));
  Quat rot = Quat::Identity();
  if (dr.norm() > 0.0) rot = Quat(Eigen::AngleAxisd(dr.norm(), dr.normalized()));
  rec.ee_pose = Pose(tool.position() + dp, rot * tool.orientation());

  rec.p_ee = KeypointsOf(rec.ee_pose, kin.ee_keypoints);
  const double half = 0.5 * kin.FingerWidth(obs.q_r);
  rec.p_tip = {rec.ee_pose.Transform(Vec3(0.0, half, kin.tip_depth)),
               rec.ee_pose.Transform(Vec3(0.0, -half, kin.tip_depth))};
  const Pose inv = rec.obj_pose.Inverse();
  rec.p_ee_rel = TransformPoints(inv, rec.p_ee);
  rec.p_tip_rel = {inv.Transform(rec.p_tip[0]), inv.Transform(rec.p_tip[1])};
  rec.p_obj = KeypointsOf(rec.obj_pose, domain.keypoint_template);
  rec.p_goal = KeypointsOf(goal, domain.keypoint_template);
  rec.gripper_width = latent.gripper_width;
  return rec;
}

ExportResult ExportDataset(const std::vector<NamedPlan>& plans, const Domain& domain,
                           const NoiseConfig& noise, std::size_t trajectories_per_plan,
                           std::uint64_t seed) {
  if (trajectories_per_plan < 1) throw InvalidArgument("export_dataset: trajectories_per_plan must be >= 1");
  noise.Validate();
  ExportResult result;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const SkillPlan& plan = plans[k].plan;
    CheckPlan(plan, domain);
    ExportSummary summary;
    summary.plan_id = plans[k].id;
    summary.requested = trajectories_per_plan;
    const std::size_t cap = kExportAttemptFactor * trajectories_per_plan;
    while (summary.collected < trajectories_per_plan && summary.attempts < cap) {
      const std::uint64_t replay_seed = ExportReplaySeed(seed, k, summary.attempts);
      ++summary.attempts;
      const ReplayTrace t = Run(plan, domain, noise, replay_seed);
      if (!t.success) continue;
      // Observation noise comes from its own stream so the latent replay is unchanged.
      Rng obs_rng = MakeRng(DeriveSeed(replay_seed, 1));
      RobotConfig prev = t.states.front().q_r;
      for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        DatasetRecord rec = Observe(domain, noise, t.states[i], prev, plan.goal_pose, obs_rng);
        if (i == 0) rec.q_r_prev = rec.q_r;
        prev = rec.q_r;
        rec.plan_id = plans[k].id;
        rec.trajectory = summary.collected;
        rec.step = i;
        rec.seed = replay_seed;
        rec.action = plan.steps[i];
        result.records.push_back(std::move(rec));
      }
      ++summary.collected;
    }
    summary.shortfall = trajectories_per_plan - summary.collected;
    result.summaries.push_back(summary);
  }
  return result;
}

}  // namespace skillrrt
