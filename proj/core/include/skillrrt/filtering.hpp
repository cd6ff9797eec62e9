#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "skillrrt/planner.hpp"
#include "skillrrt/simulator.hpp"

namespace skillrrt {

struct ReplayOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool success = false;
  /// Number of plan steps executed before success or abort.
  std::size_t steps_completed = 0;
  Pose final_pose;
};

struct ReplayReport {
  std::string plan_id;
  std::size_t n_replays = 0;
  std::size_t n_success = 0;
  double success_rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<ReplayOutcome> outcomes;
};

/// One noisy execution of a plan. A replay aborts at the first skill step
/// whose outcome is not within delta_obj of its goal.
struct ReplayTrace {
  std::uint64_t seed = 0;
  std::vector<State> states;  // latent state before each executed step, then the final state
  std::size_t steps_completed = 0;
  bool aborted = false;
  bool success = false;
};

ReplayTrace ReplayOnce(const SkillPlan& plan, const Domain& domain, const NoiseConfig& noise,
                       std::uint64_t replay_seed);

/// Replays the plan n times; replay i uses the stream DeriveSeed(seed, i).
/// Success means the final object pose is within delta_goal of the plan goal.
ReplayReport ReplayPlan(const SkillPlan& plan, const Domain& domain, const NoiseConfig& noise,
                        std::size_t n, std::uint64_t seed, const std::string& plan_id = "");

/// Ids of reports with success_rate strictly above m, in input order.
std::vector<std::string> FilterPlans(const std::vector<ReplayReport>& reports, double m);

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetRecord {
  int schema_version = kDatasetSchemaVersion;
  std::string plan_id;
  std::size_t trajectory = 0;
  std::size_t step = 0;
  std::uint64_t seed = 0;  // replay seed of the trajectory

  State latent;
  // Observation
  RobotConfig q_r = RobotConfig::Zero();
  RobotConfig q_r_prev = RobotConfig::Zero();
  Pose obj_pose;
  Pose ee_pose;
  Keypoints p_ee{};
  std::array<Vec3, 2> p_tip{};
  Keypoints p_ee_rel{};
  std::array<Vec3, 2> p_tip_rel{};
  Keypoints p_obj{};
  Keypoints p_goal{};
  double gripper_width = 0.0;
  // Action
  PlanStep action;
};

struct ExportSummary {
  std::string plan_id;
  std::size_t requested = 0;
  std::size_t collected = 0;
  std::size_t attempts = 0;
  std::size_t shortfall = 0;
};

struct ExportResult {
  std::vector<DatasetRecord> records;
  std::vector<ExportSummary> summaries;
};

struct NamedPlan {
  std::string id;
  SkillPlan plan;
};

/// Replays each plan until `trajectories_per_plan` successful trajectories
/// are collected (at most 50x that many attempts). Every successful trajectory
/// contributes one record per plan step.
ExportResult ExportDataset(const std::vector<NamedPlan>& plans, const Domain& domain,
                           const NoiseConfig& noise, std::size_t trajectories_per_plan,
                           std::uint64_t seed);

/// Observation of a latent state drawn from `rng`, with the action left empty.
DatasetRecord Observe(const Domain& domain, const NoiseConfig& noise, const State& latent,
                      const RobotConfig& q_r_prev, const Pose& goal, Rng& rng);

/// Replay seed of attempt `attempt` for the plan at position `plan_index`.
std::uint64_t ExportReplaySeed(std::uint64_t seed, std::size_t plan_index, std::size_t attempt);

}  // namespace skillrrt
