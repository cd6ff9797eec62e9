#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "skillrrt/connector.hpp"
#include "skillrrt/error.hpp"
#include "skillrrt/planner.hpp"
#include "skillrrt/problem.hpp"
#include "skillrrt/simulator.hpp"

using namespace skillrrt;

namespace {

class Rewards : public ::testing::Test {
 protected:
  void SetUp() override {
    bundle_ = oracle::Builtin("cardflip2d");
    d_ = &bundle_.domain;
  }

  RobotConfig Config(const Vec3& p, double yaw = 0.0, double width = 0.0) const {
    return d_->kinematics.Solve(p, yaw, width);
  }
  State WithConfig(const RobotConfig& q) const {
    State s;
    s.q_obj = d_->regions[0].PoseAt(0.5, 0.0, 0.0, 0.0, 0.0);
    s.q_r = q;
    s.gripper_width = d_->kinematics.FingerWidth(q);
    return s;
  }
  State RandomState(Rng& rng) const {
    State s;
    s.q_obj = Pose(Vec3(UniformIn(rng, 0.3, 0.7), UniformIn(rng, -0.3, 0.3), UniformIn(rng, 0.3, 0.6)),
                   Quat(Gaussian(rng, 1), Gaussian(rng, 1), Gaussian(rng, 1), Gaussian(rng, 1)).normalized());
    s.q_r = Config(Vec3(UniformIn(rng, 0.3, 0.7), UniformIn(rng, -0.3, 0.3), UniformIn(rng, 0.4, 0.8)),
                   UniformIn(rng, -3, 3), UniformIn(rng, 0.0, 0.08));
    s.gripper_width = d_->kinematics.FingerWidth(s.q_r);
    return s;
  }

  // End-effector keypoints written out from the tool pose formula with
  // explicit rotation matrices.
  std::vector<Vec3> OracleEe(const RobotConfig& q) const {
    const auto& kin = d_->kinematics;
    const Vec3 t = kin.base + kin.linear_map * q.head<6>();
    const oracle::Mat3 r = oracle::Rz(q(6)) * oracle::Rx(M_PI);
    std::vector<Vec3> pts;
    for (const Vec3& k : kin.ee_keypoints.points()) pts.push_back(t + r * k);
    return pts;
  }
  std::vector<Vec3> OracleObj(const Pose& p) const {
    const Quat& q = p.orientation();
    const oracle::Mat3 r = oracle::QuatMatrix(q.w(), q.x(), q.y(), q.z());
    std::vector<Vec3> pts;
    for (const Vec3& k : d_->keypoint_template.points()) pts.push_back(p.position() + r * k);
    return pts;
  }
  static double Dist(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
    return std::sqrt(s);
  }

  DomainBundle bundle_;
  Domain* d_ = nullptr;
};

}  // namespace

TEST(RewardScalars, WorkedExamples) {
  EXPECT_NEAR(ExpPotentialDelta(40, 0.9, 0.2, 0.1), 40 * (std::exp(-0.09) - std::exp(-0.18)), 1e-12);
  EXPECT_NEAR(ExpPotentialDelta(40, 0.9, 0.2, 0.1), oracle::ExpPotential(40, 0.9, 0.2, 0.1), 1e-12);
  EXPECT_NEAR(RationalPotentialDelta(0.02, 0.02, 0.10, 0.06), 0.02 / 0.08 - 0.02 / 0.12, 1e-12);
  EXPECT_NEAR(RationalPotentialDelta(0.15, 0.1, 0.5, 0.25), 0.15 / 0.35 - 0.15 / 0.6, 1e-12);
  EXPECT_EQ(RationalPotentialDelta(0.0, 0.0, 0.0, 0.0), 0.0);
}

TEST_F(Rewards, ConnectorAtGoalEarnsOnlySuccess) {
  const RewardParams& p = bundle_.rewards.ForSkill("flip");
  EXPECT_EQ(p.r_succ_connector, 1000.0);
  const RobotConfig goal = Config(Vec3(0.5, 0.0, 0.5));
  const State s = WithConfig(goal);
  const ConnectorReward r = EvaluateConnectorReward(s, s, goal, p, *d_);
  EXPECT_EQ(r.r_ee, 0.0);
  EXPECT_EQ(r.r_tip, 0.0);
  EXPECT_EQ(r.r_obj_move, 0.0);
  EXPECT_EQ(r.r_success, 1000.0);
  EXPECT_EQ(r.total, 1000.0);
}

TEST_F(Rewards, ObjectMovePenalty) {
  const RewardParams& p = bundle_.rewards.base;
  EXPECT_EQ(p.w_move, 0.3);
  const RobotConfig goal = Config(Vec3(0.5, 0.0, 0.5));
  const State prev = WithConfig(goal);
  State curr = prev;
  curr.q_obj = Pose(prev.q_obj.position() + Vec3(0.006, 0.008, 0.0), prev.q_obj.orientation());
  EXPECT_NEAR(EvaluateConnectorReward(prev, curr, goal, p, *d_).r_obj_move, -0.003, 1e-12);
}

TEST_F(Rewards, EeStepWorkedExample) {
  RewardParams p = bundle_.rewards.base;
  const RobotConfig goal = Config(Vec3(0.5, 0.0, 0.5));
  // Every ee keypoint shifts by t, so the keypoint error is sqrt(8) t.
  const double s8 = std::sqrt(8.0);
  const State prev = WithConfig(Config(Vec3(0.5, 0.2 / s8, 0.5)));
  const State curr = WithConfig(Config(Vec3(0.5, 0.1 / s8, 0.5)));
  ASSERT_NEAR(Dist(OracleEe(prev.q_r), OracleEe(goal)), 0.2, 1e-12);
  ASSERT_NEAR(Dist(OracleEe(curr.q_r), OracleEe(goal)), 0.1, 1e-12);
  EXPECT_NEAR(EvaluateConnectorReward(prev, curr, goal, p, *d_).r_ee,
              oracle::ExpPotential(40, 0.9, 0.2, 0.1), 1e-12);
}

TEST_F(Rewards, ConnectorSuccessQuadrants) {
  const RewardParams& p = bundle_.rewards.base;
  const RobotConfig goal = Config(Vec3(0.5, 0.0, 0.5), 0.0, 0.0);
  const State prev = WithConfig(Config(Vec3(0.5, 0.1, 0.6)));
  struct Case {
    RobotConfig q;
    bool ee_ok, tip_ok;
  };
  // Yaw spins the ee box but not the closed fingertips on the tool axis;
  // opening the fingers moves the tips but not the ee box.
  const Case cases[] = {
      {goal, true, true},
      {Config(Vec3(0.5, 0.0, 0.5), 0.0, 0.01), true, false},
      {Config(Vec3(0.5, 0.0, 0.5), 0.5, 0.0), false, true},
      {Config(Vec3(0.6, 0.1, 0.5), 0.5, 0.01), false, false},
  };
  const auto& kin = d_->kinematics;
  for (const Case& c : cases) {
    State curr = WithConfig(c.q);
    curr.gripper_width = kin.FingerWidth(goal);
    const double ee = KeypointDistance(kin.EeKeypoints(c.q), kin.EeKeypoints(goal));
    const auto ta = kin.TipPositions(c.q), tb = kin.TipPositions(goal);
    const double tip = std::sqrt((ta[0] - tb[0]).squaredNorm() + (ta[1] - tb[1]).squaredNorm());
    ASSERT_EQ(ee < p.delta_ee, c.ee_ok);
    ASSERT_EQ(tip < p.delta_tip, c.tip_ok);
    EXPECT_EQ(EvaluateConnectorReward(prev, curr, goal, p, *d_).r_success,
              c.ee_ok && c.tip_ok ? 1000.0 : 0.0);
  }
  State wrong_width = WithConfig(goal);
  wrong_width.gripper_width = 0.01;
  EXPECT_EQ(EvaluateConnectorReward(prev, wrong_width, goal, p, *d_).r_success, 0.0);
}

TEST_F(Rewards, PotentialTermsTelescope) {
  const RewardParams& p = bundle_.rewards.base;
  RewardParams pp = p;
  pp.eps_rot_0 = 0.15;
  pp.eps_rot_1 = 0.1;
  Rng rng = MakeRng(12);
  for (int traj = 0; traj < 1000; ++traj) {
    std::vector<State> states;
    for (int i = 0; i < 8; ++i) states.push_back(RandomState(rng));
    const RobotConfig goal = RandomState(rng).q_r;
    const Pose target = RandomState(rng).q_obj;
    double ee = 0, obj = 0, rot = 0;
    for (std::size_t i = 1; i < states.size(); ++i) {
      ee += EvaluateConnectorReward(states[i - 1], states[i], goal, p, *d_).r_ee;
      obj += EvaluateNpReward(states[i - 1], states[i], target, p, *d_).r_obj;
      rot += EvaluatePReward(states[i - 1], states[i], target, pp, *d_).r_rot;
    }
    const State& a = states.front();
    const State& b = states.back();
    EXPECT_NEAR(ee, oracle::ExpPotential(p.eps_ee_0, p.eps_ee_1, Dist(OracleEe(a.q_r), OracleEe(goal)),
                                         Dist(OracleEe(b.q_r), OracleEe(goal))),
                1e-9);
    EXPECT_NEAR(obj, oracle::RationalPotential(p.eps_obj_0, p.eps_obj_1, Dist(OracleObj(a.q_obj), OracleObj(target)),
                                               Dist(OracleObj(b.q_obj), OracleObj(target))),
                1e-9);
    const auto angle = [&](const Pose& x) {
      const Quat& q = x.orientation();
      const Quat& g = target.orientation();
      return oracle::MatrixAngle(oracle::QuatMatrix(q.w(), q.x(), q.y(), q.z()),
                                 oracle::QuatMatrix(g.w(), g.x(), g.y(), g.z()));
    };
    EXPECT_NEAR(rot, oracle::RationalPotential(0.15, 0.1, angle(a.q_obj), angle(b.q_obj)), 1e-9);
  }
}

TEST_F(Rewards, ObjectMovePenaltyIsNonPositive) {
  const RewardParams& p = bundle_.rewards.base;
  Rng rng = MakeRng(13);
  for (int i = 0; i < 1000; ++i) {
    const State a = RandomState(rng), b = RandomState(rng);
    EXPECT_LT(EvaluateConnectorReward(a, b, b.q_r, p, *d_).r_obj_move, 0.0);
    State still = b;
    still.q_obj = a.q_obj;
    EXPECT_EQ(EvaluateConnectorReward(a, still, b.q_r, p, *d_).r_obj_move, 0.0);
  }
}

TEST_F(Rewards, NonPrehensileExamples) {
  const RewardParams& p = bundle_.rewards.ForSkill("slide");
  const State s = WithConfig(Config(Vec3(0.5, 0.0, 0.5)));
  const NpReward same = EvaluateNpReward(s, s, s.q_obj, p, *d_);
  EXPECT_EQ(same.r_success, 1000.0);
  EXPECT_EQ(same.r_obj, 0.0);
  EXPECT_EQ(same.r_tip_contact, 0.0);

  const double s8 = std::sqrt(8.0);
  const Pose target = s.q_obj;
  State prev = s, curr = s;
  prev.q_obj = Pose(target.position() + Vec3(0.10 / s8, 0, 0), target.orientation());
  curr.q_obj = Pose(target.position() + Vec3(0.06 / s8, 0, 0), target.orientation());
  const NpReward r = EvaluateNpReward(prev, curr, target, p, *d_);
  EXPECT_NEAR(r.r_obj, 0.02 / 0.08 - 0.02 / 0.12, 1e-12);
  EXPECT_EQ(r.r_success, 0.0);
}

TEST_F(Rewards, PrehensileExamples) {
  RewardParams p = bundle_.rewards.ForSkill("flip");
  p.eps_rot_0 = 0.15;
  p.eps_rot_1 = 0.1;
  p.w_grasp = 10.0;
  const State s = WithConfig(Config(Vec3(0.5, 0.0, 0.5)));
  const PReward same = EvaluatePReward(s, s, s.q_obj, p, *d_);
  EXPECT_EQ(same.r_obj, 0.0);
  EXPECT_EQ(same.r_rot, 0.0);
  EXPECT_EQ(same.r_grasp, 0.0);

  // Object and gripper translate together.
  State moved = s;
  moved.q_obj = Pose(s.q_obj.position() + Vec3(0.03, -0.02, 0.05), s.q_obj.orientation());
  moved.q_r = Config(Vec3(0.53, -0.02, 0.55));
  EXPECT_NEAR(EvaluatePReward(s, moved, s.q_obj, p, *d_).r_grasp, 0.0, 1e-12);
  State slipped = s;
  slipped.q_r = Config(Vec3(0.5, 0.01, 0.5));
  EXPECT_LT(EvaluatePReward(s, slipped, s.q_obj, p, *d_).r_grasp, 0.0);

  const Pose target = s.q_obj;
  const auto spun = [&](double a) {
    return Pose(target.position(), Quat(Eigen::AngleAxisd(a, Vec3::UnitZ())) * target.orientation());
  };
  State prev = s, curr = s;
  prev.q_obj = spun(0.5);
  curr.q_obj = spun(0.25);
  EXPECT_NEAR(EvaluatePReward(prev, curr, target, p, *d_).r_rot, 0.15 / 0.35 - 0.15 / 0.6, 1e-12);
}

TEST_F(Rewards, NonFiniteInputIsRejected) {
  const State s = WithConfig(Config(Vec3(0.5, 0.0, 0.5)));
  State bad = s;
  bad.q_r(0) = NAN;
  EXPECT_THROW(EvaluateConnectorReward(s, bad, s.q_r, bundle_.rewards.base, *d_), InvalidArgument);
  EXPECT_THROW(EvaluateNpReward(bad, s, s.q_obj, bundle_.rewards.base, *d_), InvalidArgument);
  EXPECT_THROW(EvaluatePReward(s, bad, s.q_obj, bundle_.rewards.base, *d_), InvalidArgument);
}

TEST_F(Rewards, ScriptedConnectorExamples) {
  const ConnectorParams cp = ConnectorSet::Scripted(*d_).ForSkill("slide").params;
  const State s = WithConfig(Config(Vec3(0.5, 0.0, 0.6)));
  const auto same = ScriptedConnector(*d_, s, s.q_r, cp);
  ASSERT_EQ(same.size(), 1u);
  EXPECT_EQ(same[0], s);

  const RobotConfig far = Config(Vec3(0.4, 0.2, 0.7), 1.0, 0.04);
  const auto traj = ScriptedConnector(*d_, s, far, cp);
  EXPECT_EQ(traj.back().q_r, far);
  EXPECT_EQ(traj.back().q_obj, s.q_obj);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    EXPECT_LE((traj[i].q_r - traj[i - 1].q_r).norm(), cp.resolution + 1e-12);
  }

  RobotConfig outside = far;
  outside(0) = 100.0;
  EXPECT_THROW(ScriptedConnector(*d_, s, outside, cp), InvalidArgument);
}

TEST_F(Rewards, GrazingConnectorDisplacementMatchesStepSum) {
  ConnectorParams cp;
  cp.disturbance_radius = 0.015;
  cp.disturbance_gain = 0.001;
  cp.resolution = 0.002;
  const Vec3 obj(0.5, 0.005, 0.5);
  const Vec3 p0(0.45, 0.0, 0.5), p1(0.55, 0.0, 0.5);
  State s = WithConfig(Config(p0));
  s.q_obj = Pose::FromTranslation(obj);
  const RobotConfig goal = Config(p1);
  const auto traj = ScriptedConnector(*d_, s, goal, cp);

  const int steps = static_cast<int>(std::ceil((goal - s.q_r).norm() / cp.resolution));
  ASSERT_EQ(static_cast<int>(traj.size()), steps + 1);
  double expected = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const Vec3 ee = p0 + (static_cast<double>(i) / steps) * (p1 - p0);
    expected += oracle::Push((ee - obj).norm(), cp.disturbance_radius, cp.disturbance_gain);
  }
  ASSERT_GT(expected, 0.0);
  const Vec3 moved = traj.back().q_obj.position() - obj;
  EXPECT_NEAR(moved.norm(), expected, 1e-12);
  EXPECT_NEAR(moved.x(), expected, 1e-12);
}

TEST(Mining, MinimalProblemGivesOneTriplet) {
  auto b = oracle::Builtin("cardflip2d");
  for (auto& s : b.domain.skills) {
    s.failure_prob = 0.0;
    s.success_noise = {0.0, 0.0};
  }
  Problem pr;
  pr.s0.q_obj = b.domain.regions[0].PoseAt(0.45, -0.1, 0.0, 0.0, 0.0);
  pr.s0.q_r = b.domain.kinematics.Solve(Vec3(0.5, 0.0, 0.6), 0.0, 0.0);
  pr.goal = b.domain.regions[0].PoseAt(0.55, 0.0, 1.0, 0.0, 0.0);
  PlannerParams p;
  p.p_g = 1.0;
  const MiningSummary m = MineConnectorProblems({pr}, b.domain, p);
  ASSERT_EQ(m.problems.size(), 1u);
  EXPECT_EQ(m.solved, 1u);
  const ConnectorProblem& cp = m.problems[0];
  EXPECT_EQ(cp.start_state, pr.s0);
  EXPECT_EQ(cp.skill_id, "slide");
  EXPECT_EQ(cp.problem_index, 0u);
  EXPECT_LT((b.domain.kinematics.ToolPose(cp.target_robot_config).position() -
             (pr.s0.q_obj.position() + b.domain.skill("slide").approach_offset))
                .norm(),
            1e-9);
}

TEST(Mining, UnsolvableProblemGivesNoTriplets) {
  auto b = oracle::Builtin("cardflip2d");
  b.domain.skills.erase(b.domain.skills.begin() + *b.domain.FindSkill("flip"));
  Problem pr;
  pr.s0.q_obj = b.domain.regions[0].PoseAt(0.5, 0.0, 0.0, 0.0, 0.0);
  pr.goal = b.domain.regions[0].PoseAt(0.5, 0.0, 0.0, M_PI, 0.0);
  PlannerParams p;
  p.n_max = 200;
  const MiningSummary m = MineConnectorProblems({pr}, b.domain, p);
  EXPECT_TRUE(m.problems.empty());
  EXPECT_EQ(m.unsolved, 1u);
  EXPECT_EQ(m.unsolved_indices, std::vector<std::size_t>{0});
}

TEST(Mining, TripletsComeFromLazyTeleports) {
  const auto b = oracle::Builtin("cardflip2d");
  const auto problems = GenerateProblems(b.domain, 20, 71);
  PlannerParams p;
  p.seed = 5;
  const MiningSummary m = MineConnectorProblems(problems, b.domain, p);
  EXPECT_EQ(m.teleport_nodes, m.problems.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    PlannerParams pi = p;
    pi.seed = DeriveSeed(p.seed, i);
    SkillRrt rrt(b.domain, ConnectorSet::Empty(), pi);
    const PlanResult r = rrt.Solve(problems[i].s0, problems[i].goal);
    for (const Node& n : rrt.tree().nodes()) {
      if (n.is_root() || n.tag.kind != PolicyTag::Kind::kNone) continue;
      State expected = rrt.tree().node(*n.parent).state;
      expected.q_r = n.state.q_r;
      EXPECT_EQ(n.state, expected);
    }
    if (!r.goal_node) continue;
    const auto path = Retrace(rrt.tree(), *r.goal_node);
    for (std::size_t j = 1; j + 1 < path.size(); ++j) {
      const Node& v = rrt.tree().node(path[j]);
      if (v.tag.kind != PolicyTag::Kind::kNone) continue;
      ASSERT_LT(k, m.problems.size());
      const ConnectorProblem& cp = m.problems[k++];
      EXPECT_EQ(cp.problem_index, i);
      EXPECT_EQ(cp.start_state, rrt.tree().node(path[j - 1]).state);
      EXPECT_EQ(cp.target_robot_config, v.state.q_r);
      EXPECT_EQ(cp.skill_id, rrt.tree().node(path[j + 1]).tag.skill_id);
    }
  }
  EXPECT_EQ(k, m.problems.size());
  EXPECT_GT(k, 0u);
}
