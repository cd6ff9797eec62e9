#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "plans.hpp"
#include "skillrrt/error.hpp"
#include "skillrrt/filtering.hpp"
#include "skillrrt/io.hpp"

using namespace skillrrt;

namespace {

class Filtering : public ::testing::Test {
 protected:
  void SetUp() override {
    bundle_ = oracle::Builtin("cardflip2d");
    d_ = &bundle_.domain;
  }
  void SetSkills(double failure_prob, double pos = 0.0, double rot = 0.0) {
    for (auto& s : d_->skills) {
      s.failure_prob = failure_prob;
      s.success_noise = {pos, rot};
    }
  }

  DomainBundle bundle_;
  Domain* d_ = nullptr;
};

ReplayReport Report(const std::string& id, std::size_t n, std::size_t ok) {
  ReplayReport r;
  r.plan_id = id;
  r.n_replays = n;
  r.n_success = ok;
  r.success_rate = static_cast<double>(ok) / n;
  return r;
}

Eigen::Matrix3d RotationOf(const Pose& p) {
  const Quat& q = p.orientation();
  return oracle::QuatMatrix(q.w(), q.x(), q.y(), q.z());
}

}  // namespace

TEST_F(Filtering, NoiselessReplayAlwaysSucceeds) {
  SetSkills(0.0);
  const ReplayReport r = ReplayPlan(testplans::ThreeSlides(*d_), *d_, NoiseConfig::Zero(), 50, 1, "p");
  EXPECT_EQ(r.n_success, 50u);
  EXPECT_EQ(r.success_rate, 1.0);
  EXPECT_EQ(r.plan_id, "p");
}

TEST_F(Filtering, CertainFailureNeverSucceeds) {
  SetSkills(0.0);
  d_->skills[*d_->FindSkill("slide")].failure_prob = 1.0;
  const ReplayReport r = ReplayPlan(testplans::ThreeSlides(*d_), *d_, NoiseConfig::Zero(), 50, 1);
  EXPECT_EQ(r.n_success, 0u);
  EXPECT_EQ(r.success_rate, 0.0);
  for (const auto& o : r.outcomes) EXPECT_EQ(o.steps_completed, 2u);
}

TEST_F(Filtering, IndependentSkillFailuresMultiply) {
  SetSkills(0.1);
  const int n = 10000;
  const ReplayReport r = ReplayPlan(testplans::ThreeSlides(*d_), *d_, NoiseConfig::Zero(), n, 2);
  const double p = 0.9 * 0.9 * 0.9;
  EXPECT_NEAR(p, 0.729, 1e-12);
  EXPECT_NEAR(r.success_rate, p, 3 * oracle::BernoulliSe(p, n));
}

TEST_F(Filtering, ReportCountsAreExact) {
  const ReplayReport r = ReplayPlan(testplans::ThreeSlides(*d_), *d_, bundle_.noise, 200, 3);
  ASSERT_EQ(r.outcomes.size(), 200u);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    ok += r.outcomes[i].success;
    EXPECT_EQ(r.outcomes[i].index, i);
    EXPECT_EQ(r.outcomes[i].seed, DeriveSeed(3, i));
  }
  EXPECT_EQ(r.n_success, ok);
  EXPECT_EQ(r.success_rate, static_cast<double>(ok) / 200.0);
}

TEST_F(Filtering, ReplayIsDeterministic) {
  const SkillPlan plan = testplans::ThreeSlides(*d_);
  const ArtifactMeta meta;
  EXPECT_EQ(ReplayReportToJson(ReplayPlan(plan, *d_, bundle_.noise, 100, 9), meta),
            ReplayReportToJson(ReplayPlan(plan, *d_, bundle_.noise, 100, 9), meta));
}

TEST_F(Filtering, ReplayRejectsBadInput) {
  SkillPlan plan = testplans::ThreeSlides(*d_);
  EXPECT_THROW(ReplayPlan(plan, *d_, bundle_.noise, 0, 1), InvalidArgument);
  plan.steps[1].skill_id = "juggle";
  EXPECT_THROW(ReplayPlan(plan, *d_, bundle_.noise, 1, 1), ConfigError);
}

TEST(FilterPlans, StrictThreshold) {
  const std::vector<ReplayReport> reports{Report("a", 100, 95), Report("b", 100, 90), Report("c", 100, 89)};
  EXPECT_EQ(FilterPlans(reports, 0.9), std::vector<std::string>{"a"});
  const std::vector<ReplayReport> with_zero{Report("a", 10, 1), Report("z", 10, 0), Report("b", 10, 10)};
  EXPECT_EQ(FilterPlans(with_zero, 0.0), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(FilterPlans(with_zero, 1.0).empty());
  EXPECT_THROW(FilterPlans(reports, 1.5), InvalidArgument);
  EXPECT_THROW(FilterPlans(reports, -0.1), InvalidArgument);
}

TEST(FilterPlans, RaisingThresholdNeverGrowsKeptSet) {
  Rng rng = MakeRng(4);
  std::vector<ReplayReport> reports;
  for (int i = 0; i < 200; ++i) reports.push_back(Report("p" + std::to_string(i), 400, UniformIndex(rng, 401)));
  std::vector<std::string> prev = FilterPlans(reports, 0.0);
  for (double m = 0.01; m <= 1.0; m += 0.01) {
    const auto kept = FilterPlans(reports, m);
    EXPECT_LE(kept.size(), prev.size());
    for (const auto& id : kept) EXPECT_NE(std::find(prev.begin(), prev.end(), id), prev.end());
    prev = kept;
  }
}

TEST_F(Filtering, ExportRecordCount) {
  SetSkills(0.0);
  const auto& r = d_->regions[0];
  State s0;
  s0.q_obj = r.PoseAt(0.45, -0.15, 0.0, 0.0, 0.0);
  s0.q_r = d_->kinematics.Solve(Vec3(0.5, 0.0, 0.6), 0.0, 0.0);
  const SkillPlan plan =
      testplans::Chain(*d_, s0, "slide", {r.PoseAt(0.55, 0.0, 0.5, 0.0, 0.0), r.PoseAt(0.5, 0.1, 1.0, 0.0, 0.0)});
  ASSERT_EQ(plan.steps.size(), 4u);
  const ExportResult out = ExportDataset({{"p0", plan}}, *d_, NoiseConfig::Zero(), 30, 5);
  EXPECT_EQ(out.records.size(), 120u);
  ASSERT_EQ(out.summaries.size(), 1u);
  EXPECT_EQ(out.summaries[0].collected, 30u);
  EXPECT_EQ(out.summaries[0].attempts, 30u);
  EXPECT_EQ(out.summaries[0].shortfall, 0u);
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    EXPECT_EQ(out.records[i].trajectory, i / 4);
    EXPECT_EQ(out.records[i].step, i % 4);
    EXPECT_EQ(out.records[i].action, plan.steps[i % 4]);
  }
}

TEST_F(Filtering, ExportReportsShortfall) {
  SetSkills(1.0);
  const ExportResult out = ExportDataset({{"p0", testplans::ThreeSlides(*d_)}}, *d_, bundle_.noise, 30, 5);
  EXPECT_TRUE(out.records.empty());
  EXPECT_EQ(out.summaries[0].collected, 0u);
  EXPECT_EQ(out.summaries[0].shortfall, 30u);
  EXPECT_EQ(out.summaries[0].attempts, 1500u);
}

TEST_F(Filtering, ExportedRecordsAreConsistent) {
  const SkillPlan plan = testplans::ThreeSlides(*d_);
  const ExportResult out = ExportDataset({{"p0", plan}}, *d_, bundle_.noise, 10, 6);
  ASSERT_FALSE(out.records.empty());
  const auto& kin = d_->kinematics;
  for (const DatasetRecord& rec : out.records) {
    EXPECT_EQ(rec.schema_version, kDatasetSchemaVersion);
    // Relative fields re-derived from the absolute ones: R^T (p - t).
    const Eigen::Matrix3d rt = RotationOf(rec.obj_pose).transpose();
    const Vec3 t = rec.obj_pose.position();
    for (int k = 0; k < 8; ++k) EXPECT_NEAR((rec.p_ee_rel[k] - rt * (rec.p_ee[k] - t)).norm(), 0.0, 1e-9);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR((rec.p_tip_rel[k] - rt * (rec.p_tip[k] - t)).norm(), 0.0, 1e-9);
    const Eigen::Matrix3d re = RotationOf(rec.ee_pose);
    for (int k = 0; k < 8; ++k) {
      EXPECT_NEAR((rec.p_ee[k] - (rec.ee_pose.position() + re * kin.ee_keypoints.points()[k])).norm(), 0.0, 1e-12);
    }
    const Eigen::Matrix3d rg = RotationOf(plan.goal_pose);
    for (int k = 0; k < 8; ++k) {
      EXPECT_NEAR((rec.p_goal[k] - (plan.goal_pose.position() + rg * d_->keypoint_template.points()[k])).norm(), 0.0,
                  1e-12);
    }
    // Latent state is reachable by replaying the plan prefix with the record's seed.
    const ReplayTrace trace = ReplayOnce(plan, *d_, bundle_.noise, rec.seed);
    EXPECT_TRUE(trace.success);
    ASSERT_LT(rec.step, trace.states.size());
    EXPECT_EQ(trace.states[rec.step], rec.latent);
    EXPECT_EQ(rec.gripper_width, rec.latent.gripper_width);
  }
}

TEST_F(Filtering, ExportIsDeterministic) {
  const SkillPlan plan = testplans::ThreeSlides(*d_);
  const auto dump = [&] {
    std::string s;
    for (const auto& r : ExportDataset({{"p0", plan}}, *d_, bundle_.noise, 5, 8).records) {
      s += DatasetRecordToJsonLine(r, ArtifactMeta{}) + "\n";
    }
    return s;
  };
  const std::string a = dump();
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, dump());
}

TEST_F(Filtering, FirstRecordHasNoPreviousConfig) {
  const ExportResult out = ExportDataset({{"p0", testplans::ThreeSlides(*d_)}}, *d_, bundle_.noise, 2, 8);
  ASSERT_FALSE(out.records.empty());
  EXPECT_EQ(out.records[0].q_r_prev, out.records[0].q_r);
  EXPECT_EQ(out.records[1].q_r_prev, out.records[0].q_r);
}
