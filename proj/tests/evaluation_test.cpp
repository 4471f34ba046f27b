#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "svo/error.hpp"
#include "svo/evaluation.hpp"
#include "test_util.hpp"

namespace svo {
namespace {

// Winding ground-truth path with 1 m steps.
Trajectory Path(int frames) {
  Trajectory t;
  Pose p;
  Vector6d step;
  step << 0, 0, 1, 0, 0.02, 0;
  for (int i = 0; i < frames; ++i) {
    t.poses.push_back(p);
    p = p * Se3Exp(step);
  }
  return t;
}

Trajectory Straight(int frames) {
  Trajectory t;
  for (int i = 0; i < frames; ++i) t.poses.emplace_back(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, i));
  return t;
}

const std::vector<double> kLengths = {5, 10, 20, 50};

TEST(Segments, IdenticalTrajectoriesHaveZeroError) {
  const Trajectory gt = Path(80);
  const auto segs = SegmentErrors(gt, gt, kLengths);
  ASSERT_FALSE(segs.empty());
  for (const auto& s : segs) {
    EXPECT_EQ(s.t_err, 0.0);
    EXPECT_EQ(s.r_err, 0.0);
  }
  const EvalReport r = Summarize(segs, kLengths);
  EXPECT_EQ(r.t_err, 0.0);
  EXPECT_EQ(r.per_length.size(), kLengths.size());
}

TEST(Segments, ScaleDriftIsOnePercent) {
  const Trajectory gt = Straight(120);
  Trajectory est;
  for (const Pose& p : gt.poses) est.poses.emplace_back(p.rotation(), 1.01 * p.translation());
  const auto segs = SegmentErrors(est, gt, kLengths);
  for (const auto& s : segs) {
    EXPECT_NEAR(s.t_err, 0.01, 1e-9) << s.length;
    EXPECT_NEAR(s.r_err, 0.0, 1e-12);
  }
  const EvalReport r = Summarize(segs, kLengths);
  for (const auto& l : r.per_length) EXPECT_NEAR(l.t_err, 0.01, 1e-9);
  std::ostringstream csv;
  WriteReportCsv(csv, "msac", "motion", r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "method,scope,length_m,t_err_pct,r_err_deg_per_m");
  EXPECT_NE(csv.str().find("msac,motion,5,1"), std::string::npos) << csv.str();
}

TEST(Segments, YawDrift) {
  const Trajectory gt = Straight(120);
  Trajectory est;
  for (std::size_t i = 0; i < gt.poses.size(); ++i) {
    est.poses.emplace_back(So3Exp(Eigen::Vector3d(0, 1e-4 * static_cast<double>(i), 0)), gt.poses[i].translation());
  }
  for (const auto& s : SegmentErrors(est, gt, kLengths)) EXPECT_NEAR(s.r_err, 1e-4, 1e-10) << s.length;
}

TEST(Segments, InvariantToGlobalRigidTransform) {
  std::mt19937_64 rng(3);
  const Trajectory gt = Path(80);
  Trajectory est;
  Vector6d noise;
  std::normal_distribution<double> n(0, 0.01);
  for (const Pose& p : gt.poses) {
    for (int k = 0; k < 6; ++k) noise(k) = n(rng);
    est.poses.push_back(p * Se3Exp(noise));
  }
  const Pose g = testing::RandomPose(rng, 2.0, 50.0);
  Trajectory est_moved, gt_moved;
  for (const Pose& p : est.poses) est_moved.poses.push_back(g * p);
  for (const Pose& p : gt.poses) gt_moved.poses.push_back(g * p);
  const auto a = SegmentErrors(est, gt, kLengths);
  const auto b = SegmentErrors(est_moved, gt_moved, kLengths);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].t_err, b[i].t_err, 1e-9);
    EXPECT_NEAR(a[i].r_err, b[i].r_err, 1e-9);
  }
}

TEST(Segments, StepAndOrdering) {
  const Trajectory gt = Straight(30);
  const auto all = SegmentErrors(gt, gt, kLengths, 1);
  const auto strided = SegmentErrors(gt, gt, kLengths, 10);
  for (const auto& s : strided) EXPECT_EQ(s.first_frame % 10, 0);
  EXPECT_LT(strided.size(), all.size());
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_TRUE(all[i - 1].first_frame < all[i].first_frame ||
                (all[i - 1].first_frame == all[i].first_frame && all[i - 1].length < all[i].length));
  }
  // Straight(30) spans 29 m: 50 m segments never fit.
  for (const auto& s : all) EXPECT_LT(s.length, 50);
}

TEST(Segments, Errors) {
  const Trajectory gt = Straight(30);
  try {
    SegmentErrors(gt, gt, kLengths, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  try {
    SegmentErrors(Straight(29), gt, kLengths);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatchedTrajectories);
  }
}

TEST(Lengths, Parse) {
  EXPECT_EQ(ParseLengths("5,10,50"), (std::vector<double>{5, 10, 50}));
  EXPECT_EQ(ParseLengths("0.5"), (std::vector<double>{0.5}));
  EXPECT_THROW(ParseLengths("5,,10"), Error);
  EXPECT_THROW(ParseLengths("abc"), Error);
  EXPECT_THROW(ParseLengths("-1"), Error);
  EXPECT_EQ(DefaultSegmentLengths().front(), 100);
  EXPECT_EQ(DefaultSegmentLengths().back(), 800);
  EXPECT_EQ(DefaultSegmentLengths().size(), 15u);
  EXPECT_DOUBLE_EQ(ShortSegmentLengths().front(), 0.05);
}

TEST(Distances, Cumulative) {
  const auto d = TrajectoryDistances(Straight(4));
  EXPECT_EQ(d, (std::vector<double>{0, 1, 2, 3}));
}

TEST(Timing, Statistics) {
  const auto r = TimingReport({{"init", {1, 2, 3, 10}}, {"refine", {5}}});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].stage, "init");
  EXPECT_DOUBLE_EQ(r[0].mean_ms, 4.0);
  EXPECT_DOUBLE_EQ(r[0].median_ms, 2.5);
  EXPECT_NEAR(r[0].std_ms, std::sqrt(((9 + 4 + 1 + 36) / 3.0)), 1e-12);
  EXPECT_EQ(r[1].samples, 1u);
  EXPECT_EQ(r[1].std_ms, 0.0);
  EXPECT_DOUBLE_EQ(r[1].median_ms, 5.0);
  EXPECT_THROW(TimingReport({{"empty", {}}}), Error);
}

}  // namespace
}  // namespace svo
