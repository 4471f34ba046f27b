#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "svo/error.hpp"
#include "svo/geometry.hpp"
#include "test_util.hpp"

namespace svo {
namespace {

using testing::RandomPoint;
using testing::RandomPose;

TEST(Se3, ExpLogRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vector6d xi;
    for (int k = 0; k < 6; ++k) xi(k) = n(rng);
    if (xi.tail<3>().norm() > 3.0) xi.tail<3>() *= 3.0 / xi.tail<3>().norm();  // keep the angle below pi
    const Vector6d back = Se3Log(Se3Exp(xi));
    EXPECT_LT((back - xi).norm(), 1e-9 * (1 + xi.norm()));
  }
}

TEST(Se3, SmallAngles) {
  Vector6d xi;
  xi << 0.3, -0.2, 0.1, 1e-12, -2e-12, 3e-12;
  EXPECT_LT((Se3Log(Se3Exp(xi)) - xi).norm(), 1e-14);
  EXPECT_EQ(Se3Log(Pose::Identity()).norm(), 0.0);
}

TEST(So3, NearPi) {
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, 3).normalized();
  for (const double angle : {std::numbers::pi - 1e-9, std::numbers::pi - 1e-5, 3.0}) {
    const Eigen::Matrix3d r = So3Exp(angle * axis);
    EXPECT_NEAR(RotationAngle(r), angle, 1e-6);
    const Eigen::Matrix3d back = So3Exp(So3Log(r));
    EXPECT_LT((back - r).norm(), 1e-8);
  }
}

TEST(Pose, ComposeInverse) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Pose a = RandomPose(rng);
    const Pose b = RandomPose(rng);
    const Point3 y = RandomPoint(rng);
    EXPECT_LT(((a * b) * y - a * (b * y)).norm(), 1e-12);
    EXPECT_LT((a.Inverse() * (a * y) - y).norm(), 1e-12);
  }
}

TEST(Geometry, OrthonormalizeIsNearestRotation) {
  std::mt19937_64 rng(3);
  const Eigen::Matrix3d r = RandomPose(rng).rotation();
  Eigen::Matrix3d noisy = r;
  noisy(0, 1) += 1e-4;
  const Eigen::Matrix3d fixed = Orthonormalize(noisy);
  EXPECT_LT((fixed.transpose() * fixed - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_NEAR(fixed.determinant(), 1.0, 1e-12);
  EXPECT_LT((fixed - r).norm(), 1e-4);
}

TEST(Stereo, ProjectionClosedForm) {
  const StereoCalibration calib;
  const Point3 p(1.0, -0.5, 10.0);
  const Eigen::Vector3d obs = StereoProjectCamera(p, calib);
  EXPECT_DOUBLE_EQ(obs.x(), calib.focal * 0.1 + calib.u0);
  EXPECT_DOUBLE_EQ(obs.y(), calib.focal * (1.0 - calib.baseline) / 10.0 + calib.u0);
  EXPECT_DOUBLE_EQ(obs.z(), calib.focal * -0.05 + calib.v0);
  EXPECT_NEAR(obs.x() - obs.y(), calib.focal * calib.baseline / 10.0, 1e-12);
}

TEST(Stereo, TriangulateInvertsProjection) {
  const StereoCalibration calib;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Point3 p = RandomPoint(rng);
    EXPECT_LT((Triangulate(StereoProjectCamera(p, calib), calib) - p).norm(), 1e-9 * p.norm());
  }
}

TEST(Stereo, Errors) {
  const StereoCalibration calib;
  try {
    Triangulate(100, 100, 50, calib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDisparity);
  }
  try {
    StereoProjectCamera(Point3(0, 0, -1), calib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPointBehindCamera);
  }
  StereoCalibration bad;
  bad.focal = 0;
  EXPECT_THROW(bad.Validate(), Error);
}

std::array<PnpCorrespondence, 4> MakeSample(const Pose& pose, std::mt19937_64& rng, const StereoCalibration& calib) {
  std::array<PnpCorrespondence, 4> s;
  for (auto& c : s) {
    c.point = RandomPoint(rng);
    const Eigen::Vector3d obs = StereoProject(pose, c.point, calib);
    c.pixel = {obs.x(), obs.z()};
  }
  return s;
}

TEST(Pnp, FourPointsRecoverPose) {
  const StereoCalibration calib;
  std::mt19937_64 rng(5);
  int solved = 0;
  for (int i = 0; i < 100; ++i) {
    const Pose truth = RandomPose(rng, 0.2, 1.0);
    const auto sample = MakeSample(truth, rng, calib);
    if (!IsNonDegenerateSample(sample)) continue;
    const auto poses = PnpMinimal(sample, calib);
    ASSERT_FALSE(poses.empty());
    EXPECT_LT(testing::TranslationError(truth, poses.front()), 1e-6);
    EXPECT_LT(testing::RotationError(truth, poses.front()), 1e-8);
    ++solved;
  }
  EXPECT_GT(solved, 95);
}

TEST(Pnp, P3pContainsGeneratingPose) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Pose truth = RandomPose(rng, 3.0, 3.0);
    std::array<Eigen::Vector3d, 3> pts, bearings;
    for (int k = 0; k < 3; ++k) {
      const Point3 cam = RandomPoint(rng, 3, 30);
      pts[k] = truth.Inverse() * cam;
      bearings[k] = cam.normalized();
    }
    double best = 1e9;
    for (const Pose& p : P3pSolve(pts, bearings)) best = std::min(best, testing::RotationError(truth, p));
    EXPECT_LE(best, 1e-8) << "trial " << i;
  }
}

TEST(Pnp, DegenerateSamples) {
  const StereoCalibration calib;
  std::array<PnpCorrespondence, 4> s;
  for (int k = 0; k < 4; ++k) {
    s[k].point = Point3(k, 2.0 * k, 10.0 + k);  // collinear
    s[k].pixel = {600, 180};
  }
  EXPECT_FALSE(IsNonDegenerateSample(s));
  try {
    PnpMinimal(s, calib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSample);
  }
  s[1].point = s[0].point;  // coincident
  EXPECT_FALSE(IsNonDegenerateSample(s));
}

}  // namespace
}  // namespace svo
