#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "svo/error.hpp"
#include "svo/io_sim.hpp"
#include "test_util.hpp"

namespace svo {
namespace {

TEST(PoseFile, IdentityLine) { EXPECT_EQ(FormatPoseLine(Pose::Identity()), "1 0 0 0 0 1 0 0 0 0 1 0"); }

TEST(PoseFile, RoundTrip) {
  std::mt19937_64 rng(1);
  Trajectory t;
  for (int i = 0; i < 100; ++i) t.poses.push_back(testing::RandomPose(rng, 3.0, 100.0));
  std::stringstream ss;
  WritePoses(ss, t);
  const PoseReadResult back = ReadPoses(ss);
  ASSERT_EQ(back.trajectory.poses.size(), 100u);
  for (int i = 0; i < 100; ++i) {
    EXPECT_LT((back.trajectory.poses[i].Matrix3x4() - t.poses[i].Matrix3x4()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(PoseFile, ElevenFieldsIsAnError) {
  std::stringstream ss("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1\n");
  try {
    ReadPoses(ss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedInput);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(PoseFile, ReorthonormalizesDriftedRotation) {
  std::stringstream ss("1.001 0 0 0 0 1 0 0 0 0 1 0\n");
  const PoseReadResult r = ReadPoses(ss);
  ASSERT_EQ(r.reorthonormalized_lines, std::vector<int>{1});
  const Eigen::Matrix3d rot = r.trajectory.poses[0].rotation();
  EXPECT_LT((rot.transpose() * rot - Eigen::Matrix3d::Identity()).norm(), 1e-12);
}

TEST(CorrespondenceFile, BitExactRoundTrip) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1.0, 1000.0);
  std::vector<FramePair> pairs(3);
  for (int p = 0; p < 3; ++p) {
    pairs[p].frame_index = p + 1;
    for (int i = 0; i < (p == 2 ? 334 : 333); ++i) {
      const double ul = u(rng), ulc = u(rng);
      pairs[p].measurements.push_back({ul, ul - u(rng) / 10, u(rng), ulc, ulc - u(rng) / 10, -u(rng)});
    }
  }
  std::stringstream ss;
  WriteCorrespondences(ss, pairs);
  const auto back = ReadCorrespondences(ss);
  ASSERT_EQ(back.size(), 3u);
  for (int p = 0; p < 3; ++p) {
    ASSERT_EQ(back[p].measurements.size(), pairs[p].measurements.size());
    for (std::size_t i = 0; i < pairs[p].measurements.size(); ++i) {
      EXPECT_EQ(back[p].measurements[i].AsVector(), pairs[p].measurements[i].AsVector());
    }
  }
}

TEST(CorrespondenceFile, HeaderOnly) {
  std::stringstream ss(std::string(kCorrespondenceHeader) + "\n");
  EXPECT_TRUE(ReadCorrespondences(ss).empty());
}

TEST(CorrespondenceFile, Errors) {
  const std::string h = std::string(kCorrespondenceHeader) + "\n";
  auto expect = [](const std::string& text, ErrorCode code, const std::string& fragment) {
    std::stringstream ss(text);
    try {
      ReadCorrespondences(ss);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect(h + "1,10,20,5,10,5,5\n", ErrorCode::kMalformedInput, "line 2");
  expect(h + "1,20,10,5,20,10,5\n1,20,10,5,20,10\n", ErrorCode::kMalformedInput, "line 3");
  expect(h + "1,20,10,5,20,x,5\n", ErrorCode::kMalformedInput, "line 2");
  expect(h + "2,20,10,5,20,10,5\n1,20,10,5,20,10,5\n", ErrorCode::kNonMonotoneFrames, "line 3");
  expect("a,b\n", ErrorCode::kMalformedInput, "line 1");
}

TEST(CorrespondenceFile, FillGaps) {
  std::vector<FramePair> pairs = {{2, {}}, {4, {}}};
  const auto filled = FillFrameGaps(pairs);
  ASSERT_EQ(filled.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(filled[i].frame_index, i + 1);
}

TEST(FormatDouble, NegativeZero) {
  EXPECT_EQ(FormatDouble(-0.0), "0");
  EXPECT_EQ(FormatDouble(0.1), "0.10000000000000001");
}

GeneratedPair Generate(double sigma, double outliers, int points, std::uint64_t seed, bool prev_noise = true) {
  SceneConfig scene;
  scene.num_points = points;
  scene.sigma = sigma;
  scene.outlier_ratio = outliers;
  scene.seed = seed;
  scene.previous_frame_noise = prev_noise;
  return GeneratePair(scene, StereoCalibration{});
}

TEST(Simulation, NoiseStandardDeviation) {
  const StereoCalibration calib;
  const GeneratedPair g = Generate(1.0, 0.0, 10000, 3);
  double sum = 0, sq = 0;
  int n = 0;
  for (std::size_t i = 0; i < g.true_points.size(); ++i) {
    const Eigen::Vector3d clean = StereoProject(g.motion, g.true_points[i], calib);
    const Eigen::Vector3d d = g.pair.measurements[i].Cur() - clean;
    for (int k = 0; k < 3; ++k) {
      sum += d(k);
      sq += d(k) * d(k);
      ++n;
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_GE(sd, 0.97);
  EXPECT_LE(sd, 1.03);
}

TEST(Simulation, OutlierCount) {
  const GeneratedPair g = Generate(1.0, 0.3, 1000, 4);
  const auto count = std::count(g.is_outlier.begin(), g.is_outlier.end(), true);
  EXPECT_GE(count, 260);
  EXPECT_LE(count, 340);
}

TEST(Simulation, MotionErrorIsChiSquared) {
  const StereoCalibration calib;
  const GeneratedPair g = Generate(1.0, 0.0, 2000, 5, false);
  std::vector<double> s;
  for (const auto& m : g.pair.measurements) {
    s.push_back(MotionError(g.motion, MakeCorrespondence(m, calib), calib).squaredNorm());
  }
  std::sort(s.begin(), s.end());
  const boost::math::chi_squared chi(3);
  const double n = static_cast<double>(s.size());
  double d = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = boost::math::cdf(chi, s[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k) p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
  EXPECT_GT(p, 0.01) << "D=" << d;
}

TEST(Simulation, Deterministic) {
  const GeneratedPair a = Generate(1.0, 0.3, 500, 6);
  const GeneratedPair b = Generate(1.0, 0.3, 500, 6);
  std::stringstream sa, sb;
  WriteCorrespondences(sa, std::vector<FramePair>{a.pair});
  WriteCorrespondences(sb, std::vector<FramePair>{b.pair});
  EXPECT_EQ(sa.str(), sb.str());
  const GeneratedPair c = Generate(1.0, 0.3, 500, 7);
  std::stringstream sc;
  WriteCorrespondences(sc, std::vector<FramePair>{c.pair});
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Simulation, ValidatesConfig) {
  SceneConfig scene;
  scene.outlier_ratio = 1.5;
  try {
    scene.Validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    EXPECT_NE(std::string(e.what()).find("outlier_ratio"), std::string::npos);
  }
}

TEST(Simulation, SequenceGroundTruth) {
  SceneConfig scene;
  scene.frame_count = 5;
  const GeneratedSequence seq = GenerateSequence(scene, StereoCalibration{});
  ASSERT_EQ(seq.pairs.size(), 4u);
  ASSERT_EQ(seq.ground_truth.poses.size(), 5u);
  for (int k = 1; k < 5; ++k) {
    EXPECT_EQ(seq.pairs[k - 1].pair.frame_index, k);
    const Pose rel = seq.ground_truth.poses[k].Inverse() * seq.ground_truth.poses[k - 1];
    EXPECT_LT(testing::TranslationError(rel, seq.pairs[k - 1].motion), 1e-12);
  }
}

}  // namespace
}  // namespace svo
