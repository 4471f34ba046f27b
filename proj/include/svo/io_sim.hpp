#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "svo/geometry.hpp"
#include "svo/pipeline.hpp"

namespace svo {

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

struct SceneConfig {
  int num_points = 200;
  double depth_min = 5.0;
  double depth_max = 50.0;
  /// Isotropic pixel noise; overridden per axis by sigma_u / sigma_v.
  double sigma = 0.0;
  std::optional<double> sigma_u;
  std::optional<double> sigma_v;
  /// When false only the current frame is perturbed, so the motion-only error
  /// at the true pose is exactly N(0, diag(su^2, su^2, sv^2)).
  bool previous_frame_noise = true;
  double outlier_ratio = 0.0;
  double translation_m = 1.0;
  double rotation_deg = 2.0;
  int frame_count = 2;
  std::uint64_t seed = 0;

  double SigmaU() const { return sigma_u.value_or(sigma); }
  double SigmaV() const { return sigma_v.value_or(sigma); }
  /// Throws Error(kInvalidConfig) naming the field.
  void Validate() const;
};

struct GeneratedPair {
  FramePair pair;
  std::vector<bool> is_outlier;
  std::vector<Point3> true_points;
  /// Ground-truth point transform from frame k-1 to frame k.
  Pose motion;
};

/// Motion with a uniformly random rotation axis (angle rotation_deg) and a
/// uniformly random translation direction (norm translation_m).
Pose RandomMotion(const SceneConfig& scene, std::mt19937_64& rng);

/// Points uniform (by volume) in the frustum between depth_min and depth_max,
/// visible in both frames. Inliers get Gaussian pixel noise on all six
/// coordinates; outliers keep a valid previous observation and get a current
/// observation uniform over image x disparity range.
/// Throws kFrustumEmpty when visible points cannot be found.
GeneratedPair GeneratePair(const SceneConfig& scene, const StereoCalibration& calib, const Pose& motion,
                           std::uint64_t seed, int frame_index = 1);
GeneratedPair GeneratePair(const SceneConfig& scene, const StereoCalibration& calib);

struct GeneratedSequence {
  std::vector<GeneratedPair> pairs;
  Trajectory ground_truth;
};

/// frame_count frames (frame_count - 1 pairs), each pair seeded from (seed, frame).
GeneratedSequence GenerateSequence(const SceneConfig& scene, const StereoCalibration& calib);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// "r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2", %.17g per value.
std::string FormatPoseLine(const Pose& pose);

struct PoseReadResult {
  Trajectory trajectory;
  /// 1-based line numbers whose rotation was re-orthonormalized.
  std::vector<int> reorthonormalized_lines;
};

void WritePoses(std::ostream& out, const Trajectory& trajectory);
void WritePoses(const std::filesystem::path& path, const Trajectory& trajectory);
/// Throws kMalformedInput with the line number.
PoseReadResult ReadPoses(std::istream& in);
PoseReadResult ReadPoses(const std::filesystem::path& path);

inline constexpr const char* kCorrespondenceHeader = "frame_index,ul_prev,ur_prev,v_prev,ul_cur,ur_cur,v_cur";

void WriteCorrespondences(std::ostream& out, std::span<const FramePair> pairs);
void WriteCorrespondences(const std::filesystem::path& path, std::span<const FramePair> pairs);
/// One FramePair per distinct frame index, in file order.
/// Throws kMalformedInput (row number) or kNonMonotoneFrames.
std::vector<FramePair> ReadCorrespondences(std::istream& in);
std::vector<FramePair> ReadCorrespondences(const std::filesystem::path& path);

/// Inserts empty pairs for missing indices so that pair i has frame index i + 1.
std::vector<FramePair> FillFrameGaps(std::vector<FramePair> pairs);

inline constexpr const char* kLabelHeader = "frame_index,row,is_outlier,x,y,z";
void WriteLabels(std::ostream& out, std::span<const GeneratedPair> pairs);

/// %.17g with negative zero printed as 0.
std::string FormatDouble(double value);

}  // namespace svo
