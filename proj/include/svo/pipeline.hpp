#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svo/correspondence.hpp"
#include "svo/geometry.hpp"
#include "svo/refinement.hpp"
#include "svo/robust_init.hpp"

namespace svo {

/// Measurements between frames k-1 and k, where k = frame_index.
struct FramePair {
  int frame_index = 1;
  std::vector<StereoMeasurement> measurements;
};

/// Absolute camera-to-world poses; frame 0 is the identity.
struct Trajectory {
  std::vector<Pose> poses;
};

/// Feature weight favouring columns near the principal point:
/// 1 / (|ul - u0| / u0 + 0.05).
double Viso2Weight(double ul, double u0);

struct PipelineConfig {
  InitConfig init;
  RefinementScope scope = RefinementScope::kMotionOnly;
  bool weighting = false;
  /// Refinement cost for the first two scopes; defaults to Gaussian on inliers.
  std::optional<NoiseModel> refinement_model;
  /// Starting isotropic sigma (pixels) of the Cauchy noise block.
  double cauchy_sigma0 = 1.0;
};

struct PairDiagnostics {
  int frame_index = 0;
  std::size_t correspondences = 0;
  std::size_t inliers = 0;
  double threshold = 0;
  double init_score = 0;
  std::optional<double> inlier_ratio;
  double refine_initial_cost = 0;
  double refine_final_cost = 0;
  int refine_iterations = 0;
  double triangulate_ms = 0;
  double init_ms = 0;
  double refine_ms = 0;
  bool failed = false;
  std::string failure;
};

struct PairResult {
  /// Point transform from frame k-1 to frame k.
  Pose motion;
  PairDiagnostics diagnostics;
  std::optional<SquareMat> noise_inv_sqrt;
  /// Consensus set re-classified at the refined motion with the initializer's
  /// threshold.
  std::vector<bool> inlier_mask;
};

/// Seed used for the pair's sample draws: derived from (seed, frame index).
std::uint64_t PairSeed(std::uint64_t seed, int frame_index);

/// Triangulate, weight, initialize, refine on inliers. Throws on failure.
PairResult ProcessPair(const FramePair& pair, const StereoCalibration& calib, const PipelineConfig& config);

struct SequenceResult {
  Trajectory trajectory;
  std::vector<PairDiagnostics> diagnostics;
};

/// Processes every pair; a failing pair contributes the identity motion and a
/// failure flag.
SequenceResult ProcessSequence(std::span<const FramePair> pairs, const StereoCalibration& calib,
                               const PipelineConfig& config);

/// abs[k] = abs[k-1] * motion[k]^-1, abs[0] = identity.
Trajectory ChainMotions(std::span<const Pose> motions);

}  // namespace svo
