#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svo/correspondence.hpp"
#include "svo/geometry.hpp"
#include "svo/noise_models.hpp"

namespace svo {

struct Hypothesis {
  Pose pose;
  /// Lower is better. Sum of weighted rho for cost models, log NFA for AC-RANSAC.
  double score = 0;
  std::vector<bool> inlier_mask;
  /// Adaptive threshold for AC-RANSAC, otherwise the configured T (pixels).
  double threshold = 0;
  /// EM estimate of gamma (MLESAC/AMLESAC only).
  std::optional<double> inlier_ratio;
  /// Optimized covariance (AMLESAC only).
  std::optional<SquareMat> covariance;
  /// Iteration index that produced the pose.
  int iteration = -1;
  int degenerate_samples = 0;
  int evaluated_hypotheses = 0;

  std::size_t InlierCount() const;
};

struct InitConfig {
  int iterations = 1000;
  NoiseModel model = MsacModel{2.0};
  std::uint64_t seed = 0;
  int min_sample_size = 4;
  /// Inlier cutoff for the mixture models, which have no T of their own.
  double inlier_threshold = 2.79;
  /// Worker threads; results are identical for any value.
  int threads = 1;
};

/// Indices of the minimal sample drawn at a given iteration. Depends only on
/// (seed, iteration, n), never on the scorer.
std::array<int, 4> DrawSample(std::uint64_t seed, int iteration, int n);

/// Per-correspondence motion error norms (pixels) for a pose.
std::vector<double> ErrorNorms(const Pose& pose, std::span<const Correspondence> data,
                               const StereoCalibration& calib);

/// Draws minimal samples, solves the four-point pose, scores every
/// correspondence with the configured model and keeps the lowest score
/// (first found on ties). Weights from Correspondence::weight multiply rho.
/// Throws kInsufficientCorrespondences, kAllHypothesesDegenerate, kNoValidModel.
Hypothesis HypothesizeAndTest(std::span<const Correspondence> data, const StereoCalibration& calib,
                              const InitConfig& config);

/// Single-start pseudo-Huber minimization from the identity pose (motion only),
/// followed by ||e|| < T inlier classification. Throws kOptimizerDiverged.
Hypothesis ErodeInit(std::span<const Correspondence> data, const StereoCalibration& calib,
                     double b = 2.0, double threshold = 2.79);

}  // namespace svo
