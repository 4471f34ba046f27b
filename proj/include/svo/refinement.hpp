#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "svo/correspondence.hpp"
#include "svo/geometry.hpp"
#include "svo/noise_models.hpp"

namespace svo {

/// Which variables the refinement optimizes.
enum class RefinementScope {
  kMotionOnly,            // pose; 3-dim errors, structure fixed
  kMotionStructure,       // pose + points; 6-dim errors, frame k-1 canonical
  kMotionStructureNoise,  // pose + points + Cauchy inverse-covariance factor
};

std::string_view ToString(RefinementScope scope);
/// Accepts "motion", "ba", "ba-noise". Throws kInvalidArgument otherwise.
RefinementScope ParseScope(std::string_view name);

/// Error dimension of the scope: 3 or 6.
int ErrorDimension(RefinementScope scope);
/// Lower-triangular parameter count d(d+1)/2.
inline int NoiseParamCount(int d) { return d * (d + 1) / 2; }
/// Noise parameters of kMotionStructureNoise: one 3x3 factor over (ul, ur, v)
/// shared by both frames.
inline constexpr int kNoiseParams = 6;
/// Number of variables seen by one correspondence: 6, 9 or 9 + 6.
int LocalVariableCount(RefinementScope scope);

/// Variables touching a single correspondence. For the noise block, S = L^T L
/// with L = blockdiag(B, B), B lower-triangular 3x3; B's diagonal is optimized
/// through its logarithm and its parameters are ordered row by row, (j, 0..j).
struct LocalState {
  Pose pose;
  Point3 point;
  SquareMat noise_inv_sqrt;
};

/// Residual seen by the solver: raw error for the first two scopes, the
/// whitened error L e for kMotionStructureNoise.
Eigen::VectorXd RefinementResidual(RefinementScope scope, const LocalState& state,
                                   const Correspondence& c, const StereoCalibration& calib);

/// Analytic Jacobian of RefinementResidual with respect to
/// [pose tangent (6) | point (3) | noise parameters]. Pose updates are
/// left-multiplicative: pose <- exp(delta) * pose.
/// Throws kPointBehindCamera.
Eigen::MatrixXd RefinementJacobian(RefinementScope scope, const LocalState& state,
                                   const Correspondence& c, const StereoCalibration& calib);

/// Applies a local update in the same parameterization as the Jacobian.
LocalState Retract(RefinementScope scope, const LocalState& state, const Eigen::VectorXd& delta);

struct RefinementOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-9;
  double gradient_tolerance = 1e-9;
  double initial_lambda = 1e-4;
  /// Largest change of any log-diagonal noise parameter in one step.
  double max_log_scale_step = 2.0;
};

struct RefinementResult {
  Pose pose;
  std::optional<std::vector<Point3>> structure;
  std::optional<SquareMat> noise_inv_sqrt;
  double initial_cost = 0;
  double final_cost = 0;
  int iterations = 0;
  bool rank_deficient = false;
  std::string termination;
};

/// Levenberg-Marquardt minimization of sum_i w_i rho(e_i) (+ the Cauchy
/// normalizer when the model is Cauchy). The noise scope adds
/// sum_i log|J_i^T S J_i| / (d+1), J_i the point Jacobian at the starting
/// state: the points are integrated out (Laplace) when fitting S, otherwise a
/// point can zero its residual along some direction and S diverges there. Supported models: Gaussian, Erode
/// (pseudo-Huber), Msac, Mlesac/Amlesac, Cauchy. kMotionStructureNoise needs a
/// Cauchy model whose inv_sqrt is the starting factor: 3x3, or 6x6 repeating
/// one 3x3 block.
/// weights may be empty (all ones).
RefinementResult Refine(RefinementScope scope, const Pose& pose0,
                        std::span<const Correspondence> correspondences,
                        const StereoCalibration& calib, const NoiseModel& model,
                        std::span<const double> weights, const RefinementOptions& options = {});

/// Inverse covariance factor L with S = L^T L = sigma^-2 I.
SquareMat IsotropicInvSqrt(int d, double sigma);

/// Covariance (L^T L)^-1 implied by a factor.
SquareMat CovarianceFromInvSqrt(const SquareMat& inv_sqrt);

}  // namespace svo
