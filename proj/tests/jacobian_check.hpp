#pragma once

#include <algorithm>
#include <random>

#include "svo/refinement.hpp"
#include "test_util.hpp"

namespace svo::testing {

// Random state with the point visible in both frames and a measurement near
// its projection.
inline LocalState RandomState(RefinementScope scope, std::mt19937_64& rng, const StereoCalibration& calib,
                              Correspondence& c) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  LocalState s;
  do {
    s.pose = RandomPose(rng, 0.2, 1.0);
    s.point = RandomPoint(rng);
  } while ((s.pose * s.point).z() < 3.0);
  c.point = s.point + 0.1 * Eigen::Vector3d(n(rng), n(rng), n(rng));
  const Eigen::Vector3d prev = StereoProjectCamera(s.point, calib);
  const Eigen::Vector3d cur = StereoProject(s.pose, s.point, calib);
  c.z = {prev.x() + n(rng), prev.y() + n(rng), prev.z() + n(rng), cur.x() + 3 * n(rng), cur.y() + 3 * n(rng),
         cur.z() + 3 * n(rng)};
  if (scope == RefinementScope::kMotionStructureNoise) {
    SquareMat b = SquareMat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      b(i, i) = u(rng);
      for (int j = 0; j < i; ++j) b(i, j) = 0.5 * n(rng);
    }
    s.noise_inv_sqrt = SquareMat::Zero(6, 6);
    s.noise_inv_sqrt.topLeftCorner(3, 3) = b;
    s.noise_inv_sqrt.bottomRightCorner(3, 3) = b;
  }
  return s;
}

// ||J_analytic - J_central|| / max(||J_central||, 1) for one random state.
inline double JacobianRelativeError(RefinementScope scope, std::mt19937_64& rng, const StereoCalibration& calib) {
  Correspondence c;
  const LocalState s = RandomState(scope, rng, calib, c);
  const Eigen::MatrixXd j = RefinementJacobian(scope, s, c, calib);
  const int n = LocalVariableCount(scope);
  Eigen::MatrixXd fd(j.rows(), n);
  for (int k = 0; k < n; ++k) {
    const double h = k >= 6 && k < 9 ? 1e-5 * std::max(1.0, s.point.norm()) : 1e-6;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    d(k) = h;
    const Eigen::VectorXd plus = RefinementResidual(scope, Retract(scope, s, d), c, calib);
    const Eigen::VectorXd minus = RefinementResidual(scope, Retract(scope, s, -d), c, calib);
    fd.col(k) = (plus - minus) / (2 * h);
  }
  return (j - fd).norm() / std::max(fd.norm(), 1.0);
}

}  // namespace svo::testing
