#pragma once

#include <cmath>
#include <random>

#include "svo/geometry.hpp"

namespace svo::testing {

inline Pose RandomPose(std::mt19937_64& rng, double max_angle = 0.3, double max_translation = 2.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Vector3d axis = Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
  const Eigen::Vector3d dir = Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
  return Pose(So3Exp(u(rng) * max_angle * axis), u(rng) * max_translation * dir);
}

// Point in front of the camera, roughly inside the default image.
inline Point3 RandomPoint(std::mt19937_64& rng, double zmin = 5, double zmax = 40) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> z(zmin, zmax);
  const double depth = z(rng);
  return {0.7 * u(rng) * depth, 0.2 * u(rng) * depth, depth};
}

inline double TranslationError(const Pose& a, const Pose& b) { return (a.Inverse() * b).translation().norm(); }
inline double RotationError(const Pose& a, const Pose& b) { return RotationAngle((a.Inverse() * b).rotation()); }

}  // namespace svo::testing
