#pragma once

#include <span>
#include <vector>

#include "svo/geometry.hpp"

namespace svo {

/// A stereo measurement z together with its point Y triangulated in frame k-1.
struct Correspondence {
  StereoMeasurement z;
  Point3 point;
  double weight = 1.0;
};

/// Triangulates the previous-frame observation. Throws kNonPositiveDisparity.
Correspondence MakeCorrespondence(const StereoMeasurement& z, const StereoCalibration& calib);

std::vector<Correspondence> MakeCorrespondences(std::span<const StereoMeasurement> measurements,
                                                const StereoCalibration& calib);

/// Motion-only error z_cur - project(X * Y); 3 components.
inline Eigen::Vector3d MotionError(const Pose& motion, const Correspondence& c,
                                   const StereoCalibration& calib) {
  return c.z.Cur() - StereoProject(motion, c.point, calib);
}

/// Motion error that never throws: points landing behind the camera get a
/// large constant error so scorers treat them as outliers.
Eigen::Vector3d MotionErrorOrFar(const Pose& motion, const Correspondence& c,
                                 const StereoCalibration& calib);

inline constexpr double kBehindCameraError = 1e6;

}  // namespace svo
