#include "svo/correspondence.hpp"

namespace svo {

Correspondence MakeCorrespondence(const StereoMeasurement& z, const StereoCalibration& calib) {
  return {z, Triangulate(z.ul_prev, z.ur_prev, z.v_prev, calib), 1.0};
}

std::vector<Correspondence> MakeCorrespondences(std::span<const StereoMeasurement> measurements,
                                                const StereoCalibration& calib) {
  std::vector<Correspondence> out;
  out.reserve(measurements.size());
  for (const auto& z : measurements) out.push_back(MakeCorrespondence(z, calib));
  return out;
}

Eigen::Vector3d MotionErrorOrFar(const Pose& motion, const Correspondence& c,
                                 const StereoCalibration& calib) {
  const Eigen::Vector3d p = motion * c.point;
  if (p.z() <= 1e-9) return Eigen::Vector3d::Constant(kBehindCameraError);
  return c.z.Cur() - StereoProjectCamera(p, calib);
}

}  // namespace svo
