#include "svo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "svo/error.hpp"

namespace svo {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kPointBehindCamera: return "point-behind-camera";
    case ErrorCode::kNonPositiveDisparity: return "non-positive-disparity";
    case ErrorCode::kDegenerateSample: return "degenerate-sample";
    case ErrorCode::kNonNormalizable: return "non-normalizable";
    case ErrorCode::kInvalidQ: return "invalid-q";
    case ErrorCode::kNoValidModel: return "no-valid-model";
    case ErrorCode::kInsufficientCorrespondences: return "insufficient-correspondences";
    case ErrorCode::kAllHypothesesDegenerate: return "all-hypotheses-degenerate";
    case ErrorCode::kOptimizerDiverged: return "optimizer-diverged";
    case ErrorCode::kNonFiniteCost: return "non-finite-cost";
    case ErrorCode::kFrustumEmpty: return "frustum-empty";
    case ErrorCode::kMalformedInput: return "malformed-input";
    case ErrorCode::kNonMonotoneFrames: return "non-monotone-frames";
    case ErrorCode::kMismatchedTrajectories: return "mismatched-trajectories";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Eigen::Matrix<double, 3, 4> Pose::Matrix3x4() const {
  Eigen::Matrix<double, 3, 4> m;
  m.leftCols<3>() = rotation_;
  m.col(3) = translation_;
  return m;
}

double RotationAngle(const Eigen::Matrix3d& rotation) {
  const double c = std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses half the digits near zero; switch to the skew part there.
  if (c > 0.99) {
    const Eigen::Vector3d s(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                            rotation(1, 0) - rotation(0, 1));
    return std::atan2(0.5 * s.norm(), c);
  }
  return std::acos(c);
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

Eigen::Matrix3d So3Exp(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  if (theta < 1e-8) {
    const Eigen::Matrix3d W = Skew(w);
    return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  }
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

Eigen::Vector3d So3Log(const Eigen::Matrix3d& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const double vn = q.vec().norm();
  if (vn < 1e-12) return 2.0 * q.vec() / q.w();
  const double angle = 2.0 * std::atan2(vn, q.w());
  return angle * q.vec() / vn;
}

namespace {

// Left Jacobian of SO(3): V = I + A W + B W^2.
Eigen::Matrix3d LeftJacobian(const Eigen::Vector3d& w) {
  const double t2 = w.squaredNorm();
  const double t = std::sqrt(t2);
  double a, b;
  if (t < 1e-2) {
    a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    a = (1.0 - std::cos(t)) / t2;
    b = (t - std::sin(t)) / (t2 * t);
  }
  const Eigen::Matrix3d W = Skew(w);
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

}  // namespace

Pose Se3Exp(const Vector6d& twist) {
  const Eigen::Vector3d v = twist.head<3>();
  const Eigen::Vector3d w = twist.tail<3>();
  return Pose(So3Exp(w), LeftJacobian(w) * v);
}

Vector6d Se3Log(const Pose& pose) {
  const Eigen::Vector3d w = So3Log(pose.rotation());
  Vector6d out;
  out.head<3>() = LeftJacobian(w).partialPivLu().solve(pose.translation());
  out.tail<3>() = w;
  return out;
}

Eigen::Matrix3d Orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

void StereoCalibration::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, "calibration: " + what); };
  if (!(focal > 0)) fail("focal must be > 0");
  if (!(baseline > 0)) fail("baseline must be > 0");
  if (!(disparity_range > 0)) fail("disparity_range must be > 0");
  if (!(u0 > 0 && u0 < image_width)) fail("u0 must lie in (0, image_width)");
  if (!(v0 > 0 && v0 < image_height)) fail("v0 must lie in (0, image_height)");
}

Eigen::Vector3d StereoProjectCamera(const Eigen::Vector3d& p, const StereoCalibration& calib) {
  if (p.z() <= 1e-9) throw Error(ErrorCode::kPointBehindCamera, "point behind camera");
  const double inv_z = 1.0 / p.z();
  return {calib.focal * p.x() * inv_z + calib.u0,
          calib.focal * (p.x() - calib.baseline) * inv_z + calib.u0,
          calib.focal * p.y() * inv_z + calib.v0};
}

Eigen::Vector3d StereoProject(const Pose& pose, const Point3& point, const StereoCalibration& calib) {
  return StereoProjectCamera(pose * point, calib);
}

Point3 Triangulate(double ul, double ur, double v, const StereoCalibration& calib) {
  const double disparity = ul - ur;
  if (!(disparity > 0)) {
    throw Error(ErrorCode::kNonPositiveDisparity, "non-positive disparity " + std::to_string(disparity));
  }
  const double z = calib.focal * calib.baseline / disparity;
  return {(ul - calib.u0) * z / calib.focal, (v - calib.v0) * z / calib.focal, z};
}

}  // namespace svo
