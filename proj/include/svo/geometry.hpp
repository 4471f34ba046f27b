#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace svo {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Point3 = Eigen::Vector3d;

/// Rigid motion x -> R x + t. Maps points expressed in frame k-1 into frame k.
class Pose {
 public:
  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose Identity() { return Pose(); }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
  Pose operator*(const Pose& rhs) const {
    return Pose(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
  }

  Pose Inverse() const {
    const Eigen::Matrix3d rt = rotation_.transpose();
    return Pose(rt, -rt * translation_);
  }

  /// Top 3x4 block [R | t].
  Eigen::Matrix<double, 3, 4> Matrix3x4() const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

inline Pose Compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose Inverse(const Pose& p) { return p.Inverse(); }

/// Rotation angle of R in radians, via the clamped trace formula.
double RotationAngle(const Eigen::Matrix3d& rotation);

/// Twist layout: (v_x, v_y, v_z, w_x, w_y, w_z); translation part first.
Pose Se3Exp(const Vector6d& twist);
Vector6d Se3Log(const Pose& pose);

Eigen::Matrix3d Skew(const Eigen::Vector3d& w);
Eigen::Matrix3d So3Exp(const Eigen::Vector3d& w);
Eigen::Vector3d So3Log(const Eigen::Matrix3d& rotation);

/// Nearest rotation in the Frobenius sense (polar decomposition).
Eigen::Matrix3d Orthonormalize(const Eigen::Matrix3d& m);

struct StereoCalibration {
  double focal = 718.856;
  double u0 = 607.1928;
  double v0 = 185.2157;
  double baseline = 0.5372;
  double image_width = 1241.0;
  double image_height = 376.0;
  double disparity_range = 128.0;

  /// Throws Error(kInvalidArgument) naming the offending field.
  void Validate() const;
};

/// Pixel observations of one feature in both stereo pairs (k-1 and k).
struct StereoMeasurement {
  double ul_prev = 0, ur_prev = 0, v_prev = 0;
  double ul_cur = 0, ur_cur = 0, v_cur = 0;

  Eigen::Vector3d Prev() const { return {ul_prev, ur_prev, v_prev}; }
  Eigen::Vector3d Cur() const { return {ul_cur, ur_cur, v_cur}; }
  Vector6d AsVector() const {
    Vector6d z;
    z << ul_prev, ur_prev, v_prev, ul_cur, ur_cur, v_cur;
    return z;
  }
};

/// Rectified stereo projection of the camera-frame point. Returns (ul, ur, v).
/// Throws kPointBehindCamera when z <= 1e-9.
Eigen::Vector3d StereoProjectCamera(const Eigen::Vector3d& p_cam, const StereoCalibration& calib);

/// stereo_project(pose, point) = StereoProjectCamera(pose * point).
Eigen::Vector3d StereoProject(const Pose& pose, const Point3& point, const StereoCalibration& calib);

/// Inverse of StereoProjectCamera for one stereo observation (ul, ur, v).
/// Throws kNonPositiveDisparity when ul - ur <= 0.
Point3 Triangulate(double ul, double ur, double v, const StereoCalibration& calib);
inline Point3 Triangulate(const Eigen::Vector3d& obs, const StereoCalibration& calib) {
  return Triangulate(obs.x(), obs.y(), obs.z(), calib);
}

/// 3D point paired with its left-image pixel (u, v) in the current frame.
struct PnpCorrespondence {
  Point3 point;
  Eigen::Vector2d pixel;
};

/// Minimal absolute-pose solver for four correspondences. The first three
/// drive a three-point solver; the fourth ranks the candidates by its
/// left-image reprojection error (best first). May return an empty list.
/// Throws kDegenerateSample for collinear or coincident triples.
std::vector<Pose> PnpMinimal(std::span<const PnpCorrespondence, 4> sample,
                             const StereoCalibration& calib);

/// All real solutions of the three-point problem for unit bearings.
std::vector<Pose> P3pSolve(const std::array<Eigen::Vector3d, 3>& points,
                           const std::array<Eigen::Vector3d, 3>& bearings);

/// True when every triple of the sample spans a triangle with normalized
/// area above 1e-8.
bool IsNonDegenerateSample(std::span<const PnpCorrespondence, 4> sample);

}  // namespace svo
