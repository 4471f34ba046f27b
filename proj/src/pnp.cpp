#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "svo/error.hpp"
#include "svo/geometry.hpp"

namespace svo {
namespace {

constexpr double kMinNormalizedArea = 1e-8;

// Real roots of c[0] x^4 + c[1] x^3 + c[2] x^2 + c[3] x + c[4], polished by Newton.
std::vector<double> SolveQuartic(const std::array<double, 5>& c) {
  const double scale = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), std::abs(c[3]),
                                 std::abs(c[4])});
  if (scale == 0) return {};
  int first = 0;
  while (first < 4 && std::abs(c[first]) < 1e-14 * scale) ++first;
  const int degree = 4 - first;
  if (degree == 0) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i) companion(0, i) = -c[first + 1 + i] / c[first];
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);

  auto eval = [&](double x, double& deriv) {
    double p = 0, dp = 0;
    for (int i = first; i <= 4; ++i) {
      dp = dp * x + p;
      p = p * x + c[i];
    }
    deriv = dp;
    return p;
  };

  std::vector<double> roots;
  for (int i = 0; i < degree; ++i) {
    const std::complex<double> r = solver.eigenvalues()[i];
    if (std::abs(r.imag()) > 1e-6 * (1.0 + std::abs(r.real()))) continue;
    double x = r.real();
    for (int it = 0; it < 8; ++it) {
      double dp;
      const double p = eval(x, dp);
      if (dp == 0) break;
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    roots.push_back(x);
  }
  return roots;
}

// Rigid transform with dst = R src + t for three exact pairs (Kabsch).
Pose AlignThree(const std::array<Eigen::Vector3d, 3>& src, const std::array<Eigen::Vector3d, 3>& dst) {
  const Eigen::Vector3d cs = (src[0] + src[1] + src[2]) / 3.0;
  const Eigen::Vector3d cd = (dst[0] + dst[1] + dst[2]) / 3.0;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) h += (dst[i] - cd) * (src[i] - cs).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
  const Eigen::Matrix3d r = svd.matrixU() * d * svd.matrixV().transpose();
  return Pose(r, cd - r * cs);
}

}  // namespace

std::vector<Pose> P3pSolve(const std::array<Eigen::Vector3d, 3>& points,
                           const std::array<Eigen::Vector3d, 3>& bearings) {
  // Grunert's formulation: s2 = u s1, s3 = v s1, quartic in v.
  const double a2 = (points[1] - points[2]).squaredNorm();
  const double b2 = (points[0] - points[2]).squaredNorm();
  const double c2 = (points[0] - points[1]).squaredNorm();
  const double ca = bearings[1].dot(bearings[2]);
  const double cb = bearings[0].dot(bearings[2]);
  const double cg = bearings[0].dot(bearings[1]);
  if (b2 <= 0) return {};

  const double k1 = (a2 - c2) / b2;
  const double k2 = (a2 + c2) / b2;
  const std::array<double, 5> coeffs = {
      (k1 - 1) * (k1 - 1) - 4 * c2 / b2 * ca * ca,
      4 * (k1 * (1 - k1) * cb - (1 - k2) * ca * cg + 2 * c2 / b2 * ca * ca * cb),
      2 * (k1 * k1 - 1 + 2 * k1 * k1 * cb * cb + 2 * (b2 - c2) / b2 * ca * ca -
           4 * k2 * ca * cb * cg + 2 * (b2 - a2) / b2 * cg * cg),
      4 * (-k1 * (1 + k1) * cb + 2 * a2 / b2 * cg * cg * cb - (1 - k2) * ca * cg),
      (1 + k1) * (1 + k1) - 4 * a2 / b2 * cg * cg,
  };

  std::vector<Pose> out;
  for (const double v : SolveQuartic(coeffs)) {
    if (v <= 0) continue;
    const double denom = 1 + v * v - 2 * v * cb;
    if (denom <= 0) continue;
    const double s1 = std::sqrt(b2 / denom);
    const double s3 = v * s1;
    const double disc = s1 * s1 * (cg * cg - 1) + c2;
    if (disc < -1e-9 * c2) continue;
    const double root = std::sqrt(std::max(disc, 0.0));
    for (const double s2 : {s1 * cg + root, s1 * cg - root}) {
      if (s2 <= 0) continue;
      const double residual = s2 * s2 + s3 * s3 - 2 * s2 * s3 * ca - a2;
      if (std::abs(residual) > 1e-4 * a2) continue;
      out.push_back(AlignThree(points, {s1 * bearings[0], s2 * bearings[1], s3 * bearings[2]}));
      if (root == 0) break;
    }
  }
  return out;
}

bool IsNonDegenerateSample(std::span<const PnpCorrespondence, 4> sample) {
  double scale2 = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      scale2 = std::max(scale2, (sample[i].point - sample[j].point).squaredNorm());
  if (!(scale2 > 0)) return false;
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    const Eigen::Vector3d ab = sample[t[1]].point - sample[t[0]].point;
    const Eigen::Vector3d ac = sample[t[2]].point - sample[t[0]].point;
    if (0.5 * ab.cross(ac).norm() / scale2 <= kMinNormalizedArea) return false;
  }
  return true;
}

std::vector<Pose> PnpMinimal(std::span<const PnpCorrespondence, 4> sample,
                             const StereoCalibration& calib) {
  if (!IsNonDegenerateSample(sample)) {
    throw Error(ErrorCode::kDegenerateSample, "degenerate minimal sample (collinear or coincident points)");
  }
  std::array<Eigen::Vector3d, 3> points, bearings;
  for (int i = 0; i < 3; ++i) {
    points[i] = sample[i].point;
    bearings[i] = Eigen::Vector3d((sample[i].pixel.x() - calib.u0) / calib.focal,
                                  (sample[i].pixel.y() - calib.v0) / calib.focal, 1.0)
                      .normalized();
  }

  struct Ranked {
    Pose pose;
    double error;
  };
  std::vector<Ranked> ranked;
  for (const Pose& pose : P3pSolve(points, bearings)) {
    bool in_front = true;
    for (const auto& c : sample) in_front = in_front && (pose * c.point).z() > 1e-9;
    if (!in_front) continue;
    const Eigen::Vector3d p = pose * sample[3].point;
    const Eigen::Vector2d proj(calib.focal * p.x() / p.z() + calib.u0, calib.focal * p.y() / p.z() + calib.v0);
    ranked.push_back({pose, (proj - sample[3].pixel).squaredNorm()});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.error < b.error; });
  std::vector<Pose> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(r.pose);
  return out;
}

}  // namespace svo
