#include <cmath>
#include <numbers>

#include "svo/error.hpp"
#include "svo/io_sim.hpp"

namespace svo {
namespace {

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Eigen::Vector3d RandomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

bool InImage(const Eigen::Vector3d& obs, const StereoCalibration& calib) {
  return obs.x() >= 0 && obs.x() < calib.image_width && obs.y() >= 0 && obs.y() < calib.image_width &&
         obs.z() >= 0 && obs.z() < calib.image_height;
}

}  // namespace

void SceneConfig::Validate() const {
  auto fail = [](const std::string& field, const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, "scene." + field + ": " + what);
  };
  if (num_points < 0) fail("points", "must be >= 0");
  if (!(depth_min > 0)) fail("depth_min", "must be > 0");
  if (!(depth_max > depth_min)) fail("depth_max", "must exceed depth_min");
  if (!(sigma >= 0)) fail("sigma", "must be >= 0");
  if (sigma_u && !(*sigma_u >= 0)) fail("sigma_u", "must be >= 0");
  if (sigma_v && !(*sigma_v >= 0)) fail("sigma_v", "must be >= 0");
  if (!(outlier_ratio >= 0 && outlier_ratio < 1)) fail("outlier_ratio", "must lie in [0, 1)");
  if (!(translation_m >= 0)) fail("translation_m", "must be >= 0");
  if (!(rotation_deg >= 0 && rotation_deg < 180)) fail("rotation_deg", "must lie in [0, 180)");
  if (frame_count < 0) fail("frames", "must be >= 0");
}

Pose RandomMotion(const SceneConfig& scene, std::mt19937_64& rng) {
  const Eigen::Vector3d axis = RandomUnit(rng);
  const Eigen::Vector3d dir = RandomUnit(rng);
  const double angle = scene.rotation_deg * std::numbers::pi / 180.0;
  return Pose(So3Exp(angle * axis), scene.translation_m * dir);
}

GeneratedPair GeneratePair(const SceneConfig& scene, const StereoCalibration& calib, const Pose& motion,
                           std::uint64_t seed, int frame_index) {
  scene.Validate();
  calib.Validate();
  std::mt19937_64 rng(Mix(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double su = scene.SigmaU();
  const double sv = scene.SigmaV();
  const double z3_min = std::pow(scene.depth_min, 3);
  const double z3_max = std::pow(scene.depth_max, 3);

  GeneratedPair out;
  out.motion = motion;
  out.pair.frame_index = frame_index;
  const long long max_attempts = 1000LL * std::max(scene.num_points, 1);
  long long attempts = 0;
  while (static_cast<int>(out.true_points.size()) < scene.num_points) {
    if (++attempts > max_attempts) {
      throw Error(ErrorCode::kFrustumEmpty, "could not place visible points; check depth range and motion");
    }
    const double z = std::cbrt(z3_min + unit(rng) * (z3_max - z3_min));
    const double u = unit(rng) * calib.image_width;
    const double v = unit(rng) * calib.image_height;
    const Point3 y((u - calib.u0) * z / calib.focal, (v - calib.v0) * z / calib.focal, z);
    const Eigen::Vector3d p_cur = motion * y;
    if (p_cur.z() <= 1e-6) continue;
    const Eigen::Vector3d prev = StereoProjectCamera(y, calib);
    const Eigen::Vector3d cur = StereoProjectCamera(p_cur, calib);
    if (!InImage(prev, calib) || !InImage(cur, calib)) continue;

    const bool outlier = unit(rng) < scene.outlier_ratio;
    StereoMeasurement m;
    // Resample noise until both observed disparities stay positive.
    for (int tries = 0;; ++tries) {
      const double sp = scene.previous_frame_noise ? 1.0 : 0.0;
      m.ul_prev = prev.x() + sp * su * gauss(rng);
      m.ur_prev = prev.y() + sp * su * gauss(rng);
      m.v_prev = prev.z() + sp * sv * gauss(rng);
      if (outlier) {
        m.ul_cur = unit(rng) * calib.image_width;
        m.v_cur = unit(rng) * calib.image_height;
        m.ur_cur = m.ul_cur - unit(rng) * calib.disparity_range;
      } else {
        m.ul_cur = cur.x() + su * gauss(rng);
        m.ur_cur = cur.y() + su * gauss(rng);
        m.v_cur = cur.z() + sv * gauss(rng);
      }
      if (m.ul_prev - m.ur_prev > 0 && m.ul_cur - m.ur_cur > 0) break;
      if (tries > 100) throw Error(ErrorCode::kFrustumEmpty, "noise too large for the disparity range");
    }
    out.pair.measurements.push_back(m);
    out.is_outlier.push_back(outlier);
    out.true_points.push_back(y);
  }
  return out;
}

GeneratedPair GeneratePair(const SceneConfig& scene, const StereoCalibration& calib) {
  std::mt19937_64 rng(Mix(scene.seed ^ 0xA5A5A5A5ull));
  const Pose motion = RandomMotion(scene, rng);
  return GeneratePair(scene, calib, motion, scene.seed, 1);
}

GeneratedSequence GenerateSequence(const SceneConfig& scene, const StereoCalibration& calib) {
  scene.Validate();
  GeneratedSequence out;
  std::vector<Pose> motions;
  for (int k = 1; k < scene.frame_count; ++k) {
    const std::uint64_t frame_seed = Mix(scene.seed ^ Mix(static_cast<std::uint64_t>(k)));
    std::mt19937_64 rng(frame_seed ^ 0xA5A5A5A5ull);
    const Pose motion = RandomMotion(scene, rng);
    out.pairs.push_back(GeneratePair(scene, calib, motion, frame_seed, k));
    motions.push_back(motion);
  }
  if (scene.frame_count > 0) out.ground_truth = ChainMotions(motions);
  return out;
}

}  // namespace svo
