#include "svo/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "svo/error.hpp"

namespace svo {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

double Viso2Weight(double ul, double u0) {
  if (!(u0 > 0)) throw Error(ErrorCode::kInvalidArgument, "u0 must be > 0");
  return 1.0 / (std::abs(ul - u0) / u0 + 0.05);
}

std::uint64_t PairSeed(std::uint64_t seed, int frame_index) {
  return Mix(seed ^ Mix(static_cast<std::uint64_t>(frame_index)));
}

PairResult ProcessPair(const FramePair& pair, const StereoCalibration& calib, const PipelineConfig& config) {
  PairResult out;
  auto& diag = out.diagnostics;
  diag.frame_index = pair.frame_index;
  diag.correspondences = pair.measurements.size();
  if (pair.measurements.size() < 4) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "frame " + std::to_string(pair.frame_index) + ": need at least 4 correspondences, got " +
                    std::to_string(pair.measurements.size()));
  }

  auto t0 = Clock::now();
  std::vector<Correspondence> data = MakeCorrespondences(pair.measurements, calib);
  if (config.weighting) {
    for (auto& c : data) c.weight = Viso2Weight(c.z.ul_cur, calib.u0);
  }
  diag.triangulate_ms = MsSince(t0);

  t0 = Clock::now();
  InitConfig init = config.init;
  init.seed = PairSeed(config.init.seed, pair.frame_index);
  const Hypothesis h = HypothesizeAndTest(data, calib, init);
  diag.init_ms = MsSince(t0);
  diag.inliers = h.InlierCount();
  diag.threshold = h.threshold;
  diag.init_score = h.score;
  diag.inlier_ratio = h.inlier_ratio;

  std::vector<Correspondence> inliers;
  std::vector<double> weights;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!h.inlier_mask[i]) continue;
    inliers.push_back(data[i]);
    weights.push_back(data[i].weight);
  }
  if (inliers.size() < 4) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "frame " + std::to_string(pair.frame_index) + ": only " + std::to_string(inliers.size()) +
                    " inliers after initialization");
  }

  NoiseModel model = GaussianModel{};
  if (config.scope == RefinementScope::kMotionStructureNoise) {
    model = CauchyModel{IsotropicInvSqrt(6, config.cauchy_sigma0)};
  } else if (config.refinement_model) {
    model = *config.refinement_model;
  }
  t0 = Clock::now();
  const RefinementResult r = Refine(config.scope, h.pose, inliers, calib, model, weights);
  diag.refine_ms = MsSince(t0);
  diag.refine_initial_cost = r.initial_cost;
  diag.refine_final_cost = r.final_cost;
  diag.refine_iterations = r.iterations;
  out.motion = r.pose;
  out.noise_inv_sqrt = r.noise_inv_sqrt;
  // Final consensus set at the refined motion, same cutoff as the initializer.
  const bool inclusive = std::holds_alternative<AcRansacModel>(init.model);
  const std::vector<double> norms = ErrorNorms(r.pose, data, calib);
  out.inlier_mask.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.inlier_mask[i] = inclusive ? norms[i] <= h.threshold : norms[i] < h.threshold;
  }
  return out;
}

Trajectory ChainMotions(std::span<const Pose> motions) {
  Trajectory t;
  t.poses.reserve(motions.size() + 1);
  t.poses.push_back(Pose::Identity());
  for (const Pose& m : motions) t.poses.push_back(t.poses.back() * m.Inverse());
  return t;
}

SequenceResult ProcessSequence(std::span<const FramePair> pairs, const StereoCalibration& calib,
                               const PipelineConfig& config) {
  SequenceResult out;
  std::vector<Pose> motions;
  motions.reserve(pairs.size());
  for (const FramePair& pair : pairs) {
    try {
      PairResult r = ProcessPair(pair, calib, config);
      motions.push_back(r.motion);
      out.diagnostics.push_back(std::move(r.diagnostics));
    } catch (const Error& e) {
      PairDiagnostics d;
      d.frame_index = pair.frame_index;
      d.correspondences = pair.measurements.size();
      d.failed = true;
      d.failure = std::string(ToString(e.code())) + ": " + e.what();
      motions.push_back(Pose::Identity());
      out.diagnostics.push_back(std::move(d));
    }
  }
  out.trajectory = ChainMotions(motions);
  return out;
}

}  // namespace svo
