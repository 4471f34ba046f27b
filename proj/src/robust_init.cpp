#include "svo/robust_init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "svo/error.hpp"
#include "svo/refinement.hpp"

namespace svo {

std::size_t Hypothesis::InlierCount() const {
  return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Unbiased integer in [0, n) by rejection; independent of the standard
// library's distribution implementation.
int Bounded(std::mt19937_64& rng, int n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<int>(x % range);
}

struct Scored {
  bool valid = false;
  Pose pose;
  double score = std::numeric_limits<double>::infinity();
  int iteration = -1;
  double threshold = 0;
  std::optional<double> gamma;
  std::optional<SquareMat> covariance;
};

// Strictly better score, or equal score from an earlier iteration.
bool Better(const Scored& a, const Scored& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.score != b.score) return a.score < b.score;
  return a.iteration < b.iteration;
}

class Scorer {
 public:
  Scorer(std::span<const Correspondence> data, const StereoCalibration& calib, const NoiseModel& model,
         int sample_size)
      : data_(data), calib_(calib), model_(model) {
    errors_.resize(data.size());
    if (const auto* ac = std::get_if<AcRansacModel>(&model_)) {
      nfa_.emplace(static_cast<int>(data.size()), sample_size, ac->dimension, ac->alpha0);
      norms_.resize(data.size());
    }
  }

  void Score(const Pose& pose, Scored& out) {
    for (std::size_t i = 0; i < data_.size(); ++i) errors_[i] = MotionErrorOrFar(pose, data_[i], calib_);
    out.pose = pose;
    out.valid = true;
    std::visit([&](const auto& m) { ScoreWith(m, out); }, model_);
  }

 private:
  template <class Fn>
  double WeightedSum(Fn&& rho) const {
    double sum = 0;
    for (std::size_t i = 0; i < errors_.size(); ++i) sum += data_[i].weight * rho(errors_[i]);
    return sum;
  }

  void ScoreWith(const RansacModel& m, Scored& out) {
    const double t2 = m.threshold * m.threshold;
    out.score = WeightedSum([&](const ErrorVec& e) { return e.squaredNorm() < t2 ? 0.0 : 1.0; });
    out.threshold = m.threshold;
  }
  void ScoreWith(const MsacModel& m, Scored& out) {
    const double t2 = m.threshold * m.threshold;
    out.score = WeightedSum([&](const ErrorVec& e) { return std::min(e.squaredNorm(), t2); });
    out.threshold = m.threshold;
  }
  void ScoreWith(const MlesacModel& m, Scored& out) {
    const double gamma = EstimateInlierRatio(errors_, m.covariance, m.outlier_volume, m.inlier_ratio);
    out.score = MixtureScore(m.covariance, m.outlier_volume, gamma);
    out.gamma = gamma;
  }
  void ScoreWith(const AmlesacModel& m, Scored& out) {
    const MixtureFit fit = EstimateInlierRatioAndCovariance(errors_, m.covariance, m.outlier_volume, m.inlier_ratio);
    out.score = MixtureScore(fit.covariance, m.outlier_volume, fit.inlier_ratio);
    out.gamma = fit.inlier_ratio;
    out.covariance = fit.covariance;
  }
  void ScoreWith(const AcRansacModel&, Scored& out) {
    for (std::size_t i = 0; i < errors_.size(); ++i) norms_[i] = errors_[i].norm();
    std::sort(norms_.begin(), norms_.end());
    const auto best = nfa_->Best(norms_);
    out.score = best.log_nfa;
    out.threshold = best.threshold;
  }
  void ScoreWith(const ErodeModel&, Scored&) { throw Error(ErrorCode::kInvalidArgument, "erode is not sampled"); }
  void ScoreWith(const GaussianModel&, Scored&) { NotAnInitializer(); }
  void ScoreWith(const CauchyModel&, Scored&) { NotAnInitializer(); }

  [[noreturn]] static void NotAnInitializer() {
    throw Error(ErrorCode::kInvalidArgument, "model is a refinement cost, not an initializer");
  }

  double MixtureScore(const SquareMat& cov, double volume, double gamma) const {
    const GaussianDensityEvaluator density(cov);
    const double outlier = (1.0 - gamma) / volume;
    return WeightedSum([&](const ErrorVec& e) { return -std::log(gamma * density(e) + outlier); });
  }

  std::span<const Correspondence> data_;
  const StereoCalibration& calib_;
  const NoiseModel& model_;
  std::vector<ErrorVec> errors_;
  std::vector<double> norms_;
  std::optional<NfaScorer> nfa_;
};

struct ChunkResult {
  Scored best;
  int degenerate = 0;
  int evaluated = 0;
};

ChunkResult RunChunk(std::span<const Correspondence> data, const StereoCalibration& calib,
                     const InitConfig& config, int begin, int end) {
  ChunkResult out;
  Scorer scorer(data, calib, config.model, config.min_sample_size);
  const int n = static_cast<int>(data.size());
  for (int it = begin; it < end; ++it) {
    const auto idx = DrawSample(config.seed, it, n);
    std::array<PnpCorrespondence, 4> sample;
    for (int k = 0; k < 4; ++k) {
      const auto& c = data[idx[k]];
      sample[k] = {c.point, Eigen::Vector2d(c.z.ul_cur, c.z.v_cur)};
    }
    if (!IsNonDegenerateSample(sample)) {
      ++out.degenerate;
      continue;
    }
    const auto candidates = PnpMinimal(sample, calib);
    if (candidates.empty()) {
      ++out.degenerate;
      continue;
    }
    Scored current;
    current.iteration = it;
    scorer.Score(candidates.front(), current);
    ++out.evaluated;
    if (Better(current, out.best)) out.best = std::move(current);
  }
  return out;
}

}  // namespace

std::array<int, 4> DrawSample(std::uint64_t seed, int iteration, int n) {
  if (n < 4) throw Error(ErrorCode::kInsufficientCorrespondences, "need at least 4 correspondences");
  std::mt19937_64 rng(SplitMix64(seed ^ SplitMix64(static_cast<std::uint64_t>(iteration) + 1)));
  std::array<int, 4> idx{};
  for (int k = 0; k < 4; ++k) {
    int candidate;
    do {
      candidate = Bounded(rng, n);
    } while (std::find(idx.begin(), idx.begin() + k, candidate) != idx.begin() + k);
    idx[k] = candidate;
  }
  return idx;
}

std::vector<double> ErrorNorms(const Pose& pose, std::span<const Correspondence> data,
                               const StereoCalibration& calib) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = MotionErrorOrFar(pose, data[i], calib).norm();
  return out;
}

Hypothesis HypothesizeAndTest(std::span<const Correspondence> data, const StereoCalibration& calib,
                              const InitConfig& config) {
  if (config.iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  if (config.min_sample_size != 4) throw Error(ErrorCode::kInvalidArgument, "minimal sample size is 4");
  if (static_cast<int>(data.size()) < config.min_sample_size + (std::holds_alternative<AcRansacModel>(config.model) ? 1 : 0)) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need at least " + std::to_string(config.min_sample_size) + " correspondences, got " +
                    std::to_string(data.size()));
  }
  ValidateModel(config.model);
  if (const auto* erode = std::get_if<ErodeModel>(&config.model)) {
    return ErodeInit(data, calib, erode->b, erode->threshold);
  }

  const int threads = std::clamp(config.threads, 1, config.iterations);
  std::vector<ChunkResult> chunks(threads);
  if (threads == 1) {
    chunks[0] = RunChunk(data, calib, config, 0, config.iterations);
  } else {
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      const int begin = static_cast<int>(static_cast<long long>(config.iterations) * t / threads);
      const int end = static_cast<int>(static_cast<long long>(config.iterations) * (t + 1) / threads);
      workers.emplace_back([&, t, begin, end] { chunks[t] = RunChunk(data, calib, config, begin, end); });
    }
  }

  Scored best;
  Hypothesis h;
  for (const auto& c : chunks) {
    if (Better(c.best, best)) best = c.best;
    h.degenerate_samples += c.degenerate;
    h.evaluated_hypotheses += c.evaluated;
  }
  if (!best.valid) {
    throw Error(ErrorCode::kAllHypothesesDegenerate,
                "all " + std::to_string(config.iterations) + " minimal samples were degenerate");
  }

  h.pose = best.pose;
  h.score = best.score;
  h.iteration = best.iteration;
  h.inlier_ratio = best.gamma;
  h.covariance = best.covariance;
  const std::vector<double> norms = ErrorNorms(best.pose, data, calib);
  h.inlier_mask.resize(data.size());
  if (const auto* ac = std::get_if<AcRansacModel>(&config.model)) {
    if (best.score > std::log(ac->nfa_threshold)) {
      throw Error(ErrorCode::kNoValidModel, "no hypothesis reached NFA <= epsilon (best log NFA " +
                                                std::to_string(best.score) + ")");
    }
    h.threshold = best.threshold;
    for (std::size_t i = 0; i < norms.size(); ++i) h.inlier_mask[i] = norms[i] <= h.threshold;
  } else {
    h.threshold = std::holds_alternative<RansacModel>(config.model) || std::holds_alternative<MsacModel>(config.model)
                      ? best.threshold
                      : config.inlier_threshold;
    for (std::size_t i = 0; i < norms.size(); ++i) h.inlier_mask[i] = norms[i] < h.threshold;
  }
  return h;
}

Hypothesis ErodeInit(std::span<const Correspondence> data, const StereoCalibration& calib, double b,
                     double threshold) {
  if (data.size() < 4) throw Error(ErrorCode::kInsufficientCorrespondences, "erode needs at least 4 correspondences");
  ValidateModel(ErodeModel{b, threshold});
  std::vector<double> weights(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) weights[i] = data[i].weight;
  RefinementResult r;
  try {
    r = Refine(RefinementScope::kMotionOnly, Pose::Identity(), data, calib, ErodeModel{b, threshold}, weights);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonFiniteCost) throw Error(ErrorCode::kOptimizerDiverged, e.what());
    throw;
  }
  if (!std::isfinite(r.final_cost)) throw Error(ErrorCode::kOptimizerDiverged, "erode optimization diverged");
  Hypothesis h;
  h.pose = r.pose;
  h.score = r.final_cost;
  h.threshold = threshold;
  h.evaluated_hypotheses = 1;
  h.iteration = 0;
  const std::vector<double> norms = ErrorNorms(r.pose, data, calib);
  h.inlier_mask.resize(data.size());
  for (std::size_t i = 0; i < norms.size(); ++i) h.inlier_mask[i] = norms[i] < threshold;
  return h;
}

}  // namespace svo
