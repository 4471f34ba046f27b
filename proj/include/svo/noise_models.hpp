#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "svo/geometry.hpp"

namespace svo {

/// Measurement error of dimension 3 (motion only) or 6 (two views).
using ErrorVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using SquareMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

/// 0/1 step on ||e|| < T.
struct RansacModel {
  double threshold = 2.0;
};

/// Truncated quadratic min(||e||^2, T^2).
struct MsacModel {
  double threshold = 2.0;
};

/// Gaussian inliers (covariance) mixed with uniform outliers over a domain of
/// volume outlier_volume; inlier_ratio is the mixing weight gamma.
struct MlesacModel {
  SquareMat covariance;
  double outlier_volume = 1.0;
  double inlier_ratio = 0.5;
};

/// Same cost as MLESAC; the covariance is re-estimated per hypothesis.
struct AmlesacModel {
  SquareMat covariance;
  double outlier_volume = 1.0;
  double inlier_ratio = 0.5;
};

/// A-contrario scoring. Has no per-measurement cost.
struct AcRansacModel {
  double alpha0 = 1e-3;
  double nfa_threshold = 1.0;
  int sample_size = 4;
  int dimension = 3;
};

/// Pseudo-Huber kernel 2b^2 (sqrt(1 + ||e||^2/b^2) - 1); T classifies inliers.
struct ErodeModel {
  double b = 2.0;
  double threshold = 2.79;
};

/// ||e||^2.
struct GaussianModel {};

/// log(1 + e^T S e) with S = L^T L, L lower-triangular with positive diagonal.
struct CauchyModel {
  SquareMat inv_sqrt;
};

using NoiseModel = std::variant<RansacModel, MsacModel, MlesacModel, AmlesacModel, AcRansacModel,
                                ErodeModel, GaussianModel, CauchyModel>;

/// Checks the parameter invariants of the model; throws kInvalidArgument.
void ValidateModel(const NoiseModel& model);

double PseudoHuber(double squared_norm, double b);

/// Normalized zero-mean Gaussian density at e.
double GaussianDensity(const ErrorVec& e, const SquareMat& covariance);

/// Same density with the covariance factorized once.
class GaussianDensityEvaluator {
 public:
  explicit GaussianDensityEvaluator(const SquareMat& covariance);
  double operator()(const ErrorVec& e) const;

 private:
  SquareMat chol_;  // lower Cholesky factor of the covariance
  double log_norm_;
};

/// Cost rho(e) in nats. Throws kInvalidArgument for AcRansacModel.
double Rho(const NoiseModel& model, const ErrorVec& e);

/// exp(-rho) / Z with log Z = log_normalizer.
double ProbOfCost(double rho, double log_normalizer);

/// Region over which exp(-rho) is integrated. Models with uniform parts need a
/// bounded volume; the Cauchy kernel in d >= 2 needs a truncation radius
/// (whitened units).
struct ErrorDomain {
  int dimension = 3;
  std::optional<double> volume;
  std::optional<double> radius;
};

/// log of the integral of exp(-rho(x)) over the domain.
/// Throws kNonNormalizable when the integral diverges without bounds.
double LogNormalizer(const NoiseModel& model, const ErrorDomain& domain);

struct CostBreakdown {
  double data_cost = 0;
  double normalization_cost = 0;
  double total = 0;
  /// False when the model's normalizer needs a bounded domain that was not given;
  /// normalization_cost is then reported as 0.
  bool normalized = true;
};

/// Sum of weighted rho plus N log Z. For the Cauchy model the normalizer is the
/// closed-form -N/(d+1) log|S| with S the inverse covariance.
CostBreakdown TotalCost(const NoiseModel& model, std::span<const ErrorVec> errors,
                        std::span<const double> weights, const ErrorDomain& domain);
CostBreakdown TotalCost(const NoiseModel& model, std::span<const ErrorVec> errors,
                        const ErrorDomain& domain);

/// EM estimate of the inlier ratio gamma with the inlier covariance fixed.
/// Stops at |delta gamma| < 1e-6 or 100 iterations.
double EstimateInlierRatio(std::span<const ErrorVec> errors, const SquareMat& covariance,
                           double outlier_volume, double gamma0 = 0.5);

struct MixtureFit {
  double inlier_ratio = 0.5;
  SquareMat covariance;
};

/// EM over gamma and the inlier covariance (responsibility-weighted second
/// moment, floored at 1e-4 I).
MixtureFit EstimateInlierRatioAndCovariance(std::span<const ErrorVec> errors,
                                            const SquareMat& covariance0,
                                            double outlier_volume, double gamma0 = 0.5);

/// Posterior inlier probability of one error under the mixture.
double InlierResponsibility(const ErrorVec& e, const SquareMat& covariance, double outlier_volume,
                            double inlier_ratio);

/// Probability that a uniformly random stereo correspondence falls within one
/// pixel: unit-ball volume over width * height * disparity range.
double Alpha0Stereo(const StereoCalibration& calib);

/// log of binomial(n, k) via lgamma.
double LogBinomial(int n, int k);

/// Precomputed number-of-false-alarms evaluation for a fixed N.
class NfaScorer {
 public:
  NfaScorer(int num_data, int sample_size, int dimension, double alpha0);

  int num_data() const { return num_data_; }
  int sample_size() const { return sample_size_; }

  /// log NFA for the q smallest errors (errors sorted ascending, norms in pixels).
  /// Throws kInvalidQ unless sample_size < q <= N.
  double LogNfa(std::span<const double> sorted_errors, int q) const;

  struct Result {
    int q = 0;
    double log_nfa = 0;
    double threshold = 0;
  };
  /// Minimizes log NFA over q in (sample_size, N]; first minimum wins.
  Result Best(std::span<const double> sorted_errors) const;

 private:
  int num_data_;
  int sample_size_;
  int dimension_;
  double log_alpha0_;
  double log_n_minus_ns_;
  std::vector<double> log_c_n_;   // log C(N, q)
  std::vector<double> log_c_ns_;  // log C(q, Ns)
};

/// Free-function form of NfaScorer::LogNfa.
double LogNfa(std::span<const double> sorted_errors, int q, int sample_size, int dimension,
              double alpha0);

struct BestNfaResult {
  int q = 0;
  double log_nfa = 0;
  double threshold = 0;
  /// log_nfa <= log(epsilon).
  bool valid = false;
};

BestNfaResult BestNfa(std::span<const double> sorted_errors, int sample_size, int dimension,
                      double alpha0, double epsilon = 1.0);

}  // namespace svo
