#include "svo/noise_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "svo/error.hpp"

namespace svo {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void Invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

void CheckCovariance(const SquareMat& cov, const char* name) {
  if (cov.rows() == 0 || cov.rows() != cov.cols()) Invalid(std::string(name) + ": covariance must be square");
  if (!cov.isApprox(cov.transpose(), 1e-12)) Invalid(std::string(name) + ": covariance must be symmetric");
  Eigen::LLT<SquareMat> llt(cov);
  if (llt.info() != Eigen::Success) Invalid(std::string(name) + ": covariance must be positive-definite");
}

double Mahalanobis2(const ErrorVec& e, const SquareMat& covariance) {
  return e.dot(covariance.llt().solve(e));
}

double LogDet(const SquareMat& spd) {
  const SquareMat l = spd.llt().matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

double UnitBallVolume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double UnitSphereArea(int d) {  // surface of the unit ball in R^d
  return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
}

// \int_0^R r^{d-1} / (1 + r^2) dr via I_d = R^{d-2}/(d-2) - I_{d-2}.
double CauchyRadialIntegral(int d, double radius) {
  if (d == 1) return std::atan(radius);
  if (d == 2) return 0.5 * std::log1p(radius * radius);
  return std::pow(radius, d - 2) / (d - 2) - CauchyRadialIntegral(d - 2, radius);
}

double MixtureRho(const ErrorVec& e, const SquareMat& cov, double volume, double gamma) {
  return -std::log(gamma * GaussianDensity(e, cov) + (1.0 - gamma) / volume);
}

}  // namespace

void ValidateModel(const NoiseModel& model) {
  std::visit(Overloaded{
                 [](const RansacModel& m) { if (!(m.threshold > 0)) Invalid("ransac: T must be > 0"); },
                 [](const MsacModel& m) { if (!(m.threshold > 0)) Invalid("msac: T must be > 0"); },
                 [](const MlesacModel& m) {
                   CheckCovariance(m.covariance, "mlesac");
                   if (!(m.outlier_volume > 0)) Invalid("mlesac: nu must be > 0");
                   if (!(m.inlier_ratio >= 0 && m.inlier_ratio <= 1)) Invalid("mlesac: gamma must lie in [0,1]");
                 },
                 [](const AmlesacModel& m) {
                   CheckCovariance(m.covariance, "amlesac");
                   if (!(m.outlier_volume > 0)) Invalid("amlesac: nu must be > 0");
                   if (!(m.inlier_ratio >= 0 && m.inlier_ratio <= 1)) Invalid("amlesac: gamma must lie in [0,1]");
                 },
                 [](const AcRansacModel& m) {
                   if (!(m.alpha0 > 0 && m.alpha0 < 1)) Invalid("ac-ransac: alpha0 must lie in (0,1)");
                   if (!(m.nfa_threshold > 0)) Invalid("ac-ransac: epsilon must be > 0");
                   if (m.sample_size < 1) Invalid("ac-ransac: sample size must be >= 1");
                   if (m.dimension < 1) Invalid("ac-ransac: dimension must be >= 1");
                 },
                 [](const ErodeModel& m) {
                   if (!(m.b > 0)) Invalid("erode: b must be > 0");
                   if (!(m.threshold > 0)) Invalid("erode: T must be > 0");
                 },
                 [](const GaussianModel&) {},
                 [](const CauchyModel& m) {
                   if (m.inv_sqrt.rows() == 0 || m.inv_sqrt.rows() != m.inv_sqrt.cols())
                     Invalid("cauchy: inverse square root must be square");
                   if (!(m.inv_sqrt.diagonal().array() > 0).all()) Invalid("cauchy: diagonal must be > 0");
                 },
             },
             model);
}

double PseudoHuber(double squared_norm, double b) {
  const double b2 = b * b;
  // 2b^2 (sqrt(1 + s/b^2) - 1) rewritten to avoid cancellation at small s.
  const double x = squared_norm / b2;
  return 2.0 * b2 * x / (std::sqrt(1.0 + x) + 1.0);
}

double GaussianDensity(const ErrorVec& e, const SquareMat& covariance) {
  const int d = static_cast<int>(e.size());
  const double log_norm = 0.5 * (d * std::log(2.0 * std::numbers::pi) + LogDet(covariance));
  return std::exp(-0.5 * Mahalanobis2(e, covariance) - log_norm);
}

GaussianDensityEvaluator::GaussianDensityEvaluator(const SquareMat& covariance) {
  Eigen::LLT<SquareMat> llt(covariance);
  if (llt.info() != Eigen::Success) Invalid("covariance must be positive-definite");
  chol_ = llt.matrixL();
  const int d = static_cast<int>(covariance.rows());
  log_norm_ = 0.5 * d * std::log(2.0 * std::numbers::pi) + chol_.diagonal().array().log().sum();
}

double GaussianDensityEvaluator::operator()(const ErrorVec& e) const {
  const ErrorVec w = chol_.triangularView<Eigen::Lower>().solve(e);
  return std::exp(-0.5 * w.squaredNorm() - log_norm_);
}

double Rho(const NoiseModel& model, const ErrorVec& e) {
  const double s = e.squaredNorm();
  return std::visit(
      Overloaded{
          [&](const RansacModel& m) { return s < m.threshold * m.threshold ? 0.0 : 1.0; },
          [&](const MsacModel& m) { return std::min(s, m.threshold * m.threshold); },
          [&](const MlesacModel& m) { return MixtureRho(e, m.covariance, m.outlier_volume, m.inlier_ratio); },
          [&](const AmlesacModel& m) { return MixtureRho(e, m.covariance, m.outlier_volume, m.inlier_ratio); },
          [&](const AcRansacModel&) -> double { Invalid("ac-ransac has no per-measurement cost"); },
          [&](const ErodeModel& m) { return PseudoHuber(s, m.b); },
          [&](const GaussianModel&) { return s; },
          [&](const CauchyModel& m) {
            const ErrorVec w = m.inv_sqrt.triangularView<Eigen::Lower>() * e;
            return std::log1p(w.squaredNorm());
          },
      },
      model);
}

double ProbOfCost(double rho, double log_normalizer) {
  if (!std::isfinite(log_normalizer)) throw Error(ErrorCode::kNonNormalizable, "normalizer is not finite");
  return std::exp(-rho - log_normalizer);
}

double LogNormalizer(const NoiseModel& model, const ErrorDomain& domain) {
  const int d = domain.dimension;
  if (d < 1) Invalid("error dimension must be >= 1");
  auto need_volume = [&](const char* name) {
    if (!domain.volume) {
      throw Error(ErrorCode::kNonNormalizable,
                  std::string(name) + " has a uniform component and needs a bounded error domain");
    }
    return *domain.volume;
  };
  return std::visit(
      Overloaded{
          [&](const RansacModel& m) {
            const double volume = need_volume("ransac");
            const double inner = UnitBallVolume(d) * std::pow(m.threshold, d);
            if (volume < inner) Invalid("ransac: domain smaller than the inlier ball");
            return std::log(inner + (volume - inner) * std::exp(-1.0));
          },
          [&](const MsacModel& m) {
            const double volume = need_volume("msac");
            const double t2 = m.threshold * m.threshold;
            const double inner = UnitBallVolume(d) * std::pow(m.threshold, d);
            if (volume < inner) Invalid("msac: domain smaller than the inlier ball");
            const double gauss = std::pow(std::numbers::pi, d / 2.0) * boost::math::gamma_p(d / 2.0, t2);
            return std::log(gauss + (volume - inner) * std::exp(-t2));
          },
          [&](const MlesacModel& m) {
            const double volume = domain.volume.value_or(m.outlier_volume);
            return std::log(m.inlier_ratio + (1.0 - m.inlier_ratio) * volume / m.outlier_volume);
          },
          [&](const AmlesacModel& m) {
            const double volume = domain.volume.value_or(m.outlier_volume);
            return std::log(m.inlier_ratio + (1.0 - m.inlier_ratio) * volume / m.outlier_volume);
          },
          [&](const AcRansacModel&) -> double {
            throw Error(ErrorCode::kNonNormalizable, "ac-ransac defines no noise density");
          },
          [&](const ErodeModel& m) {
            boost::math::quadrature::exp_sinh<double> integrator;
            const double integral = integrator.integrate(
                [&](double r) { return std::pow(r, d - 1) * std::exp(-PseudoHuber(r * r, m.b)); });
            return std::log(UnitSphereArea(d) * integral);
          },
          [&](const GaussianModel&) { return 0.5 * d * std::log(std::numbers::pi); },
          [&](const CauchyModel& m) {
            if (m.inv_sqrt.rows() != d) Invalid("cauchy: dimension mismatch");
            const double log_det_l = m.inv_sqrt.diagonal().array().log().sum();
            if (!domain.radius) {
              if (d == 1) return std::log(std::numbers::pi) - log_det_l;
              throw Error(ErrorCode::kNonNormalizable, "cauchy kernel needs a truncation radius for d >= 2");
            }
            return std::log(UnitSphereArea(d) * CauchyRadialIntegral(d, *domain.radius)) - log_det_l;
          },
      },
      model);
}

CostBreakdown TotalCost(const NoiseModel& model, std::span<const ErrorVec> errors,
                        std::span<const double> weights, const ErrorDomain& domain) {
  if (weights.size() != errors.size()) Invalid("weights and errors differ in length");
  CostBreakdown out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (weights[i] < 0) Invalid("weights must be >= 0");
    out.data_cost += weights[i] * Rho(model, errors[i]);
  }
  const double n = static_cast<double>(errors.size());
  if (const auto* cauchy = std::get_if<CauchyModel>(&model)) {
    // log|S| = 2 sum log L_jj for S = L^T L.
    const int d = static_cast<int>(cauchy->inv_sqrt.rows());
    const double log_det_s = 2.0 * cauchy->inv_sqrt.diagonal().array().log().sum();
    out.normalization_cost = -n / (d + 1) * log_det_s;
  } else {
    try {
      out.normalization_cost = n * LogNormalizer(model, domain);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonNormalizable) throw;
      out.normalization_cost = 0;
      out.normalized = false;
    }
  }
  out.total = out.data_cost + out.normalization_cost;
  return out;
}

CostBreakdown TotalCost(const NoiseModel& model, std::span<const ErrorVec> errors,
                        const ErrorDomain& domain) {
  const std::vector<double> ones(errors.size(), 1.0);
  return TotalCost(model, errors, ones, domain);
}

double InlierResponsibility(const ErrorVec& e, const SquareMat& covariance, double outlier_volume,
                            double inlier_ratio) {
  const double in = inlier_ratio * GaussianDensity(e, covariance);
  const double out = (1.0 - inlier_ratio) / outlier_volume;
  const double sum = in + out;
  return sum > 0 ? in / sum : 0.0;
}

namespace {

constexpr double kEmTolerance = 1e-6;
constexpr int kEmMaxIterations = 100;

// Gaussian densities for all errors under one covariance, sharing the factorization.
void Densities(std::span<const ErrorVec> errors, const SquareMat& covariance, std::vector<double>& out) {
  out.resize(errors.size());
  if (errors.empty()) return;
  const GaussianDensityEvaluator density(covariance);
  for (std::size_t i = 0; i < errors.size(); ++i) out[i] = density(errors[i]);
}

}  // namespace

double EstimateInlierRatio(std::span<const ErrorVec> errors, const SquareMat& covariance,
                           double outlier_volume, double gamma0) {
  if (errors.empty()) return std::clamp(gamma0, 0.0, 1.0);
  std::vector<double> g;
  Densities(errors, covariance, g);
  const double outlier_density = 1.0 / outlier_volume;
  double gamma = std::clamp(gamma0, 0.0, 1.0);
  for (int it = 0; it < kEmMaxIterations; ++it) {
    double sum = 0;
    for (const double gi : g) {
      const double in = gamma * gi;
      const double denom = in + (1.0 - gamma) * outlier_density;
      sum += denom > 0 ? in / denom : 0.0;
    }
    const double next = std::clamp(sum / static_cast<double>(g.size()), 0.0, 1.0);
    const double delta = std::abs(next - gamma);
    gamma = next;
    if (delta < kEmTolerance) break;
  }
  return gamma;
}

MixtureFit EstimateInlierRatioAndCovariance(std::span<const ErrorVec> errors,
                                            const SquareMat& covariance0,
                                            double outlier_volume, double gamma0) {
  MixtureFit fit{std::clamp(gamma0, 0.0, 1.0), covariance0};
  if (errors.empty()) return fit;
  const int d = static_cast<int>(covariance0.rows());
  const SquareMat floor = 1e-4 * SquareMat::Identity(d, d);
  const double outlier_density = 1.0 / outlier_volume;
  std::vector<double> g, r(errors.size());
  for (int it = 0; it < kEmMaxIterations; ++it) {
    Densities(errors, fit.covariance, g);
    double sum = 0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      const double in = fit.inlier_ratio * g[i];
      const double denom = in + (1.0 - fit.inlier_ratio) * outlier_density;
      r[i] = denom > 0 ? in / denom : 0.0;
      sum += r[i];
    }
    const double next = std::clamp(sum / static_cast<double>(errors.size()), 0.0, 1.0);
    if (sum > 0) {
      SquareMat cov = SquareMat::Zero(d, d);
      for (std::size_t i = 0; i < errors.size(); ++i) cov += r[i] * errors[i] * errors[i].transpose();
      cov /= sum;
      // Floor eigenvalues so the covariance stays positive-definite.
      Eigen::SelfAdjointEigenSolver<SquareMat> eig(cov);
      SquareMat vals = eig.eigenvalues().cwiseMax(floor(0, 0)).asDiagonal();
      fit.covariance = eig.eigenvectors() * vals * eig.eigenvectors().transpose();
      fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    }
    const double delta = std::abs(next - fit.inlier_ratio);
    fit.inlier_ratio = next;
    if (delta < kEmTolerance) break;
  }
  return fit;
}

double Alpha0Stereo(const StereoCalibration& calib) {
  return 4.0 * std::numbers::pi / (3.0 * calib.image_width * calib.image_height * calib.disparity_range);
}

}  // namespace svo
