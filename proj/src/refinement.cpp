#include "svo/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "svo/error.hpp"

namespace svo {

std::string_view ToString(RefinementScope scope) {
  switch (scope) {
    case RefinementScope::kMotionOnly: return "motion";
    case RefinementScope::kMotionStructure: return "ba";
    case RefinementScope::kMotionStructureNoise: return "ba-noise";
  }
  return "unknown";
}

RefinementScope ParseScope(std::string_view name) {
  if (name == "motion") return RefinementScope::kMotionOnly;
  if (name == "ba") return RefinementScope::kMotionStructure;
  if (name == "ba-noise") return RefinementScope::kMotionStructureNoise;
  throw Error(ErrorCode::kInvalidArgument, "unknown scope '" + std::string(name) + "' (motion|ba|ba-noise)");
}

int ErrorDimension(RefinementScope scope) { return scope == RefinementScope::kMotionOnly ? 3 : 6; }

int LocalVariableCount(RefinementScope scope) {
  switch (scope) {
    case RefinementScope::kMotionOnly: return 6;
    case RefinementScope::kMotionStructure: return 9;
    case RefinementScope::kMotionStructureNoise: return 9 + kNoiseParams;
  }
  return 0;
}

SquareMat IsotropicInvSqrt(int d, double sigma) { return SquareMat::Identity(d, d) / sigma; }

SquareMat CovarianceFromInvSqrt(const SquareMat& inv_sqrt) {
  const SquareMat s = inv_sqrt.transpose() * inv_sqrt;
  return s.inverse();
}

namespace {

using Mat3x6 = Eigen::Matrix<double, 3, 6>;
using JacPose = Eigen::Matrix<double, Eigen::Dynamic, 6, 0, 6, 6>;
using JacPoint = Eigen::Matrix<double, Eigen::Dynamic, 3, 0, 6, 3>;

// d(pi)/dP for the rectified stereo projection.
Eigen::Matrix3d ProjectionJacobian(const Eigen::Vector3d& p, const StereoCalibration& calib) {
  const double iz = 1.0 / p.z();
  const double f = calib.focal;
  Eigen::Matrix3d j;
  j << f * iz, 0, -f * p.x() * iz * iz,
       f * iz, 0, -f * (p.x() - calib.baseline) * iz * iz,
       0, f * iz, -f * p.y() * iz * iz;
  return j;
}

// Raw (unwhitened) error and its derivatives w.r.t. pose tangent and point.
// Returns false if a point lies behind a camera.
bool Linearize(bool two_view, const Pose& pose, const Point3& point, const Correspondence& c,
               const StereoCalibration& calib, bool with_jacobian, ErrorVec& e, JacPose& j_pose,
               JacPoint& j_point) {
  const Eigen::Vector3d p = pose * point;
  if (p.z() <= 1e-9 || (two_view && point.z() <= 1e-9)) return false;
  const int d = two_view ? 6 : 3;
  const int off = two_view ? 3 : 0;
  e.resize(d);
  e.segment<3>(off) = c.z.Cur() - StereoProjectCamera(p, calib);
  if (two_view) e.head<3>() = c.z.Prev() - StereoProjectCamera(point, calib);
  if (!with_jacobian) return true;

  const Eigen::Matrix3d jp = ProjectionJacobian(p, calib);
  j_pose.setZero(d, 6);
  j_pose.block<3, 3>(off, 0) = -jp;
  j_pose.block<3, 3>(off, 3) = jp * Skew(p);
  j_point.setZero(d, 3);
  j_point.block<3, 3>(off, 0) = -jp * pose.rotation();
  if (two_view) j_point.block<3, 3>(0, 0) = -ProjectionJacobian(point, calib);
  return true;
}

// d(L e)/d(noise params) for one 3x3 factor; rows of L parameterized as
// (j, 0..j), diagonal by log.
Eigen::Matrix<double, 3, 6> BlockNoiseJacobian(const SquareMat& l, const Eigen::Vector3d& e) {
  Eigen::Matrix<double, 3, 6> j = Eigen::Matrix<double, 3, 6>::Zero();
  int col = 0;
  for (int r = 0; r < 3; ++r) {
    for (int m = 0; m <= r; ++m, ++col) j(r, col) = (m == r) ? l(r, r) * e(r) : e(m);
  }
  return j;
}

// Positions of log L_00, log L_11, log L_22 in the noise parameters.
constexpr int kLogDiagonal[3] = {0, 2, 5};

// The factor is block-diagonal with one 3x3 block shared by both frames.
Eigen::MatrixXd NoiseJacobian(const SquareMat& l, const ErrorVec& e) {
  const int blocks = static_cast<int>(e.size()) / 3;
  Eigen::MatrixXd j(e.size(), kNoiseParams);
  for (int b = 0; b < blocks; ++b) {
    j.middleRows<3>(3 * b) = BlockNoiseJacobian(l.topLeftCorner(3, 3), e.segment<3>(3 * b));
  }
  return j;
}

SquareMat TiedFactor(const SquareMat& block, int d) {
  SquareMat out = SquareMat::Zero(d, d);
  for (int b = 0; b < d / 3; ++b) out.block(3 * b, 3 * b, 3, 3) = block;
  return out;
}

SquareMat RetractNoise(const SquareMat& l, const Eigen::Ref<const Eigen::VectorXd>& delta) {
  SquareMat block = l.topLeftCorner(3, 3);
  int col = 0;
  for (int r = 0; r < 3; ++r) {
    for (int m = 0; m <= r; ++m, ++col) {
      if (m == r) {
        block(r, r) *= std::exp(delta(col));
      } else {
        block(r, m) += delta(col);
      }
    }
  }
  return TiedFactor(block, static_cast<int>(l.rows()));
}

// rho(s) and rho'(s) of the whitened squared norm s.
struct Kernel {
  enum class Kind { kQuadratic, kPseudoHuber, kTruncated, kMixture, kCauchy };
  Kind kind = Kind::kQuadratic;
  double b = 0;
  double t2 = 0;
  double gamma = 0;
  double outlier_density = 0;
  double log_gauss_norm = 0;

  double Eval(double s, double& drho) const {
    switch (kind) {
      case Kind::kQuadratic:
        drho = 1.0;
        return s;
      case Kind::kPseudoHuber: {
        const double root = std::sqrt(1.0 + s / (b * b));
        drho = 1.0 / root;
        return PseudoHuber(s, b);
      }
      case Kind::kTruncated:
        if (s < t2) {
          drho = 1.0;
          return s;
        }
        drho = 0.0;
        return t2;
      case Kind::kMixture: {
        const double in = gamma * std::exp(-0.5 * s - log_gauss_norm);
        const double total = in + (1.0 - gamma) * outlier_density;
        drho = total > 0 ? 0.5 * in / total : 0.0;
        return -std::log(total);
      }
      case Kind::kCauchy:
        drho = 1.0 / (1.0 + s);
        return std::log1p(s);
    }
    drho = 0;
    return 0;
  }
};

struct Setup {
  Kernel kernel;
  SquareMat whitener;  // residual = whitener * e
  bool cauchy = false;
  bool optimize_noise = false;
};

SquareMat ExpandCovariance(const SquareMat& cov, int d) {
  if (cov.rows() == d) return cov;
  if (cov.rows() == 3 && d == 6) {
    SquareMat out = SquareMat::Zero(6, 6);
    out.topLeftCorner(3, 3) = cov;
    out.bottomRightCorner(3, 3) = cov;
    return out;
  }
  throw Error(ErrorCode::kInvalidArgument, "covariance dimension does not match the error dimension");
}

Setup MakeSetup(RefinementScope scope, const NoiseModel& model) {
  const int d = ErrorDimension(scope);
  Setup setup;
  setup.whitener = SquareMat::Identity(d, d);
  auto mixture = [&](const SquareMat& cov0, double volume, double gamma) {
    const SquareMat cov = ExpandCovariance(cov0, d);
    Eigen::LLT<SquareMat> llt(cov);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::kInvalidArgument, "covariance not positive-definite");
    const SquareMat chol = llt.matrixL();
    setup.whitener = chol.triangularView<Eigen::Lower>().solve(SquareMat::Identity(d, d));
    setup.kernel.kind = Kernel::Kind::kMixture;
    setup.kernel.gamma = gamma;
    setup.kernel.outlier_density = 1.0 / volume;
    setup.kernel.log_gauss_norm =
        0.5 * d * std::log(2.0 * std::numbers::pi) + chol.diagonal().array().log().sum();
  };
  if (std::holds_alternative<GaussianModel>(model)) {
    setup.kernel.kind = Kernel::Kind::kQuadratic;
  } else if (const auto* m = std::get_if<ErodeModel>(&model)) {
    setup.kernel.kind = Kernel::Kind::kPseudoHuber;
    setup.kernel.b = m->b;
  } else if (const auto* m = std::get_if<MsacModel>(&model)) {
    setup.kernel.kind = Kernel::Kind::kTruncated;
    setup.kernel.t2 = m->threshold * m->threshold;
  } else if (const auto* m = std::get_if<MlesacModel>(&model)) {
    mixture(m->covariance, m->outlier_volume, m->inlier_ratio);
  } else if (const auto* m = std::get_if<AmlesacModel>(&model)) {
    mixture(m->covariance, m->outlier_volume, m->inlier_ratio);
  } else if (const auto* m = std::get_if<CauchyModel>(&model)) {
    SquareMat l = m->inv_sqrt.triangularView<Eigen::Lower>();
    if (l.rows() == 3 && l.cols() == 3 && d == 6) l = TiedFactor(l, 6);
    if (l.rows() != d || l.cols() != d) {
      throw Error(ErrorCode::kInvalidArgument, "cauchy factor must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (!(l.diagonal().array() > 0).all()) {
      throw Error(ErrorCode::kInvalidArgument, "cauchy factor needs a positive diagonal");
    }
    if (scope == RefinementScope::kMotionStructureNoise && l != TiedFactor(l.topLeftCorner(3, 3), d)) {
      throw Error(ErrorCode::kInvalidArgument, "cauchy factor must repeat one 3x3 block for both frames");
    }
    setup.kernel.kind = Kernel::Kind::kCauchy;
    setup.whitener = l;
    setup.cauchy = true;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "model has no differentiable cost for refinement");
  }
  if (scope == RefinementScope::kMotionStructureNoise) {
    if (!setup.cauchy) throw Error(ErrorCode::kInvalidArgument, "ba-noise refinement needs a Cauchy model");
    setup.optimize_noise = true;
  }
  return setup;
}

double CauchyNormalizer(const SquareMat& l, double n) {
  const int d = static_cast<int>(l.rows());
  return -n / (d + 1) * 2.0 * l.diagonal().array().log().sum();
}

struct State {
  Pose pose;
  std::vector<Point3> points;
  SquareMat whitener;
};

class Solver {
 public:
  Solver(RefinementScope scope, std::span<const Correspondence> data, const StereoCalibration& calib,
         Setup setup, std::vector<double> weights, const RefinementOptions& options)
      : scope_(scope),
        two_view_(scope != RefinementScope::kMotionOnly),
        data_(data),
        calib_(calib),
        setup_(std::move(setup)),
        weights_(std::move(weights)),
        options_(options),
        d_(ErrorDimension(scope)),
        noise_params_(setup_.optimize_noise ? kNoiseParams : 0),
        global_(6 + noise_params_) {}

  // Total cost, or +inf when any point falls behind a camera.
  double Cost(const State& s) const {
    double cost = 0;
    ErrorVec e;
    JacPose jp;
    JacPoint jx;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const Point3& y = two_view_ ? s.points[i] : data_[i].point;
      if (!Linearize(two_view_, s.pose, y, data_[i], calib_, false, e, jp, jx)) {
        return std::numeric_limits<double>::infinity();
      }
      const ErrorVec r = s.whitener.triangularView<Eigen::Lower>() * e;
      double drho;
      cost += weights_[i] * setup_.kernel.Eval(r.squaredNorm(), drho);
    }
    if (setup_.cauchy) cost += CauchyNormalizer(s.whitener, static_cast<double>(data_.size()));
    if (noise_params_ > 0) {
      for (std::size_t i = 0; i < data_.size(); ++i) {
        const double t = StructureLogDet(i, s.whitener);
        if (!std::isfinite(t)) return std::numeric_limits<double>::infinity();
        cost += t / (d_ + 1);
      }
    }
    return cost;
  }

  RefinementResult Run(State state) {
    RefinementResult result;
    if (noise_params_ > 0) FreezePointJacobians(state);
    double cost = Cost(state);
    if (!std::isfinite(cost)) throw Error(ErrorCode::kNonFiniteCost, "refinement start has non-finite cost");
    result.initial_cost = cost;
    double lambda = options_.initial_lambda;
    result.termination = "max-iterations";

    const std::size_t n = data_.size();
    const int np = two_view_ ? static_cast<int>(n) : 0;
    Eigen::MatrixXd hgg(global_, global_);
    Eigen::VectorXd bg(global_);
    std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>> hgp(np);
    std::vector<Eigen::Matrix3d> hpp(np);
    std::vector<Eigen::Vector3d> bp(np);

    int accepted = 0;
    bool relinearize = true;
    while (accepted < options_.max_iterations) {
      if (relinearize) {
        BuildNormalEquations(state, hgg, bg, hgp, hpp, bp);
        double grad_inf = 2.0 * bg.cwiseAbs().maxCoeff();
        for (int i = 0; i < np; ++i) grad_inf = std::max(grad_inf, 2.0 * bp[i].cwiseAbs().maxCoeff());
        if (grad_inf < options_.gradient_tolerance) {
          result.termination = "gradient";
          break;
        }
        relinearize = false;
      }
      Eigen::VectorXd dg;
      std::vector<Eigen::Vector3d> dp(np);
      if (!SolveDamped(lambda, hgg, bg, hgp, hpp, bp, dg, dp)) {
        result.rank_deficient = true;
        lambda *= 10;
        if (lambda > 1e16) {
          result.termination = "rank-deficient";
          break;
        }
        continue;
      }
      ClampNoiseStep(dg, dp);
      State trial = Apply(state, dg, dp);
      const double trial_cost = Cost(trial);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double decrease = cost - trial_cost;
        state = std::move(trial);
        const double previous = cost;
        cost = trial_cost;
        ++accepted;
        lambda = std::max(lambda / 10, 1e-15);
        relinearize = true;
        if (decrease < options_.relative_tolerance * std::max(std::abs(previous), 1e-300)) {
          result.termination = "relative-decrease";
          break;
        }
      } else {
        lambda *= 10;
        if (lambda > 1e16) {
          result.termination = "damping-limit";
          break;
        }
      }
    }
    result.pose = state.pose;
    if (two_view_) result.structure = std::move(state.points);
    if (setup_.cauchy) result.noise_inv_sqrt = state.whitener;
    result.final_cost = cost;
    result.iterations = accepted;
    return result;
  }

 private:
  void BuildNormalEquations(const State& s, Eigen::MatrixXd& hgg, Eigen::VectorXd& bg,
                            std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>>& hgp,
                            std::vector<Eigen::Matrix3d>& hpp, std::vector<Eigen::Vector3d>& bp) const {
    hgg.setZero();
    bg.setZero();
    ErrorVec e;
    JacPose jpose;
    JacPoint jpoint;
    const auto l = s.whitener.triangularView<Eigen::Lower>();
    Eigen::MatrixXd jg(d_, global_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const Point3& y = two_view_ ? s.points[i] : data_[i].point;
      Linearize(two_view_, s.pose, y, data_[i], calib_, true, e, jpose, jpoint);
      const ErrorVec r = l * e;
      double drho;
      setup_.kernel.Eval(r.squaredNorm(), drho);
      const double w = weights_[i] * drho;
      jg.leftCols<6>() = l * jpose;
      if (noise_params_ > 0) jg.rightCols(noise_params_) = NoiseJacobian(s.whitener, e);
      hgg.noalias() += w * jg.transpose() * jg;
      bg.noalias() += w * jg.transpose() * r;
      if (two_view_) {
        const JacPoint jx = l * jpoint;
        hgp[i] = w * jg.transpose() * jx;
        hpp[i] = w * jx.transpose() * jx;
        bp[i] = w * jx.transpose() * r;
      }
    }
    if (noise_params_ > 0) AddStructureGradient(s, bg);
    if (noise_params_ > 0) {
      // Half the gradient of -n/(d+1) * 2 sum log L_jj w.r.t. a shared log L_jj
      // (each block entry appears d/3 times on the diagonal).
      const double g = -static_cast<double>(data_.size()) / (d_ + 1) * (d_ / 3);
      for (const int col : kLogDiagonal) bg(6 + col) += g;
    }
  }

  void FreezePointJacobians(const State& s) {
    point_jacobians_.resize(data_.size());
    ErrorVec e;
    JacPose jp;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!Linearize(true, s.pose, s.points[i], data_[i], calib_, true, e, jp, point_jacobians_[i])) {
        throw Error(ErrorCode::kNonFiniteCost, "refinement start has a point behind a camera");
      }
    }
  }

  // log |J^T S J| for the point block, J = de/dpoint frozen at the start.
  double StructureLogDet(std::size_t i, const SquareMat& l) const {
    const Eigen::Matrix<double, Eigen::Dynamic, 3> g = l.triangularView<Eigen::Lower>() * point_jacobians_[i];
    const Eigen::LLT<Eigen::Matrix3d> llt(g.transpose() * g);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }

  // Half gradient of sum_i log|J_i^T S J_i| / (d+1) in the noise parameters:
  // d log|A| = 2 tr(dL P) with G = L J, A = G^T G, P = J A^-1 G^T.
  void AddStructureGradient(const State& s, Eigen::VectorXd& bg) const {
    const double c = 1.0 / (d_ + 1);
    const auto l = s.whitener.triangularView<Eigen::Lower>();
    for (const auto& jx : point_jacobians_) {
      const Eigen::Matrix<double, Eigen::Dynamic, 3> g = l * jx;
      const Eigen::MatrixXd p = jx * (g.transpose() * g).inverse() * g.transpose();
      int col = 0;
      for (int r = 0; r < 3; ++r) {
        for (int m = 0; m <= r; ++m, ++col) {
          double sum = 0;
          for (int b = 0; b < d_ / 3; ++b) sum += p(3 * b + m, 3 * b + r);
          if (m == r) sum *= s.whitener(r, r);
          bg(6 + col) += c * sum;
        }
      }
    }
  }

  bool SolveDamped(double lambda, const Eigen::MatrixXd& hgg, const Eigen::VectorXd& bg,
                   const std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>>& hgp,
                   const std::vector<Eigen::Matrix3d>& hpp, const std::vector<Eigen::Vector3d>& bp,
                   Eigen::VectorXd& dg, std::vector<Eigen::Vector3d>& dp) const {
    const double floor = 1e-12 * (1.0 + hgg.diagonal().cwiseAbs().maxCoeff());
    Eigen::MatrixXd s = hgg;
    for (int k = 0; k < global_; ++k) s(k, k) += lambda * std::max(hgg(k, k), floor);
    Eigen::VectorXd rhs = -bg;
    std::vector<Eigen::Matrix3d> inv(hpp.size());
    for (std::size_t i = 0; i < hpp.size(); ++i) {
      Eigen::Matrix3d a = hpp[i];
      const double pfloor = 1e-12 * (1.0 + a.diagonal().cwiseAbs().maxCoeff());
      for (int k = 0; k < 3; ++k) a(k, k) += lambda * std::max(hpp[i](k, k), pfloor) + pfloor;
      inv[i] = a.inverse();
      if (!inv[i].allFinite()) return false;
      s.noalias() -= hgp[i] * inv[i] * hgp[i].transpose();
      rhs.noalias() += hgp[i] * (inv[i] * bp[i]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    dg = ldlt.solve(rhs);
    if (!dg.allFinite()) return false;
    for (std::size_t i = 0; i < hpp.size(); ++i) dp[i] = inv[i] * (-bp[i] - hgp[i].transpose() * dg);
    return true;
  }

  void ClampNoiseStep(Eigen::VectorXd& dg, std::vector<Eigen::Vector3d>& dp) const {
    if (noise_params_ == 0) return;
    double worst = 0;
    for (const int col : kLogDiagonal) worst = std::max(worst, std::abs(dg(6 + col)));
    if (worst <= options_.max_log_scale_step) return;
    const double scale = options_.max_log_scale_step / worst;
    dg *= scale;
    for (auto& v : dp) v *= scale;
  }

  State Apply(const State& s, const Eigen::VectorXd& dg, const std::vector<Eigen::Vector3d>& dp) const {
    State out;
    out.pose = Se3Exp(dg.head<6>()) * s.pose;
    if (two_view_) {
      out.points.resize(s.points.size());
      for (std::size_t i = 0; i < s.points.size(); ++i) out.points[i] = s.points[i] + dp[i];
    }
    out.whitener = noise_params_ > 0 ? RetractNoise(s.whitener, dg.tail(noise_params_)) : s.whitener;
    return out;
  }

  RefinementScope scope_;
  bool two_view_;
  std::span<const Correspondence> data_;
  const StereoCalibration& calib_;
  Setup setup_;
  std::vector<double> weights_;
  RefinementOptions options_;
  int d_;
  int noise_params_;
  int global_;
  // Structure-marginalization term of the noise scope.
  std::vector<JacPoint> point_jacobians_;
};

}  // namespace

Eigen::VectorXd RefinementResidual(RefinementScope scope, const LocalState& state,
                                   const Correspondence& c, const StereoCalibration& calib) {
  ErrorVec e;
  JacPose jp;
  JacPoint jx;
  const bool two_view = scope != RefinementScope::kMotionOnly;
  if (!Linearize(two_view, state.pose, state.point, c, calib, false, e, jp, jx)) {
    throw Error(ErrorCode::kPointBehindCamera, "point behind camera");
  }
  if (scope == RefinementScope::kMotionStructureNoise) {
    return state.noise_inv_sqrt.triangularView<Eigen::Lower>() * e;
  }
  return e;
}

Eigen::MatrixXd RefinementJacobian(RefinementScope scope, const LocalState& state,
                                   const Correspondence& c, const StereoCalibration& calib) {
  ErrorVec e;
  JacPose jp;
  JacPoint jx;
  const bool two_view = scope != RefinementScope::kMotionOnly;
  if (!Linearize(two_view, state.pose, state.point, c, calib, true, e, jp, jx)) {
    throw Error(ErrorCode::kPointBehindCamera, "point behind camera");
  }
  const int d = ErrorDimension(scope);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, LocalVariableCount(scope));
  if (scope == RefinementScope::kMotionOnly) {
    j = jp;
    return j;
  }
  if (scope == RefinementScope::kMotionStructure) {
    j.leftCols<6>() = jp;
    j.middleCols<3>(6) = jx;
    return j;
  }
  const auto l = state.noise_inv_sqrt.triangularView<Eigen::Lower>();
  j.leftCols<6>() = l * jp;
  j.middleCols<3>(6) = l * jx;
  j.rightCols(kNoiseParams) = NoiseJacobian(state.noise_inv_sqrt, e);
  return j;
}

LocalState Retract(RefinementScope scope, const LocalState& state, const Eigen::VectorXd& delta) {
  if (delta.size() != LocalVariableCount(scope)) {
    throw Error(ErrorCode::kInvalidArgument, "update size does not match the scope");
  }
  LocalState out = state;
  out.pose = Se3Exp(delta.head<6>()) * state.pose;
  if (scope == RefinementScope::kMotionOnly) return out;
  out.point = state.point + delta.segment<3>(6);
  if (scope == RefinementScope::kMotionStructureNoise) {
    out.noise_inv_sqrt = RetractNoise(state.noise_inv_sqrt, delta.tail(kNoiseParams));
  }
  return out;
}

RefinementResult Refine(RefinementScope scope, const Pose& pose0,
                        std::span<const Correspondence> correspondences,
                        const StereoCalibration& calib, const NoiseModel& model,
                        std::span<const double> weights, const RefinementOptions& options) {
  if (correspondences.size() < 4) {
    throw Error(ErrorCode::kInsufficientCorrespondences, "refinement needs at least 4 correspondences");
  }
  if (!weights.empty() && weights.size() != correspondences.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weights and correspondences differ in length");
  }
  Setup setup = MakeSetup(scope, model);
  std::vector<double> w(correspondences.size(), 1.0);
  if (!weights.empty()) std::copy(weights.begin(), weights.end(), w.begin());

  State state;
  state.pose = pose0;
  state.whitener = setup.whitener;
  if (scope != RefinementScope::kMotionOnly) {
    state.points.reserve(correspondences.size());
    for (const auto& c : correspondences) state.points.push_back(c.point);
  }
  Solver solver(scope, correspondences, calib, std::move(setup), std::move(w), options);
  return solver.Run(std::move(state));
}

}  // namespace svo
