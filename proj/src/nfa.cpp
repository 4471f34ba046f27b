#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svo/error.hpp"
#include "svo/noise_models.hpp"

namespace svo {
namespace {

// Exactly zero errors occur on noise-free data; log needs a floor.
constexpr double kMinError = 1e-12;

}  // namespace

double LogBinomial(int n, int k) {
  if (k < 0 || k > n) throw Error(ErrorCode::kInvalidArgument, "binomial out of range");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

NfaScorer::NfaScorer(int num_data, int sample_size, int dimension, double alpha0)
    : num_data_(num_data),
      sample_size_(sample_size),
      dimension_(dimension),
      log_alpha0_(std::log(alpha0)),
      log_n_minus_ns_(0) {
  if (sample_size < 1 || num_data <= sample_size) {
    throw Error(ErrorCode::kInvalidArgument, "NFA needs N > Ns >= 1");
  }
  if (!(alpha0 > 0 && alpha0 < 1)) throw Error(ErrorCode::kInvalidArgument, "alpha0 must lie in (0,1)");
  log_n_minus_ns_ = std::log(static_cast<double>(num_data - sample_size));
  log_c_n_.resize(num_data + 1);
  log_c_ns_.resize(num_data + 1);
  for (int q = sample_size; q <= num_data; ++q) {
    log_c_n_[q] = LogBinomial(num_data, q);
    log_c_ns_[q] = LogBinomial(q, sample_size);
  }
}

double NfaScorer::LogNfa(std::span<const double> sorted_errors, int q) const {
  if (static_cast<int>(sorted_errors.size()) != num_data_) {
    throw Error(ErrorCode::kInvalidArgument, "error count differs from N");
  }
  if (q <= sample_size_ || q > num_data_) {
    throw Error(ErrorCode::kInvalidQ, "q must satisfy Ns < q <= N, got " + std::to_string(q));
  }
  const double e = std::max(sorted_errors[q - 1], kMinError);
  return log_n_minus_ns_ + log_c_n_[q] + log_c_ns_[q] +
         (q - sample_size_) * (dimension_ * std::log(e) + log_alpha0_);
}

NfaScorer::Result NfaScorer::Best(std::span<const double> sorted_errors) const {
  Result best{0, std::numeric_limits<double>::infinity(), 0};
  for (int q = sample_size_ + 1; q <= num_data_; ++q) {
    const double value = LogNfa(sorted_errors, q);
    if (value < best.log_nfa) best = {q, value, sorted_errors[q - 1]};
  }
  return best;
}

double LogNfa(std::span<const double> sorted_errors, int q, int sample_size, int dimension,
              double alpha0) {
  return NfaScorer(static_cast<int>(sorted_errors.size()), sample_size, dimension, alpha0)
      .LogNfa(sorted_errors, q);
}

BestNfaResult BestNfa(std::span<const double> sorted_errors, int sample_size, int dimension,
                      double alpha0, double epsilon) {
  const NfaScorer scorer(static_cast<int>(sorted_errors.size()), sample_size, dimension, alpha0);
  const auto best = scorer.Best(sorted_errors);
  return {best.q, best.log_nfa, best.threshold, best.log_nfa <= std::log(epsilon)};
}

}  // namespace svo
