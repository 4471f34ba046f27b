#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "nfa_oracle.hpp"
#include "svo/error.hpp"
#include "svo/noise_models.hpp"

namespace svo {
namespace {

std::vector<double> SortedErrors(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 20.0);
  std::vector<double> e(n);
  for (double& x : e) x = u(rng);
  std::sort(e.begin(), e.end());
  return e;
}

TEST(Nfa, MatchesExactArithmetic) {
  std::mt19937_64 rng(7);
  const double alphas[] = {Alpha0Stereo(StereoCalibration{}), 1e-3, 0.25};
  int checked = 0;
  for (int n = 2; n <= 25; ++n) {
    for (int ns = 1; ns <= std::min(5, n - 1); ++ns) {
      const auto errors = SortedErrors(n, rng);
      for (const double alpha0 : alphas) {
        for (const int d : {1, 3}) {
          for (int q = ns + 1; q <= n; ++q) {
            const double got = LogNfa(errors, q, ns, d, alpha0);
            const double want = testing::ExactLogNfa(n, ns, d, errors[q - 1], alpha0, q);
            ASSERT_NEAR(got, want, 1e-9) << "N=" << n << " Ns=" << ns << " q=" << q;
            ++checked;
          }
        }
      }
    }
  }
  EXPECT_GT(checked, 5000);
}

TEST(Nfa, InvalidQ) {
  const std::vector<double> e = {1, 2, 3, 4, 5, 6};
  for (const int q : {0, 4, 7}) {
    try {
      LogNfa(e, q, 4, 3, 1e-3);
      FAIL() << q;
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::kInvalidQ);
    }
  }
  EXPECT_NO_THROW(LogNfa(e, 5, 4, 3, 1e-3));
}

TEST(Nfa, BestPicksMinimumAndThreshold) {
  std::mt19937_64 rng(8);
  const auto e = SortedErrors(20, rng);
  const auto best = BestNfa(e, 4, 3, 1e-3);
  for (int q = 5; q <= 20; ++q) EXPECT_LE(best.log_nfa, LogNfa(e, q, 4, 3, 1e-3));
  EXPECT_EQ(best.threshold, e[best.q - 1]);
  EXPECT_EQ(best.valid, best.log_nfa <= 0.0);
}

TEST(Nfa, ConsistentCloudIsMeaningful) {
  // 80 tight errors plus 20 large ones: the optimum sits at the tight cluster.
  std::vector<double> e;
  for (int i = 0; i < 80; ++i) e.push_back(0.5 + 0.001 * i);
  for (int i = 0; i < 20; ++i) e.push_back(200.0 + i);
  const auto best = BestNfa(e, 4, 3, Alpha0Stereo(StereoCalibration{}));
  EXPECT_TRUE(best.valid);
  EXPECT_EQ(best.q, 80);
}

TEST(Nfa, LogBinomial) {
  EXPECT_NEAR(LogBinomial(25, 12), std::log(5200300.0), 1e-9);
  EXPECT_EQ(LogBinomial(5, 0), 0.0);
  EXPECT_THROW(LogBinomial(3, 4), Error);
}

}  // namespace
}  // namespace svo
