// Copyright 2026 The enclose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "enclose/rigidity.hpp"
#include "enclose/transform.hpp"

namespace enclose {
namespace {

constexpr double kPi = std::numbers::pi;

double five_point(auto&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

TEST(Beta, ValueAndRateAtZero) {
  const PerformanceFunction p{1.0, 0.15, 0.1};
  const BetaValue b = beta(p, 0.0);
  EXPECT_DOUBLE_EQ(b.value, 1.0);
  EXPECT_DOUBLE_EQ(b.rate, -0.085);
}

TEST(Beta, Limit) {
  const PerformanceFunction p{1.0, 0.15, 0.1};
  const BetaValue b = beta(p, 1e4);
  EXPECT_NEAR(b.value, 0.15, 1e-15);
  EXPECT_NEAR(b.rate, 0.0, 1e-15);
}

TEST(Beta, RateMatchesFiniteDifferenceAndDecreases) {
  const PerformanceFunction p{2.0, 0.3, 0.4};
  double prev = beta(p, 0.0).value;
  for (double t = 0.05; t < 20.0; t += 0.25) {
    const double fd = five_point([&](double s) { return beta(p, s).value; }, t, 1e-3);
    EXPECT_NEAR(beta(p, t).rate, fd, 1e-9);
    const double now = beta(p, t).value;
    EXPECT_LT(now, prev);
    EXPECT_GT(now, 0.0);
    prev = now;
  }
}

TEST(Beta, ValidateRejectsBadTriples) {
  EXPECT_NO_THROW((PerformanceFunction{1.0, 0.15, 0.1}.validate()));
  EXPECT_THROW((PerformanceFunction{0.1, 0.15, 0.1}.validate()), InvalidParameter);
  EXPECT_THROW((PerformanceFunction{1.0, 0.0, 0.1}.validate()), InvalidParameter);
  EXPECT_THROW((PerformanceFunction{1.0, 0.15, 0.0}.validate()), InvalidParameter);
}

TEST(SigmaEdge, Values) {
  const XiBounds b{1.0, 1.0};
  EXPECT_EQ(sigma_edge(0.0, b), 0.0);
  EXPECT_NEAR(sigma_edge(0.5, b), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(sigma_edge(-0.5, b), -2.0 / 3.0, 1e-15);
}

TEST(SigmaEdge, PolesAtTheBounds) {
  const XiBounds b{100.0, 100.0};
  const double near_upper = 100.0 * (1.0 - 2e-12);
  EXPECT_GT(sigma_edge(near_upper, b), 1e12);
  EXPECT_LT(sigma_edge(-near_upper, b), -1e12);
  EXPECT_THROW(sigma_edge(100.0, b), OutOfBarrier);
  EXPECT_THROW(sigma_edge(-100.0, b), OutOfBarrier);
  EXPECT_THROW(sigma_edge(150.0, b), OutOfBarrier);
  EXPECT_THROW(sigma_edge(std::nan(""), b), OutOfBarrier);
  EXPECT_THROW(zeta_edge(100.0, b, 1.0), OutOfBarrier);
  EXPECT_THROW(zeta_dot_edge(-100.0, b, 1.0, 0.0, 0.0), OutOfBarrier);
}

TEST(SigmaEdge, StrictlyIncreasingOnRandomBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> bound(0.1, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    const XiBounds b{bound(rng), bound(rng)};
    double prev = -INFINITY;
    const int samples = 10000;
    for (int i = 1; i < samples; ++i) {
      const double xi = -b.lower + (b.lower + b.upper) * i / samples;
      const double s = sigma_edge(xi, b);
      ASSERT_GT(s, prev) << "xi=" << xi;
      prev = s;
    }
  }
}

TEST(ZetaEdge, UnitAtOriginAndScalesWithBeta) {
  EXPECT_DOUBLE_EQ(zeta_edge(0.0, {1.0, 1.0}, 1.0), 1.0);
  const XiBounds b{3.0, 7.0};
  EXPECT_NEAR(zeta_edge(1.2, b, 2.0), 0.5 * zeta_edge(1.2, b, 1.0), 1e-15);
  EXPECT_GT(zeta_edge(-2.9, b, 0.2), 0.0);
}

// zeta * beta is d sigma / d xi.
TEST(ZetaEdge, ChainRuleAgainstFiniteDifference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const XiBounds b{0.5 + 20 * unit(rng), 0.5 + 20 * unit(rng)};
    const double xi = -0.95 * b.lower + 0.95 * (b.lower + b.upper) * unit(rng);
    const double beta_t = 0.1 + unit(rng);
    const double h = 1e-5 * (b.lower + b.upper);
    const double fd = five_point([&](double x) { return sigma_edge(x, b); }, xi, h);
    const double analytic = zeta_edge(xi, b, beta_t) * beta_t;
    EXPECT_NEAR(analytic, fd, 1e-6 * std::abs(fd)) << "xi=" << xi;
  }
}

TEST(ZetaBar, IsSecondDerivative) {
  const XiBounds b{4.0, 9.0};
  for (double xi = -3.5; xi < 8.5; xi += 0.7) {
    const double fd = five_point([&](double x) { return detail::sigma_slope(x, b); }, xi, 1e-4);
    EXPECT_NEAR(zeta_bar_edge(xi, b), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
  // symmetric bounds at the origin: (-2u^5 + 2u^5) / u^6 = 0
  EXPECT_EQ(zeta_bar_edge(0.0, {2.0, 2.0}), 0.0);
}

TEST(ZetaDot, StaticWorldIsZero) {
  EXPECT_EQ(zeta_dot_edge(0.7, {2.0, 3.0}, 0.4, 0.0, 0.0), 0.0);
}

TEST(ZetaDot, SymmetricOriginReducesToBetaTerm) {
  const XiBounds b{2.0, 2.0};
  const double beta_t = 0.6, beta_dot = -0.05;
  const double zeta = zeta_edge(0.0, b, beta_t);
  EXPECT_NEAR(zeta_dot_edge(0.0, b, beta_t, beta_dot, 0.3), -zeta * beta_dot / beta_t, 1e-15);
}

// Drive (eta, beta) along a smooth path and difference zeta and sigma.
TEST(ZetaDot, MatchesFiniteDifferenceAlongPath) {
  const PerformanceFunction p{1.0, 0.15, 0.3};
  const XiBounds b{20.0, 35.0};
  auto eta = [](double t) { return 6.0 * std::sin(1.3 * t) + 2.0 * t; };
  auto eta_dot = [](double t) { return 7.8 * std::cos(1.3 * t) + 2.0; };
  auto xi = [&](double t) { return eta(t) / beta(p, t).value; };
  const double h = 1e-5;
  for (double t = 0.1; t < 4.0; t += 0.3) {
    const BetaValue bt = beta(p, t);
    const double zd = zeta_dot_edge(xi(t), b, bt.value, bt.rate, eta_dot(t));
    const double zd_fd = (zeta_edge(xi(t + h), b, beta(p, t + h).value) -
                          zeta_edge(xi(t - h), b, beta(p, t - h).value)) /
                         (2 * h);
    EXPECT_NEAR(zd, zd_fd, 1e-4 * std::max(1.0, std::abs(zd))) << t;

    const double sd = sigma_dot_edge(zeta_edge(xi(t), b, bt.value), eta_dot(t), bt.rate, xi(t));
    const double sd_fd = (sigma_edge(xi(t + h), b) - sigma_edge(xi(t - h), b)) / (2 * h);
    EXPECT_NEAR(sd, sd_fd, 1e-4 * std::max(1.0, std::abs(sd))) << t;
  }
}

TEST(SigmaDot, ZeroCases) {
  EXPECT_EQ(sigma_dot_edge(3.0, -0.2 * 0.5, -0.2, 0.5), 0.0);
  EXPECT_EQ(sigma_dot_edge(1.0, 0.0, -0.1, 0.0), 0.0);
}

TEST(SigmaTheta, Values) {
  const HeadingTransform at_zero = sigma_theta(0.0, kPi / 4);
  EXPECT_EQ(at_zero.value, 0.0);
  EXPECT_DOUBLE_EQ(at_zero.slope, 1.0);
  EXPECT_NEAR(sigma_theta(kPi / 8, kPi / 4).value, kPi / 6, 1e-15);
}

TEST(SigmaTheta, OddIncreasingAndSlopeMatchesFd) {
  const double bar = deg_to_rad(50.0);
  double prev = -INFINITY;
  for (int i = 1; i < 10000; ++i) {
    const double e = -bar + 2 * bar * i / 10000.0;
    const HeadingTransform s = sigma_theta(e, bar);
    EXPECT_EQ(sigma_theta(-e, bar).value, -s.value);
    ASSERT_GT(s.value, prev);
    prev = s.value;
    if (i % 250 == 0) {
      const double fd = five_point([&](double x) { return sigma_theta(x, bar).value; }, e, 1e-5);
      EXPECT_NEAR(s.slope, fd, 1e-6 * std::abs(fd));
    }
  }
}

TEST(SigmaTheta, RejectsBoundaryAndBadBound) {
  EXPECT_THROW(sigma_theta(kPi / 4, kPi / 4), OutOfBarrier);
  EXPECT_THROW(sigma_theta(-1.0, 0.5), OutOfBarrier);
  EXPECT_THROW(sigma_theta(0.0, kPi / 2), InvalidParameter);
  EXPECT_THROW(sigma_theta(0.0, 0.0), InvalidParameter);
  try {
    sigma_theta(0.6, 0.5);
  } catch (const OutOfBarrier& ex) {
    EXPECT_EQ(ex.kind(), OutOfBarrier::Kind::kHeading);
  }
}

}  // namespace
}  // namespace enclose
