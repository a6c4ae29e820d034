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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "enclose/formation.hpp"
#include "enclose/presets.hpp"

namespace enclose {
namespace {

using Kind = FeasibilityViolation::Kind;

DistanceRanges uniform_ranges(int n_agents, double lo, double hi) {
  const int m = 2 * n_agents - 1;
  return {std::vector<double>(m, lo), std::vector<double>(m, hi)};
}

// Three mutually 5 m apart (radius 5, 60 deg): every d* = 5.
DesiredFramework triangle() { return henneberg_build(5.0, std::vector<double>{60.0}); }

TEST(Feasibility, ReferencePatternIsFeasible) {
  const Scenario s = paper_sec6_scenario();
  EXPECT_TRUE(check_feasibility(s.formation, s.ranges).ok());
}

TEST(Feasibility, RadiusBeyondInteractionRange) {
  const FormationSpec spec{20.0, {65.0, 75.0, 75.0, 80.0}};
  DistanceRanges r = uniform_ranges(5, 0.8, 15.0);
  for (int k = 0; k < 4; ++k) r.upper[k] = 40.0;
  const FeasibilityReport rep = check_feasibility(spec, r);
  ASSERT_EQ(rep.violations.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(rep.violations[i].kind, Kind::kUpperDistance);
    EXPECT_EQ(rep.violations[i].index, 4 + i);
    EXPECT_DOUBLE_EQ(rep.violations[i].margin, -5.0);
  }
}

TEST(Feasibility, WideAngleChainViolation) {
  const FormationSpec spec{5.0, {179.9}};
  DistanceRanges r = uniform_ranges(2, 0.5, 15.0);
  r.upper[0] = 9.0;
  const FeasibilityReport rep = check_feasibility(spec, r);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].kind, Kind::kUpperDistance);
  EXPECT_EQ(rep.violations[0].index, 0);
  EXPECT_NEAR(rep.violations[0].margin, 9.0 - 2.0 * 5.0 * std::sin(deg_to_rad(179.9) / 2), 1e-12);
  EXPECT_LT(rep.violations[0].margin, -0.99);
}

TEST(Feasibility, ReportsAnglesLowerBoundsAndShape) {
  const FormationSpec bad_closing{5.0, {65.0, 75.0, 75.0, 170.0}};
  const FeasibilityReport a = check_feasibility(bad_closing, uniform_ranges(5, 0.5, 15.0));
  ASSERT_FALSE(a.ok());
  EXPECT_EQ(a.violations[0].kind, Kind::kAngle);
  EXPECT_EQ(a.violations[0].index, 4);
  EXPECT_DOUBLE_EQ(a.violations[0].margin, -25.0);

  const FormationSpec spec{5.0, {60.0}};
  const FeasibilityReport b = check_feasibility(spec, uniform_ranges(2, 6.0, 15.0));
  EXPECT_EQ(b.violations.size(), 3u);
  for (const auto& v : b.violations) EXPECT_EQ(v.kind, Kind::kLowerDistance);

  const FeasibilityReport c = check_feasibility(spec, uniform_ranges(3, 0.5, 15.0));
  ASSERT_EQ(c.violations.size(), 1u);
  EXPECT_EQ(c.violations[0].kind, Kind::kShape);

  const FeasibilityReport d = check_feasibility({-1.0, {60.0}}, uniform_ranges(2, 0.5, 15.0));
  EXPECT_FALSE(d.ok());
  EXPECT_EQ(d.violations[0].kind, Kind::kRadius);
}

TEST(BuildEnvelope, MinFormulasAndSquaredBounds) {
  const DesiredFramework fw = triangle();
  const std::vector<double> e0(3, 1.0), beta0(3, 1.0);
  const ConstraintEnvelope env = build_envelope(fw, uniform_ranges(2, 0.8, 15.0), e0, 3.0, beta0);
  ASSERT_EQ(env.size(), 3u);
  for (const EdgeEnvelope& e : env.edges) {
    EXPECT_NEAR(e.d_star, 5.0, 1e-12);
    EXPECT_NEAR(e.e_lower_star, 4.0, 1e-12);
    EXPECT_NEAR(e.e_upper_star, 4.0, 1e-12);
    EXPECT_NEAR(e.eta_upper, 56.0, 1e-11);
    EXPECT_NEAR(e.eta_lower, 24.0, 1e-11);
  }
}

TEST(BuildEnvelope, XiBoundsDivideByBeta0) {
  const DesiredFramework fw = triangle();
  const std::vector<double> e0{0.5, -0.3, 0.0}, beta0{2.0, 4.0, 0.5};
  const ConstraintEnvelope env = build_envelope(fw, uniform_ranges(2, 0.8, 15.0), e0, 3.0, beta0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(env[k].xi_upper, env[k].eta_upper / beta0[k]);
    EXPECT_DOUBLE_EQ(env[k].xi_lower, env[k].eta_lower / beta0[k]);
  }
  // e(0) = 0: range-derived or mu, whichever is smaller
  EXPECT_NEAR(env[2].e_lower_star, 3.0, 1e-12);
  EXPECT_NEAR(env[2].e_upper_star, 3.0, 1e-12);
}

TEST(BuildEnvelope, InitialConditionViolationNamesEdge) {
  const DesiredFramework fw = triangle();
  const std::vector<double> beta0(3, 1.0);
  // Edge 1 starts below its collision threshold: e = -4.5, d_lower gives 4.2.
  const std::vector<double> e0{0.0, -4.5, 0.0};
  try {
    build_envelope(fw, uniform_ranges(2, 0.8, 15.0), e0, 3.0, beta0);
    FAIL() << "expected InitialConditionViolation";
  } catch (const InitialConditionViolation& ex) {
    EXPECT_EQ(ex.edge(), 1);
  }
  const std::vector<double> far{0.0, 0.0, 11.0};
  EXPECT_THROW(build_envelope(fw, uniform_ranges(2, 0.8, 15.0), far, 3.0, beta0),
               InitialConditionViolation);
}

TEST(BuildEnvelope, DegenerateWhenLowerBoundReachesDesiredDistance) {
  const DesiredFramework fw = triangle();
  const std::vector<double> e0(3, 0.0), beta0(3, 1.0);
  DistanceRanges r = uniform_ranges(2, 0.8, 15.0);
  // d_lower = 0 would be infeasible; use a tiny threshold and a huge mu.
  r.lower.assign(3, 1e-300);
  EXPECT_THROW(build_envelope(fw, r, e0, 100.0, beta0), DegenerateBound);
}

TEST(BuildEnvelope, RejectsInfeasibleAndMalformedInputs) {
  const DesiredFramework fw = triangle();
  const std::vector<double> e0(3, 0.0), beta0(3, 1.0);
  EXPECT_THROW(build_envelope(fw, uniform_ranges(2, 0.8, 4.0), e0, 3.0, beta0),
               InfeasibleFormation);
  EXPECT_THROW(build_envelope(fw, uniform_ranges(2, 0.8, 15.0), std::vector<double>(2, 0.0), 3.0,
                              beta0),
               DimensionMismatch);
  EXPECT_THROW(build_envelope(fw, uniform_ranges(2, 0.8, 15.0), e0, 0.0, beta0), InvalidParameter);
}

TEST(BuildEnvelope, MonotoneInMu) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> err(-0.5, 0.5);
  const Scenario s = paper_sec6_scenario();
  const DesiredFramework fw = henneberg_build(s.formation.radius, s.formation.separation_deg);
  std::vector<double> e0(9), beta0(9, 1.0);
  for (double& e : e0) e = err(rng);
  ConstraintEnvelope prev = build_envelope(fw, s.ranges, e0, 0.6, beta0);
  for (double mu = 0.8; mu < 6.0; mu += 0.2) {
    const ConstraintEnvelope env = build_envelope(fw, s.ranges, e0, mu, beta0);
    for (int k = 0; k < 9; ++k) {
      EXPECT_GE(env[k].e_lower_star, prev[k].e_lower_star);
      EXPECT_GE(env[k].e_upper_star, prev[k].e_upper_star);
    }
    prev = env;
  }
}

TEST(EdgeErrors, ZeroAtDesiredFramework) {
  const DesiredFramework fw = henneberg_build(5.0, std::vector<double>{65.0, 75.0, 75.0, 80.0});
  const std::vector<double> e0(9, 0.0), beta0(9, 1.0);
  const std::vector<PerformanceFunction> perf(9, PerformanceFunction{});
  const ConstraintEnvelope env =
      build_envelope(fw, paper_sec6_scenario().ranges, e0, 3.0, beta0);
  const EdgeErrors err = edge_errors(fw.coordinates, fw.graph, env, perf, 2.0);
  for (int k = 0; k < 9; ++k) {
    EXPECT_NEAR(err.error[k], 0.0, 1e-12);
    EXPECT_NEAR(err.eta[k], 0.0, 1e-12);
    EXPECT_NEAR(err.xi[k], 0.0, 1e-11);
  }
}

TEST(EdgeErrors, RadialExample) {
  const DesiredFramework fw = triangle();
  const std::vector<double> e0(3, 0.0), beta0(3, 1.0);
  const std::vector<PerformanceFunction> perf(3, PerformanceFunction{1.0, 0.5, 1.0});
  const ConstraintEnvelope env = build_envelope(fw, uniform_ranges(2, 0.8, 15.0), e0, 3.0, beta0);
  std::vector<Vec2> c = fw.coordinates;
  c[1] = Vec2(6.0, 0.0);
  const EdgeErrors err = edge_errors(c, fw.graph, env, perf, 0.0);
  const int k = fw.graph.radial_edge(1);
  EXPECT_NEAR(err.distance[k], 6.0, 1e-15);
  EXPECT_NEAR(err.error[k], 1.0, 1e-14);
  EXPECT_NEAR(err.eta[k], 11.0, 1e-13);
  EXPECT_NEAR(err.xi[k], 11.0, 1e-13);
  const EdgeErrors later = edge_errors(c, fw.graph, env, perf, std::log(2.0));
  EXPECT_NEAR(later.xi[k], 11.0 / 0.75, 1e-12);
}

TEST(EdgeErrors, AlgebraicIdentities) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const Scenario s = paper_sec6_scenario();
  const DesiredFramework fw = henneberg_build(s.formation.radius, s.formation.separation_deg);
  const std::vector<double> e0(9, 0.0), beta0(9, 1.0);
  const ConstraintEnvelope env = build_envelope(fw, s.ranges, e0, 3.0, beta0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec2> c = fw.coordinates;
    for (Vec2& p : c) p += Vec2(jitter(rng), jitter(rng));
    const double t = 10.0 * (jitter(rng) + 1.0);
    const EdgeErrors err = edge_errors(c, fw.graph, env, s.perf, t);
    for (int k = 0; k < 9; ++k) {
      const double ds = env[k].d_star;
      EXPECT_NEAR(err.eta[k], err.error[k] * (err.error[k] + 2 * ds), 1e-12 * (1 + ds * ds));
      EXPECT_DOUBLE_EQ(err.xi[k], err.eta[k] / beta(s.perf[k], t).value);
    }
  }
}

TEST(TimeVaryingBounds, RecoverStaticBoundsAtZero) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> err(-0.8, 0.8);
  std::uniform_real_distribution<double> mu(0.5, 4.0);
  std::uniform_real_distribution<double> b0(0.5, 3.0);
  const Scenario s = paper_sec6_scenario();
  const DesiredFramework fw = henneberg_build(s.formation.radius, s.formation.separation_deg);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> e0(9), beta0(9);
    std::vector<PerformanceFunction> perf(9);
    for (int k = 0; k < 9; ++k) {
      e0[k] = err(rng);
      beta0[k] = b0(rng);
      perf[k] = {beta0[k], 0.1 * beta0[k], 0.2};
    }
    const ConstraintEnvelope env = build_envelope(fw, s.ranges, e0, mu(rng), beta0);
    const std::vector<ErrorBand> bands = time_varying_error_bounds(env, perf, 0.0);
    for (int k = 0; k < 9; ++k) {
      EXPECT_NEAR(bands[k].upper, env[k].e_upper_star, 1e-12);
      EXPECT_NEAR(bands[k].lower, env[k].e_lower_star, 1e-12);
    }
  }
}

TEST(TimeVaryingBounds, LimitAndMonotonicity) {
  const Scenario s = paper_sec6_scenario();
  const DesiredFramework fw = henneberg_build(s.formation.radius, s.formation.separation_deg);
  const std::vector<double> e0(9, 0.4), beta0(9, 1.0);
  const ConstraintEnvelope env = build_envelope(fw, s.ranges, e0, 3.0, beta0);

  const std::vector<ErrorBand> limit = time_varying_error_bounds(env, s.perf, 1e4);
  for (int k = 0; k < 9; ++k) {
    const double ds = env[k].d_star;
    EXPECT_NEAR(limit[k].upper, -ds + std::sqrt(ds * ds + 0.15 * env[k].eta_upper), 1e-12);
    EXPECT_NEAR(limit[k].lower, ds - std::sqrt(ds * ds - 0.15 * env[k].eta_lower), 1e-12);
  }

  std::vector<ErrorBand> prev = time_varying_error_bounds(env, s.perf, 0.0);
  for (int i = 1; i <= 1000; ++i) {
    const std::vector<ErrorBand> now = time_varying_error_bounds(env, s.perf, 50.0 * i / 1000);
    for (int k = 0; k < 9; ++k) {
      ASSERT_LE(now[k].upper, prev[k].upper);
      ASSERT_LE(now[k].lower, prev[k].lower);
      ASSERT_GT(now[k].upper, 0.0);
      ASSERT_GT(now[k].lower, 0.0);
    }
    prev = now;
  }
}

TEST(TimeVaryingBounds, DomainAndShapeErrors) {
  const DesiredFramework fw = triangle();
  const std::vector<double> e0(3, 0.0), beta0(3, 1.0);
  ConstraintEnvelope env = build_envelope(fw, uniform_ranges(2, 0.8, 15.0), e0, 3.0, beta0);
  env.edges[0].eta_lower = 30.0;  // beyond d*^2 = 25
  const std::vector<PerformanceFunction> perf(3, PerformanceFunction{});
  EXPECT_THROW(time_varying_error_bounds(env, perf, 0.0), NumericalDomain);
  EXPECT_THROW(time_varying_error_bounds(env, std::vector<PerformanceFunction>(2), 0.0),
               DimensionMismatch);
}

}  // namespace
}  // namespace enclose
