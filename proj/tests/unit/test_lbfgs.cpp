/* Copyright 2026 The Shuttle Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "shuttle/lbfgs.hpp"

namespace sh = shuttle;

namespace {

double rosenbrock(const std::vector<double>& x, std::vector<double>& g) {
  const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  g = {-2.0 * a - 400.0 * x[0] * b, 200.0 * b};
  return a * a + 100.0 * b * b;
}

sh::LbfgsOptions no_cost_target() {
  sh::LbfgsOptions o;
  o.cost_target = -std::numeric_limits<double>::infinity();
  o.relative_reduction = 0.0;
  return o;
}

}  // namespace

TEST(Lbfgs, Rosenbrock) {
  const auto r = sh::lbfgs_minimize(rosenbrock, {-1.2, 1.0}, no_cost_target());
  EXPECT_EQ(r.termination, sh::Termination::GradientTolerance) << sh::to_string(r.termination);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_LT(r.f, 1e-12);
}

TEST(Lbfgs, IllConditionedQuadratic) {
  const std::size_t n = 20;
  auto f = [&](const std::vector<double>& x, std::vector<double>& g) {
    double v = 0.0;
    g.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::pow(10.0, 3.0 * static_cast<double>(i) / (n - 1));
      v += 0.5 * w * (x[i] - 1.0) * (x[i] - 1.0);
      g[i] = w * (x[i] - 1.0);
    }
    return v;
  };
  const auto r = sh::lbfgs_minimize(f, std::vector<double>(n, 0.0), no_cost_target());
  for (double xi : r.x) EXPECT_NEAR(xi, 1.0, 1e-8);
}

TEST(Lbfgs, HistoryIsMonotone) {
  const auto r = sh::lbfgs_minimize(rosenbrock, {-1.2, 1.0}, no_cost_target());
  ASSERT_GE(r.history.size(), 2u);
  EXPECT_EQ(r.history.front().iteration, 0);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LE(r.history[i].cost, r.history[i - 1].cost);
    EXPECT_GE(r.history[i].evaluations, r.history[i - 1].evaluations);
  }
  EXPECT_EQ(r.history.back().cost, r.f);
}

TEST(Lbfgs, CostTargetStopsEarly) {
  sh::LbfgsOptions o;
  o.cost_target = 1e-2;
  const auto r = sh::lbfgs_minimize(rosenbrock, {-1.2, 1.0}, o);
  EXPECT_EQ(r.termination, sh::Termination::CostTarget);
  EXPECT_LT(r.f, 1e-2);
}

TEST(Lbfgs, IterationLimit) {
  auto o = no_cost_target();
  o.max_iterations = 3;
  const auto r = sh::lbfgs_minimize(rosenbrock, {-1.2, 1.0}, o);
  EXPECT_EQ(r.termination, sh::Termination::MaxIterations);
  EXPECT_EQ(r.history.size(), 4u);
}

TEST(Lbfgs, InfeasibleRegionIsAvoided) {
  // Minimum at x = 3 but points beyond 2 are infeasible.
  auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    if (x[0] > 2.0) return std::numeric_limits<double>::infinity();
    g = {2.0 * (x[0] - 3.0)};
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  auto o = no_cost_target();
  o.max_iterations = 50;
  const auto r = sh::lbfgs_minimize(f, {0.0}, o);
  EXPECT_LE(r.x[0], 2.0);
  EXPECT_LT(r.f, 9.0);
  EXPECT_TRUE(std::isfinite(r.f));
}

TEST(Lbfgs, NonFiniteStart) {
  auto f = [](const std::vector<double>&, std::vector<double>&) {
    return std::numeric_limits<double>::infinity();
  };
  const auto r = sh::lbfgs_minimize(f, {1.0}, sh::LbfgsOptions{});
  EXPECT_EQ(r.termination, sh::Termination::NonFiniteStart);
}

TEST(Lbfgs, ZeroGradientStartStopsImmediately) {
  auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    g = {0.0 * x[0]};
    return 1.0;
  };
  const auto r = sh::lbfgs_minimize(f, {0.0}, sh::LbfgsOptions{});
  EXPECT_EQ(r.termination, sh::Termination::GradientTolerance);
  EXPECT_EQ(r.evaluations, 1);
}
