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
#pragma once

// Trajectory optimization: minimize 1 - F over the sine coefficients.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shuttle/dynamics.hpp"
#include "shuttle/lbfgs.hpp"

namespace shuttle {

enum class GradientMode { Adjoint, FiniteDifference };

struct OptimizationProblem {
  const ValleyLandscape* landscape = nullptr;
  PhysicalParams params;  // dephasing is off by default, as in PhysicalParams
  double speed = 5.0;     // m/s
  double length = 10000;  // nm
  std::size_t M = 9;
  StepPolicy policy;
  GradientMode mode = GradientMode::Adjoint;
  double fd_step = 1e-3;  // nm
  LbfgsOptions stopping;
  std::vector<double> initial_u;  // empty: zeros
  // Optional |u_k| limit; points beyond it are treated as infeasible.
  std::optional<double> coefficient_bound;

  void validate() const {
    if (!landscape) throw ConfigError("optimization problem has no landscape");
    if (M < 1) throw ConfigError("number of coefficients M must be >= 1");
    if (!initial_u.empty() && initial_u.size() != M)
      throw ConfigError("initial_u length does not match M");
    for (double u : initial_u)
      if (!std::isfinite(u)) throw ConfigError("initial_u must be finite");
    if (!(fd_step > 0.0)) throw ConfigError("finite-difference step must be positive");
    if (coefficient_bound && !(*coefficient_bound > 0.0))
      throw ConfigError("coefficient bound must be positive");
    params.validate();
  }

  ShuttleTrajectory trajectory(const std::vector<double>& u) const {
    return ShuttleTrajectory(speed, length, u);
  }
};

struct OptimizationResult {
  std::vector<double> u_star;
  double cost = 0.0;          // at u_star
  double initial_cost = 0.0;  // at the start point
  std::vector<double> cost_history;
  std::vector<double> grad_norm_history;
  std::vector<int> evaluation_history;  // cumulative cost evaluations per iterate
  int n_cost_evals = 0;
  int n_grad_evals = 0;
  double wall_seconds = 0.0;
  Termination termination = Termination::MaxIterations;
};

/// 1 - F at t = T for the trajectory with coefficients u.
inline double cost(const std::vector<double>& u, const OptimizationProblem& pr) {
  pr.validate();
  if (u.size() != pr.M) throw Error("coefficient vector length does not match M");
  return CoherencePropagator(*pr.landscape, pr.params, pr.policy).infidelity(pr.trajectory(u));
}

/// Central finite-difference gradient with step pr.fd_step.
inline std::vector<double> finite_difference_gradient(const std::vector<double>& u,
                                                      const OptimizationProblem& pr) {
  const CoherencePropagator prop(*pr.landscape, pr.params, pr.policy);
  std::vector<double> g(u.size());
  std::vector<double> w = u;
  for (std::size_t k = 0; k < u.size(); ++k) {
    w[k] = u[k] + pr.fd_step;
    const double fp = prop.infidelity(pr.trajectory(w));
    w[k] = u[k] - pr.fd_step;
    const double fm = prop.infidelity(pr.trajectory(w));
    w[k] = u[k];
    g[k] = (fp - fm) / (2.0 * pr.fd_step);
  }
  return g;
}

/// dI/du_k in the problem's gradient mode.
inline std::vector<double> gradient(const std::vector<double>& u, const OptimizationProblem& pr) {
  pr.validate();
  if (u.size() != pr.M) throw Error("coefficient vector length does not match M");
  if (pr.mode == GradientMode::FiniteDifference) return finite_difference_gradient(u, pr);
  std::vector<double> g(u.size());
  CoherencePropagator(*pr.landscape, pr.params, pr.policy).infidelity(pr.trajectory(u), g);
  return g;
}

inline OptimizationResult optimize(const OptimizationProblem& pr) {
  pr.validate();
  const auto start = std::chrono::steady_clock::now();
  const CoherencePropagator prop(*pr.landscape, pr.params, pr.policy);
  OptimizationResult out;

  const auto feasible = [&](const std::vector<double>& u) {
    if (pr.coefficient_bound)
      for (double c : u)
        if (std::abs(c) > *pr.coefficient_bound) return false;
    return true;
  };
  const Objective objective = [&](const std::vector<double>& u, std::vector<double>& g) {
    if (!feasible(u)) return std::numeric_limits<double>::infinity();
    const ShuttleTrajectory traj = pr.trajectory(u);
    TimeGrid grid(traj.duration(), pr.policy.dt_ps(pr.speed) * 1e-3);
    try {
      check_trajectory_domain(traj, *pr.landscape, grid);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();  // leaves the device
    }
    ++out.n_cost_evals;
    ++out.n_grad_evals;
    if (pr.mode == GradientMode::Adjoint) return prop.infidelity(traj, g);
    g = finite_difference_gradient(u, pr);
    out.n_cost_evals += static_cast<int>(2 * u.size());
    return prop.infidelity(traj);
  };

  std::vector<double> u0 = pr.initial_u.empty() ? std::vector<double>(pr.M, 0.0) : pr.initial_u;
  const LbfgsResult r = lbfgs_minimize(objective, std::move(u0), pr.stopping);
  if (r.termination == Termination::NonFiniteStart)
    throw Error("optimization start point is infeasible (trajectory leaves the device)");

  out.u_star = r.x;
  out.cost = r.f;
  out.initial_cost = r.history.front().cost;
  for (const auto& it : r.history) {
    out.cost_history.push_back(it.cost);
    out.grad_norm_history.push_back(it.grad_norm);
    out.evaluation_history.push_back(it.evaluations);
  }
  out.termination = r.termination;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shuttle
