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

// Limited-memory BFGS with a strong-Wolfe line search (bracketing and zoom
// with safeguarded cubic interpolation). The objective may return +inf or NaN
// for infeasible points; the line search then shrinks the step.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace shuttle {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 500;
  double gradient_tolerance = 1e-9;  // infinity norm
  double cost_target = 1e-7;         // stop once f drops below
  // Stop when (f_k - f_k+1) / max(|f_k|, |f_k+1|, 1) <= this; 0 disables.
  double relative_reduction = 2.2e-9;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
};

enum class Termination {
  GradientTolerance,
  CostTarget,
  RelativeReduction,
  MaxIterations,
  LineSearchFailure,
  NonFiniteStart,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::CostTarget: return "cost_target";
    case Termination::RelativeReduction: return "relative_reduction";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchFailure: return "line_search_failure";
    case Termination::NonFiniteStart: return "non_finite_start";
  }
  return "unknown";
}

struct LbfgsIterate {
  int iteration;
  double cost;
  double grad_norm;  // infinity norm
  int evaluations;   // cumulative objective calls
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> g;
  std::vector<LbfgsIterate> history;  // iterate 0 is the start
  int evaluations = 0;
  Termination termination = Termination::MaxIterations;
};

/// Objective: returns f(x) and writes the gradient into g.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& g)>;

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Minimizer of the cubic through (a, fa, da), (b, fb, db), kept inside the
/// central part of [a, b]; falls back to bisection.
inline double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double mid = 0.5 * (a + b);
  if (!std::isfinite(fb) || !std::isfinite(db)) return mid;
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) return mid;
  return t;
}

}  // namespace detail

inline LbfgsResult lbfgs_minimize(const Objective& fg, std::vector<double> x0,
                                  const LbfgsOptions& opt = {}) {
  using detail::dot;
  const std::size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  res.g.assign(n, 0.0);
  res.f = fg(res.x, res.g);
  res.evaluations = 1;
  res.history.push_back({0, res.f, detail::inf_norm(res.g), 1});
  if (!std::isfinite(res.f)) {
    res.termination = Termination::NonFiniteStart;
    return res;
  }

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> d(n), xt(n), gt(n);

  for (int iter = 1;; ++iter) {
    if (detail::inf_norm(res.g) < opt.gradient_tolerance) {
      res.termination = Termination::GradientTolerance;
      return res;
    }
    if (res.f < opt.cost_target) {
      res.termination = Termination::CostTarget;
      return res;
    }
    if (iter > opt.max_iterations) {
      res.termination = Termination::MaxIterations;
      return res;
    }

    // Two-loop recursion for d = -H g.
    std::vector<double> q = res.g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[i] * y_hist[i][k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (double& v : q) v *= gamma;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      for (std::size_t k = 0; k < n; ++k) q[k] += (alpha[i] - beta) * s_hist[i][k];
    }
    for (std::size_t k = 0; k < n; ++k) d[k] = -q[k];
    double dphi0 = dot(res.g, d);
    if (!(dphi0 < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t k = 0; k < n; ++k) d[k] = -res.g[k];
      dphi0 = dot(res.g, d);
    }
    const double gnorm2 = std::sqrt(dot(res.g, res.g));
    double step = s_hist.empty() ? std::min(1.0, 1.0 / gnorm2) : 1.0;

    // Strong-Wolfe line search.
    const double f0 = res.f;
    auto eval = [&](double a, double& f, double& dphi) {
      for (std::size_t k = 0; k < n; ++k) xt[k] = res.x[k] + a * d[k];
      f = fg(xt, gt);
      ++res.evaluations;
      dphi = std::isfinite(f) ? dot(gt, d) : std::numeric_limits<double>::quiet_NaN();
    };
    bool found = false;
    double f_acc = 0.0;
    std::vector<double> x_acc, g_acc;
    auto accept = [&](double f) {
      found = true;
      f_acc = f;
      x_acc = xt;
      g_acc = gt;
    };
    auto zoom = [&](double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi,
                    int budget) {
      for (int z = 0; z < budget; ++z) {
        const double a = detail::cubic_step(lo, f_lo, d_lo, hi, f_hi, d_hi);
        double f, dphi;
        eval(a, f, dphi);
        if (!std::isfinite(f) || f > f0 + opt.c1 * a * dphi0 || f >= f_lo) {
          hi = a;
          f_hi = f;
          d_hi = dphi;
        } else {
          if (std::abs(dphi) <= -opt.c2 * dphi0) {
            accept(f);
            return;
          }
          if (dphi * (hi - lo) >= 0.0) {
            hi = lo;
            f_hi = f_lo;
            d_hi = d_lo;
          }
          lo = a;
          f_lo = f;
          d_lo = dphi;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
      }
      // Budget exhausted: take the best sufficient-decrease point if any.
      if (lo > 0.0 && f_lo < f0) {
        double f, dphi;
        eval(lo, f, dphi);
        if (std::isfinite(f) && f < f0) accept(f);
      }
    };

    double prev = 0.0, f_prev = f0, d_prev = dphi0;
    for (int ls = 0; ls < opt.max_line_search && !found; ++ls) {
      double f, dphi;
      eval(step, f, dphi);
      const int budget = opt.max_line_search - ls - 1;
      if (!std::isfinite(f) || f > f0 + opt.c1 * step * dphi0 || (ls > 0 && f >= f_prev)) {
        zoom(prev, f_prev, d_prev, step, f, dphi, budget);
        break;
      }
      if (std::abs(dphi) <= -opt.c2 * dphi0) {
        accept(f);
        break;
      }
      if (dphi >= 0.0) {
        zoom(step, f, dphi, prev, f_prev, d_prev, budget);
        break;
      }
      prev = step;
      f_prev = f;
      d_prev = dphi;
      step *= 2.0;
    }
    if (!found) {
      res.termination = Termination::LineSearchFailure;
      return res;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = x_acc[k] - res.x[k];
      y[k] = g_acc[k] - res.g[k];
    }
    const double f_old = res.f;
    res.x = std::move(x_acc);
    res.g = std::move(g_acc);
    res.f = f_acc;
    res.history.push_back({iter, res.f, detail::inf_norm(res.g), res.evaluations});

    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    if (opt.relative_reduction > 0.0 &&
        (f_old - res.f) / std::max({std::abs(f_old), std::abs(res.f), 1.0}) <= opt.relative_reduction) {
      if (detail::inf_norm(res.g) < opt.gradient_tolerance) res.termination = Termination::GradientTolerance;
      else res.termination = Termination::RelativeReduction;
      return res;
    }
  }
}

}  // namespace shuttle
