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

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "shuttle/constants.hpp"

namespace shuttle {

/// Natural cubic spline through (x_i, y_i) with strictly increasing knots.
///
/// The piecewise polynomial on [x_i, x_{i+1}] is stored in the local form
///   y_i + b_i s + c_i s^2 + d_i s^3,   s = x - x_i,
/// so value and first derivative are a handful of multiplies. Uniformly
/// spaced knots are detected and located in O(1).
class CubicSpline {
 public:
  struct Point {
    double value;
    double derivative;
  };

  CubicSpline() = default;

  CubicSpline(std::span<const double> x, std::span<const double> y)
      : x_(x.begin(), x.end()), a_(y.begin(), y.end()) {
    const std::size_t n = x_.size();
    if (n < 2 || y.size() != n) throw Error("spline needs at least two matching knots");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw Error("spline knots must be strictly increasing");

    const std::size_t m = n - 1;  // number of intervals
    std::vector<double> h(m);
    for (std::size_t i = 0; i < m; ++i) h[i] = x_[i + 1] - x_[i];

    // Second-derivative moments M_i with M_0 = M_{n-1} = 0 (Thomas algorithm).
    std::vector<double> moment(n, 0.0);
    if (n > 2) {
      const std::size_t k = n - 2;
      std::vector<double> diag(k), upper(k), rhs(k);
      for (std::size_t i = 0; i < k; ++i) {
        diag[i] = 2.0 * (h[i] + h[i + 1]);
        upper[i] = h[i + 1];
        rhs[i] = 6.0 * ((a_[i + 2] - a_[i + 1]) / h[i + 1] - (a_[i + 1] - a_[i]) / h[i]);
      }
      for (std::size_t i = 1; i < k; ++i) {
        const double w = h[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      moment[k] = rhs[k - 1] / diag[k - 1];
      for (std::size_t i = k - 1; i-- > 0;)
        moment[i + 1] = (rhs[i] - upper[i] * moment[i + 2]) / diag[i];
    }

    b_.resize(m);
    c_.resize(m);
    d_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      b_[i] = (a_[i + 1] - a_[i]) / h[i] - h[i] * (2.0 * moment[i] + moment[i + 1]) / 6.0;
      c_[i] = 0.5 * moment[i];
      d_[i] = (moment[i + 1] - moment[i]) / (6.0 * h[i]);
    }

    const double spacing = (x_.back() - x_.front()) / static_cast<double>(m);
    uniform_ = std::all_of(h.begin(), h.end(), [&](double hi) {
      return std::abs(hi - spacing) <= 1e-12 * spacing;
    });
    inv_spacing_ = 1.0 / spacing;
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return a_; }

  /// Interval index containing x; callers guarantee x is inside the knots.
  std::size_t locate(double x) const {
    const std::size_t last = b_.size() - 1;
    if (uniform_) {
      auto i = static_cast<std::ptrdiff_t>((x - x_.front()) * inv_spacing_);
      i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(last));
      auto idx = static_cast<std::size_t>(i);
      // Guard against rounding placing x just across a knot.
      if (idx > 0 && x < x_[idx]) --idx;
      else if (idx < last && x >= x_[idx + 1]) ++idx;
      return idx;
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x_.begin() - 1, 0));
    return std::min(i, last);
  }

  double value(double x) const {
    const std::size_t i = locate(x);
    const double s = x - x_[i];
    return a_[i] + s * (b_[i] + s * (c_[i] + s * d_[i]));
  }

  Point evaluate(double x) const {
    const std::size_t i = locate(x);
    const double s = x - x_[i];
    return {a_[i] + s * (b_[i] + s * (c_[i] + s * d_[i])),
            b_[i] + s * (2.0 * c_[i] + 3.0 * s * d_[i])};
  }

  double second_derivative(double x) const {
    const std::size_t i = locate(x);
    return 2.0 * c_[i] + 6.0 * d_[i] * (x - x_[i]);
  }

  /// One-sided second derivatives at interior knot i (left limit, right limit).
  std::pair<double, double> second_derivative_jump(std::size_t i) const {
    const double h = x_[i] - x_[i - 1];
    return {2.0 * c_[i - 1] + 6.0 * d_[i - 1] * h, 2.0 * c_[i]};
  }

 private:
  std::vector<double> x_, a_, b_, c_, d_;
  bool uniform_ = false;
  double inv_spacing_ = 0.0;
};

}  // namespace shuttle
