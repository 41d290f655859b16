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

// Dot trajectory x(t) = v t + sum_k u_k sin(2 pi k t / T), T = L / v.
// The sine basis vanishes at both ends so x(0) = 0 and x(T) = L for any u.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "shuttle/constants.hpp"

namespace shuttle {

class ShuttleTrajectory {
 public:
  /// v in m/s (= nm/ns), L in nm, u in nm.
  ShuttleTrajectory(double speed, double length, std::vector<double> u = {})
      : speed_(speed), length_(length), u_(std::move(u)) {
    if (!(speed_ > 0.0)) throw ConfigError("trajectory speed must be positive");
    if (!(length_ > 0.0)) throw ConfigError("trajectory length must be positive");
    for (double c : u_)
      if (!std::isfinite(c)) throw ConfigError("trajectory coefficients must be finite");
    duration_ = length_ / speed_;
  }

  double speed() const { return speed_; }
  double length() const { return length_; }
  double duration() const { return duration_; }
  std::size_t size() const { return u_.size(); }
  std::span<const double> coefficients() const { return u_; }

  /// nu_1 = 1/T = v/L (GHz).
  double fundamental() const { return speed_ / length_; }

  /// nu_k = k v / L for k = 1..M.
  std::vector<double> basis_frequencies(std::size_t m) const {
    if (m < 1) throw ConfigError("basis_frequencies: M must be >= 1");
    std::vector<double> nu(m);
    for (std::size_t k = 0; k < m; ++k) nu[k] = static_cast<double>(k + 1) * fundamental();
    return nu;
  }

  /// sin(2 pi nu_k t) for k = 1..out.size(), via the Chebyshev recurrence.
  void sensitivities(double t, std::span<double> out) const {
    if (out.empty()) return;
    const double theta = 2.0 * constants::pi * t / duration_;
    const double c2 = 2.0 * std::cos(theta);
    double prev = 0.0;
    double cur = std::sin(theta);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = cur;
      const double next = c2 * cur - prev;
      prev = cur;
      cur = next;
    }
  }

  /// dx(t)/du_k = sin(2 pi nu_k t), k starting at 1.
  double position_sensitivity(double t, std::size_t k) const {
    if (k < 1) throw ConfigError("position_sensitivity: k starts at 1");
    return std::sin(2.0 * constants::pi * static_cast<double>(k) * t / duration_);
  }

  /// x(t) without range checks.
  double position_unchecked(double t) const {
    if (t == duration_) return length_;
    double x = speed_ * t;
    if (u_.empty()) return x;
    const double theta = 2.0 * constants::pi * t / duration_;
    const double c2 = 2.0 * std::cos(theta);
    double prev = 0.0, cur = std::sin(theta);
    for (double uk : u_) {
      x += uk * cur;
      const double next = c2 * cur - prev;
      prev = cur;
      cur = next;
    }
    return x;
  }

  /// x(t) for 0 <= t <= T.
  double position(double t) const {
    if (!(t >= 0.0 && t <= duration_))
      throw Error("trajectory time " + std::to_string(t) + " ns outside [0, " +
                  std::to_string(duration_) + "]");
    return position_unchecked(t);
  }

  /// Copy with |u_k| clipped to the bound.
  ShuttleTrajectory clipped(double bound) const {
    std::vector<double> u = u_;
    for (double& c : u) c = std::clamp(c, -bound, bound);
    return {speed_, length_, std::move(u)};
  }

 private:
  double speed_;
  double length_;
  std::vector<double> u_;
  double duration_;
};

}  // namespace shuttle
