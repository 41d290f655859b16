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

// Closed-form diagnostics and ensemble percentiles.

#include <algorithm>
#include <cmath>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/dynamics.hpp"
#include "shuttle/landscape.hpp"
#include "shuttle/noise.hpp"

namespace shuttle {

/// Spin relaxation near the spin-valley hotspot.
struct HotspotParams {
  double Gamma_v = 1e-5;  // 1/ns
  double Delta_so = 6.0;  // ueV
  double E_S = 0.0;       // ueV

  void validate() const {
    if (!(Gamma_v > 0.0 && Delta_so > 0.0 && E_S > 0.0))
      throw ConfigError("hotspot parameters must be positive");
  }

  /// Spin splitting taken from the Zeeman energy.
  static HotspotParams from_physical(const PhysicalParams& p, double gamma_v = 1e-5,
                                     double delta_so = 6.0) {
    return {gamma_v, delta_so, 1000.0 * zeeman_energy(p)};
  }
};

/// Gamma_s(delta) = (1 - |delta| / sqrt(delta^2 + Delta_so^2)) Gamma_v / 2.
inline double hotspot_rate(double delta, const HotspotParams& hp) {
  hp.validate();
  const double a = std::abs(delta);
  return (1.0 - a / std::hypot(a, hp.Delta_so)) * 0.5 * hp.Gamma_v;
}

/// 1 - F for hotspot relaxation accumulated along the constant-speed run over
/// the whole landscape, with time step dt (ns).
inline double hotspot_infidelity(const ValleyLandscape& land, double v, const HotspotParams& hp,
                                 double dt) {
  hp.validate();
  const double T = land.device_length() / v;
  const TimeGrid grid(T, dt);
  double integral = 0.0;  // sum Gamma dt
  for (std::size_t j = 0; j < grid.steps; ++j) {
    const double x = std::min(v * grid.midpoint(j), land.device_length());
    const double ev = 1000.0 * land.valley_splitting(x);
    integral += hotspot_rate(ev - hp.E_S, hp) * grid.length(j);
  }
  // 1 - (1 + e^{-y})^2 / 4 = -(e^{-y} - 1) - (e^{-y} - 1)^2 / 4, without cancellation.
  const double em = std::expm1(-0.5 * integral);
  return -em - 0.25 * em * em;
}

/// Dot size sqrt(hbar^2 / (2 m* E0)) in nm for an orbital energy in meV.
inline double qd_sigma_from_orbital(double E0, double m_star_rel = 0.19) {
  if (!(E0 > 0.0)) throw Error("qd_sigma_from_orbital: E0 must be positive");
  if (!(m_star_rel > 0.0)) throw Error("qd_sigma_from_orbital: effective mass must be positive");
  return std::sqrt(constants::hbar2_over_2me / (m_star_rel * E0));
}

/// Shared fraction of the alloy environment after a displacement d.
inline double envelope_overlap(double d, double sigma) {
  if (!(sigma > 0.0) || !(d >= 0.0)) throw Error("envelope_overlap: need sigma > 0 and d >= 0");
  return 1.0 - std::erf(d / (2.0 * std::sqrt(2.0) * sigma));
}

/// Spin purity of a pure valley-spin state with ground weight alpha_sq after t.
inline double entangled_spin_purity(double alpha_sq, double t, double kappa_z) {
  if (!(alpha_sq >= 0.0 && alpha_sq <= 1.0))
    throw Error("entangled_spin_purity: alpha_sq must lie in [0, 1]");
  const double th = 2.0 * kappa_z * t / constants::hbar;
  const double imb = 2.0 * alpha_sq - 1.0;
  const double c = std::cos(th), s = std::sin(th);
  return 0.5 * (1.0 + c * c + imb * imb * s * s);
}

/// Linear-interpolation percentile (q in [0, 1]); NaNs are skipped.
inline double percentile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) throw Error("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Percentiles over seeds at each sweep coordinate.
struct EnsembleStats {
  std::vector<double> quantiles;
  std::vector<std::vector<double>> values;  // [coordinate][quantile]
  std::size_t seeds = 0;

  std::size_t size() const { return values.size(); }
  double at(std::size_t coord, std::size_t q) const { return values.at(coord).at(q); }
};

/// per_seed[s][c] is the value of seed s at coordinate c.
inline EnsembleStats ensemble_percentiles(const std::vector<std::vector<double>>& per_seed,
                                          std::vector<double> quantiles = {0.25, 0.5, 0.75}) {
  if (per_seed.empty()) throw Error("ensemble_percentiles: no seeds");
  const std::size_t n = per_seed.front().size();
  for (const auto& s : per_seed)
    if (s.size() != n) throw Error("ensemble_percentiles: seeds have different lengths");
  EnsembleStats st;
  st.quantiles = std::move(quantiles);
  st.seeds = per_seed.size();
  st.values.resize(n);
  std::vector<double> column(per_seed.size());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t s = 0; s < per_seed.size(); ++s) column[s] = per_seed[s][c];
    for (double q : st.quantiles) st.values[c].push_back(percentile(column, q));
  }
  return st;
}

/// Percentiles of one value per seed.
inline std::vector<double> scalar_percentiles(const std::vector<double>& values,
                                              const std::vector<double>& quantiles = {0.25, 0.5, 0.75}) {
  std::vector<double> out;
  for (double q : quantiles) out.push_back(percentile(values, q));
  return out;
}

}  // namespace shuttle
