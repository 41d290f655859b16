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

// Physical constants and the parameter records shared by every module.
//
// Internal unit system: energies in meV, times in ns, lengths in nm, fields
// in T. A speed in nm/ns equals a speed in m/s.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace shuttle {

/// Base exception for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid or inconsistent user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace constants {

inline constexpr double pi = std::numbers::pi;
/// Reduced Planck constant (meV ns).
inline constexpr double hbar = 6.582119569e-4;
/// Planck constant (meV ns).
inline constexpr double h = 2.0 * pi * hbar;
/// Bohr magneton (meV / T).
inline constexpr double mu_B = 5.7883818060e-2;
/// Si cubic cell length (nm).
inline constexpr double a0 = 0.543;
inline constexpr double k0_factor = 0.82;
/// Valley wavenumber (1/nm).
inline constexpr double k0 = k0_factor * 2.0 * pi / a0;
/// hbar^2 / (2 m_e) in meV nm^2, used by every effective-mass formula.
inline constexpr double hbar2_over_2me = 38.09982;

}  // namespace constants

/// Spin, valley and noise parameters of the four-level model.
struct PhysicalParams {
  double B_z = 0.02;          // T
  double g_bar = 2.0;
  double delta_g_rel = 1e-3;  // dg/g
  // Explicit spin-valley coupling (meV). When unset the value implied by the
  // g-factor variation is used.
  std::optional<double> kappa_z = 1e-6;
  double T1v = 1e6;           // ns
  double T2_star = 2e4;       // ns
  double l_c = 20.0;          // nm
  bool dephasing_enabled = false;
  // Bypasses the motional-narrowing estimate of the spin dephasing time.
  std::optional<double> T_phi_override;

  void validate() const {
    if (!(B_z > 0.0)) throw ConfigError("B_z must be positive");
    if (!(g_bar > 0.0)) throw ConfigError("g_bar must be positive");
    if (!(T1v > 0.0)) throw ConfigError("T1v must be positive");
    if (dephasing_enabled && !T_phi_override) {
      if (!(T2_star > 0.0)) throw ConfigError("T2_star must be positive when dephasing is enabled");
      if (!(l_c > 0.0)) throw ConfigError("l_c must be positive when dephasing is enabled");
    }
    if (T_phi_override && !(*T_phi_override > 0.0))
      throw ConfigError("T_phi override must be positive");
  }
};

/// Heterostructure, dot and sampling parameters of the valley landscape.
struct WellParams {
  double well_width = 12.0;      // nm
  double tau_interface = 0.2;    // nm, interface width is 4 tau
  double xi_substrate = 0.7;     // Si fraction in the barrier
  double E_field = 0.0125;       // V/nm
  double band_offset = 150.0;    // meV
  double sigma_qd = 12.0;        // nm
  double sample_spacing = 1.5;   // nm
  double device_length = 10000;  // nm
  double m_perp_rel = 0.916;
  // Barrier thickness on each side of the well included in the envelope
  // domain and in the simulated crystal.
  double barrier_margin = 15.0;  // nm
  // Half-widths of the crystal slice around the dot, in units of sigma_qd.
  double window_x_sigmas = 3.0;
  double window_y_sigmas = 3.0;

  void validate() const {
    if (!(xi_substrate > 0.0 && xi_substrate < 1.0))
      throw ConfigError("xi_substrate must lie in (0, 1)");
    if (!(sample_spacing > 0.0)) throw ConfigError("sample_spacing must be positive");
    if (!(device_length >= 10.0 * sample_spacing))
      throw ConfigError("device_length must be at least 10 sample spacings");
    if (!(well_width > 0.0)) throw ConfigError("well_width must be positive");
    if (!(tau_interface >= 0.0)) throw ConfigError("tau_interface must be non-negative");
    if (!(sigma_qd > 0.0)) throw ConfigError("sigma_qd must be positive");
    if (!(m_perp_rel > 0.0)) throw ConfigError("m_perp_rel must be positive");
    if (!(barrier_margin > 0.0)) throw ConfigError("barrier_margin must be positive");
    if (!(window_x_sigmas > 0.0 && window_y_sigmas > 0.0))
      throw ConfigError("slice windows must be positive");
  }
};

/// Band offset (meV) fixed by a one-time fit of the default-parameter
/// landscape ensemble to a mean valley splitting of 86 ueV. See
/// tools/calibrate and README.
inline constexpr double kCalibratedBandOffset = 18.1429;

/// Default well parameters with the calibrated band offset applied.
inline WellParams calibrated_well_params() {
  WellParams w;
  w.band_offset = kCalibratedBandOffset;
  return w;
}

/// Zeeman energy g mu_B B (meV).
inline double zeeman_energy(const PhysicalParams& p) {
  return p.g_bar * constants::mu_B * p.B_z;
}

/// Spin-valley coupling implied by the g-factor variation, (dg/g) E_Z / 4.
inline double derive_kappa_z(const PhysicalParams& p) {
  if (!(p.g_bar > 0.0) || !(p.B_z >= 0.0))
    throw ConfigError("derive_kappa_z requires g_bar > 0 and B_z >= 0");
  return 0.25 * p.delta_g_rel * zeeman_energy(p);
}

/// The coupling actually used by the dynamics.
inline double effective_kappa_z(const PhysicalParams& p) {
  return p.kappa_z ? *p.kappa_z : derive_kappa_z(p);
}

/// Dimensionless phase E t / hbar for an energy in meV and a time in ns.
inline double phase(double energy_meV, double time_ns) {
  return energy_meV * time_ns / constants::hbar;
}

}  // namespace shuttle
