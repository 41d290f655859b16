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

// Transport fidelity against the ideal spin precession, and state observables.
//
// The ideal channel precesses the spin at nu_G = (E_Z + 2 kappa_z) / h, the
// spin splitting in the valley ground state. It is applied as the rotation
// V = exp(-i pi nu_G t sigma_z); the entanglement fidelity of a
// sigma_z-covariant channel then needs only the output of |+><+|:
//   F = 1/2 + Re <0| V^dag rho_S V |1>.

#include <algorithm>
#include <array>
#include <utility>

#include "shuttle/constants.hpp"
#include "shuttle/state.hpp"

namespace shuttle {

struct FidelityContext {
  double nu_G;      // GHz
  double duration;  // ns

  static FidelityContext from_params(const PhysicalParams& p, double duration) {
    return {(zeeman_energy(p) + 2.0 * effective_kappa_z(p)) / constants::h, duration};
  }

  /// Reference rotation angle 2 pi nu_G t.
  double angle(double t) const { return 2.0 * constants::pi * nu_G * t; }
};

/// Fidelity from the spin coherence <0|rho_S|1> at time t.
inline double fidelity_from_coherence(cplx coherence, double t, const FidelityContext& ctx) {
  const double a = ctx.angle(t);
  return 0.5 + (cplx(std::cos(a), std::sin(a)) * coherence).real();
}

/// Entanglement fidelity (unclamped) of the evolved |+> state at time t.
inline double entanglement_fidelity(const DensityMatrix4& rho, double t,
                                    const FidelityContext& ctx) {
  return fidelity_from_coherence(rho.spin_state()(0, 1), t, ctx);
}

/// Clamp to [0, 1] for reporting.
inline double clamp_fidelity(double f) { return std::clamp(f, 0.0, 1.0); }

/// Four-state entanglement fidelity of a qubit channel from its outputs on
/// |0><0|, |1><1|, |+><+| and |+i><+i|.
inline double general_entanglement_fidelity(const std::array<Mat2, 4>& outputs) {
  const Mat2& e0 = outputs[0];
  const Mat2& e1 = outputs[1];
  const Mat2& ep = outputs[2];
  const Mat2& epi = outputs[3];
  const Mat2 emix = 0.5 * (e0 + e1);
  const cplx sum = e0(0, 0) + e1(1, 1) + ep(0, 1) + I * epi(0, 1) - (1.0 + I) * emix(0, 1) +
                   ep(1, 0) - I * epi(1, 0) - (1.0 - I) * emix(1, 0);
  return 0.25 * sum.real();
}

/// Average gate fidelity (d F + 1) / (d + 1).
inline double average_gate_fidelity(double f_ent, int d = 2) {
  if (d < 2) throw Error("average_gate_fidelity: dimension must be >= 2");
  return (d * f_ent + 1.0) / (d + 1.0);
}

/// Population of the local excited valley state.
inline double excited_population(const DensityMatrix4& rho, double delta_re, double delta_im) {
  if (delta_re == 0.0 && delta_im == 0.0)
    throw Error("excited_population: valley splitting is zero, local basis undefined");
  const Vec2 e = valley_excited(valley_phase(delta_re, delta_im));
  return (e.adjoint() * rho.valley_state() * e)(0, 0).real();
}

struct Purities {
  double total;  // tr rho^2
  double spin;   // tr rho_S^2
};

inline Purities purities(const DensityMatrix4& rho) {
  const Mat4& m = rho.matrix();
  const Mat2 s = rho.spin_state();
  return {(m.adjoint() * m).trace().real(), (s.adjoint() * s).trace().real()};
}

}  // namespace shuttle
