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

#include <cmath>

#include "shuttle/constants.hpp"

namespace shuttle {

/// Effective spin dephasing time of a moving electron, v T2*^2 / (2 l_c).
/// v in m/s, T2* in ns, l_c in nm; result in ns.
inline double motional_narrowing_Tphi(double v, double T2_star, double l_c) {
  if (v == 0.0) throw Error("motional narrowing undefined for a static dot (v = 0)");
  if (!(v > 0.0 && T2_star > 0.0 && l_c > 0.0))
    throw Error("motional_narrowing_Tphi: arguments must be positive");
  return v * T2_star * T2_star / (2.0 * l_c);
}

/// Entanglement fidelity of a pure dephasing channel, (1 + exp(-T/T_phi)) / 2.
inline double dephasing_channel_fidelity(double T, double T_phi) {
  if (!(T_phi > 0.0)) throw Error("dephasing_channel_fidelity: T_phi must be positive");
  return 0.5 * (1.0 + std::exp(-T / T_phi));
}

/// Dephasing time used by a run at speed v, or +inf when dephasing is off.
inline double spin_dephasing_time(const PhysicalParams& p, double v) {
  if (!p.dephasing_enabled) return INFINITY;
  if (p.T_phi_override) return *p.T_phi_override;
  return motional_narrowing_Tphi(v, p.T2_star, p.l_c);
}

}  // namespace shuttle
