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

// Library walk-through on a 2 um channel: build one alloy landscape, shuttle
// at constant speed, then let the optimizer reshape the trajectory.

#include <cstdio>

#include "shuttle/landscape.hpp"
#include "shuttle/optimizer.hpp"

int main() {
  using namespace shuttle;

  WellParams well = calibrated_well_params();
  well.device_length = 2000.0;
  const ValleyLandscape land = generate_landscape(well, 1000);
  const LandscapeStats st = landscape_stats(land);
  std::printf("landscape: mean E_V %.1f ueV, %zu minima\n", st.ev_mean, st.minima_count);

  PhysicalParams p;
  p.T1v = 1e6;  // 1 ms
  p.kappa_z = 1e-5;
  const SimulationResult r = simulate(land, ShuttleTrajectory(5.0, 2000.0), p);
  std::printf("constant speed 5 m/s: 1 - F = %.3e, excited valley population %.3f\n", r.final_infidelity,
              r.records.back().p_excited);

  OptimizationProblem pr;
  pr.landscape = &land;
  pr.params = p;
  pr.speed = 5.0;
  pr.length = 2000.0;
  pr.M = 4;
  pr.stopping.max_iterations = 40;
  const OptimizationResult o = optimize(pr);
  std::printf("optimized (M = 4): 1 - F = %.3e after %zu iterations (%s)\n", o.cost,
              o.cost_history.size() - 1, to_string(o.termination));
  for (std::size_t k = 0; k < o.u_star.size(); ++k) std::printf("  u_%zu = %+.3f nm\n", k + 1, o.u_star[k]);
  return 0;
}
