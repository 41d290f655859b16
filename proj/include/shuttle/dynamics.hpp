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

// Open-system spin-valley propagation along a dot trajectory.
//
// H(x) = (E_Z/2) sz + Re(D) tx + Im(D) ty - kappa tz' sz, with tz' the valley
// Pauli operator rotated by the coupling phase. H commutes with sz, so in
// each spin sector the valley part is (|D| - s kappa) tz' and the step
// unitary is exp(-i s E_Z dt / 2hbar) [cos a_s - i sin a_s tz'] with
// a_s = (|D| - s kappa) dt / hbar. The state is held as three 2x2 valley
// blocks (up-up, down-down, up-down). After the exact unitary, valley
// relaxation D[t-] and optional spin dephasing are applied as one Euler step.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/digest.hpp"
#include "shuttle/fidelity.hpp"
#include "shuttle/landscape.hpp"
#include "shuttle/noise.hpp"
#include "shuttle/state.hpp"
#include "shuttle/trajectory.hpp"

namespace shuttle {

/// Local Hamiltonian and valley operators at one dot position.
struct LocalOperators {
  Mat4 H;                // meV
  Mat4 tau_tilde_z;      // valley Pauli at the local phase, (x) identity
  Mat4 tau_tilde_minus;  // local excited -> ground, (x) identity
  double phi_V;          // rad
};

/// Valley Pauli operator along the coupling phase, [[0, e^-i phi], [e^i phi, 0]].
inline Mat2 valley_axis(cplx e) {
  Mat2 n;
  n << 0.0, std::conj(e), e, 0.0;
  return n;
}

/// |g><e| for the local phase.
inline Mat2 valley_lowering(cplx e) {
  Mat2 l;
  l << 0.5, 0.5 * std::conj(e), -0.5 * e, -0.5;
  return l;
}

inline LocalOperators build_hamiltonian(double delta_re, double delta_im, const PhysicalParams& p) {
  const double ez = zeeman_energy(p);
  const double kz = effective_kappa_z(p);
  const cplx e = valley_phase(delta_re, delta_im);
  const Mat2 id = Mat2::Identity();
  const Mat2 tz = valley_axis(e);
  LocalOperators ops;
  ops.tau_tilde_z = kron(tz, id);
  ops.tau_tilde_minus = kron(valley_lowering(e), id);
  ops.H = 0.5 * ez * kron(id, pauli_z()) + delta_re * kron(pauli_x(), id) +
          delta_im * kron(pauli_y(), id) - kz * kron(tz, pauli_z());
  ops.phi_V = std::arg(e);
  return ops;
}

/// Speed-dependent time step.
struct StepPolicy {
  struct Band {
    double lower;    // m/s
    bool inclusive;  // v >= lower rather than v > lower
    double dt_ps;
  };
  // Checked in order; the first matching band wins.
  std::vector<Band> bands{{50.0, true, 0.5}, {5.0, true, 5.0}, {0.2, false, 10.0}, {0.0, false, 50.0}};
  double scale = 1.0;
  std::optional<double> fixed_dt_ps;

  static StepPolicy fixed(double dt_ps) {
    StepPolicy p;
    p.fixed_dt_ps = dt_ps;
    return p;
  }

  double dt_ps(double v) const {
    if (!(v > 0.0)) throw ConfigError("time step requested for non-positive speed");
    if (fixed_dt_ps) return *fixed_dt_ps * scale;
    for (const Band& b : bands)
      if (b.inclusive ? v >= b.lower : v > b.lower) return b.dt_ps * scale;
    throw ConfigError("no time-step band covers speed " + std::to_string(v));
  }
};

/// Default time step in ps for an average speed in m/s.
inline double timestep_for_speed(double v) { return StepPolicy{}.dt_ps(v); }

/// Uniform grid of N = ceil(T / dt) steps, the last one shortened.
struct TimeGrid {
  double duration = 0.0;  // ns
  double dt = 0.0;        // ns
  std::size_t steps = 0;

  TimeGrid() = default;
  TimeGrid(double T, double dt_ns) : duration(T), dt(dt_ns) {
    if (!(dt_ns > 0.0)) throw ConfigError("time step must be positive");
    const double n = std::ceil(T / dt_ns - 1e-9);
    steps = n < 1.0 ? 1 : static_cast<std::size_t>(n);
  }

  /// Start time of step j (0-based); time(steps) = T.
  double time(std::size_t j) const {
    return j >= steps ? duration : static_cast<double>(j) * dt;
  }
  double length(std::size_t j) const { return time(j + 1) - time(j); }
  double midpoint(std::size_t j) const { return 0.5 * (time(j) + time(j + 1)); }
};

namespace detail {

/// Step constants that depend only on the step length.
struct StepCoefficients {
  double dt = 0.0;     // ns
  double rate = 0.0;   // dt / hbar, 1/meV
  double cos_k = 1.0;  // cos(kappa dt / hbar)
  double sin_k = 0.0;
  cplx zeeman{1.0, 0.0};  // exp(-i E_Z dt / hbar), the up-down block phase
  double gamma = 0.0;     // dt / T1v
  double dephase = 0.0;   // dt / T_phi

  StepCoefficients() = default;
  StepCoefficients(double dt_ns, double ez, double kz, double T1v, double T_phi) : dt(dt_ns) {
    rate = dt / constants::hbar;
    cos_k = std::cos(kz * rate);
    sin_k = std::sin(kz * rate);
    zeeman = cplx(std::cos(ez * rate), -std::sin(ez * rate));
    gamma = std::isfinite(T1v) ? dt / T1v : 0.0;
    dephase = std::isfinite(T_phi) ? dt / T_phi : 0.0;
  }
};

/// Valley rotation angles for both spin sectors at one position.
struct ValleyRotation {
  cplx e;         // exp(i phi)
  double r;       // |Delta|
  double cu, su;  // cos, sin of (|D| - kappa) dt / hbar
  double cd, sd;  // cos, sin of (|D| + kappa) dt / hbar
};

inline ValleyRotation valley_rotation(double re, double im, const StepCoefficients& c) {
  ValleyRotation v;
  v.r = std::hypot(re, im);
  v.e = v.r > 0.0 ? cplx(re / v.r, im / v.r) : cplx(1.0, 0.0);
  const double a = v.r * c.rate;
  const double ca = std::cos(a), sa = std::sin(a);
  v.cu = ca * c.cos_k + sa * c.sin_k;
  v.su = sa * c.cos_k - ca * c.sin_k;
  v.cd = ca * c.cos_k - sa * c.sin_k;
  v.sd = sa * c.cos_k + ca * c.sin_k;
  return v;
}

/// cos a - i sin a tz'.
inline Mat2 rotation(double c, double s, cplx e) {
  Mat2 w;
  w << c, cplx(0.0, -s) * std::conj(e), cplx(0.0, -s) * e, c;
  return w;
}

/// Euler step of gamma D[L] with K = L^dag L.
inline void relax(Mat2& b, const Mat2& l, const Mat2& k, double gamma) {
  const Mat2 d = l * b * l.adjoint() - 0.5 * (k * b + b * k);
  b += gamma * d;
}

/// Up-down block update, shared by the full and coherence-only propagators.
inline void advance_coherence(Mat2& x, const Mat2& wu, const Mat2& wd, const Mat2& l,
                              const Mat2& k, const StepCoefficients& c) {
  x = c.zeeman * (wu * x * wd.adjoint());
  if (c.gamma > 0.0) relax(x, l, k, c.gamma);
  if (c.dephase > 0.0) x *= (1.0 - c.dephase);
}

inline void advance_blocks(SpinBlocks& b, const ValleyRotation& v, const StepCoefficients& c) {
  const Mat2 wu = rotation(v.cu, v.su, v.e);
  const Mat2 wd = rotation(v.cd, v.sd, v.e);
  const Mat2 l = valley_lowering(v.e);
  const Mat2 k = l.adjoint() * l;
  b.uu = wu * b.uu * wu.adjoint();
  b.dd = wd * b.dd * wd.adjoint();
  if (c.gamma > 0.0) {
    relax(b.uu, l, k, c.gamma);
    relax(b.dd, l, k, c.gamma);
  }
  advance_coherence(b.ud, wu, wd, l, k, c);
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Exact unitary exp(-i H dt / hbar) for the local Hamiltonian, dt in ps.
inline Mat4 step_unitary(double delta_re, double delta_im, const PhysicalParams& p, double dt_ps) {
  const detail::StepCoefficients c(dt_ps * 1e-3, zeeman_energy(p), effective_kappa_z(p), INFINITY,
                                   INFINITY);
  const auto v = detail::valley_rotation(delta_re, delta_im, c);
  const double hz = 0.5 * zeeman_energy(p) * c.rate;
  const cplx half(std::cos(hz), -std::sin(hz));
  const Mat2 wu = half * detail::rotation(v.cu, v.su, v.e);
  const Mat2 wd = std::conj(half) * detail::rotation(v.cd, v.sd, v.e);
  Mat4 u = Mat4::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      u(2 * a, 2 * b) = wu(a, b);
      u(2 * a + 1, 2 * b + 1) = wd(a, b);
    }
  return u;
}

/// One propagation step at the midpoint position, dt in ps. T_phi (ns) is
/// required when dephasing is enabled without an override.
inline DensityMatrix4 propagate_step(const DensityMatrix4& rho, double x_mid, double dt_ps,
                                     const ValleyLandscape& landscape, const PhysicalParams& p,
                                     std::optional<double> T_phi = std::nullopt) {
  if (!(dt_ps >= 0.0)) throw Error("propagate_step: negative time step");
  double tphi = INFINITY;
  if (p.dephasing_enabled) {
    if (p.T_phi_override) tphi = *p.T_phi_override;
    else if (T_phi) tphi = *T_phi;
    else throw ConfigError("propagate_step: dephasing enabled but no dephasing time given");
  }
  const detail::StepCoefficients c(dt_ps * 1e-3, zeeman_energy(p), effective_kappa_z(p), p.T1v,
                                   tphi);
  const auto d = landscape.evaluate(x_mid);
  SpinBlocks b = SpinBlocks::from_matrix(rho.matrix());
  detail::advance_blocks(b, detail::valley_rotation(d.re, d.im, c), c);
  DensityMatrix4 out(b.to_matrix());
  if (!out.all_finite()) throw Error("propagate_step: non-finite density matrix");
  return out;
}

struct SimulationRecord {
  double t;  // ns
  double x;  // nm
  double infidelity;
  double p_excited;
  double purity_total;
  double purity_spin;
};

struct SimulationResult {
  std::vector<SimulationRecord> records;
  DensityMatrix4 final_state;
  double final_infidelity = 0.0;  // raw 1 - F, not clamped
  double dt_ns = 0.0;
  std::size_t steps = 0;
  double T_phi = INFINITY;
  std::uint64_t seed = 0;
  std::string params_digest;
  std::string trajectory_digest;
};

struct SimulationOptions {
  StepPolicy policy;
  // Records every record_every steps; 0 spaces record_points records evenly.
  std::size_t record_every = 0;
  std::size_t record_points = 1000;
  // Replaces the default local valley ground (x) |+> start.
  std::optional<DensityMatrix4> initial_state;
};

/// Serialized trajectory "v, L, u_1..u_M" and its digest.
inline std::string trajectory_text(const ShuttleTrajectory& traj) {
  std::string s = detail::format_double(traj.speed()) + "," + detail::format_double(traj.length());
  for (double u : traj.coefficients()) s += "," + detail::format_double(u);
  return s;
}
inline std::string trajectory_digest(const ShuttleTrajectory& traj) {
  return sha256_hex(trajectory_text(traj)).substr(0, 16);
}

/// Throws if the trajectory leaves the landscape at any grid or midpoint time.
inline void check_trajectory_domain(const ShuttleTrajectory& traj, const ValleyLandscape& land,
                                    const TimeGrid& grid) {
  if (traj.length() > land.device_length() * (1.0 + 1e-12))
    throw Error("trajectory length " + std::to_string(traj.length()) +
                " nm exceeds the landscape length " + std::to_string(land.device_length()) + " nm");
  auto check = [&](double t) {
    const double x = traj.position_unchecked(t);
    if (!land.contains(x))
      throw Error("trajectory leaves the landscape at t = " + std::to_string(t) +
                  " ns (x = " + std::to_string(x) + " nm)");
  };
  for (std::size_t j = 0; j < grid.steps; ++j) {
    check(grid.time(j));
    check(grid.midpoint(j));
  }
  check(grid.duration);
}

namespace detail {

inline void check_relaxation_step(double dt, const PhysicalParams& p) {
  if (dt / p.T1v > 1e-3)
    throw ConfigError("time step " + std::to_string(dt * 1e3) + " ps exceeds T1v / 1000 (T1v = " +
                      std::to_string(p.T1v) + " ns); shrink the time step");
}

}  // namespace detail

/// Propagates the default (or given) initial state along the trajectory.
inline SimulationResult simulate(const ValleyLandscape& land, const ShuttleTrajectory& traj,
                                 const PhysicalParams& p, const SimulationOptions& opt = {}) {
  p.validate();
  const double T = traj.duration();
  const TimeGrid grid(T, opt.policy.dt_ps(traj.speed()) * 1e-3);
  detail::check_relaxation_step(grid.dt, p);
  check_trajectory_domain(traj, land, grid);

  const double ez = zeeman_energy(p);
  const double kz = effective_kappa_z(p);
  const double tphi = spin_dephasing_time(p, traj.speed());
  const detail::StepCoefficients full(grid.dt, ez, kz, p.T1v, tphi);
  const detail::StepCoefficients last(grid.length(grid.steps - 1), ez, kz, p.T1v, tphi);
  const FidelityContext ctx = FidelityContext::from_params(p, T);

  SpinBlocks b;
  if (opt.initial_state) {
    b = SpinBlocks::from_matrix(opt.initial_state->matrix());
  } else {
    const auto d0 = land.evaluate(traj.position(0.0));
    const Vec2 g = valley_ground(valley_phase(d0.re, d0.im));
    const Mat2 gg = g * g.adjoint();
    b.uu = 0.5 * gg;
    b.dd = 0.5 * gg;
    b.ud = 0.5 * gg;
  }

  std::size_t every = opt.record_every;
  if (every == 0) {
    const std::size_t pts = std::max<std::size_t>(1, opt.record_points);
    every = std::max<std::size_t>(1, grid.steps / pts);
  }

  SimulationResult res;
  res.dt_ns = grid.dt;
  res.steps = grid.steps;
  res.T_phi = tphi;
  res.seed = land.seed();
  res.params_digest = land.params_digest();
  res.trajectory_digest = trajectory_digest(traj);
  res.records.reserve(grid.steps / every + 2);

  auto record = [&](std::size_t j) {
    const double t = grid.time(j);
    const double x = traj.position_unchecked(t);
    const DensityMatrix4 rho(b.to_matrix());
    const auto d = land.evaluate_unchecked(x);
    const double pe = (d.re == 0.0 && d.im == 0.0) ? std::numeric_limits<double>::quiet_NaN()
                                                   : excited_population(rho, d.re, d.im);
    const Purities pur = purities(rho);
    res.records.push_back(
        {t, x, 1.0 - entanglement_fidelity(rho, t, ctx), pe, pur.total, pur.spin});
  };

  record(0);
  for (std::size_t j = 0; j < grid.steps; ++j) {
    const detail::StepCoefficients& c = (j + 1 == grid.steps) ? last : full;
    const auto d = land.evaluate_unchecked(traj.position_unchecked(grid.midpoint(j)));
    detail::advance_blocks(b, detail::valley_rotation(d.re, d.im, c), c);
    if (!b.ud.allFinite() || !b.uu.allFinite() || !b.dd.allFinite())
      throw Error("non-finite density matrix at step " + std::to_string(j + 1));
    if ((j + 1) % every == 0 || j + 1 == grid.steps) record(j + 1);
  }

  res.final_state = DensityMatrix4(b.to_matrix());
  res.final_infidelity = 1.0 - entanglement_fidelity(res.final_state, T, ctx);
  return res;
}

/// Propagates only the spin coherence block, which fixes the fidelity of a
/// run from the default start. Supplies the infidelity and its gradient with
/// respect to the trajectory coefficients by reverse accumulation.
class CoherencePropagator {
 public:
  CoherencePropagator(const ValleyLandscape& land, const PhysicalParams& p, StepPolicy policy = {})
      : land_(&land), p_(p), policy_(std::move(policy)) {
    p_.validate();
  }

  const PhysicalParams& params() const { return p_; }
  const StepPolicy& policy() const { return policy_; }

  /// 1 - F at t = T, equal to simulate(...).final_infidelity.
  double infidelity(const ShuttleTrajectory& traj) const { return run(traj, {}); }

  /// Infidelity and dI/du_k written to grad (size M).
  double infidelity(const ShuttleTrajectory& traj, std::span<double> grad) const {
    if (grad.size() != traj.size())
      throw Error("gradient buffer size does not match the number of coefficients");
    return run(traj, grad);
  }

 private:
  struct Setup {
    TimeGrid grid;
    detail::StepCoefficients full, last;
    FidelityContext ctx;
    Mat2 x0;
  };

  Setup prepare(const ShuttleTrajectory& traj) const {
    const double T = traj.duration();
    Setup s{TimeGrid(T, policy_.dt_ps(traj.speed()) * 1e-3), {}, {}, {}, {}};
    detail::check_relaxation_step(s.grid.dt, p_);
    check_trajectory_domain(traj, *land_, s.grid);
    const double ez = zeeman_energy(p_);
    const double kz = effective_kappa_z(p_);
    const double tphi = spin_dephasing_time(p_, traj.speed());
    s.full = detail::StepCoefficients(s.grid.dt, ez, kz, p_.T1v, tphi);
    s.last = detail::StepCoefficients(s.grid.length(s.grid.steps - 1), ez, kz, p_.T1v, tphi);
    s.ctx = FidelityContext::from_params(p_, T);
    const auto d0 = land_->evaluate(0.0);
    const Vec2 g = valley_ground(valley_phase(d0.re, d0.im));
    s.x0 = 0.5 * g * g.adjoint();
    return s;
  }

  double run(const ShuttleTrajectory& traj, std::span<double> grad) const {
    const Setup s = prepare(traj);
    const std::size_t n = s.grid.steps;
    const bool want_grad = !grad.empty();
    std::vector<Mat2> history;
    std::vector<double> xs;
    if (want_grad) {
      history.resize(n);
      xs.resize(n);
    }

    Mat2 x = s.x0;
    for (std::size_t j = 0; j < n; ++j) {
      const detail::StepCoefficients& c = (j + 1 == n) ? s.last : s.full;
      const double xm = traj.position_unchecked(s.grid.midpoint(j));
      if (want_grad) {
        history[j] = x;
        xs[j] = xm;
      }
      const auto d = land_->evaluate_unchecked(xm);
      const auto v = detail::valley_rotation(d.re, d.im, c);
      const Mat2 wu = detail::rotation(v.cu, v.su, v.e);
      const Mat2 wd = detail::rotation(v.cd, v.sd, v.e);
      const Mat2 l = valley_lowering(v.e);
      const Mat2 k = l.adjoint() * l;
      detail::advance_coherence(x, wu, wd, l, k, c);
    }
    if (!x.allFinite()) throw Error("non-finite coherence after propagation");

    const double a = s.ctx.angle(s.grid.duration);
    const cplx phase(std::cos(a), std::sin(a));
    const double inf = 1.0 - fidelity_from_coherence(x.trace(), s.grid.duration, s.ctx);
    if (!want_grad) return inf;

    // Reverse pass: A is the cotangent of the coherence block, f = Re tr(A X).
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> sens(grad.size());
    Mat2 adj = phase * Mat2::Identity();
    for (std::size_t jj = n; jj-- > 0;) {
      const detail::StepCoefficients& c = (jj + 1 == n) ? s.last : s.full;
      const auto d = land_->evaluate_unchecked(xs[jj]);
      const auto v = detail::valley_rotation(d.re, d.im, c);
      const Mat2 wu = detail::rotation(v.cu, v.su, v.e);
      const Mat2 wd = detail::rotation(v.cd, v.sd, v.e);
      const Mat2 l = valley_lowering(v.e);
      const Mat2 k = l.adjoint() * l;
      const Mat2 n_ax = valley_axis(v.e);

      double dr = 0.0, dphi = 0.0;
      if (v.r > 0.0) {
        dr = (d.re * d.dre + d.im * d.dim) / v.r;
        dphi = (d.re * d.dim - d.im * d.dre) / (v.r * v.r);
      }
      const double da = dr * c.rate;
      Mat2 dn;
      dn << 0.0, cplx(0.0, -dphi) * std::conj(v.e), cplx(0.0, dphi) * v.e, 0.0;
      const Mat2 id = Mat2::Identity();
      const Mat2 dwu = -v.su * da * id + cplx(0.0, -v.cu * da) * n_ax + cplx(0.0, -v.su) * dn;
      const Mat2 dwd = -v.sd * da * id + cplx(0.0, -v.cd * da) * n_ax + cplx(0.0, -v.sd) * dn;

      const Mat2& xp = history[jj];
      const Mat2 y = c.zeeman * (wu * xp * wd.adjoint());
      const Mat2 dy = c.zeeman * (dwu * xp * wd.adjoint() + wu * xp * dwd.adjoint());

      // Cotangent before the dissipative update.
      Mat2 b = adj;
      if (c.gamma > 0.0)
        b += c.gamma * (l.adjoint() * adj * l - 0.5 * (adj * k + k * adj));
      if (c.dephase > 0.0) b -= c.dephase * adj;

      double gx = (b * dy).trace().real();
      if (c.gamma > 0.0) {
        Mat2 dl;
        dl << 0.0, 0.5 * dn(0, 1), -0.5 * dn(1, 0), 0.0;
        const Mat2 dk = dl.adjoint() * l + l.adjoint() * dl;
        const Mat2 de = dl * y * l.adjoint() + l * y * dl.adjoint() - 0.5 * (dk * y + y * dk);
        gx += c.gamma * (adj * de).trace().real();
      }

      adj = c.zeeman * (wd.adjoint() * b * wu);

      const double dI = -gx;
      traj.sensitivities(s.grid.midpoint(jj), sens);
      for (std::size_t m = 0; m < sens.size(); ++m) grad[m] += dI * sens[m];
    }
    for (double g : grad)
      if (!std::isfinite(g)) throw Error("non-finite gradient");
    return inf;
  }

  const ValleyLandscape* land_;
  PhysicalParams p_;
  StepPolicy policy_;
};

}  // namespace shuttle
