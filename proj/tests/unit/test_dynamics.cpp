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
#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "shuttle/dynamics.hpp"

namespace sh = shuttle;
using sh::cplx;
using sh::Mat2;
using sh::Mat4;

namespace {

sh::PhysicalParams params_with(double B_z, double kappa) {
  sh::PhysicalParams p;
  p.B_z = B_z;
  p.kappa_z = kappa;
  return p;
}

std::vector<double> sorted_spectrum(const Mat4& H) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(H);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(ev.begin(), ev.end());
  return ev;
}

sh::ValleyLandscape wavy_landscape(double length) {
  return sh::ValleyLandscape::from_function(
      [](double x) { return cplx(0.03 * std::sin(x / 137.0), 0.02 * std::cos(x / 353.0) + 0.005); },
      length);
}

double trace_distance(const Mat4& a, const Mat4& b) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

// ------------------------------------------------------------ Hamiltonian

TEST(Hamiltonian, NoValleyNoCoupling) {
  const auto p = params_with(0.02, 0.0);
  const double ez = sh::zeeman_energy(p);
  const auto ev = sorted_spectrum(sh::build_hamiltonian(0.0, 0.0, p).H);
  EXPECT_NEAR(ev[0], -0.5 * ez, 1e-15);
  EXPECT_NEAR(ev[1], -0.5 * ez, 1e-15);
  EXPECT_NEAR(ev[2], 0.5 * ez, 1e-15);
  EXPECT_NEAR(ev[3], 0.5 * ez, 1e-15);
}

TEST(Hamiltonian, SpectrumMatchesDenseEigensolver) {
  const auto p = params_with(0.02, 1e-6);
  const double ez = sh::zeeman_energy(p);
  EXPECT_NEAR(ez, 2.3154e-3, 1e-7);
  const double r = 0.043, k = 1e-6;
  // Ground valley (tau = -1) spin energies s ez/2 - r + s k; excited s ez/2 + r - s k.
  std::vector<double> expected;
  for (int n : {-1, 1})
    for (int s : {-1, 1}) expected.push_back(s * 0.5 * ez + n * (r - s * k));
  std::sort(expected.begin(), expected.end());
  const auto ev = sorted_spectrum(sh::build_hamiltonian(r, 0.0, p).H);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-12);
}

TEST(Hamiltonian, SpectrumIndependentOfValleyPhase) {
  const auto p = params_with(0.05, 3e-5);
  const auto ref = sorted_spectrum(sh::build_hamiltonian(0.04, 0.0, p).H);
  for (double phi : {0.3, 1.7, -2.9, 3.14}) {
    const auto ops = sh::build_hamiltonian(0.04 * std::cos(phi), 0.04 * std::sin(phi), p);
    const auto ev = sorted_spectrum(ops.H);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], ref[i], 1e-14);
    EXPECT_NEAR(std::remainder(ops.phi_V - phi, 2 * sh::constants::pi), 0.0, 1e-14);
  }
}

TEST(Hamiltonian, LocalOperatorsAreConsistent) {
  const auto ops = sh::build_hamiltonian(0.01, -0.02, sh::PhysicalParams{});
  // tau_minus maps excited to ground and annihilates ground.
  const cplx e = sh::valley_phase(0.01, -0.02);
  const Mat2 l = sh::valley_lowering(e);
  EXPECT_NEAR((l * sh::valley_excited(e) - sh::valley_ground(e)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((l * sh::valley_ground(e)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((ops.tau_tilde_z * ops.tau_tilde_z - Mat4::Identity()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((ops.tau_tilde_minus - sh::kron(l, Mat2::Identity())).norm(), 0.0, 1e-15);
}

// -------------------------------------------------------------- time step

TEST(StepPolicy, DefaultTable) {
  EXPECT_EQ(sh::timestep_for_speed(50.0), 0.5);
  EXPECT_EQ(sh::timestep_for_speed(100.0), 0.5);
  EXPECT_EQ(sh::timestep_for_speed(5.0), 5.0);
  EXPECT_EQ(sh::timestep_for_speed(3.0), 10.0);
  EXPECT_EQ(sh::timestep_for_speed(1.0), 10.0);
  EXPECT_EQ(sh::timestep_for_speed(0.2), 50.0);
  EXPECT_EQ(sh::timestep_for_speed(0.1), 50.0);
  EXPECT_THROW(sh::timestep_for_speed(0.0), sh::ConfigError);
}

TEST(StepPolicy, NonIncreasingInSpeed) {
  double prev = INFINITY;
  for (double v = 0.01; v < 200.0; v *= 1.01) {
    const double dt = sh::timestep_for_speed(v);
    EXPECT_LE(dt, prev);
    prev = dt;
  }
}

TEST(StepPolicy, ScaleAndFixed) {
  sh::StepPolicy p;
  p.scale = 0.5;
  EXPECT_EQ(p.dt_ps(1.0), 5.0);
  EXPECT_EQ(sh::StepPolicy::fixed(2.0).dt_ps(77.0), 2.0);
}

TEST(TimeGrid, LastStepShortened) {
  const sh::TimeGrid g(10.25, 1.0);
  EXPECT_EQ(g.steps, 11u);
  EXPECT_NEAR(g.length(10), 0.25, 1e-12);
  EXPECT_EQ(g.time(g.steps), 10.25);
  double total = 0.0;
  for (std::size_t j = 0; j < g.steps; ++j) total += g.length(j);
  EXPECT_NEAR(total, 10.25, 1e-12);
  EXPECT_EQ(sh::TimeGrid(2000.0, 0.005).steps, 400000u);
}

// ------------------------------------------------------------ propagation

TEST(StepUnitary, MatchesDenseMatrixExponential) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> d(-0.1, 0.1), k(0.0, 1e-3), b(0.0, 2.0), t(0.1, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = params_with(b(rng) + 1e-6, k(rng));
    const double re = d(rng), im = d(rng), dt = t(rng);
    const Mat4 H = sh::build_hamiltonian(re, im, p).H;
    const Mat4 exact = (cplx(0.0, -dt * 1e-3 / sh::constants::hbar) * H).exp();
    const Mat4 u = sh::step_unitary(re, im, p, dt);
    EXPECT_LT((u - exact).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
  }
}

TEST(PropagateStep, ZeroStepIsIdentity) {
  std::mt19937_64 rng(1);
  const auto land = wavy_landscape(100.0);
  sh::PhysicalParams p;
  p.T1v = 50.0;
  p.dephasing_enabled = true;
  p.T_phi_override = 20.0;
  Mat4 a = Mat4::Random();
  const sh::DensityMatrix4 rho(a * a.adjoint() / (a * a.adjoint()).trace());
  const auto out = sh::propagate_step(rho, 40.0, 0.0, land, p);
  EXPECT_LT((out.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PropagateStep, UnitaryStepPreservesPurity) {
  const auto land = wavy_landscape(100.0);
  sh::PhysicalParams p;
  p.T1v = INFINITY;
  Eigen::Vector4cd psi = Eigen::Vector4cd::Random().normalized();
  sh::DensityMatrix4 rho = sh::DensityMatrix4::pure(psi);
  for (int j = 0; j < 1000; ++j) {
    const double before = sh::purities(rho).total;
    rho = sh::propagate_step(rho, 0.1 * j, 5.0, land, p);
    EXPECT_NEAR(sh::purities(rho).total, before, 1e-12);
  }
}

TEST(PropagateStep, AgreesWithAdaptiveMasterEquationIntegrator) {
  namespace ode = boost::numeric::odeint;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-0.08, 0.08), k(0.0, 1e-5), b(0.01, 0.5);
  for (int trial = 0; trial < 3; ++trial) {
    sh::PhysicalParams p = params_with(b(rng), k(rng));
    p.T1v = 100.0;
    p.dephasing_enabled = true;
    p.T_phi_override = 150.0;
    const double re = d(rng), im = d(rng);
    const auto land = sh::ValleyLandscape::constant(re, im, 10.0);
    const auto ops = sh::build_hamiltonian(re, im, p);
    const Mat4 szz = sh::kron(Mat2::Identity(), sh::pauli_z());
    const double dt_ps = 1.0;
    const int steps = 1000;

    Eigen::Vector4cd psi = Eigen::Vector4cd::Random().normalized();
    const Mat4 rho0 = psi * psi.adjoint();
    sh::DensityMatrix4 rho(rho0);
    for (int j = 0; j < steps; ++j) rho = sh::propagate_step(rho, 5.0, dt_ps, land, p);

    using State = std::vector<double>;
    auto rhs = [&](const State& x, State& dx, double) {
      Mat4 r;
      for (int i = 0; i < 16; ++i) r.data()[i] = cplx(x[2 * i], x[2 * i + 1]);
      const Mat4& L = ops.tau_tilde_minus;
      const Mat4 K = L.adjoint() * L;
      Mat4 dr = cplx(0.0, -1.0 / sh::constants::hbar) * (ops.H * r - r * ops.H);
      dr += (L * r * L.adjoint() - 0.5 * (K * r + r * K)) / p.T1v;
      dr += (szz * r * szz - r) / (2.0 * *p.T_phi_override);
      for (int i = 0; i < 16; ++i) {
        dx[2 * i] = dr.data()[i].real();
        dx[2 * i + 1] = dr.data()[i].imag();
      }
    };
    State x(32);
    for (int i = 0; i < 16; ++i) {
      x[2 * i] = rho0.data()[i].real();
      x[2 * i + 1] = rho0.data()[i].imag();
    }
    const double T = steps * dt_ps * 1e-3;
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, x,
                            0.0, T, dt_ps * 1e-5);
    Mat4 ref;
    for (int i = 0; i < 16; ++i) ref.data()[i] = cplx(x[2 * i], x[2 * i + 1]);
    EXPECT_LT(trace_distance(rho.matrix(), ref), 1e-6) << "trial " << trial;
  }
}

TEST(PropagateStep, ErrorsOnMissingDephasingTimeAndNegativeStep) {
  const auto land = wavy_landscape(100.0);
  sh::PhysicalParams p;
  const sh::DensityMatrix4 rho(0.25 * Mat4::Identity());
  EXPECT_THROW(sh::propagate_step(rho, 1.0, -1.0, land, p), sh::Error);
  p.dephasing_enabled = true;
  EXPECT_THROW(sh::propagate_step(rho, 1.0, 1.0, land, p), sh::ConfigError);
  EXPECT_NO_THROW(sh::propagate_step(rho, 1.0, 1.0, land, p, 100.0));
  EXPECT_THROW(sh::propagate_step(rho, 101.0, 1.0, land, p, 100.0), sh::Error);
}

// -------------------------------------------------------------- simulate

TEST(Simulate, FlatLandscapeIsIdealAtAnySpeed) {
  const auto flat = sh::ValleyLandscape::constant(0.043, 0.0, 2000.0);
  sh::PhysicalParams p;
  p.T1v = INFINITY;
  for (double v : {0.5, 1.0, 5.0, 50.0}) {
    const auto r = sh::simulate(flat, sh::ShuttleTrajectory(v, 2000.0), p);
    EXPECT_LT(std::abs(r.final_infidelity), 1e-9) << "v = " << v;
  }
}

TEST(Simulate, NoSpinValleyCouplingKeepsSpinPure) {
  const auto land = wavy_landscape(2000.0);
  sh::PhysicalParams p;
  p.kappa_z = 0.0;
  p.T1v = 1e4;
  sh::SimulationOptions opt;
  opt.record_points = 50;
  const auto r = sh::simulate(land, sh::ShuttleTrajectory(2.0, 2000.0, {40.0, -15.0}), p, opt);
  EXPECT_LT(std::abs(r.final_infidelity), 1e-9);
  for (const auto& rec : r.records) EXPECT_NEAR(rec.purity_spin, 1.0, 1e-9);
}

TEST(Simulate, ObservableBounds) {
  const auto land = wavy_landscape(3000.0);
  sh::PhysicalParams p;
  p.T1v = 2e3;
  p.kappa_z = 1e-4;
  p.dephasing_enabled = true;
  sh::SimulationOptions opt;
  opt.record_points = 200;
  const auto r = sh::simulate(land, sh::ShuttleTrajectory(1.0, 3000.0), p, opt);
  const double eps = 1e-8;
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.purity_total, 0.25 - eps);
    EXPECT_LE(rec.purity_total, 1.0 + eps);
    EXPECT_GE(rec.purity_spin, 0.5 - eps);
    EXPECT_LE(rec.purity_spin, 1.0 + eps);
    EXPECT_GE(rec.p_excited, -eps);
    EXPECT_LE(rec.p_excited, 1.0 + eps);
  }
  EXPECT_TRUE(r.final_state.is_valid());
  EXPECT_EQ(r.records.front().t, 0.0);
  EXPECT_EQ(r.records.back().t, 3000.0);
  EXPECT_NEAR(r.records.back().infidelity, r.final_infidelity, 1e-15);
}

TEST(Simulate, TraceAndHermiticityAfterTenMillionSteps) {
  const auto land = wavy_landscape(10000.0);
  sh::PhysicalParams p;
  p.T1v = 1e5;
  p.kappa_z = 1e-5;
  sh::SimulationOptions opt;
  opt.policy = sh::StepPolicy::fixed(1.0);
  opt.record_points = 10;
  const auto r = sh::simulate(land, sh::ShuttleTrajectory(1.0, 10000.0), p, opt);
  ASSERT_EQ(r.steps, 10000000u);
  EXPECT_LT(std::abs(r.final_state.trace() - 1.0), 1e-9);
  EXPECT_LT(r.final_state.hermiticity_error(), 1e-10);
  EXPECT_GE(r.final_state.min_eigenvalue(), -1e-9);
}

TEST(Simulate, RejectsLargeRelaxationStep) {
  const auto land = wavy_landscape(1000.0);
  sh::PhysicalParams p;
  p.T1v = 1.0;  // 10 ps steps at 1 m/s give dt / T1v = 0.01
  EXPECT_THROW(sh::simulate(land, sh::ShuttleTrajectory(1.0, 1000.0), p), sh::ConfigError);
}

TEST(Simulate, RejectsTrajectoryOutsideLandscape) {
  const auto land = wavy_landscape(1000.0);
  sh::PhysicalParams p;
  EXPECT_THROW(sh::simulate(land, sh::ShuttleTrajectory(5.0, 1000.0, {-600.0}), p), sh::Error);
  EXPECT_THROW(sh::simulate(land, sh::ShuttleTrajectory(5.0, 1500.0), p), sh::Error);
}

TEST(Simulate, DigestsAndDeterminism) {
  const auto land = wavy_landscape(500.0);
  const sh::ShuttleTrajectory tr(5.0, 500.0, {3.0});
  const auto a = sh::simulate(land, tr, sh::PhysicalParams{});
  const auto b = sh::simulate(land, tr, sh::PhysicalParams{});
  EXPECT_EQ(a.final_infidelity, b.final_infidelity);
  EXPECT_EQ(a.trajectory_digest, b.trajectory_digest);
  EXPECT_NE(a.trajectory_digest, sh::trajectory_digest(sh::ShuttleTrajectory(5.0, 500.0, {3.5})));
}

TEST(CoherencePropagator, MatchesFullSimulation) {
  const auto land = wavy_landscape(4000.0);
  sh::PhysicalParams p;
  p.T1v = 1e4;
  p.kappa_z = 5e-5;
  for (bool deph : {false, true}) {
    p.dephasing_enabled = deph;
    const sh::ShuttleTrajectory tr(5.0, 4000.0, {30.0, -20.0, 10.0});
    const double full = sh::simulate(land, tr, p).final_infidelity;
    const double fast = sh::CoherencePropagator(land, p, sh::StepPolicy{}).infidelity(tr);
    EXPECT_NEAR(fast, full, 1e-12 + 1e-10 * std::abs(full));
  }
}
