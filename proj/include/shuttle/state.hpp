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

// Valley (x) spin state. Basis index = 2 * valley + spin with valley 0 = |+k0>,
// 1 = |-k0> and spin 0 = up (sigma_z = +1), 1 = down.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "shuttle/constants.hpp"

namespace shuttle {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr cplx I{0.0, 1.0};

/// exp(i phi) of the intervalley coupling; phi = 0 when Delta vanishes.
inline cplx valley_phase(double delta_re, double delta_im) {
  const double r = std::hypot(delta_re, delta_im);
  if (r == 0.0) return {1.0, 0.0};
  return {delta_re / r, delta_im / r};
}

/// Local valley eigenstates (|+k0> -+ e^{i phi}|-k0>)/sqrt(2).
inline Vec2 valley_ground(cplx eiphi) { return Vec2(1.0, -eiphi) / std::sqrt(2.0); }
inline Vec2 valley_excited(cplx eiphi) { return Vec2(1.0, eiphi) / std::sqrt(2.0); }

/// Spin-block view of a 4x4 state: block(s, s')_{v v'} = rho_{(v s), (v' s')}.
struct SpinBlocks {
  Mat2 uu, dd, ud;  // du = ud^dagger

  Mat4 to_matrix() const {
    Mat4 m;
    for (int v = 0; v < 2; ++v)
      for (int w = 0; w < 2; ++w) {
        m(2 * v, 2 * w) = uu(v, w);
        m(2 * v + 1, 2 * w + 1) = dd(v, w);
        m(2 * v, 2 * w + 1) = ud(v, w);
        m(2 * v + 1, 2 * w) = std::conj(ud(w, v));
      }
    return m;
  }

  static SpinBlocks from_matrix(const Mat4& m) {
    SpinBlocks b;
    for (int v = 0; v < 2; ++v)
      for (int w = 0; w < 2; ++w) {
        b.uu(v, w) = m(2 * v, 2 * w);
        b.dd(v, w) = m(2 * v + 1, 2 * w + 1);
        b.ud(v, w) = m(2 * v, 2 * w + 1);
      }
    return b;
  }
};

/// 4x4 density matrix of valley (x) spin.
class DensityMatrix4 {
 public:
  DensityMatrix4() : m_(Mat4::Zero()) {}
  explicit DensityMatrix4(const Mat4& m) : m_(m) {}

  /// rho_valley (x) rho_spin.
  static DensityMatrix4 product(const Mat2& valley, const Mat2& spin) {
    Mat4 m;
    for (int v = 0; v < 2; ++v)
      for (int w = 0; w < 2; ++w)
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t) m(2 * v + s, 2 * w + t) = valley(v, w) * spin(s, t);
    return DensityMatrix4(m);
  }

  static DensityMatrix4 pure(const Eigen::Vector4cd& psi) {
    return DensityMatrix4(psi * psi.adjoint());
  }

  const Mat4& matrix() const { return m_; }
  Mat4& matrix() { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  /// Spin state, trace over valley.
  Mat2 spin_state() const {
    Mat2 r;
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) r(s, t) = m_(s, t) + m_(2 + s, 2 + t);
    return r;
  }

  /// Valley state, trace over spin.
  Mat2 valley_state() const {
    Mat2 r;
    for (int v = 0; v < 2; ++v)
      for (int w = 0; w < 2; ++w) r(v, w) = m_(2 * v, 2 * w) + m_(2 * v + 1, 2 * w + 1);
    return r;
  }

  double trace() const { return m_.trace().real(); }
  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  bool all_finite() const { return m_.allFinite(); }

  /// Hermitian, unit trace and positive within the given tolerances.
  bool is_valid(double herm_tol = 1e-10, double trace_tol = 1e-9, double pos_tol = 1e-9) const {
    return all_finite() && hermiticity_error() <= herm_tol &&
           std::abs(trace() - 1.0) <= trace_tol && min_eigenvalue() >= -pos_tol;
  }

 private:
  Mat4 m_;
};

/// Pauli matrices.
inline Mat2 pauli_x() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 pauli_y() { Mat2 m; m << 0, -I, I, 0; return m; }
inline Mat2 pauli_z() { Mat2 m; m << 1, 0, 0, -1; return m; }

/// Kronecker product with the valley factor outer.
inline Mat4 kron(const Mat2& valley, const Mat2& spin) {
  return DensityMatrix4::product(valley, spin).matrix();
}

}  // namespace shuttle
