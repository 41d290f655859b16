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

// Valley landscape from the alloy-disorder model.
//
// A SiGe crystal covering the whole channel is populated site by site with
// Si (probability equal to the mean concentration of the layer) or Ge. For
// each dot position the layer concentrations are averaged with the in-plane
// Gaussian density of the dot, converted to a confinement potential, the
// out-of-plane envelope is solved in that potential, and the intervalley
// coupling is the Fourier component of U |psi|^2 at 2 k0. The sampled
// couplings are joined by natural cubic splines.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/counter_rng.hpp"
#include "shuttle/digest.hpp"
#include "shuttle/spline.hpp"

namespace shuttle {

// --------------------------------------------------------------------------
// Geometry
// --------------------------------------------------------------------------

/// Growth-direction layer spacing (nm).
inline constexpr double kLayerSpacing = constants::a0 / 4.0;
/// In-plane square-grid spacing giving 2 sites per a0^2.
inline const double kSiteSpacing = constants::a0 / std::sqrt(2.0);

/// Layer coordinates covering the well plus the barrier margin on each side.
/// The well occupies [barrier_margin, barrier_margin + well_width].
inline std::vector<double> layer_coordinates(const WellParams& well) {
  const double extent = well.well_width + 2.0 * well.barrier_margin;
  const auto n = static_cast<std::size_t>(std::floor(extent / kLayerSpacing + 1e-9)) + 1;
  std::vector<double> z(n);
  for (std::size_t l = 0; l < n; ++l) z[l] = static_cast<double>(l) * kLayerSpacing;
  return z;
}

inline double well_bottom(const WellParams& well) { return well.barrier_margin; }
inline double well_top(const WellParams& well) { return well.barrier_margin + well.well_width; }
inline double well_center(const WellParams& well) {
  return well.barrier_margin + 0.5 * well.well_width;
}

/// Mean Si fraction at height z: 1 in the well, xi_substrate in the barriers,
/// logistic transitions of width parameter tau at both interfaces.
inline double mean_concentration_profile(double z, const WellParams& well) {
  const double zb = well_bottom(well);
  const double zt = well_top(well);
  auto step = [&](double d) {
    if (well.tau_interface == 0.0) return d > 0.0 ? 1.0 : (d < 0.0 ? 0.0 : 0.5);
    return 1.0 / (1.0 + std::exp(-d / well.tau_interface));
  };
  const double inside = step(z - zb) * step(zt - z);
  return well.xi_substrate + (1.0 - well.xi_substrate) * inside;
}

// --------------------------------------------------------------------------
// Crystal
// --------------------------------------------------------------------------

/// Si/Ge occupancy of a block of the diamond lattice, one square in-plane
/// grid per atomic layer. Site (ix, iy) of the infinite grid sits at
/// (ix * site_spacing, iy * site_spacing); the region stores the index box
/// [ix_begin, ix_begin + nx) x [iy_begin, iy_begin + ny).
class CrystalRegion {
 public:
  CrystalRegion() = default;
  CrystalRegion(std::vector<double> layer_z, std::vector<double> probability, double spacing,
                std::int64_t ix_begin, std::int64_t nx, std::int64_t iy_begin, std::int64_t ny,
                std::uint64_t seed)
      : layer_z_(std::move(layer_z)),
        probability_(std::move(probability)),
        spacing_(spacing),
        ix_begin_(ix_begin),
        nx_(nx),
        iy_begin_(iy_begin),
        ny_(ny),
        words_per_column_((static_cast<std::size_t>(ny) + 63) / 64),
        seed_(seed),
        bits_(layer_z_.size() * static_cast<std::size_t>(nx) * words_per_column_, 0) {}

  std::size_t layers() const { return layer_z_.size(); }
  std::int64_t nx() const { return nx_; }
  std::int64_t ny() const { return ny_; }
  std::int64_t ix_begin() const { return ix_begin_; }
  std::int64_t iy_begin() const { return iy_begin_; }
  double site_spacing() const { return spacing_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> layer_z() const { return layer_z_; }
  std::span<const double> probability() const { return probability_; }

  /// Coordinates of the site with local indices (i, j).
  double site_x(std::int64_t i) const { return static_cast<double>(ix_begin_ + i) * spacing_; }
  double site_y(std::int64_t j) const { return static_cast<double>(iy_begin_ + j) * spacing_; }
  std::size_t sites_per_layer() const {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }

  bool is_si(std::size_t layer, std::int64_t i, std::int64_t j) const {
    const std::uint64_t w = bits_[word_index(layer, i, j)];
    return (w >> (static_cast<std::size_t>(j) & 63)) & 1U;
  }
  void set_si(std::size_t layer, std::int64_t i, std::int64_t j, bool si) {
    std::uint64_t& w = bits_[word_index(layer, i, j)];
    const std::uint64_t mask = std::uint64_t{1} << (static_cast<std::size_t>(j) & 63);
    w = si ? (w | mask) : (w & ~mask);
  }

  /// Number of Si atoms in a layer.
  std::size_t count_si(std::size_t layer) const {
    std::size_t n = 0;
    const std::size_t begin = layer * static_cast<std::size_t>(nx_) * words_per_column_;
    const std::size_t end = begin + static_cast<std::size_t>(nx_) * words_per_column_;
    for (std::size_t k = begin; k < end; ++k) n += static_cast<std::size_t>(__builtin_popcountll(bits_[k]));
    return n;
  }

  /// Raw column words for (layer, i); bit j of the column is site (i, j).
  std::span<const std::uint64_t> column(std::size_t layer, std::int64_t i) const {
    return {bits_.data() + word_index(layer, i, 0), words_per_column_};
  }

  std::uint64_t* column_words(std::size_t layer, std::int64_t i) {
    return bits_.data() + word_index(layer, i, 0);
  }

  static std::size_t bytes_required(std::size_t layers, std::int64_t nx, std::int64_t ny) {
    return layers * static_cast<std::size_t>(nx) * ((static_cast<std::size_t>(ny) + 63) / 64) *
           sizeof(std::uint64_t);
  }

 private:
  std::size_t word_index(std::size_t layer, std::int64_t i, std::int64_t j) const {
    return (layer * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)) *
               words_per_column_ +
           (static_cast<std::size_t>(j) >> 6);
  }

  std::vector<double> layer_z_;
  std::vector<double> probability_;
  double spacing_ = kSiteSpacing;
  std::int64_t ix_begin_ = 0, nx_ = 0, iy_begin_ = 0, ny_ = 0;
  std::size_t words_per_column_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct CrystalOptions {
  /// x-range of dot centres the crystal must serve (nm). Defaults to the device.
  std::optional<double> x_min, x_max;
  /// Round every occupancy probability to 0 or 1.
  bool deterministic = false;
  /// Overrides the mean profile (used for synthetic crystals).
  std::function<double(double)> profile;
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
};

/// Populates a crystal covering the dot positions [x_min, x_max] plus the
/// slice half-width on both sides, and the y-slice around y = 0.
inline CrystalRegion build_crystal(const WellParams& well, std::uint64_t seed,
                                   const CrystalOptions& opt = {}) {
  well.validate();
  const double s = kSiteSpacing;
  const double wx = well.window_x_sigmas * well.sigma_qd;
  const double wy = well.window_y_sigmas * well.sigma_qd;
  const double x_lo = opt.x_min.value_or(0.0) - wx;
  const double x_hi = opt.x_max.value_or(well.device_length) + wx;
  if (!(x_hi > x_lo)) throw Error("build_crystal: empty x-range");

  const auto ix_begin = static_cast<std::int64_t>(std::floor(x_lo / s));
  const auto ix_end = static_cast<std::int64_t>(std::ceil(x_hi / s));
  const auto iy_begin = static_cast<std::int64_t>(std::floor(-wy / s));
  const auto iy_end = static_cast<std::int64_t>(std::ceil(wy / s));
  const std::int64_t nx = ix_end - ix_begin + 1;
  const std::int64_t ny = iy_end - iy_begin + 1;

  std::vector<double> z = layer_coordinates(well);
  const std::size_t bytes = CrystalRegion::bytes_required(z.size(), nx, ny);
  if (bytes > opt.memory_budget_bytes)
    throw Error("build_crystal: region needs " + std::to_string(bytes) +
                " bytes, above the memory budget of " + std::to_string(opt.memory_budget_bytes));

  std::vector<double> p(z.size());
  for (std::size_t l = 0; l < z.size(); ++l) {
    double pl = opt.profile ? opt.profile(z[l]) : mean_concentration_profile(z[l], well);
    if (opt.deterministic) pl = pl >= 0.5 ? 1.0 : 0.0;
    p[l] = std::clamp(pl, 0.0, 1.0);
  }

  CrystalRegion crystal(z, p, s, ix_begin, nx, iy_begin, ny, seed);
  for (std::size_t l = 0; l < z.size(); ++l) {
    const double pl = p[l];
    if (pl <= 0.0) continue;
    // uniform < p  <=>  (hash >> 11) < ceil(p * 2^53)
    const auto threshold = static_cast<std::uint64_t>(std::ceil(pl * 0x1.0p53));
    for (std::int64_t i = 0; i < nx; ++i) {
      const std::uint64_t key = column_key(seed, static_cast<std::int64_t>(l), ix_begin + i);
      std::uint64_t* words = crystal.column_words(l, i);
      for (std::int64_t j0 = 0; j0 < ny; j0 += 64) {
        const std::int64_t j1 = std::min<std::int64_t>(j0 + 64, ny);
        std::uint64_t word = 0;
        for (std::int64_t j = j0; j < j1; ++j) {
          const std::uint64_t bit =
              (mix64(key ^ static_cast<std::uint64_t>(iy_begin + j)) >> 11) < threshold;
          word |= bit << (j - j0);
        }
        words[j0 >> 6] = word;
      }
    }
  }
  return crystal;
}

// --------------------------------------------------------------------------
// Concentration, potential, envelope, coupling
// --------------------------------------------------------------------------

namespace detail {

/// Gaussian in-plane weights along y for the crystal rows, zero outside the slice.
inline std::vector<double> y_weights(const CrystalRegion& c, const WellParams& well) {
  const double wy = well.window_y_sigmas * well.sigma_qd;
  const double inv2s2 = 1.0 / (2.0 * well.sigma_qd * well.sigma_qd);
  std::vector<double> w(static_cast<std::size_t>(c.ny()));
  for (std::int64_t j = 0; j < c.ny(); ++j) {
    const double y = c.site_y(j);
    w[static_cast<std::size_t>(j)] = std::abs(y) <= wy ? std::exp(-y * y * inv2s2) : 0.0;
  }
  return w;
}

inline double weighted_column(std::span<const std::uint64_t> words, std::span<const double> wy) {
  double sum = 0.0;
  for (std::size_t k = 0; k < words.size(); ++k) {
    std::uint64_t w = words[k];
    while (w) {
      const int b = __builtin_ctzll(w);
      sum += wy[k * 64 + static_cast<std::size_t>(b)];
      w &= w - 1;
    }
  }
  return sum;
}

}  // namespace detail

/// Slice-local Si fraction of every layer around the dot centre x_qd,
/// weighted by the in-plane Gaussian density of standard deviation sigma_qd.
inline std::vector<double> local_concentration(const CrystalRegion& crystal, double x_qd,
                                               const WellParams& well) {
  const double wx = well.window_x_sigmas * well.sigma_qd;
  const double inv2s2 = 1.0 / (2.0 * well.sigma_qd * well.sigma_qd);
  const std::vector<double> wy = detail::y_weights(crystal, well);
  double wy_total = 0.0;
  for (double w : wy) wy_total += w;

  std::vector<std::pair<std::int64_t, double>> cols;
  double wx_total = 0.0;
  for (std::int64_t i = 0; i < crystal.nx(); ++i) {
    const double dx = crystal.site_x(i) - x_qd;
    if (std::abs(dx) > wx) continue;
    const double w = std::exp(-dx * dx * inv2s2);
    cols.emplace_back(i, w);
    wx_total += w;
  }
  if (cols.empty() || !(wy_total > 0.0))
    throw Error("local_concentration: empty slice at x = " + std::to_string(x_qd) + " nm");

  std::vector<double> xi(crystal.layers());
  for (std::size_t l = 0; l < crystal.layers(); ++l) {
    double num = 0.0;
    for (auto [i, w] : cols) num += w * detail::weighted_column(crystal.column(l, i), wy);
    xi[l] = num / (wx_total * wy_total);
  }
  return xi;
}

/// Conduction-band profile interpolated linearly between pure Si (0) and the
/// substrate alloy (band_offset).
inline std::vector<double> confinement_potential(std::span<const double> xi,
                                                 const WellParams& well) {
  std::vector<double> u(xi.size());
  const double scale = well.band_offset / (1.0 - well.xi_substrate);
  for (std::size_t l = 0; l < xi.size(); ++l) u[l] = scale * (1.0 - xi[l]);
  return u;
}

struct Envelope {
  double energy;             // meV, includes the field term
  std::vector<double> density;  // |psi|^2 per layer, sums to 1
};

/// Ground state of -hbar^2/(2m) d^2/dz^2 + U(z) + e F (z - z_c) on the layer
/// grid with hard walls outside the first and last layer.
inline Envelope solve_envelope(std::span<const double> u, std::span<const double> layer_z,
                               const WellParams& well) {
  const std::size_t n = u.size();
  if (n < 3 || layer_z.size() != n) throw Error("solve_envelope: need matching grids of >= 3 layers");
  const double dz = layer_z[1] - layer_z[0];
  const double t = constants::hbar2_over_2me / (well.m_perp_rel * dz * dz);
  const double zc = 0.5 * (layer_z.front() + layer_z.back());
  // Field in V/nm times the electron charge gives 1000 * F meV per nm.
  const double slope = 1000.0 * well.E_field;

  std::vector<double> diag(n);
  double lo = 0.0, hi = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    diag[l] = 2.0 * t + u[l] + slope * (layer_z[l] - zc);
    if (l == 0 || diag[l] - 2.0 * t < lo) lo = diag[l] - 2.0 * t;
    if (l == 0 || diag[l] + 2.0 * t > hi) hi = diag[l] + 2.0 * t;
  }
  const double t2 = t * t;

  // Sturm count: number of eigenvalues below x.
  auto count_below = [&](double x) {
    std::size_t c = 0;
    double q = diag[0] - x;
    if (q < 0.0) ++c;
    for (std::size_t l = 1; l < n; ++l) {
      if (q == 0.0) q = 1e-300;
      q = diag[l] - x - t2 / q;
      if (q < 0.0) ++c;
    }
    return c;
  };
  const double scale = std::max(std::abs(lo), std::abs(hi));
  for (int it = 0; it < 200 && hi - lo > 4e-15 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) >= 1) hi = mid;
    else lo = mid;
  }
  const double energy = 0.5 * (lo + hi);

  // Inverse iteration with a shift just below the eigenvalue.
  const double shift = energy - 1e-9 * scale;
  std::vector<double> psi(n, 1.0), c(n), d(n);
  for (int iter = 0; iter < 3; ++iter) {
    c[0] = -t / (diag[0] - shift);
    d[0] = psi[0] / (diag[0] - shift);
    for (std::size_t l = 1; l < n; ++l) {
      const double m = diag[l] - shift + t * c[l - 1];
      c[l] = -t / m;
      d[l] = (psi[l] + t * d[l - 1]) / m;
    }
    psi[n - 1] = d[n - 1];
    for (std::size_t l = n - 1; l-- > 0;) psi[l] = d[l] - c[l] * psi[l + 1];
    double norm = 0.0;
    for (double v : psi) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : psi) v /= norm;
  }

  double residual = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double hv = diag[l] * psi[l];
    if (l > 0) hv -= t * psi[l - 1];
    if (l + 1 < n) hv -= t * psi[l + 1];
    residual += (hv - energy * psi[l]) * (hv - energy * psi[l]);
  }
  residual = std::sqrt(residual);
  if (!(residual < 1e-7 * scale))
    throw Error("solve_envelope: eigen-solver did not converge, residual norm " +
                std::to_string(residual));

  Envelope env{energy, std::vector<double>(n)};
  for (std::size_t l = 0; l < n; ++l) env.density[l] = psi[l] * psi[l];
  return env;
}

/// Sum over layers of exp(-2 i k0 z_l) U_l |psi_l|^2 (meV).
inline std::complex<double> intervalley_coupling(std::span<const double> u,
                                                 std::span<const double> psi_sq,
                                                 std::span<const double> layer_z) {
  if (u.size() != psi_sq.size() || u.size() != layer_z.size())
    throw Error("intervalley_coupling: misaligned layer arrays");
  double re = 0.0, im = 0.0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    const double w = u[l] * psi_sq[l];
    const double arg = -2.0 * constants::k0 * layer_z[l];
    re += w * std::cos(arg);
    im += w * std::sin(arg);
  }
  return {re, im};
}

// --------------------------------------------------------------------------
// Landscape
// --------------------------------------------------------------------------

struct ValleySample {
  double x;         // nm
  double delta_re;  // meV
  double delta_im;  // meV
};

/// Canonical text of the well parameters; also echoed in landscape files.
inline std::string well_params_text(const WellParams& w) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "well_width=%.17g\ntau_interface=%.17g\nxi_substrate=%.17g\nE_field=%.17g\n"
                "band_offset=%.17g\nsigma_qd=%.17g\nsample_spacing=%.17g\ndevice_length=%.17g\n"
                "m_perp_rel=%.17g\nbarrier_margin=%.17g\nwindow_x_sigmas=%.17g\n"
                "window_y_sigmas=%.17g\n",
                w.well_width, w.tau_interface, w.xi_substrate, w.E_field, w.band_offset,
                w.sigma_qd, w.sample_spacing, w.device_length, w.m_perp_rel, w.barrier_margin,
                w.window_x_sigmas, w.window_y_sigmas);
  return buf;
}

inline std::string well_params_digest(const WellParams& w) {
  return sha256_hex(well_params_text(w)).substr(0, 16);
}

/// Sampled complex intervalley coupling with C2 interpolation.
class ValleyLandscape {
 public:
  struct Value {
    double re, im;    // meV
    double dre, dim;  // meV / nm
  };

  ValleyLandscape() = default;
  ValleyLandscape(std::vector<ValleySample> samples, double device_length, std::uint64_t seed,
                  std::string params_digest)
      : samples_(std::move(samples)),
        device_length_(device_length),
        seed_(seed),
        params_digest_(std::move(params_digest)) {
    if (samples_.size() < 2) throw Error("landscape needs at least two samples");
    std::vector<double> x(samples_.size()), re(samples_.size()), im(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      x[i] = samples_[i].x;
      re[i] = samples_[i].delta_re;
      im[i] = samples_[i].delta_im;
    }
    if (x.front() > 0.0 || x.back() < device_length_)
      throw Error("landscape samples do not cover [0, device_length]");
    spline_re_ = CubicSpline(x, re);
    spline_im_ = CubicSpline(x, im);
  }

  /// Landscape with the same coupling everywhere.
  static ValleyLandscape constant(double delta_re, double delta_im, double length,
                                  double spacing = 1.5) {
    const auto n = static_cast<std::size_t>(std::ceil(length / spacing - 1e-9)) + 1;
    std::vector<ValleySample> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = {static_cast<double>(i) * spacing, delta_re, delta_im};
    return ValleyLandscape(std::move(s), length, 0, "constant");
  }

  /// Samples a function Delta(x) on a uniform grid.
  template <class F>
  static ValleyLandscape from_function(F&& delta, double length, double spacing = 1.5,
                                       std::string digest = "synthetic") {
    const auto n = static_cast<std::size_t>(std::ceil(length / spacing - 1e-9)) + 1;
    std::vector<ValleySample> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) * spacing;
      const std::complex<double> d = delta(x);
      s[i] = {x, d.real(), d.imag()};
    }
    return ValleyLandscape(std::move(s), length, 0, std::move(digest));
  }

  double device_length() const { return device_length_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& params_digest() const { return params_digest_; }
  const std::vector<ValleySample>& samples() const { return samples_; }
  const CubicSpline& spline_re() const { return spline_re_; }
  const CubicSpline& spline_im() const { return spline_im_; }

  bool contains(double x) const { return x >= 0.0 && x <= device_length_; }

  /// Spline value and derivative; throws outside [0, device_length].
  Value evaluate(double x) const {
    if (!contains(x))
      throw Error("landscape evaluated outside the device at x = " + std::to_string(x) + " nm");
    return evaluate_unchecked(x);
  }

  Value evaluate_unchecked(double x) const {
    const auto r = spline_re_.evaluate(x);
    const auto i = spline_im_.evaluate(x);
    return {r.value, i.value, r.derivative, i.derivative};
  }

  /// Valley splitting 2|Delta| in meV.
  double valley_splitting(double x) const {
    const auto v = evaluate(x);
    return 2.0 * std::hypot(v.re, v.im);
  }

 private:
  std::vector<ValleySample> samples_;
  double device_length_ = 0.0;
  std::uint64_t seed_ = 0;
  std::string params_digest_;
  CubicSpline spline_re_, spline_im_;
};

struct GenerateOptions {
  CrystalOptions crystal;
};

/// Per-layer weighted column sums of a crystal, reused for every dot position.
class SliceAverager {
 public:
  SliceAverager(const CrystalRegion& crystal, const WellParams& well)
      : crystal_(&crystal), well_(well) {
    std::vector<double> wy = detail::y_weights(crystal, well);
    wy_total_ = 0.0;
    for (double w : wy) wy_total_ += w;

    // Weighted popcount through per-byte tables: table[b][v] is the weight of
    // the set bits of value v placed at byte b of the column.
    const std::size_t words = (static_cast<std::size_t>(crystal.ny()) + 63) / 64;
    const std::size_t nbytes = words * 8;
    wy.resize(nbytes * 8, 0.0);
    std::vector<double> table(nbytes * 256, 0.0);
    for (std::size_t b = 0; b < nbytes; ++b)
      for (unsigned v = 1; v < 256; ++v) {
        const unsigned low = v & (v - 1);
        const int bit = __builtin_ctz(v);
        table[b * 256 + v] = table[b * 256 + low] + wy[b * 8 + static_cast<std::size_t>(bit)];
      }

    colsum_.resize(crystal.layers() * static_cast<std::size_t>(crystal.nx()));
    for (std::size_t l = 0; l < crystal.layers(); ++l)
      for (std::int64_t i = 0; i < crystal.nx(); ++i) {
        const auto col = crystal.column(l, i);
        double sum = 0.0;
        for (std::size_t k = 0; k < col.size(); ++k) {
          std::uint64_t w = col[k];
          for (std::size_t b = 0; b < 8 && w; ++b, w >>= 8)
            sum += table[(k * 8 + b) * 256 + (w & 0xFF)];
        }
        colsum_[l * static_cast<std::size_t>(crystal.nx()) + static_cast<std::size_t>(i)] = sum;
      }
  }

  /// Same result as local_concentration(crystal, x_qd, well).
  std::vector<double> operator()(double x_qd) const {
    const CrystalRegion& c = *crystal_;
    const double wx = well_.window_x_sigmas * well_.sigma_qd;
    const double inv2s2 = 1.0 / (2.0 * well_.sigma_qd * well_.sigma_qd);
    const double s = c.site_spacing();
    auto i_lo = static_cast<std::int64_t>(std::ceil((x_qd - wx) / s)) - c.ix_begin() - 1;
    auto i_hi = static_cast<std::int64_t>(std::floor((x_qd + wx) / s)) - c.ix_begin() + 1;
    i_lo = std::max<std::int64_t>(i_lo, 0);
    i_hi = std::min<std::int64_t>(i_hi, c.nx() - 1);
    std::vector<std::pair<std::size_t, double>> cols;
    double wx_total = 0.0;
    for (std::int64_t i = i_lo; i <= i_hi; ++i) {
      const double dx = c.site_x(i) - x_qd;
      if (std::abs(dx) > wx) continue;
      const double w = std::exp(-dx * dx * inv2s2);
      cols.emplace_back(static_cast<std::size_t>(i), w);
      wx_total += w;
    }
    if (cols.empty() || !(wy_total_ > 0.0))
      throw Error("local_concentration: empty slice at x = " + std::to_string(x_qd) + " nm");
    std::vector<double> xi(c.layers());
    const std::size_t nx = static_cast<std::size_t>(c.nx());
    for (std::size_t l = 0; l < c.layers(); ++l) {
      const double* row = colsum_.data() + l * nx;
      double num = 0.0;
      for (auto [i, w] : cols) num += w * row[i];
      xi[l] = num / (wx_total * wy_total_);
    }
    return xi;
  }

 private:
  const CrystalRegion* crystal_;
  WellParams well_;
  double wy_total_ = 0.0;
  std::vector<double> colsum_;
};

/// Sample positions 0, h, 2h, ... up to the first sample at or beyond L.
inline std::vector<double> sample_positions(const WellParams& well) {
  const auto n = static_cast<std::size_t>(
                     std::ceil(well.device_length / well.sample_spacing - 1e-9)) + 1;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) * well.sample_spacing;
  return x;
}

/// Delta at one dot position of an existing crystal.
inline std::complex<double> coupling_at(const std::vector<double>& xi, const CrystalRegion& crystal,
                                        const WellParams& well) {
  const std::vector<double> u = confinement_potential(xi, well);
  const Envelope env = solve_envelope(u, crystal.layer_z(), well);
  return intervalley_coupling(u, env.density, crystal.layer_z());
}

/// Full pipeline: crystal, slice averages, potential, envelope, coupling, splines.
inline ValleyLandscape generate_landscape(const WellParams& well, std::uint64_t seed,
                                          const GenerateOptions& opt = {}) {
  well.validate();
  const std::vector<double> xs = sample_positions(well);
  CrystalOptions copt = opt.crystal;
  copt.x_min = xs.front();
  copt.x_max = xs.back();
  const CrystalRegion crystal = build_crystal(well, seed, copt);
  const SliceAverager average(crystal, well);

  std::vector<ValleySample> samples(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::complex<double> d = coupling_at(average(xs[i]), crystal, well);
    samples[i] = {xs[i], d.real(), d.imag()};
  }
  return ValleyLandscape(std::move(samples), well.device_length, seed, well_params_digest(well));
}

// --------------------------------------------------------------------------
// Statistics
// --------------------------------------------------------------------------

struct LandscapeStats {
  double ev_mean = 0.0;  // ueV
  double ev_std = 0.0;   // ueV
  std::size_t minima_count = 0;
  double mean_minima_spacing = 0.0;  // nm, 0 when there are no minima
};

/// Valley-splitting statistics on a fixed grid (default 0.1 nm) over the device.
inline LandscapeStats landscape_stats(const ValleyLandscape& land, double grid = 0.1) {
  const double length = land.device_length();
  const auto n = static_cast<std::size_t>(std::floor(length / grid + 1e-9)) + 1;
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::min(static_cast<double>(i) * grid, length);
    const auto v = land.evaluate_unchecked(x);
    ev[i] = 2000.0 * std::hypot(v.re, v.im);
  }
  LandscapeStats st;
  double sum = 0.0;
  for (double e : ev) sum += e;
  st.ev_mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (double e : ev) var += (e - st.ev_mean) * (e - st.ev_mean);
  st.ev_std = std::sqrt(var / static_cast<double>(n));
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (ev[i] < ev[i - 1] && ev[i] < ev[i + 1]) ++st.minima_count;
  st.mean_minima_spacing =
      st.minima_count > 0 ? length / static_cast<double>(st.minima_count) : 0.0;
  return st;
}

/// Pooled statistics over an ensemble: E_V moments over all grid points of
/// all landscapes, minima count averaged per landscape.
struct EnsembleLandscapeStats {
  double ev_mean = 0.0;      // ueV
  double ev_std = 0.0;       // ueV
  double minima_mean = 0.0;  // per landscape
  double minima_std = 0.0;
  std::size_t count = 0;
};

inline EnsembleLandscapeStats pool_landscape_stats(std::span<const LandscapeStats> per) {
  if (per.empty()) throw Error("pool_landscape_stats: no landscapes");
  EnsembleLandscapeStats e;
  e.count = per.size();
  const double n = static_cast<double>(per.size());
  for (const auto& s : per) {
    e.ev_mean += s.ev_mean / n;
    e.minima_mean += static_cast<double>(s.minima_count) / n;
  }
  double var = 0.0, mvar = 0.0;
  for (const auto& s : per) {
    var += (s.ev_std * s.ev_std + (s.ev_mean - e.ev_mean) * (s.ev_mean - e.ev_mean)) / n;
    const double dm = static_cast<double>(s.minima_count) - e.minima_mean;
    mvar += dm * dm / n;
  }
  e.ev_std = std::sqrt(var);
  e.minima_std = std::sqrt(mvar);
  return e;
}

}  // namespace shuttle
