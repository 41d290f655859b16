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

// INI run configuration. Sections: [physical], [well], [generate],
// [simulation], [optimizer], [hotspot]. Unknown sections or keys are errors.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/dynamics.hpp"
#include "shuttle/lbfgs.hpp"
#include "shuttle/optimizer.hpp"

namespace shuttle {

struct GenerateConfig {
  int n_landscapes = 20;
  std::uint64_t seed_base = 1000;
};

struct SimulationConfig {
  std::vector<double> speeds{1.0};           // m/s
  std::vector<double> T1v_values{1e6};       // ns
  std::vector<double> kappa_values{1e-6};    // meV
  double length = 10000.0;                   // nm, <= landscape length
  std::size_t record_points = 1000;
  double dt_scale = 1.0;
  std::vector<double> quantiles{0.25, 0.5, 0.75};
};

struct OptimizerConfig {
  std::vector<std::size_t> M_values{9};
  GradientMode mode = GradientMode::Adjoint;
  LbfgsOptions stopping;
  double fd_step = 1e-3;
  std::optional<double> coefficient_bound;
};

struct HotspotConfig {
  double Gamma_v = 1e-5;  // 1/ns
  double Delta_so = 6.0;  // ueV
  std::vector<double> speeds{1.0, 5.0};
};

struct Config {
  PhysicalParams physical;
  WellParams well = calibrated_well_params();
  GenerateConfig generate;
  SimulationConfig simulation;
  OptimizerConfig optimizer;
  HotspotConfig hotspot;

  void validate() const;
  std::string to_ini() const;
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) s += fmt(v[i]);
    else s += std::to_string(v[i]);
  }
  return s;
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (text.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(parse_double(key, item.substr(b)));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

}  // namespace detail

inline void Config::validate() const {
  physical.validate();
  well.validate();
  if (generate.n_landscapes < 0) throw ConfigError("generate.n_landscapes must be >= 0");
  for (double v : simulation.speeds)
    if (!(v > 0.0)) throw ConfigError("simulation.speeds must be positive");
  for (double t : simulation.T1v_values)
    if (!(t > 0.0)) throw ConfigError("simulation.T1v values must be positive");
  for (double k : simulation.kappa_values)
    if (!(k >= 0.0)) throw ConfigError("simulation.kappa_z values must be non-negative");
  if (!(simulation.length > 0.0)) throw ConfigError("simulation.length must be positive");
  if (!(simulation.dt_scale > 0.0)) throw ConfigError("simulation.dt_scale must be positive");
  for (double q : simulation.quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantiles must lie in [0, 1]");
  for (std::size_t m : optimizer.M_values)
    if (m < 1) throw ConfigError("optimizer.M values must be >= 1");
  if (optimizer.stopping.memory < 1) throw ConfigError("optimizer.memory must be >= 1");
  if (optimizer.stopping.max_iterations < 0) throw ConfigError("optimizer.max_iterations must be >= 0");
  if (!(optimizer.fd_step > 0.0)) throw ConfigError("optimizer.fd_step must be positive");
  if (!(hotspot.Gamma_v > 0.0 && hotspot.Delta_so > 0.0))
    throw ConfigError("hotspot parameters must be positive");
}

inline std::string Config::to_ini() const {
  using detail::fmt;
  using detail::join;
  std::ostringstream o;
  const PhysicalParams& p = physical;
  o << "[physical]\n"
    << "B_z = " << fmt(p.B_z) << "\n"
    << "g_bar = " << fmt(p.g_bar) << "\n"
    << "delta_g_rel = " << fmt(p.delta_g_rel) << "\n"
    << "kappa_z = " << (p.kappa_z ? fmt(*p.kappa_z) : std::string("derived")) << "\n"
    << "T1v = " << fmt(p.T1v) << "\n"
    << "T2_star = " << fmt(p.T2_star) << "\n"
    << "l_c = " << fmt(p.l_c) << "\n"
    << "dephasing = " << (p.dephasing_enabled ? "true" : "false") << "\n";
  if (p.T_phi_override) o << "T_phi = " << fmt(*p.T_phi_override) << "\n";
  const WellParams& w = well;
  o << "\n[well]\n"
    << "well_width = " << fmt(w.well_width) << "\n"
    << "tau_interface = " << fmt(w.tau_interface) << "\n"
    << "xi_substrate = " << fmt(w.xi_substrate) << "\n"
    << "E_field = " << fmt(w.E_field) << "\n"
    << "band_offset = " << fmt(w.band_offset) << "\n"
    << "sigma_qd = " << fmt(w.sigma_qd) << "\n"
    << "sample_spacing = " << fmt(w.sample_spacing) << "\n"
    << "device_length = " << fmt(w.device_length) << "\n"
    << "m_perp_rel = " << fmt(w.m_perp_rel) << "\n"
    << "barrier_margin = " << fmt(w.barrier_margin) << "\n"
    << "window_x_sigmas = " << fmt(w.window_x_sigmas) << "\n"
    << "window_y_sigmas = " << fmt(w.window_y_sigmas) << "\n";
  o << "\n[generate]\n"
    << "n_landscapes = " << generate.n_landscapes << "\n"
    << "seed_base = " << generate.seed_base << "\n";
  const SimulationConfig& s = simulation;
  o << "\n[simulation]\n"
    << "speeds = " << join(s.speeds) << "\n"
    << "T1v = " << join(s.T1v_values) << "\n"
    << "kappa_z = " << join(s.kappa_values) << "\n"
    << "length = " << fmt(s.length) << "\n"
    << "record_points = " << s.record_points << "\n"
    << "dt_scale = " << fmt(s.dt_scale) << "\n"
    << "quantiles = " << join(s.quantiles) << "\n";
  const OptimizerConfig& op = optimizer;
  o << "\n[optimizer]\n"
    << "M = " << join(op.M_values) << "\n"
    << "gradient = " << (op.mode == GradientMode::Adjoint ? "adjoint" : "finite_difference") << "\n"
    << "memory = " << op.stopping.memory << "\n"
    << "max_iterations = " << op.stopping.max_iterations << "\n"
    << "gradient_tolerance = " << fmt(op.stopping.gradient_tolerance) << "\n"
    << "cost_target = " << fmt(op.stopping.cost_target) << "\n"
    << "relative_reduction = " << fmt(op.stopping.relative_reduction) << "\n"
    << "fd_step = " << fmt(op.fd_step) << "\n";
  if (op.coefficient_bound) o << "coefficient_bound = " << fmt(*op.coefficient_bound) << "\n";
  o << "\n[hotspot]\n"
    << "Gamma_v = " << fmt(hotspot.Gamma_v) << "\n"
    << "Delta_so = " << fmt(hotspot.Delta_so) << "\n"
    << "speeds = " << join(hotspot.speeds) << "\n";
  return o.str();
}

inline Config Config::parse(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  Config c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](double& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = detail::parse_double(k, v); });
  };
  auto list = [](std::vector<double>& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = detail::parse_list(k, v); });
  };
  auto integer = [](auto& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) {
      const double d = detail::parse_double(k, v);
      if (d != std::floor(d) || d < 0) throw ConfigError("config key '" + k + "' must be a non-negative integer");
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(d);
    });
  };

  PhysicalParams& p = c.physical;
  WellParams& w = c.well;
  SimulationConfig& s = c.simulation;
  OptimizerConfig& op = c.optimizer;
  std::map<std::string, std::map<std::string, Setter>> keys;
  keys["physical"] = {
      {"B_z", num(p.B_z)},
      {"g_bar", num(p.g_bar)},
      {"delta_g_rel", num(p.delta_g_rel)},
      {"kappa_z", [&p](const std::string& k, const std::string& v) {
         if (v == "derived") p.kappa_z.reset();
         else p.kappa_z = detail::parse_double(k, v);
       }},
      {"T1v", num(p.T1v)},
      {"T2_star", num(p.T2_star)},
      {"l_c", num(p.l_c)},
      {"dephasing", [&p](const std::string& k, const std::string& v) { p.dephasing_enabled = detail::parse_bool(k, v); }},
      {"T_phi", [&p](const std::string& k, const std::string& v) { p.T_phi_override = detail::parse_double(k, v); }},
  };
  keys["well"] = {
      {"well_width", num(w.well_width)},         {"tau_interface", num(w.tau_interface)},
      {"xi_substrate", num(w.xi_substrate)},     {"E_field", num(w.E_field)},
      {"band_offset", num(w.band_offset)},       {"sigma_qd", num(w.sigma_qd)},
      {"sample_spacing", num(w.sample_spacing)}, {"device_length", num(w.device_length)},
      {"m_perp_rel", num(w.m_perp_rel)},         {"barrier_margin", num(w.barrier_margin)},
      {"window_x_sigmas", num(w.window_x_sigmas)}, {"window_y_sigmas", num(w.window_y_sigmas)},
  };
  keys["generate"] = {
      {"n_landscapes", integer(c.generate.n_landscapes)},
      {"seed_base", integer(c.generate.seed_base)},
  };
  keys["simulation"] = {
      {"speeds", list(s.speeds)},
      {"T1v", list(s.T1v_values)},
      {"kappa_z", list(s.kappa_values)},
      {"length", num(s.length)},
      {"record_points", integer(s.record_points)},
      {"dt_scale", num(s.dt_scale)},
      {"quantiles", list(s.quantiles)},
  };
  keys["optimizer"] = {
      {"M", [&op](const std::string& k, const std::string& v) {
         op.M_values.clear();
         for (double m : detail::parse_list(k, v)) {
           if (m != std::floor(m) || m < 1) throw ConfigError("optimizer.M values must be positive integers");
           op.M_values.push_back(static_cast<std::size_t>(m));
         }
       }},
      {"gradient", [&op](const std::string& k, const std::string& v) {
         if (v == "adjoint") op.mode = GradientMode::Adjoint;
         else if (v == "finite_difference") op.mode = GradientMode::FiniteDifference;
         else throw ConfigError("config key '" + k + "': expected adjoint or finite_difference");
       }},
      {"memory", integer(op.stopping.memory)},
      {"max_iterations", integer(op.stopping.max_iterations)},
      {"gradient_tolerance", num(op.stopping.gradient_tolerance)},
      {"cost_target", num(op.stopping.cost_target)},
      {"relative_reduction", num(op.stopping.relative_reduction)},
      {"fd_step", num(op.fd_step)},
      {"coefficient_bound", [&op](const std::string& k, const std::string& v) { op.coefficient_bound = detail::parse_double(k, v); }},
  };
  keys["hotspot"] = {
      {"Gamma_v", num(c.hotspot.Gamma_v)},
      {"Delta_so", num(c.hotspot.Delta_so)},
      {"speeds", list(c.hotspot.speeds)},
  };

  for (const auto& [section, body] : tree) {
    const auto sec = keys.find(section);
    if (sec == keys.end()) {
      if (body.empty()) throw ConfigError("config key '" + section + "' outside any section");
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end())
        throw ConfigError("unknown config key '" + key + "' in [" + section + "]");
      setter->second(section + "." + key, node.get_value<std::string>());
    }
  }
  c.validate();
  return c;
}

inline Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace shuttle
