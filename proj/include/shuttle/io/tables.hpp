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

// Text tables: "# key = value" metadata lines, one CSV header line, CSV rows.
// Every table carries kind and format_version, checked on read.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shuttle/constants.hpp"
#include "shuttle/dynamics.hpp"
#include "shuttle/landscape.hpp"
#include "shuttle/optimizer.hpp"

namespace shuttle::io {

inline constexpr int kFormatVersion = 1;

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : meta)
      if (k == key) {
        v = value;
        return;
      }
    meta.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, num(value)); }

  const std::string& get(const std::string& key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    throw IoError("table of kind '" + kind + "' has no metadata key '" + key + "'");
  }
  bool has(const std::string& key) const {
    for (const auto& kv : meta)
      if (kv.first == key) return true;
    return false;
  }
  double get_number(const std::string& key) const { return std::stod(get(key)); }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw IoError("table of kind '" + kind + "' has no column '" + name + "'");
  }
  double number(std::size_t row, std::size_t col) const { return std::stod(rows.at(row).at(col)); }

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> r;
    r.reserve(values.size());
    for (double v : values) r.push_back(num(v));
    rows.push_back(std::move(r));
  }

  std::string to_string() const {
    std::ostringstream o;
    o << "# kind = " << kind << "\n# format_version = " << kFormatVersion << "\n";
    for (const auto& [k, v] : meta) o << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
    o << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << "\n";
    }
    return o.str();
  }

  static Table parse(const std::string& text, const std::string& expected_kind,
                     const std::string& origin = "<memory>") {
    Table t;
    std::istringstream in(text);
    std::string line;
    int version = -1;
    bool have_header = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos || eq < 2) continue;
        const std::string key = line.substr(2, eq - 2);
        const std::string value = line.substr(eq + 3);
        if (key == "kind") t.kind = value;
        else if (key == "format_version") version = std::stoi(value);
        else t.meta.emplace_back(key, value);
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (!have_header) {
        t.columns = std::move(cells);
        have_header = true;
      } else {
        if (cells.size() != t.columns.size())
          throw IoError(origin + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(t.columns.size()));
        t.rows.push_back(std::move(cells));
      }
    }
    if (t.kind != expected_kind)
      throw IoError(origin + ": expected a '" + expected_kind + "' table, found '" + t.kind + "'");
    if (version != kFormatVersion)
      throw IoError(origin + ": format version " + std::to_string(version) +
                    " is not supported (this build reads version " +
                    std::to_string(kFormatVersion) + ")");
    if (!have_header) throw IoError(origin + ": missing column header");
    return t;
  }
};

/// Writes through a temporary file and renames, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_table(const std::filesystem::path& path, const Table& t) {
  write_atomic(path, t.to_string());
}

inline Table read_table(const std::filesystem::path& path, const std::string& kind) {
  return Table::parse(read_text(path), kind, path.string());
}

// ---------------------------------------------------------------------------
// Landscapes
// ---------------------------------------------------------------------------

inline Table landscape_table(const ValleyLandscape& land, const WellParams& well) {
  Table t;
  t.kind = "landscape";
  t.set("seed", std::to_string(land.seed()));
  t.set("params_digest", land.params_digest());
  t.set("device_length", land.device_length());
  std::istringstream params(well_params_text(well));
  std::string line;
  while (std::getline(params, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    t.set("well." + line.substr(0, eq), line.substr(eq + 1));
  }
  t.columns = {"x_nm", "delta_re_meV", "delta_im_meV"};
  for (const auto& s : land.samples()) t.add_row({s.x, s.delta_re, s.delta_im});
  return t;
}

inline ValleyLandscape landscape_from_table(const Table& t) {
  const std::size_t cx = t.column("x_nm"), cr = t.column("delta_re_meV"), ci = t.column("delta_im_meV");
  std::vector<ValleySample> s(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    s[i] = {t.number(i, cx), t.number(i, cr), t.number(i, ci)};
  return ValleyLandscape(std::move(s), t.get_number("device_length"),
                         std::stoull(t.get("seed")), t.get("params_digest"));
}

inline void write_landscape(const std::filesystem::path& path, const ValleyLandscape& land,
                            const WellParams& well) {
  write_table(path, landscape_table(land, well));
}

inline ValleyLandscape read_landscape(const std::filesystem::path& path) {
  return landscape_from_table(read_table(path, "landscape"));
}

// ---------------------------------------------------------------------------
// Simulation and optimization results
// ---------------------------------------------------------------------------

inline Table simulation_table(const SimulationResult& r, const ShuttleTrajectory& traj,
                              const PhysicalParams& p) {
  Table t;
  t.kind = "simulation";
  t.set("seed", std::to_string(r.seed));
  t.set("params_digest", r.params_digest);
  t.set("trajectory_digest", r.trajectory_digest);
  t.set("trajectory", trajectory_text(traj));
  t.set("speed", traj.speed());
  t.set("T1v", p.T1v);
  t.set("kappa_z", effective_kappa_z(p));
  t.set("dephasing", p.dephasing_enabled ? "true" : "false");
  t.set("T_phi", r.T_phi);
  t.set("dt_ns", r.dt_ns);
  t.set("steps", std::to_string(r.steps));
  t.set("final_infidelity", r.final_infidelity);
  t.columns = {"t_ns", "x_nm", "infidelity", "p_excited", "purity_total", "purity_spin"};
  for (const auto& rec : r.records)
    t.add_row({rec.t, rec.x, rec.infidelity, rec.p_excited, rec.purity_total, rec.purity_spin});
  return t;
}

inline Table optimization_log(const OptimizationResult& r) {
  Table t;
  t.kind = "optimization_log";
  t.set("termination", to_string(r.termination));
  t.set("initial_cost", r.initial_cost);
  t.set("cost", r.cost);
  std::string u;
  for (std::size_t i = 0; i < r.u_star.size(); ++i) u += (i ? "," : "") + num(r.u_star[i]);
  t.set("u_star", u);
  t.set("n_cost_evals", std::to_string(r.n_cost_evals));
  t.set("wall_seconds", r.wall_seconds);
  t.columns = {"iter", "cost", "grad_norm", "n_cost_evals"};
  for (std::size_t i = 0; i < r.cost_history.size(); ++i)
    t.add_row({static_cast<double>(i), r.cost_history[i], r.grad_norm_history[i],
               static_cast<double>(r.evaluation_history[i])});
  return t;
}

/// Parses the comma-separated u_star metadata of an optimization log.
inline std::vector<double> parse_coefficients(const std::string& text) {
  std::vector<double> u;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) u.push_back(std::stod(item));
  return u;
}

}  // namespace shuttle::io
