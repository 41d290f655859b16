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

#include <filesystem>

#include "shuttle/config.hpp"
#include "shuttle/digest.hpp"
#include "shuttle/io/tables.hpp"

namespace sh = shuttle;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("shuttle_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const sh::Config c;
  const std::string ini = c.to_ini();
  const sh::Config back = sh::Config::parse(ini);
  EXPECT_EQ(back.to_ini(), ini);
  EXPECT_EQ(back.well.band_offset, sh::kCalibratedBandOffset);
}

TEST(Config, ParsesValuesAndLists) {
  const auto c = sh::Config::parse(
      "[physical]\nkappa_z = derived\nT1v = 1e5\ndephasing = true\n"
      "[simulation]\nspeeds = 1, 5, 50\nkappa_z = 1e-7,1e-6\n"
      "[optimizer]\nM = 1,4,9\ngradient = finite_difference\ncoefficient_bound = 500\n"
      "[generate]\nn_landscapes = 3\nseed_base = 7\n");
  EXPECT_FALSE(c.physical.kappa_z.has_value());
  EXPECT_NEAR(sh::effective_kappa_z(c.physical), sh::derive_kappa_z(c.physical), 1e-20);
  EXPECT_EQ(c.physical.T1v, 1e5);
  EXPECT_TRUE(c.physical.dephasing_enabled);
  EXPECT_EQ(c.simulation.speeds, (std::vector<double>{1.0, 5.0, 50.0}));
  EXPECT_EQ(c.simulation.kappa_values.size(), 2u);
  EXPECT_EQ(c.optimizer.M_values, (std::vector<std::size_t>{1, 4, 9}));
  EXPECT_EQ(c.optimizer.mode, sh::GradientMode::FiniteDifference);
  EXPECT_EQ(*c.optimizer.coefficient_bound, 500.0);
  EXPECT_EQ(c.generate.n_landscapes, 3);
  EXPECT_EQ(c.generate.seed_base, 7u);
  EXPECT_EQ(sh::Config::parse(c.to_ini()).to_ini(), c.to_ini());
}

TEST(Config, RejectsUnknownAndInvalidEntries) {
  EXPECT_THROW(sh::Config::parse("[physical]\nBz = 1\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[physics]\nB_z = 1\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[physical]\nB_z = abc\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[physical]\nB_z = -1\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[optimizer]\nM = 0\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[optimizer]\ngradient = magic\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[generate]\nn_landscapes = 2.5\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::parse("[well]\nxi_substrate = 1.5\n"), sh::ConfigError);
  EXPECT_THROW(sh::Config::load("/nonexistent/config.ini"), sh::ConfigError);
}

TEST(Tables, RoundTripAndVersionCheck) {
  sh::io::Table t;
  t.kind = "demo";
  t.set("alpha", 0.1);
  t.set("name", "x");
  t.columns = {"a", "b"};
  t.add_row({1.0, 1.0 / 3.0});
  const auto back = sh::io::Table::parse(t.to_string(), "demo");
  EXPECT_EQ(back.get("name"), "x");
  EXPECT_EQ(back.get_number("alpha"), 0.1);
  EXPECT_EQ(back.number(0, back.column("b")), 1.0 / 3.0);
  EXPECT_THROW(back.get("missing"), sh::io::IoError);
  EXPECT_THROW(sh::io::Table::parse(t.to_string(), "other"), sh::io::IoError);

  std::string future = t.to_string();
  future.replace(future.find("format_version = 1"), 18, "format_version = 9");
  try {
    sh::io::Table::parse(future, "demo");
    FAIL() << "expected a version error";
  } catch (const sh::io::IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("9"), std::string::npos);
    EXPECT_NE(msg.find("1"), std::string::npos);
  }
}

TEST(Tables, LandscapeFileRoundTripIsExactAndDeterministic) {
  const fs::path dir = scratch_dir("landscape");
  sh::WellParams w = sh::calibrated_well_params();
  w.device_length = 60.0;
  const auto land = sh::generate_landscape(w, 31);
  sh::io::write_landscape(dir / "a.csv", land, w);
  sh::io::write_landscape(dir / "b.csv", sh::generate_landscape(w, 31), w);
  EXPECT_EQ(sh::file_sha256(dir / "a.csv"), sh::file_sha256(dir / "b.csv"));
  EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));

  const auto back = sh::io::read_landscape(dir / "a.csv");
  ASSERT_EQ(back.samples().size(), land.samples().size());
  for (std::size_t i = 0; i < land.samples().size(); ++i) {
    EXPECT_EQ(back.samples()[i].x, land.samples()[i].x);
    EXPECT_EQ(back.samples()[i].delta_re, land.samples()[i].delta_re);
    EXPECT_EQ(back.samples()[i].delta_im, land.samples()[i].delta_im);
  }
  EXPECT_EQ(back.seed(), 31u);
  EXPECT_EQ(back.params_digest(), land.params_digest());
  EXPECT_EQ(back.device_length(), 60.0);
  EXPECT_THROW(sh::io::read_table(dir / "missing.csv", "landscape"), sh::io::IoError);
  fs::remove_all(dir);
}

TEST(Tables, OptimizationLogCarriesCoefficients) {
  sh::OptimizationResult r;
  r.u_star = {1.5, -2.25, 1e-300};
  r.cost = 0.01;
  r.initial_cost = 0.2;
  r.cost_history = {0.2, 0.01};
  r.grad_norm_history = {1.0, 0.1};
  r.evaluation_history = {1, 3};
  r.termination = sh::Termination::CostTarget;
  const auto t = sh::io::Table::parse(sh::io::optimization_log(r).to_string(), "optimization_log");
  EXPECT_EQ(sh::io::parse_coefficients(t.get("u_star")), r.u_star);
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.get("termination"), sh::to_string(sh::Termination::CostTarget));
}
