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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "shuttle/digest.hpp"
#include "shuttle/io/tables.hpp"

namespace sh = shuttle;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string output;
};

const fs::path& workdir() {
  static const fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "shuttle_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

Outcome run(const std::string& args) {
  const fs::path log = workdir() / "last_output.txt";
  const std::string cmd = std::string(SHUTTLE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, sh::io::read_text(log)};
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = workdir() / name;
  sh::io::write_atomic(p, text);
  return p;
}

const std::string kShortDevice =
    "[well]\ndevice_length = 60\n[generate]\nn_landscapes = 1\nseed_base = 5\n"
    "[simulation]\nspeeds = 5\nlength = 60\nrecord_points = 20\n"
    "[optimizer]\nM = 2\nmax_iterations = 3\n";

fs::path flat_landscape() {
  const fs::path p = workdir() / "flat.csv";
  if (!fs::exists(p)) {
    sh::WellParams w = sh::calibrated_well_params();
    w.device_length = 60.0;
    sh::io::write_landscape(p, sh::ValleyLandscape::constant(0.043, 0.01, 60.0), w);
  }
  return p;
}

}  // namespace

TEST(Cli, NothingToGenerateIsConfigurationError) {
  const auto r = run("--out " + (workdir() / "empty").string() + " generate -n 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("nothing to generate"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyIsConfigurationError) {
  const auto cfg = write_config("bad.ini", "[physical]\nmagnetic_field = 1\n");
  const auto r = run("--config " + cfg.string() + " --out " + (workdir() / "bad").string() + " diagnose");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("magnetic_field"), std::string::npos);
}

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run("frobnicate").code, 2); }

TEST(Cli, GenerateIsDeterministic) {
  const auto cfg = write_config("short.ini", kShortDevice);
  const fs::path a = workdir() / "gen_a", b = workdir() / "gen_b";
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + a.string() + " generate").code, 0);
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + b.string() + " generate").code, 0);
  const fs::path f = "landscapes/landscape_5.csv";
  ASSERT_TRUE(fs::exists(a / f));
  EXPECT_EQ(sh::file_sha256(a / f), sh::file_sha256(b / f));

  std::ifstream in(a / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["command"], "generate");
  bool listed = false;
  for (const auto& o : j["outputs"])
    if (o["path"] == (a / f).string()) {
      listed = true;
      EXPECT_EQ(o["sha256"], sh::file_sha256(a / f));
    }
  EXPECT_TRUE(listed);
  EXPECT_EQ(j["tasks"].size(), 1u);

  // --seed overrides the configured base seed.
  const fs::path c = workdir() / "gen_c";
  ASSERT_EQ(run("--config " + cfg.string() + " --seed 9 --out " + c.string() + " generate").code, 0);
  EXPECT_TRUE(fs::exists(c / "landscapes/landscape_9.csv"));
}

TEST(Cli, SimulateFlatLandscapeThenStats) {
  const auto cfg = write_config("short.ini", kShortDevice);
  const fs::path out = workdir() / "sim";
  const auto r = run("--config " + cfg.string() + " --out " + out.string() + " simulate " +
                     flat_landscape().string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("warning"), std::string::npos);  // digest differs from the configuration

  const auto sum = sh::io::read_table(out / "simulation_summary.csv", "simulation_summary");
  const auto q = sum.column("quantity"), v = sum.column("value");
  for (std::size_t i = 0; i < sum.rows.size(); ++i)
    if (sum.rows[i][q] == "final_infidelity") {
      EXPECT_LT(std::abs(sum.number(i, v)), 1e-9);
    }

  std::vector<fs::path> sims;
  for (const auto& e : fs::directory_iterator(out / "simulations")) sims.push_back(e.path());
  ASSERT_EQ(sims.size(), 1u);
  const fs::path st = workdir() / "stats";
  ASSERT_EQ(run("--out " + st.string() + " stats " + sims[0].string()).code, 0);
  bool csv = false, svg = false;
  for (const auto& e : fs::directory_iterator(st / "stats")) {
    csv = csv || e.path().extension() == ".csv";
    svg = svg || e.path().extension() == ".svg";
  }
  EXPECT_TRUE(csv);
  EXPECT_TRUE(svg);
}

TEST(Cli, StatsErrors) {
  EXPECT_EQ(run("--out " + (workdir() / "st_empty").string() + " stats").code, 2);

  sh::io::Table t;
  t.kind = "simulation";
  t.columns = {"t_ns"};
  std::string text = t.to_string();
  text.replace(text.find("format_version = 1"), 18, "format_version = 7");
  const fs::path bad = workdir() / "future.csv";
  sh::io::write_atomic(bad, text);
  const auto r = run("--out " + (workdir() / "st_bad").string() + " stats " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("version 7"), std::string::npos);
}

TEST(Cli, FailedTaskGivesExitOne) {
  // The trajectory is longer than the landscape.
  const auto cfg = write_config("long.ini", "[simulation]\nspeeds = 5\nlength = 100\n");
  const auto r = run("--config " + cfg.string() + " --out " + (workdir() / "fail").string() + " simulate " +
                     flat_landscape().string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("failed"), std::string::npos);
}

TEST(Cli, OptimizeAndDiagnose) {
  const auto cfg = write_config("short.ini", kShortDevice);
  const fs::path gen = workdir() / "gen_a";
  if (!fs::exists(gen / "landscapes/landscape_5.csv")) {
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + gen.string() + " generate").code, 0);
  }
  const std::string land = (gen / "landscapes/landscape_5.csv").string();
  const fs::path out = workdir() / "opt";
  const auto r = run("--config " + cfg.string() + " --jobs 2 --out " + out.string() + " optimize " + land);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto sum = sh::io::read_table(out / "optimization_summary.csv", "optimization_summary");
  EXPECT_FALSE(sum.rows.empty());

  const fs::path d = workdir() / "diag";
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + d.string() + " diagnose " + land).code, 0);
  const auto t = sh::io::read_table(d / "diagnostics.csv", "diagnostics");
  EXPECT_EQ(t.rows.size(), 2u);
}
