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

// Run manifest: configuration snapshot, seeds, file digests and task timings.

#include <algorithm>
#include <filesystem>
#include <json.hpp>
#include <mutex>
#include <string>
#include <vector>

#include "shuttle/digest.hpp"
#include "shuttle/io/tables.hpp"

namespace shuttle::io {

inline constexpr const char* kToolVersion = "1.0.0";

struct TaskRecord {
  std::string name;
  std::uint64_t seed = 0;
  bool ok = true;
  double wall_seconds = 0.0;
  std::string error;
};

class RunManifest {
 public:
  RunManifest(std::string command, std::string config_ini, std::vector<std::string> argv)
      : command_(std::move(command)), config_(std::move(config_ini)), argv_(std::move(argv)) {}

  void add_input(const std::filesystem::path& p) {
    std::lock_guard lock(mu_);
    inputs_.push_back({p.string(), file_sha256(p)});
  }
  /// Call after the file is complete; the digest is taken now.
  void add_output(const std::filesystem::path& p) {
    const std::string d = file_sha256(p);
    std::lock_guard lock(mu_);
    outputs_.push_back({p.string(), d});
  }
  void add_task(TaskRecord t) {
    std::lock_guard lock(mu_);
    tasks_.push_back(std::move(t));
  }
  void set_wall_seconds(double s) { wall_ = s; }

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& t : tasks_) n += t.ok ? 0 : 1;
    return n;
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    json j;
    j["tool"] = "shuttle";
    j["version"] = kToolVersion;
    j["format_version"] = kFormatVersion;
    j["command"] = command_;
    j["argv"] = argv_;
    j["config"] = config_;
    auto files = [](std::vector<std::pair<std::string, std::string>> v) {
      std::sort(v.begin(), v.end());
      json a = json::array();
      for (const auto& [path, sha] : v) a.push_back({{"path", path}, {"sha256", sha}});
      return a;
    };
    j["inputs"] = files(inputs_);
    j["outputs"] = files(outputs_);
    std::vector<TaskRecord> tasks = tasks_;
    std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    json t = json::array();
    for (const auto& r : tasks) {
      json e{{"name", r.name}, {"seed", r.seed}, {"ok", r.ok}, {"wall_seconds", r.wall_seconds}};
      if (!r.ok) e["error"] = r.error;
      t.push_back(e);
    }
    j["tasks"] = t;
    j["wall_seconds"] = wall_;
    return j;
  }

  void write(const std::filesystem::path& p) const { write_atomic(p, to_json().dump(2) + "\n"); }

 private:
  std::string command_;
  std::string config_;
  std::vector<std::string> argv_;
  std::vector<std::pair<std::string, std::string>> inputs_, outputs_;
  std::vector<TaskRecord> tasks_;
  double wall_ = 0.0;
  mutable std::mutex mu_;
};

}  // namespace shuttle::io
