// Copyright 2026 The sfqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sfqsim/config.hpp"

using namespace sfqsim;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> errors_of(const ordered_json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sfqsim_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const RunConfig c = parse_config(ordered_json{{"experiment", "ramsey"}});
  CHECK(c.experiment == ExperimentKind::Ramsey);
  CHECK(c == default_config(ExperimentKind::Ramsey));
  REQUIRE(c.sweep("delay_s") != nullptr);
  CHECK(c.sweep("delay_s")->size() > 1);
}

TEST_CASE("validation errors name the field") {
  const auto errors = errors_of(
      {{"experiment", "rabi"},
       {"physics", {{"decoherence", {{"t1_residual_s", 10e-6}, {"t2_star_residual_s", 30e-6}}}}}});
  REQUIRE_FALSE(errors.empty());
  CHECK(any_contains(errors, "physics.decoherence"));
  CHECK(any_contains(errors, "t2_star"));
}

TEST_CASE("unknown keys and several errors are reported together") {
  const auto errors = errors_of({{"experiment", "rabi"},
                                 {"sede", 3},
                                 {"drive", {{"n", 0}}},
                                 {"physics", {{"transmon", {{"dim", 40}}}}}});
  CHECK(errors.size() >= 3);
  CHECK(any_contains(errors, "sede"));
  CHECK(any_contains(errors, "drive"));
  CHECK(any_contains(errors, "physics.transmon"));
}

TEST_CASE("experiment is required and must be known") {
  CHECK(any_contains(errors_of(ordered_json::object()), "experiment"));
  CHECK(any_contains(errors_of({{"experiment", "spectroscopy"}}), "spectroscopy"));
  CHECK(any_contains(errors_of({{"experiment", "rabi"}, {"seed", -1}}), "seed"));
}

TEST_CASE("preset loads and round trips") {
  for (ExperimentKind kind : all_experiments()) {
    CAPTURE(to_string(kind));
    ordered_json doc = *find_preset("paper-defaults");
    doc["experiment"] = std::string(to_string(kind));
    const RunConfig c = parse_config(doc);
    CHECK(c.physics.decoherence.t1_per_qp == doctest::Approx(kCalibratedT1PerQP));
    const ordered_json out = to_json(c);
    CHECK(parse_config(out) == c);
    const ordered_json sidecar = {{"format", "sfqsim-sidecar/1"}, {"config", out}, {"status", "complete"}};
    CHECK(parse_config(unwrap_sidecar(sidecar)) == c);
  }
  CHECK_FALSE(find_preset("nope").has_value());
}

TEST_CASE("dispatch is reproducible for a fixed seed") {
  ordered_json doc = {{"experiment", "rabi"},
                      {"seed", 11},
                      {"measurement", {{"shots", 200}}},
                      {"sweeps", {{"t_s", {{"start", 0.0}, {"stop", 40e-9}, {"count", 9}}}}}};
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = scratch("repro" + std::to_string(i));
    doc["output_dir"] = dir.string();
    const RunOutcome out = dispatch(parse_config(doc));
    REQUIRE(out.exit_code == 0);
    csv[i] = slurp(dir / "rabi.csv");
    const auto sidecar = ordered_json::parse(slurp(dir / "rabi.json"));
    CHECK(sidecar["status"] == "complete");
    CHECK(parse_config(unwrap_sidecar(sidecar)).seed == 11);
    fs::remove_all(dir);
  }
  CHECK_FALSE(csv[0].empty());
  CHECK(csv[0] == csv[1]);
}

TEST_CASE("failed runs are marked in the sidecar") {
  const fs::path dir = scratch("failed");
  const RunConfig c = parse_config({{"experiment", "fit-decay"},
                                    {"output_dir", dir.string()},
                                    {"fit_decay", {{"input", (dir / "missing.csv").string()}}}});
  const RunOutcome out = dispatch(c);
  CHECK(out.exit_code != 0);
  CHECK_FALSE(fs::exists(dir / "fit-decay.csv"));
  const auto sidecar = ordered_json::parse(slurp(dir / "fit-decay.json"));
  CHECK(sidecar["status"] == "failed");
  CHECK(sidecar.contains("error"));
  fs::remove_all(dir);
}
