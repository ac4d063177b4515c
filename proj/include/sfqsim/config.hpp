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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sfqsim/experiments.hpp"
#include "sfqsim/qp_experiments.hpp"
#include "sfqsim/rb.hpp"

namespace sfqsim {

enum class ExperimentKind { Rabi, Chevron, Ramsey, Rabi2d, Staircase, RB, QPPoison, QPRecovery, FitDecay, Dispersion };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view text);
const std::vector<ExperimentKind>& all_experiments();

/// Every problem found while reading a config, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct RBSettings {
  RBConfig config;
  std::vector<int> subharmonics{3};
  /// Interleaved gates; empty runs the reference curve only.
  std::vector<GateLabel> gates{GateLabel::X,      GateLabel::X2, GateLabel::MinusX2,
                               GateLabel::Y,      GateLabel::Y2, GateLabel::MinusY2};
};

struct FitDecaySettings {
  std::optional<std::string> input;             // CSV time_s,p1; bundled dataset when absent
  std::optional<std::string> unpoisoned_input;  // paired fit partner
  bool paired = true;                           // bundled data: fit with the unpoisoned curve
  std::optional<double> fixed_t1_qp;
  std::optional<double> fixed_t1_r;
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::Rabi;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  PhysicsBundle physics;
  DriveSpec drive;
  int shots = 0;
  unsigned threads = 0;
  std::vector<SweepSpec> sweeps;  // axes in experiment order
  BiasWindow bias;
  RBSettings rb;
  PoisonBurst burst{20000, 1.6e9};
  double recovery_noise = 0.0;
  double poison_rate_hz = 1.6e9;
  FitDecaySettings fit_decay;

  MeasurementOptions measurement() const { return {shots, seed, threads}; }
  const SweepSpec* sweep(std::string_view axis) const;
};

/// Axis names the experiment reads, in order; optional ones are marked.
struct AxisRequirement {
  std::string axis;
  bool required = true;
};
std::vector<AxisRequirement> experiment_axes(ExperimentKind kind);

/// Default settings for an experiment (sweeps and drive filled in).
RunConfig default_config(ExperimentKind kind);

/// Validates and converts a config document. Unknown keys are errors. Throws
/// ConfigError listing every problem.
RunConfig parse_config(const nlohmann::ordered_json& document);

/// Complete document for `config`; parse_config(to_json(c)) reproduces c.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Device numbers bundled as a partial config document, applied beneath any
/// user config.
nlohmann::ordered_json paper_defaults_preset();
std::optional<nlohmann::ordered_json> find_preset(std::string_view name);

/// Calibrated QP lifetime per quasiparticle used by the preset.
inline constexpr double kCalibratedT1PerQP = 2.0535e-7;

bool operator==(const RunConfig& a, const RunConfig& b);

/// Outcome of one dispatched run.
struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;  // written, relative to the output directory
  std::string summary;
};

/// Runs the configured experiment and writes <name>.csv, <name>.json
/// (sidecar with the resolved config) and <name>_summary.txt into
/// output_dir. Failures produce a sidecar and summary marked "failed".
RunOutcome dispatch(const RunConfig& config);

/// Sidecar documents wrap the config; this accepts either form.
nlohmann::ordered_json unwrap_sidecar(const nlohmann::ordered_json& document);

}  // namespace sfqsim
