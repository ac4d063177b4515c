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
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfqsim/engine.hpp"

namespace sfqsim {

/// One sweep axis. Values keep the units named by the axis (e.g. "t_s").
struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  int repetitions = 1;

  void validate() const;
  std::size_t size() const { return values.size(); }
  /// Uniform grid including both endpoints.
  static SweepSpec linspace(std::string axis, double start, double stop, std::size_t count, int repetitions = 1);
};

/// Grid of level populations. For two axes the first axis is the outer
/// (slow) index.
struct ExperimentResult {
  std::string experiment;
  std::vector<SweepSpec> axes;
  std::vector<std::vector<double>> populations;  // per grid point, P_0..P_{d-1}
  nlohmann::ordered_json metadata;

  void validate() const;
  std::size_t point_count() const;
  std::size_t index(std::size_t i, std::size_t j = 0) const;
  double p1(std::size_t i, std::size_t j = 0) const { return populations.at(index(i, j)).at(1); }
  /// P1 along the inner axis for outer index i (or the whole trace for 1-D).
  std::vector<double> p1_row(std::size_t i = 0) const;
};

struct DriveSpec {
  int n = 3;
  double detuning_hz = 0.0;  // trigger offset from omega10 / n

  double omega_d(const PhysicsBundle& physics) const;
};

struct MeasurementOptions {
  int shots = 0;  // 0 reads populations exactly
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 means hardware concurrency
};

/// Phenomenological driver bias window: the driver runs only while the bias
/// lies in [low, high].
struct BiasWindow {
  double low = 0.0;
  double high = 1.0;
};

/// Continuous phase-0 train; P(t) for each duration in "t_s".
ExperimentResult run_rabi(const PhysicsBundle& physics, const DriveSpec& drive, const SweepSpec& durations,
                          const MeasurementOptions& measurement = {});

/// Rabi map versus driver bias (outer) and duration (inner). Outside the
/// window the qubit stays in its initial state.
ExperimentResult run_bias_rabi(const PhysicsBundle& physics, const DriveSpec& drive, const SweepSpec& bias,
                               const BiasWindow& window, const SweepSpec& durations,
                               const MeasurementOptions& measurement = {});

/// Rabi traces versus trigger detuning in Hz (outer) and duration (inner).
ExperimentResult run_chevron(const PhysicsBundle& physics, int n, const SweepSpec& detunings_hz,
                             const SweepSpec& durations, const MeasurementOptions& measurement = {});

/// X/2, idle, X/2 on one trigger clock. Delays are rounded to whole trigger
/// cycles; the result axis holds the delays actually used.
ExperimentResult run_ramsey(const PhysicsBundle& physics, const DriveSpec& drive, const SweepSpec& delays,
                            const MeasurementOptions& measurement = {});

/// X/2, R(t, phi), X/2 with the middle train at trigger phase phi (outer
/// axis, rad) running floor(t / period) cycles (inner axis, s).
ExperimentResult run_rabi2d(const PhysicsBundle& physics, int n, const SweepSpec& phases, const SweepSpec& durations,
                            const MeasurementOptions& measurement = {});

/// Dilute-train Rabi trace, typically at large n.
ExperimentResult run_staircase(const PhysicsBundle& physics, int n, const SweepSpec& durations,
                               const MeasurementOptions& measurement = {});

/// Replaces exact populations with multinomial estimates, one stream per
/// grid point derived from (seed, point index).
void sample_shots(ExperimentResult& result, int shots, int repetitions, std::uint64_t seed);

/// CSV with one row per grid point: axis values then P_0..P_{d-1}.
void write_csv(const ExperimentResult& result, std::ostream& out);

/// JSON snapshot of the physics parameters in user units.
nlohmann::ordered_json physics_to_json(const PhysicsBundle& physics);

/// Prints a double with 17 significant digits.
std::string format_double(double value);

}  // namespace sfqsim
