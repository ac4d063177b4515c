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
#include <span>
#include <vector>

#include <json.hpp>

#include "sfqsim/experiments.hpp"
#include "sfqsim/qp.hpp"

namespace sfqsim {

/// Off-resonant driver burst used only to generate quasiparticles.
struct PoisonBurst {
  double slips = 640;
  double cycle_rate_hz = 1.6e9;  // trigger cycles per second

  void validate() const;
  double duration(const QPModel& model) const;
};

/// Mean QP number right after the burst, starting from the background.
double poisoned_n_qp(const QPModel& model, const PoisonBurst& burst);

/// T1 scans after bursts of increasing length: outer axis "slips", inner
/// axis "t_s". Each curve follows the decay law with n_qp frozen at its
/// post-burst value and the configured T1_per_qp and T1_residual.
ExperimentResult run_qp_poison(const PhysicsBundle& physics, const SweepSpec& slips, const SweepSpec& delays,
                               double cycle_rate_hz, const MeasurementOptions& measurement = {});

struct PoisonAnalysis {
  std::vector<double> slips;
  std::vector<double> n_qp;
  std::vector<double> n_qp_err;
  double slope = 0.0;      // QPs per slip
  double intercept = 0.0;  // QPs at zero slips

  nlohmann::ordered_json to_json() const;
};

/// Fits every curve of a qp-poison map, each paired with the first row
/// (shared T1_qp and T1_r), then regresses n_qp on slip count.
PoisonAnalysis analyze_qp_poison(const ExperimentResult& result);

struct QPRecoveryResult {
  std::vector<double> delays;       // s after the burst
  std::vector<double> n_qp;         // measured (noisy when requested)
  std::vector<double> gamma_qp;     // n_qp / T1_per_qp, 1/s
  std::vector<double> delta_omega;  // rad/s
  FitResult fit;                    // background, excess, trapping_time
  double slope = 0.0;               // d(delta_omega)/d(gamma_qp)
  double intercept = 0.0;
  nlohmann::ordered_json metadata;

  nlohmann::ordered_json to_json() const;
};

/// n_qp versus recovery time after a burst, with optional relative Gaussian
/// scatter on each point seeded by (seed, point index).
QPRecoveryResult run_qp_recovery(const PhysicsBundle& physics, const PoisonBurst& burst, const SweepSpec& delays,
                                 double relative_noise = 0.0, std::uint64_t seed = 0);

void write_csv(const QPRecoveryResult& result, std::ostream& out);

struct DispersionSweep {
  double ratio = 0.0;       // with the empirical factor
  double bare_ratio = 0.0;  // factor 1
  bool in_validity_range = true;
  std::vector<double> n_qp;
  std::vector<double> gamma_qp;
  std::vector<double> delta_omega;
  double slope = 0.0;
  nlohmann::ordered_json metadata;

  nlohmann::ordered_json to_json() const;
};

/// QP-induced decay rate and frequency shift along an n_qp sweep.
DispersionSweep run_dispersion(const PhysicsBundle& physics, const SweepSpec& n_qp);

void write_csv(const DispersionSweep& result, std::ostream& out);

/// Decay-law samples on `times` with additive Gaussian noise.
std::vector<DecaySample> synthetic_decay_curve(const QPDecayModel& model, std::span<const double> times, double noise,
                                               std::uint64_t seed);

/// Reference datasets shipped with the tool: n_qp = 1.03 (poisoned) or 0.10,
/// T1_qp = 4 us, T1_r = 25 us, 120 points over 150 us, 1% noise.
std::vector<DecaySample> bundled_decay_dataset(bool poisoned);

/// Two-column CSV with header "time_s,p1".
std::vector<DecaySample> read_decay_csv(std::istream& in);
void write_decay_csv(std::span<const DecaySample> samples, std::ostream& out);

}  // namespace sfqsim
