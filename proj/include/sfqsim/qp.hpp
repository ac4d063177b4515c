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
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sfqsim/fitting.hpp"
#include "sfqsim/sequencer.hpp"
#include "sfqsim/transmon.hpp"

namespace sfqsim {

enum class TurnOnModel {
  Linear,     // eta * slips
  Threshold,  // eta * max(0, slips - turn_on_slips)
};

std::string_view to_string(TurnOnModel model);
TurnOnModel parse_turn_on_model(std::string_view text);

/// Quasiparticle generation by driver phase slips and single-particle trapping.
struct QPModel {
  double eta = 1.6e-3;                    // QPs coupled to the qubit per phase slip
  std::int64_t turn_on_slips = 0;         // N0 for the threshold model
  TurnOnModel turn_on = TurnOnModel::Linear;
  double trapping_rate = 1.0 / 17.6e-6;   // s, 1/s
  int slips_per_cycle = 4;
  double n_qp_background = 0.10;

  void validate() const;
  double trapping_time() const { return 1.0 / trapping_rate; }
};

/// Parameters of the poisoned energy-decay law.
struct QPDecayModel {
  double n_qp = 0.0;
  double t1_qp = 1.0;  // s
  double t1_r = std::numeric_limits<double>::infinity();  // s

  void validate() const;
};

struct DispersionParams {
  double gap = 180e-6 * constants::electron_volt;  // Delta, J
  double empirical_factor = 1.5;

  void validate() const;
};

/// Mean QP number added by a burst of `n_slips` phase slips.
double qp_added(std::int64_t n_slips, const QPModel& model);

/// Exponential relaxation of n_qp toward the background over dt.
double qp_relax(double n_qp, double dt, const QPModel& model);

/// Streaming solution of dn/dt = eta r(t) - s (n - background) for piecewise
/// constant slip rates r. Each step uses the closed-form exponential.
class QPIntegrator {
 public:
  explicit QPIntegrator(const QPModel& model, std::optional<double> n_initial = std::nullopt);

  /// Advances by dt with `slip_rate` slips per second and returns the mean n_qp
  /// over the interval.
  double advance(double dt, double slip_rate);

  double n_qp() const { return n_; }
  double slips() const { return slips_; }

 private:
  double step(double dt, double generation);
  QPModel model_;
  double n_;
  double slips_ = 0.0;
};

/// Piecewise-exponential n_qp(t) for a drive schedule.
class QPTrajectory {
 public:
  struct Segment {
    double start;
    double stop;
    double n_start;
    double generation;  // QPs per second
  };

  QPTrajectory(QPModel model, std::vector<Segment> segments);

  double value(double t) const;
  /// Exact time average of n_qp over [t0, t1].
  double mean(double t0, double t1) const;
  const std::vector<Segment>& segments() const { return segments_; }
  double end_time() const { return segments_.empty() ? 0.0 : segments_.back().stop; }

 private:
  double integral(double t) const;
  QPModel model_;
  std::vector<Segment> segments_;
};

/// n_qp(t) on [0, t_end] for the given drive windows, starting from `n_initial`
/// (background when omitted).
QPTrajectory qp_trajectory(std::span<const DriveWindow> drive, const QPModel& model, double t_end,
                           std::optional<double> n_initial = std::nullopt);

/// P1(t) = exp[n_qp (exp(-t/T1_qp) - 1) - t/T1_r].
double decay_law(double t, const QPDecayModel& model);

struct DecaySample {
  double t;
  double p1;

  bool operator==(const DecaySample&) const = default;
};

struct DecayFitOptions {
  std::optional<double> fixed_t1_qp;
  std::optional<double> fixed_t1_r;
  std::optional<QPDecayModel> initial;
  std::span<const double> weights;  // empty means unit weights
};

/// Fits decay_law to (t, P1) samples. Result parameters: n_qp, t1_qp, t1_r.
/// Needs >= 5 samples and either two decades of decay or a fixed parameter.
FitResult fit_decay(std::span<const DecaySample> samples, const DecayFitOptions& options = {});

/// Joint fit of a poisoned and an unpoisoned curve with shared T1_qp and
/// T1_r. Result parameters: n_qp_poisoned, n_qp_unpoisoned, t1_qp, t1_r.
FitResult fit_decay_paired(std::span<const DecaySample> poisoned, std::span<const DecaySample> unpoisoned,
                           const DecayFitOptions& options = {});

struct RecoverySample {
  double t;
  double n_qp;
};

/// Fits n(t) = background + excess * exp(-t / trapping_time).
FitResult fit_recovery(std::span<const RecoverySample> samples, std::optional<double> fixed_background = std::nullopt);

/// (delta omega10 / Gamma) = factor * -(1/2) [1 + pi sqrt(hbar omega10 / 2 Delta)].
/// `in_validity_range` reports hbar omega10 < 2 Delta.
double dispersion_ratio(double omega10, const DispersionParams& params, bool* in_validity_range = nullptr);

struct QPRates {
  double gamma1 = 0.0;       // 1/s
  double delta_omega = 0.0;  // rad/s
};

/// gamma1 = 1/T1_residual + n/T1_per_qp; delta_omega = ratio * n/T1_per_qp,
/// with ratio = dispersion_ratio * qp_dispersion_factor.
QPRates rates_from_nqp(double n_qp, const DecoherenceParams& dec, const DispersionParams& disp, double omega10);

}  // namespace sfqsim
