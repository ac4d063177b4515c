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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sfqsim/qp.hpp"
#include "sfqsim/sequencer.hpp"
#include "sfqsim/transmon.hpp"

namespace sfqsim {

/// Everything needed to push a schedule through the qubit model.
struct PhysicsBundle {
  TransmonParams transmon;
  CouplingParams coupling;
  std::optional<double> delta_theta_override;  // rad; wins over the coupling formula
  DecoherenceParams decoherence;
  QPModel qp;
  DispersionParams dispersion;
  bool decoherence_enabled = true;
  /// When false, n_qp is frozen at the background value.
  bool qp_dynamics_enabled = true;

  void validate() const;
  double delta_theta() const;
  double omega_d(int n, double detuning = 0.0) const { return transmon.omega10 / n + detuning; }
};

/// Steps a density matrix through pulses and free intervals in the lab frame.
/// Decoherence rates are piecewise constant per interval, evaluated at the
/// exact interval-mean n_qp.
class PulseSimulator {
 public:
  static constexpr int kDriftCheckInterval = 1000;
  static constexpr double kRenormalizeLimit = 1e-8;

  /// `n_qp_initial` defaults to the background QP number.
  PulseSimulator(const PhysicsBundle& physics, DensityMatrix initial, double start_time = 0.0,
                 std::optional<double> n_qp_initial = std::nullopt);

  /// Applies every schedule pulse with now() <= t < until and evolves to `until`.
  void run(const Schedule& schedule, double until);
  void run(const Schedule& schedule) { run(schedule, schedule.end_time); }
  /// Runs the schedule and calls `observe` at each (sorted) sample time.
  void run_sampled(const Schedule& schedule, std::span<const double> sample_times,
                   const std::function<void(std::size_t, const PulseSimulator&)>& observe);
  /// Idles (no drive) until time t.
  void advance_to(double t);

  void apply_unitary(const Matrix& u);
  /// rho -> (1 - lambda) rho + lambda I / d.
  void depolarize(double lambda);

  const DensityMatrix& state() const { return state_; }
  double time() const { return time_; }
  double n_qp() const { return qp_.n_qp(); }
  std::int64_t channel_count() const { return channels_; }

 private:
  void evolve(double dt, double slip_rate);
  void kick();
  void check_drift();

  PhysicsBundle physics_;
  DensityMatrix state_;
  double time_;
  QPIntegrator qp_;
  std::vector<double> energies_;
  Matrix kick_;
  double gamma_phi_;
  std::int64_t channels_ = 0;
};

/// Decoherence-free propagator of a schedule from t = 0 to t_end.
Matrix schedule_propagator(const Schedule& schedule, const TransmonParams& transmon, double delta_theta,
                           double t_end);

/// Two-level propagator of a gate placed on its own cycles, mapped into the
/// SFQ control frame (the frame in which phase-0 kicks rotate about +X).
Eigen::Matrix2cd control_frame_gate(const GateDef& gate, const GateSet& gates, const TransmonParams& transmon);

/// Unitary taking lab-frame rotating coordinates to the SFQ control frame.
Eigen::Matrix2cd control_frame_map();

}  // namespace sfqsim
