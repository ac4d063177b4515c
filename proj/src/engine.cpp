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

#include "sfqsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sfqsim {

void PhysicsBundle::validate() const {
  transmon.validate();
  if (!delta_theta_override) coupling.validate();
  if (delta_theta_override && !(*delta_theta_override > 0)) throw InvalidArgument("delta_theta must be positive");
  decoherence.validate();
  qp.validate();
  dispersion.validate();
}

double PhysicsBundle::delta_theta() const {
  if (delta_theta_override) return *delta_theta_override;
  return sfqsim::delta_theta(coupling, transmon.omega10);
}

PulseSimulator::PulseSimulator(const PhysicsBundle& physics, DensityMatrix initial, double start_time,
                               std::optional<double> n_qp_initial)
    : physics_(physics),
      state_(std::move(initial)),
      time_(start_time),
      qp_(physics.qp, n_qp_initial),
      energies_(level_energies(physics.transmon)),
      kick_(kick_unitary(physics.delta_theta(), physics.transmon.dim)),
      gamma_phi_(physics.decoherence.gamma_phi()) {
  physics_.validate();
  if (state_.dim() != physics_.transmon.dim) throw InvalidArgument("initial state dimension mismatch");
}

void PulseSimulator::evolve(double dt, double slip_rate) {
  if (dt <= 0) return;
  Matrix& rho = state_.mutable_matrix();
  if (!physics_.decoherence_enabled) {
    if (physics_.qp_dynamics_enabled) qp_.advance(dt, slip_rate);
    detail::diagonal_phase_step(rho, energies_, dt);
    time_ += dt;
    return;
  }
  const double n = physics_.qp_dynamics_enabled ? qp_.advance(dt, slip_rate) : physics_.qp.n_qp_background;
  const QPRates rates = rates_from_nqp(n, physics_.decoherence, physics_.dispersion, physics_.transmon.omega10);
  std::vector<double> freq = energies_;
  for (size_t k = 0; k < freq.size(); ++k) freq[k] += static_cast<double>(k) * rates.delta_omega;
  detail::lindblad_step(rho, freq, dt, rates.gamma1, gamma_phi_);
  time_ += dt;
  if (++channels_ % kDriftCheckInterval == 0) check_drift();
}

void PulseSimulator::kick() {
  Matrix& rho = state_.mutable_matrix();
  rho = kick_ * rho * kick_.adjoint();
  if (++channels_ % kDriftCheckInterval == 0) check_drift();
}

void PulseSimulator::check_drift() {
  Matrix& rho = state_.mutable_matrix();
  const Complex tr = rho.trace();
  const double drift = std::abs(tr - Complex(1.0, 0.0));
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (drift > kRenormalizeLimit || herm > kRenormalizeLimit) {
    throw NumericalError("density matrix drifted beyond tolerance (trace error " + std::to_string(drift) + ")");
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
}

void PulseSimulator::run(const Schedule& schedule, double until) {
  if (until < time_) throw InvalidArgument("cannot run backwards in time");
  auto pulse = std::lower_bound(schedule.pulse_times.begin(), schedule.pulse_times.end(), time_);
  auto window = schedule.drive.begin();

  // Advances to t, splitting at drive-window boundaries.
  auto evolve_to = [&](double t) {
    while (time_ < t) {
      while (window != schedule.drive.end() && window->stop <= time_) ++window;
      double rate = 0.0;
      double stop = t;
      if (window != schedule.drive.end()) {
        if (window->start <= time_) {
          rate = window->slip_rate;
          stop = std::min(t, window->stop);
        } else {
          stop = std::min(t, window->start);
        }
      }
      const double dt = stop - time_;
      if (dt <= 0) {
        time_ = stop;
        continue;
      }
      evolve(dt, rate);
      time_ = stop;  // pin to the boundary to avoid rounding drift
    }
  };

  for (; pulse != schedule.pulse_times.end() && *pulse < until; ++pulse) {
    evolve_to(*pulse);
    kick();
  }
  evolve_to(until);
}

void PulseSimulator::run_sampled(const Schedule& schedule, std::span<const double> sample_times,
                                 const std::function<void(std::size_t, const PulseSimulator&)>& observe) {
  for (size_t k = 0; k < sample_times.size(); ++k) {
    run(schedule, sample_times[k]);
    observe(k, *this);
  }
}

void PulseSimulator::advance_to(double t) {
  if (t < time_) throw InvalidArgument("cannot run backwards in time");
  evolve(t - time_, 0.0);
  time_ = t;
}

void PulseSimulator::apply_unitary(const Matrix& u) {
  Matrix& rho = state_.mutable_matrix();
  rho = u * rho * u.adjoint();
}

void PulseSimulator::depolarize(double lambda) {
  if (!(lambda >= 0 && lambda <= 1)) throw InvalidArgument("depolarizing strength must lie in [0, 1]");
  Matrix& rho = state_.mutable_matrix();
  const auto d = rho.rows();
  rho = (1.0 - lambda) * rho + (lambda / static_cast<double>(d)) * Matrix::Identity(d, d);
}

Matrix schedule_propagator(const Schedule& schedule, const TransmonParams& transmon, double delta_theta,
                           double t_end) {
  const std::vector<double> energies = level_energies(transmon);
  const Matrix kick = kick_unitary(delta_theta, transmon.dim);
  Matrix u = Matrix::Identity(transmon.dim, transmon.dim);
  double t = 0.0;
  auto free = [&](double dt) {
    for (int k = 0; k < transmon.dim; ++k) {
      const double phase = -energies[static_cast<size_t>(k)] * dt;
      u.row(k) *= Complex(std::cos(phase), std::sin(phase));
    }
  };
  for (double tp : schedule.pulse_times) {
    if (tp >= t_end) break;
    free(tp - t);
    u = kick * u;
    t = tp;
  }
  free(t_end - t);
  return u;
}

Eigen::Matrix2cd control_frame_map() {
  // Rotating-frame kicks at zero phase generate -i(theta/2) sigma_y, and a
  // delay tau turns the axis by omega10 tau from +y toward -x. The SFQ frame
  // calls that first axis +X, which is a z rotation by -pi/2.
  const double q = std::numbers::pi / 4;
  Eigen::Matrix2cd v;
  v << Complex(std::cos(q), std::sin(q)), 0, 0, Complex(std::cos(q), -std::sin(q));
  return v;
}

Eigen::Matrix2cd control_frame_gate(const GateDef& gate, const GateSet& gates, const TransmonParams& transmon) {
  if (transmon.dim != 2) throw InvalidArgument("control-frame gates are defined for dim = 2");
  ScheduleBuilder builder(gates.omega_d());
  builder.add_gate(gate, gates.cycles(GateLabel::I));
  const Schedule s = builder.build();
  const Matrix lab = schedule_propagator(s, transmon, gates.delta_theta(), s.end_time);
  // Undo the bare precession over the gate to land in the rotating frame.
  Eigen::Matrix2cd u0_inv = Eigen::Matrix2cd::Identity();
  const double phase = transmon.omega10 * s.end_time;
  u0_inv(1, 1) = Complex(std::cos(phase), std::sin(phase));
  const Eigen::Matrix2cd rot = u0_inv * lab;
  const Eigen::Matrix2cd v = control_frame_map();
  return v * rot * v.adjoint();
}

}  // namespace sfqsim
