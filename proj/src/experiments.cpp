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

#include "sfqsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "sfqsim/parallel.hpp"

namespace sfqsim {

namespace {

constexpr double kPopulationSlack = 1e-9;

std::vector<double> clamp_populations(std::vector<double> p) {
  for (double& v : p) {
    if (!(v >= -kPopulationSlack && v <= 1.0 + kPopulationSlack)) {
      throw NumericalError("population outside [0, 1]: " + format_double(v));
    }
    v = std::clamp(v, 0.0, 1.0);
  }
  return p;
}

void require_nonnegative(const SweepSpec& sweep) {
  for (double v : sweep.values) {
    if (v < 0) throw InvalidArgument("sweep '" + sweep.axis + "' must be non-negative");
  }
}

int repetitions_of(const std::vector<SweepSpec>& axes) {
  int reps = 1;
  for (const auto& a : axes) reps *= a.repetitions;
  return reps;
}

nlohmann::ordered_json base_metadata(const std::string& name, const PhysicsBundle& physics, int n,
                                     double detuning_hz, const MeasurementOptions& m) {
  nlohmann::ordered_json meta;
  meta["experiment"] = name;
  meta["n"] = n;
  meta["detuning_hz"] = detuning_hz;
  meta["omega_d_hz"] = physics.omega_d(n, kTwoPi * detuning_hz) / kTwoPi;
  meta["delta_theta_rad"] = physics.delta_theta();
  meta["turn_on_model"] = std::string(to_string(physics.qp.turn_on));
  meta["physics"] = physics_to_json(physics);
  meta["measurement"] = {{"shots", m.shots}, {"seed", m.seed}};
  return meta;
}

// Populations along one continuous phase-0 train, sampled at each duration.
std::vector<std::vector<double>> rabi_trace(const PhysicsBundle& physics, double omega_d, const SweepSpec& durations) {
  const double period = kTwoPi / omega_d;
  const double t_max = *std::max_element(durations.values.begin(), durations.values.end());
  ScheduleBuilder builder(omega_d, physics.qp.slips_per_cycle);
  builder.add_train(0.0, static_cast<int>(std::ceil(t_max / period)) + 1);
  const Schedule schedule = builder.build();

  std::vector<std::size_t> order(durations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return durations.values[a] < durations.values[b]; });
  std::vector<double> times(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) times[k] = durations.values[order[k]];

  std::vector<std::vector<double>> out(durations.size());
  PulseSimulator sim(physics, DensityMatrix::ground(physics.transmon.dim));
  sim.run_sampled(schedule, times, [&](std::size_t k, const PulseSimulator& s) {
    out[order[k]] = clamp_populations(s.state().populations());
  });
  return out;
}

void finish(ExperimentResult& result, const MeasurementOptions& m) {
  if (m.shots < 0) throw InvalidArgument("shots must be non-negative");
  if (m.shots > 0) sample_shots(result, m.shots, repetitions_of(result.axes), m.seed);
  result.validate();
}

double positive_omega_d(const PhysicsBundle& physics, const DriveSpec& drive) {
  if (drive.n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  const double w = drive.omega_d(physics);
  if (!(w > 0) || !std::isfinite(w)) throw InvalidArgument("trigger frequency must be positive");
  return w;
}

}  // namespace

void SweepSpec::validate() const {
  if (axis.empty()) throw InvalidArgument("sweep axis needs a name");
  if (values.empty()) throw InvalidArgument("sweep '" + axis + "' has no values");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("sweep '" + axis + "' has a non-finite value");
  }
  if (repetitions < 1) throw InvalidArgument("sweep '" + axis + "' repetitions must be >= 1");
}

SweepSpec SweepSpec::linspace(std::string axis, double start, double stop, std::size_t count, int repetitions) {
  if (count == 0) throw InvalidArgument("linspace needs at least one point");
  SweepSpec s{std::move(axis), {}, repetitions};
  s.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    s.values[k] = count == 1 ? start : start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  if (count > 1) s.values.back() = stop;
  s.validate();
  return s;
}

void ExperimentResult::validate() const {
  if (axes.empty() || axes.size() > 2) throw InvalidArgument("experiment result needs one or two axes");
  for (const auto& a : axes) a.validate();
  if (populations.size() != point_count()) throw InvalidArgument("population grid does not match the axes");
  for (const auto& p : populations) {
    if (p.size() < 2) throw InvalidArgument("each grid point needs at least P0 and P1");
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("population outside [0, 1]");
    }
  }
}

std::size_t ExperimentResult::point_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

std::size_t ExperimentResult::index(std::size_t i, std::size_t j) const {
  if (axes.size() == 1) {
    if (j != 0) throw InvalidArgument("one-axis result indexed with two indices");
    return i;
  }
  return i * axes.at(1).size() + j;
}

std::vector<double> ExperimentResult::p1_row(std::size_t i) const {
  const std::size_t inner = axes.size() == 1 ? axes[0].size() : axes.at(1).size();
  const std::size_t offset = axes.size() == 1 ? 0 : i * inner;
  std::vector<double> row(inner);
  for (std::size_t j = 0; j < inner; ++j) row[j] = populations.at(offset + j).at(1);
  return row;
}

double DriveSpec::omega_d(const PhysicsBundle& physics) const {
  return physics.omega_d(n, kTwoPi * detuning_hz);
}

ExperimentResult run_rabi(const PhysicsBundle& physics, const DriveSpec& drive, const SweepSpec& durations,
                          const MeasurementOptions& measurement) {
  physics.validate();
  durations.validate();
  require_nonnegative(durations);
  const double omega_d = positive_omega_d(physics, drive);
  ExperimentResult r;
  r.experiment = "rabi";
  r.axes = {durations};
  r.populations = rabi_trace(physics, omega_d, durations);
  r.metadata = base_metadata(r.experiment, physics, drive.n, drive.detuning_hz, measurement);
  finish(r, measurement);
  return r;
}

ExperimentResult run_bias_rabi(const PhysicsBundle& physics, const DriveSpec& drive, const SweepSpec& bias,
                               const BiasWindow& window, const SweepSpec& durations,
                               const MeasurementOptions& measurement) {
  physics.validate();
  bias.validate();
  durations.validate();
  require_nonnegative(durations);
  if (!(window.low <= window.high)) throw InvalidArgument("bias window low edge exceeds high edge");
  const double omega_d = positive_omega_d(physics, drive);
  const auto driven = rabi_trace(physics, omega_d, durations);
  std::vector<double> idle(static_cast<std::size_t>(physics.transmon.dim), 0.0);
  idle[0] = 1.0;

  ExperimentResult r;
  r.experiment = "bias-rabi";
  r.axes = {bias, durations};
  for (double b : bias.values) {
    const bool on = b >= window.low && b <= window.high;
    for (std::size_t j = 0; j < durations.size(); ++j) r.populations.push_back(on ? driven[j] : idle);
  }
  r.metadata = base_metadata(r.experiment, physics, drive.n, drive.detuning_hz, measurement);
  r.metadata["bias_window"] = {{"low", window.low}, {"high", window.high}};
  finish(r, measurement);
  return r;
}

ExperimentResult run_chevron(const PhysicsBundle& physics, int n, const SweepSpec& detunings_hz,
                             const SweepSpec& durations, const MeasurementOptions& measurement) {
  physics.validate();
  detunings_hz.validate();
  durations.validate();
  require_nonnegative(durations);
  std::vector<std::vector<std::vector<double>>> columns(detunings_hz.size());
  for (double d : detunings_hz.values) positive_omega_d(physics, DriveSpec{n, d});
  parallel_for(
      detunings_hz.size(),
      [&](std::size_t i) {
        columns[i] = rabi_trace(physics, DriveSpec{n, detunings_hz.values[i]}.omega_d(physics), durations);
      },
      measurement.threads);

  ExperimentResult r;
  r.experiment = "chevron";
  r.axes = {detunings_hz, durations};
  for (auto& col : columns) {
    for (auto& p : col) r.populations.push_back(std::move(p));
  }
  r.metadata = base_metadata(r.experiment, physics, n, 0.0, measurement);
  r.metadata.erase("detuning_hz");
  r.metadata.erase("omega_d_hz");
  finish(r, measurement);
  return r;
}

ExperimentResult run_ramsey(const PhysicsBundle& physics, const DriveSpec& drive, const SweepSpec& delays,
                            const MeasurementOptions& measurement) {
  physics.validate();
  delays.validate();
  require_nonnegative(delays);
  const double omega_d = positive_omega_d(physics, drive);
  const GateSet gates(drive.n, omega_d, physics.delta_theta());
  const double period = gates.period();

  SweepSpec used = delays;
  std::vector<std::int64_t> cycles(delays.size());
  for (std::size_t k = 0; k < delays.size(); ++k) {
    cycles[k] = std::llround(delays.values[k] / period);
    used.values[k] = static_cast<double>(cycles[k]) * period;
  }

  ExperimentResult r;
  r.experiment = "ramsey";
  r.axes = {used};
  r.populations.resize(delays.size());
  parallel_for(
      delays.size(),
      [&](std::size_t k) {
        ScheduleBuilder b(omega_d, physics.qp.slips_per_cycle);
        b.add_gate(gates.gate(GateLabel::X2));
        b.idle_cycles(cycles[k]);
        b.add_gate(gates.gate(GateLabel::X2));
        const Schedule s = b.build();
        PulseSimulator sim(physics, DensityMatrix::ground(physics.transmon.dim));
        sim.run(s);
        r.populations[k] = clamp_populations(sim.state().populations());
      },
      measurement.threads);
  r.metadata = base_metadata(r.experiment, physics, drive.n, drive.detuning_hz, measurement);
  r.metadata["requested_delays_s"] = delays.values;
  r.metadata["x2_pulses"] = gates.gate(GateLabel::X2).pulse_count;
  finish(r, measurement);
  return r;
}

ExperimentResult run_rabi2d(const PhysicsBundle& physics, int n, const SweepSpec& phases, const SweepSpec& durations,
                            const MeasurementOptions& measurement) {
  physics.validate();
  phases.validate();
  durations.validate();
  require_nonnegative(durations);
  for (double phi : phases.values) {
    if (phi < 0 || phi >= kTwoPi) throw InvalidArgument("trigger phases must lie in [0, 2 pi)");
  }
  const double omega_d = positive_omega_d(physics, DriveSpec{n, 0.0});
  const GateSet gates(n, omega_d, physics.delta_theta());
  const double period = gates.period();

  ExperimentResult r;
  r.experiment = "rabi2d";
  r.axes = {phases, durations};
  r.populations.resize(phases.size() * durations.size());
  const std::size_t inner = durations.size();
  parallel_for(
      r.populations.size(),
      [&](std::size_t idx) {
        const double phi = phases.values[idx / inner];
        const double t = durations.values[idx % inner];
        const auto middle = static_cast<int>(std::floor(t / period * (1.0 + 1e-12)));
        ScheduleBuilder b(omega_d, physics.qp.slips_per_cycle);
        b.add_gate(gates.gate(GateLabel::X2));
        b.add_train(phi, middle);
        b.add_gate(gates.gate(GateLabel::X2));
        const Schedule s = b.build();
        PulseSimulator sim(physics, DensityMatrix::ground(physics.transmon.dim));
        sim.run(s);
        r.populations[idx] = clamp_populations(sim.state().populations());
      },
      measurement.threads);
  r.metadata = base_metadata(r.experiment, physics, n, 0.0, measurement);
  r.metadata["x2_pulses"] = gates.gate(GateLabel::X2).pulse_count;
  finish(r, measurement);
  return r;
}

ExperimentResult run_staircase(const PhysicsBundle& physics, int n, const SweepSpec& durations,
                               const MeasurementOptions& measurement) {
  ExperimentResult r = run_rabi(physics, DriveSpec{n, 0.0}, durations, MeasurementOptions{});
  r.experiment = "staircase";
  r.metadata = base_metadata(r.experiment, physics, n, 0.0, measurement);
  r.metadata["pulse_spacing_s"] = kTwoPi / physics.omega_d(n);
  finish(r, measurement);
  return r;
}

void sample_shots(ExperimentResult& result, int shots, int repetitions, std::uint64_t seed) {
  if (shots < 1 || repetitions < 1) throw InvalidArgument("shots and repetitions must be >= 1");
  for (std::size_t i = 0; i < result.populations.size(); ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
    std::mt19937_64 rng(seq);
    auto& p = result.populations[i];
    std::vector<double> counts(p.size(), 0.0);
    for (int rep = 0; rep < repetitions; ++rep) {
      // Multinomial draw as a chain of conditional binomials.
      int remaining = shots;
      double mass = 1.0;
      for (std::size_t k = 0; k + 1 < p.size() && remaining > 0; ++k) {
        const double q = mass > 0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<int> draw(remaining, q);
        const int c = draw(rng);
        counts[k] += c;
        remaining -= c;
        mass -= p[k];
      }
      counts.back() += remaining;
    }
    const double total = static_cast<double>(shots) * repetitions;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = counts[k] / total;
  }
  result.metadata["shots"] = {{"per_repetition", shots}, {"repetitions", repetitions}, {"seed", seed}};
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
  result.validate();
  const std::size_t levels = result.populations.front().size();
  for (const auto& a : result.axes) out << a.axis << ',';
  for (std::size_t k = 0; k < levels; ++k) out << 'p' << k << (k + 1 < levels ? ',' : '\n');
  for (std::size_t idx = 0; idx < result.populations.size(); ++idx) {
    if (result.axes.size() == 1) {
      out << format_double(result.axes[0].values[idx]) << ',';
    } else {
      const std::size_t inner = result.axes[1].size();
      out << format_double(result.axes[0].values[idx / inner]) << ','
          << format_double(result.axes[1].values[idx % inner]) << ',';
    }
    const auto& p = result.populations[idx];
    for (std::size_t k = 0; k < levels; ++k) out << format_double(p[k]) << (k + 1 < levels ? ',' : '\n');
  }
}

nlohmann::ordered_json physics_to_json(const PhysicsBundle& p) {
  nlohmann::ordered_json j;
  j["transmon"] = {{"omega10_hz", p.transmon.omega10 / kTwoPi},
                   {"alpha_hz", p.transmon.alpha / kTwoPi},
                   {"dim", p.transmon.dim}};
  j["coupling"] = {{"coupling_capacitance_f", p.coupling.coupling_capacitance},
                   {"capacitance_f", p.coupling.capacitance},
                   {"delta_theta_rad", p.delta_theta_override ? nlohmann::ordered_json(*p.delta_theta_override)
                                                              : nlohmann::ordered_json(nullptr)}};
  j["decoherence"] = {{"enabled", p.decoherence_enabled},
                      {"t1_residual_s", p.decoherence.t1_residual},
                      {"t2_star_residual_s", p.decoherence.t2_star_residual},
                      {"t1_per_qp_s", p.decoherence.t1_per_qp},
                      {"qp_dispersion_factor", p.decoherence.qp_dispersion_factor}};
  j["qp"] = {{"dynamics_enabled", p.qp_dynamics_enabled},
             {"eta", p.qp.eta},
             {"turn_on", std::string(to_string(p.qp.turn_on))},
             {"turn_on_slips", p.qp.turn_on_slips},
             {"trapping_time_s", p.qp.trapping_time()},
             {"slips_per_cycle", p.qp.slips_per_cycle},
             {"n_qp_background", p.qp.n_qp_background}};
  j["dispersion"] = {{"gap_ev", p.dispersion.gap / constants::electron_volt},
                     {"empirical_factor", p.dispersion.empirical_factor}};
  return j;
}

}  // namespace sfqsim
