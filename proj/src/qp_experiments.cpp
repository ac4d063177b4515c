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

#include "sfqsim/qp_experiments.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace sfqsim {

namespace {

std::mt19937_64 point_stream(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

QPDecayModel decay_model(const PhysicsBundle& physics, double n_qp) {
  return {n_qp, physics.decoherence.t1_per_qp, physics.decoherence.t1_residual};
}

nlohmann::ordered_json line_json(double slope, double intercept) {
  return {{"slope", slope}, {"intercept", intercept}};
}

}  // namespace

void PoisonBurst::validate() const {
  if (!(slips >= 0) || !std::isfinite(slips)) throw InvalidArgument("burst slips must be finite and >= 0");
  if (!(cycle_rate_hz > 0) || !std::isfinite(cycle_rate_hz)) throw InvalidArgument("burst rate must be positive");
}

double PoisonBurst::duration(const QPModel& model) const {
  return slips / (model.slips_per_cycle * cycle_rate_hz);
}

double poisoned_n_qp(const QPModel& model, const PoisonBurst& burst) {
  burst.validate();
  QPIntegrator qp(model);
  qp.advance(burst.duration(model), model.slips_per_cycle * burst.cycle_rate_hz);
  return qp.n_qp();
}

ExperimentResult run_qp_poison(const PhysicsBundle& physics, const SweepSpec& slips, const SweepSpec& delays,
                               double cycle_rate_hz, const MeasurementOptions& measurement) {
  physics.validate();
  slips.validate();
  delays.validate();
  for (double t : delays.values) {
    if (t < 0) throw InvalidArgument("sweep '" + delays.axis + "' must be non-negative");
  }
  if (measurement.shots < 0) throw InvalidArgument("shots must be non-negative");
  ExperimentResult r;
  r.experiment = "qp-poison";
  r.axes = {slips, delays};
  nlohmann::ordered_json n_after = nlohmann::ordered_json::array();
  for (double s : slips.values) {
    const double n = poisoned_n_qp(physics.qp, {s, cycle_rate_hz});
    n_after.push_back(n);
    const QPDecayModel law = decay_model(physics, n);
    for (double t : delays.values) {
      const double p1 = decay_law(t, law);
      r.populations.push_back({1.0 - p1, p1});
    }
  }
  r.metadata["experiment"] = r.experiment;
  r.metadata["cycle_rate_hz"] = cycle_rate_hz;
  r.metadata["turn_on"] = std::string(to_string(physics.qp.turn_on));
  r.metadata["n_qp_after_burst"] = std::move(n_after);
  r.metadata["physics"] = physics_to_json(physics);
  r.metadata["measurement"] = {{"shots", measurement.shots}, {"seed", measurement.seed}};
  if (measurement.shots > 0) {
    sample_shots(r, measurement.shots, slips.repetitions * delays.repetitions, measurement.seed);
  }
  r.validate();
  return r;
}

nlohmann::ordered_json PoisonAnalysis::to_json() const {
  nlohmann::ordered_json j;
  j["slips"] = slips;
  j["n_qp"] = n_qp;
  j["n_qp_err"] = n_qp_err;
  j["linear_fit"] = line_json(slope, intercept);
  return j;
}

PoisonAnalysis analyze_qp_poison(const ExperimentResult& result) {
  if (result.axes.size() != 2) throw InvalidArgument("qp-poison analysis needs a (slips, t_s) map");
  const auto& slips = result.axes[0].values;
  const auto& times = result.axes[1].values;
  auto curve = [&](std::size_t i) {
    std::vector<DecaySample> c;
    for (std::size_t j = 0; j < times.size(); ++j) c.push_back({times[j], result.p1(i, j)});
    return c;
  };
  PoisonAnalysis a;
  a.slips = slips;
  a.n_qp.resize(slips.size());
  a.n_qp_err.resize(slips.size());
  if (slips.size() == 1) {
    const FitResult f = fit_decay(curve(0));
    a.n_qp[0] = f.value("n_qp");
    a.n_qp_err[0] = f.error("n_qp");
    return a;
  }
  const auto base = curve(0);
  for (std::size_t i = 1; i < slips.size(); ++i) {
    const FitResult f = fit_decay_paired(curve(i), base);
    a.n_qp[i] = f.value("n_qp_poisoned");
    a.n_qp_err[i] = f.error("n_qp_poisoned");
    if (i + 1 == slips.size()) {
      a.n_qp[0] = f.value("n_qp_unpoisoned");
      a.n_qp_err[0] = f.error("n_qp_unpoisoned");
    }
  }
  std::tie(a.intercept, a.slope) = linear_regression(a.slips, a.n_qp);
  return a;
}

nlohmann::ordered_json QPRecoveryResult::to_json() const {
  nlohmann::ordered_json j = metadata;
  j["fit"] = fit.to_json();
  j["delta_omega_vs_gamma"] = line_json(slope, intercept);
  return j;
}

QPRecoveryResult run_qp_recovery(const PhysicsBundle& physics, const PoisonBurst& burst, const SweepSpec& delays,
                                 double relative_noise, std::uint64_t seed) {
  physics.validate();
  delays.validate();
  if (!(relative_noise >= 0)) throw InvalidArgument("relative noise must be non-negative");
  const double n0 = poisoned_n_qp(physics.qp, burst);
  QPRecoveryResult r;
  std::vector<RecoverySample> samples;
  for (std::size_t i = 0; i < delays.values.size(); ++i) {
    const double t = delays.values[i];
    if (t < 0) throw InvalidArgument("recovery delays must be non-negative");
    double n = qp_relax(n0, t, physics.qp);
    if (relative_noise > 0) {
      auto rng = point_stream(seed, i);
      n *= 1.0 + relative_noise * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    const QPRates rates = rates_from_nqp(n, physics.decoherence, physics.dispersion, physics.transmon.omega10);
    r.delays.push_back(t);
    r.n_qp.push_back(n);
    r.gamma_qp.push_back(n / physics.decoherence.t1_per_qp);
    r.delta_omega.push_back(rates.delta_omega);
    samples.push_back({t, n});
  }
  r.fit = fit_recovery(samples);
  std::tie(r.intercept, r.slope) = linear_regression(r.gamma_qp, r.delta_omega);
  r.metadata["experiment"] = "qp-recovery";
  r.metadata["burst"] = {{"slips", burst.slips}, {"cycle_rate_hz", burst.cycle_rate_hz}};
  r.metadata["n_qp_after_burst"] = n0;
  r.metadata["relative_noise"] = relative_noise;
  r.metadata["seed"] = seed;
  r.metadata["physics"] = physics_to_json(physics);
  return r;
}

void write_csv(const QPRecoveryResult& r, std::ostream& out) {
  out << "t_s,n_qp,gamma_qp_per_s,delta_omega_rad_per_s\n";
  for (std::size_t i = 0; i < r.delays.size(); ++i) {
    out << format_double(r.delays[i]) << ',' << format_double(r.n_qp[i]) << ',' << format_double(r.gamma_qp[i])
        << ',' << format_double(r.delta_omega[i]) << '\n';
  }
}

nlohmann::ordered_json DispersionSweep::to_json() const {
  nlohmann::ordered_json j = metadata;
  j["ratio"] = ratio;
  j["bare_ratio"] = bare_ratio;
  j["in_validity_range"] = in_validity_range;
  j["delta_omega_vs_gamma_slope"] = slope;
  return j;
}

DispersionSweep run_dispersion(const PhysicsBundle& physics, const SweepSpec& n_qp) {
  physics.validate();
  n_qp.validate();
  DispersionSweep d;
  d.ratio = dispersion_ratio(physics.transmon.omega10, physics.dispersion, &d.in_validity_range);
  DispersionParams bare = physics.dispersion;
  bare.empirical_factor = 1.0;
  d.bare_ratio = dispersion_ratio(physics.transmon.omega10, bare);
  for (double n : n_qp.values) {
    if (n < 0) throw InvalidArgument("n_qp values must be non-negative");
    const QPRates rates = rates_from_nqp(n, physics.decoherence, physics.dispersion, physics.transmon.omega10);
    d.n_qp.push_back(n);
    d.gamma_qp.push_back(n / physics.decoherence.t1_per_qp);
    d.delta_omega.push_back(rates.delta_omega);
  }
  if (d.n_qp.size() >= 2) d.slope = linear_regression(d.gamma_qp, d.delta_omega).second;
  d.metadata["experiment"] = "dispersion";
  d.metadata["physics"] = physics_to_json(physics);
  return d;
}

void write_csv(const DispersionSweep& d, std::ostream& out) {
  out << "n_qp,gamma_qp_per_s,delta_omega_rad_per_s\n";
  for (std::size_t i = 0; i < d.n_qp.size(); ++i) {
    out << format_double(d.n_qp[i]) << ',' << format_double(d.gamma_qp[i]) << ',' << format_double(d.delta_omega[i])
        << '\n';
  }
}

std::vector<DecaySample> synthetic_decay_curve(const QPDecayModel& model, std::span<const double> times, double noise,
                                               std::uint64_t seed) {
  if (!(noise >= 0)) throw InvalidArgument("noise must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<DecaySample> out;
  for (double t : times) {
    const double g = gauss(rng);
    out.push_back({t, decay_law(t, model) + noise * g});
  }
  return out;
}

std::vector<DecaySample> bundled_decay_dataset(bool poisoned) {
  const SweepSpec t = SweepSpec::linspace("t_s", 0.0, 150e-6, 120);
  const QPDecayModel m{poisoned ? 1.03 : 0.10, 4e-6, 25e-6};
  return synthetic_decay_curve(m, t.values, 0.01, poisoned ? 1031 : 1010);
}

std::vector<DecaySample> read_decay_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("decay CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time_s,p1") throw InvalidArgument("decay CSV header must be 'time_s,p1', got '" + line + "'");
  std::vector<DecaySample> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      const double t = std::stod(line.substr(0, comma), &used);
      const std::string rest = line.substr(comma + 1);
      std::size_t used2 = 0;
      const double p = std::stod(rest, &used2);
      if (used2 != rest.size() || used != comma) throw std::invalid_argument("trailing text");
      out.push_back({t, p});
    } catch (const std::exception&) {
      throw InvalidArgument("decay CSV row " + std::to_string(row) + " is not two numbers: '" + line + "'");
    }
  }
  return out;
}

void write_decay_csv(std::span<const DecaySample> samples, std::ostream& out) {
  out << "time_s,p1\n";
  for (const auto& s : samples) out << format_double(s.t) << ',' << format_double(s.p1) << '\n';
}

}  // namespace sfqsim
