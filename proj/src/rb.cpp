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

#include "sfqsim/rb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "sfqsim/parallel.hpp"

namespace sfqsim {

namespace {

Matrix gate_list_propagator(const std::vector<GateDef>& gates, const GateSet& set, const PhysicsBundle& physics) {
  ScheduleBuilder b(set.omega_d(), physics.qp.slips_per_cycle);
  b.add_gates(gates, set.cycles(GateLabel::I));
  const Schedule s = b.build();
  return schedule_propagator(s, physics.transmon, set.delta_theta(), s.end_time);
}

double survival_fast(const CliffordSequence& seq, const std::vector<Matrix>& clifford_u, const Matrix& interleaved_u,
                     double depolarizing, int dim) {
  Matrix rho = Matrix::Zero(dim, dim);
  rho(0, 0) = 1.0;
  const std::size_t last = seq.cliffords.size() - 1;
  for (std::size_t i = 0; i < seq.cliffords.size(); ++i) {
    const Matrix& u = seq.interleaved[i] ? interleaved_u : clifford_u[static_cast<std::size_t>(seq.cliffords[i])];
    rho = u * rho * u.adjoint();
    if (depolarizing > 0 && i != last) {
      rho = (1.0 - depolarizing) * rho + (depolarizing / dim) * Matrix::Identity(dim, dim);
    }
  }
  return std::clamp(rho(0, 0).real(), 0.0, 1.0);
}

double survival_full(const CliffordSequence& seq, const GateSet& set, const PhysicsBundle& physics,
                     double depolarizing) {
  ScheduleBuilder b(set.omega_d(), physics.qp.slips_per_cycle);
  std::vector<double> hooks;
  const std::size_t last = seq.compiled.size() - 1;
  for (std::size_t i = 0; i < seq.compiled.size(); ++i) {
    b.add_gates(seq.compiled[i], set.cycles(GateLabel::I));
    if (depolarizing > 0 && i != last) hooks.push_back(b.now());
  }
  const Schedule s = b.build();
  PulseSimulator sim(physics, DensityMatrix::ground(physics.transmon.dim));
  for (double t : hooks) {
    sim.run(s, t);
    sim.depolarize(depolarizing);
  }
  sim.run(s);
  return std::clamp(sim.state().population(0), 0.0, 1.0);
}

// Best (A, B) for fixed p by weighted linear least squares; returns RSS.
double project_amplitudes(double p, std::span<const int> m, std::span<const double> y, std::span<const double> w,
                          double& a, double& b) {
  double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double f = std::pow(p, m[k]);
    s00 += w[k] * f * f;
    s01 += w[k] * f;
    s11 += w[k];
    r0 += w[k] * f * y[k];
    r1 += w[k] * y[k];
  }
  const double det = s00 * s11 - s01 * s01;
  if (!(std::abs(det) > 1e-300)) return std::numeric_limits<double>::infinity();
  a = (r0 * s11 - r1 * s01) / det;
  b = std::clamp((s00 * r1 - s01 * r0) / det, 0.0, 1.0);
  double rss = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double r = y[k] - (a * std::pow(p, m[k]) + b);
    rss += w[k] * r * r;
  }
  return rss;
}

}  // namespace

void RBConfig::validate() const {
  if (lengths.empty()) throw InvalidArgument("RB needs at least one sequence length");
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    if (lengths[k] < 1) throw InvalidArgument("RB sequence lengths must be >= 1");
    if (k > 0 && lengths[k] <= lengths[k - 1]) throw InvalidArgument("RB sequence lengths must be strictly increasing");
  }
  if (randomizations < 1) throw InvalidArgument("RB randomizations must be >= 1");
  if (!(depolarizing >= 0 && depolarizing <= 1)) throw InvalidArgument("depolarizing strength must lie in [0, 1]");
}

std::vector<int> RBConfig::default_lengths(int max_length, int points) {
  if (max_length < 1 || points < 1) throw InvalidArgument("RB length grid needs positive bounds");
  std::set<int> unique;
  for (int k = 0; k < points; ++k) {
    const double x = points == 1 ? 0.0 : std::log(max_length) * k / (points - 1);
    unique.insert(static_cast<int>(std::lround(std::exp(x))));
  }
  return {unique.begin(), unique.end()};
}

std::mt19937_64 rb_stream(std::uint64_t seed, int m, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(k)};
  return std::mt19937_64(seq);
}

CliffordSequence generate_rb_sequence(int m, std::optional<GateLabel> interleave, const GateSet& gates,
                                      std::mt19937_64& rng) {
  if (m < 1) throw InvalidArgument("RB sequence length must be >= 1");
  const auto& group = CliffordGroup::instance();
  std::optional<int> gate_index;
  if (interleave) {
    gate_index = group.index_of(*interleave);
    if (*gate_index < 0) throw InvalidArgument("interleaved gate is not a Clifford");
  }
  std::uniform_int_distribution<int> draw(0, CliffordGroup::kSize - 1);
  CliffordSequence seq;
  for (int i = 0; i < m; ++i) {
    const int c = draw(rng);
    seq.cliffords.push_back(c);
    seq.interleaved.push_back(false);
    seq.compiled.push_back(compile_clifford(c, gates));
    if (gate_index) {
      seq.cliffords.push_back(*gate_index);
      seq.interleaved.push_back(true);
      seq.compiled.push_back({gates.gate(*interleave)});
    }
  }
  const int recovery = group.inverse(compose_sequence(seq.cliffords));
  seq.cliffords.push_back(recovery);
  seq.interleaved.push_back(false);
  seq.compiled.push_back(compile_clifford(recovery, gates));
  return seq;
}

std::vector<double> RBSurvivals::mean() const {
  std::vector<double> out;
  for (const auto& row : survivals) out.push_back(std::accumulate(row.begin(), row.end(), 0.0) / row.size());
  return out;
}

std::vector<double> RBSurvivals::stddev() const {
  std::vector<double> out;
  const auto mu = mean();
  for (std::size_t i = 0; i < survivals.size(); ++i) {
    const auto& row = survivals[i];
    if (row.size() < 2) {
      out.push_back(0.0);
      continue;
    }
    double ss = 0;
    for (double v : row) ss += (v - mu[i]) * (v - mu[i]);
    out.push_back(std::sqrt(ss / (row.size() - 1)));
  }
  return out;
}

RBSurvivals run_rb(const RBConfig& config, const PhysicsBundle& physics, int n) {
  config.validate();
  physics.validate();
  if (n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  const GateSet gates(n, physics.omega_d(n), physics.delta_theta());
  const bool fast = config.allow_fast_path && !physics.decoherence_enabled;

  std::vector<Matrix> clifford_u;
  Matrix interleaved_u;
  if (fast) {
    for (int c = 0; c < CliffordGroup::kSize; ++c) {
      clifford_u.push_back(gate_list_propagator(compile_clifford(c, gates), gates, physics));
    }
    if (config.interleaved) interleaved_u = gate_list_propagator({gates.gate(*config.interleaved)}, gates, physics);
  }

  const std::size_t K = static_cast<std::size_t>(config.randomizations);
  RBSurvivals out;
  out.lengths = config.lengths;
  out.survivals.assign(config.lengths.size(), std::vector<double>(K));
  parallel_for(
      config.lengths.size() * K,
      [&](std::size_t job) {
        const std::size_t i = job / K, k = job % K;
        const int m = config.lengths[i];
        auto rng = rb_stream(config.seed, m, static_cast<int>(k));
        const CliffordSequence seq = generate_rb_sequence(m, config.interleaved, gates, rng);
        out.survivals[i][k] = fast ? survival_fast(seq, clifford_u, interleaved_u, config.depolarizing,
                                                   physics.transmon.dim)
                                   : survival_full(seq, gates, physics, config.depolarizing);
      },
      config.threads);
  return out;
}

double DepolarizingFit::at(double m) const { return A * std::pow(p, m) + B; }

nlohmann::ordered_json DepolarizingFit::to_json() const {
  nlohmann::ordered_json j;
  j["A"] = A;
  j["A_err"] = A_err;
  j["B"] = B;
  j["B_err"] = B_err;
  j["p"] = p;
  j["p_err"] = p_err;
  j["residual_norm"] = residual_norm;
  j["weighted"] = weighted;
  j["ideal_spam"] = ideal_spam;
  j["last_length"] = last_length;
  j["diagnostics"] = fit.to_json();
  return j;
}

DepolarizingFit fit_depolarizing(std::span<const int> lengths, std::span<const double> mean,
                                 std::span<const double> sigma) {
  if (lengths.size() != mean.size()) throw InvalidArgument("lengths and survivals differ in size");
  if (!sigma.empty() && sigma.size() != mean.size()) throw InvalidArgument("sigma differs in size");
  if (std::set<int>(lengths.begin(), lengths.end()).size() < 3) {
    throw InvalidArgument("depolarizing fit needs >= 3 distinct sequence lengths");
  }
  for (double v : mean) {
    if (!std::isfinite(v)) throw InvalidArgument("survivals must be finite");
  }
  const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
  if (*hi - *lo < 1e-12) {
    FitResult diag;
    diag.message = "survival does not vary with sequence length; p is indeterminate";
    throw FitError(diag.message, diag);
  }

  std::vector<double> w(mean.size(), 1.0);
  bool weighted = false;
  if (!sigma.empty()) {
    double floor = std::numeric_limits<double>::infinity();
    for (double s : sigma) {
      if (s > 0) floor = std::min(floor, s);
    }
    if (std::isfinite(floor)) {
      weighted = true;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double s = std::max(sigma[k], floor);
        w[k] = 1.0 / (s * s);
      }
      const double scale = *std::max_element(w.begin(), w.end());
      for (double& v : w) v /= scale;
    }
  }

  // Variable projection over a log grid in 1 - p seeds the nonlinear fit.
  double best_rss = std::numeric_limits<double>::infinity(), p0 = 0.9, a0 = 0.5, b0 = 0.5;
  for (int g = 0; g <= 400; ++g) {
    const double p = 1.0 - std::pow(10.0, -7.0 + 7.0 * g / 400.0 * (1.0 - 1e-3));
    double a = 0, b = 0;
    const double rss = project_amplitudes(p, lengths, mean, w, a, b);
    if (rss < best_rss) best_rss = rss, p0 = p, a0 = a, b0 = b;
  }

  std::vector<double> x(lengths.begin(), lengths.end());
  const std::vector<FitParameter> params = {
      {"A", a0},
      {"B", std::clamp(b0, 1e-9, 1.0 - 1e-9), 0.0, 1.0},
      {"p", p0, 1e-12, 1.0},
  };
  auto model = [](double m, std::span<const double> q) { return q[0] * std::pow(q[2], m) + q[1]; };
  FitResult fit;
  try {
    fit = curve_fit(x, mean, w, model, params);
  } catch (const FitError& e) {
    throw FitError(std::string("depolarizing fit: ") + e.what(), e.diagnostics());
  }
  DepolarizingFit out;
  out.A = fit.value("A");
  out.B = fit.value("B");
  out.p = fit.value("p");
  out.A_err = fit.error("A");
  out.B_err = fit.error("B");
  out.p_err = fit.error("p");
  out.residual_norm = fit.residual_norm;
  out.weighted = weighted;
  out.last_length = lengths.back();
  out.fit = std::move(fit);
  return out;
}

DepolarizingFit fit_depolarizing_ideal_spam(std::span<const int> lengths, std::span<const double> mean,
                                            std::span<const double> sigma) {
  if (lengths.size() != mean.size()) throw InvalidArgument("lengths and survivals differ in size");
  if (!sigma.empty() && sigma.size() != mean.size()) throw InvalidArgument("sigma differs in size");
  if (lengths.size() < 2) throw InvalidArgument("ideal-SPAM fit needs >= 2 sequence lengths");
  std::vector<double> w(mean.size(), 1.0);
  bool weighted = false;
  if (!sigma.empty()) {
    double floor = std::numeric_limits<double>::infinity();
    for (double s : sigma) {
      if (s > 0) floor = std::min(floor, s);
    }
    if (std::isfinite(floor)) {
      weighted = true;
      for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 / std::pow(std::max(sigma[k], floor), 2);
      const double scale = *std::max_element(w.begin(), w.end());
      for (double& v : w) v /= scale;
    }
  }
  // Seed from the shortest length: F(m) = (1 + p^m) / 2.
  const double p0 = std::clamp(std::pow(std::clamp(2 * mean[0] - 1, 1e-6, 1.0), 1.0 / lengths[0]), 1e-6, 1.0);
  std::vector<double> x(lengths.begin(), lengths.end());
  const std::vector<FitParameter> params = {{"A", 0.5, 0.0, 1.0, true}, {"B", 0.5, 0.0, 1.0, true},
                                            {"p", p0, 1e-12, 1.0}};
  auto model = [](double m, std::span<const double> q) { return q[0] * std::pow(q[2], m) + q[1]; };
  FitResult fit;
  try {
    fit = curve_fit(x, mean, w, model, params);
  } catch (const FitError& e) {
    throw FitError(std::string("ideal-SPAM depolarizing fit: ") + e.what(), e.diagnostics());
  }
  DepolarizingFit out;
  out.A = 0.5;
  out.B = 0.5;
  out.p = fit.value("p");
  out.p_err = fit.error("p");
  out.residual_norm = fit.residual_norm;
  out.weighted = weighted;
  out.ideal_spam = true;
  out.last_length = lengths.back();
  out.fit = std::move(fit);
  return out;
}

// A free three-parameter fit needs at least one residual degree of freedom.
constexpr std::size_t kFreeFitMinPoints = 4;

std::size_t decay_window(const RBSurvivals& survivals) {
  const auto mu = survivals.mean();
  if (mu.empty()) return 0;
  const auto sd = survivals.stddev();
  const std::size_t imin = static_cast<std::size_t>(std::min_element(mu.begin(), mu.end()) - mu.begin());
  for (std::size_t j = imin + 1; j < mu.size(); ++j) {
    const double se = std::hypot(sd[imin] / std::sqrt(survivals.survivals[imin].size()),
                                 sd[j] / std::sqrt(survivals.survivals[j].size()));
    if (mu[j] - mu[imin] > 3 * se) return std::max<std::size_t>(imin + 1, std::min<std::size_t>(2, mu.size()));
  }
  return mu.size();
}

DepolarizingFit fit_depolarizing(const RBSurvivals& survivals, std::size_t keep) {
  if (keep == 0 || keep > survivals.lengths.size()) throw InvalidArgument("fit window out of range");
  RBSurvivals used = survivals;
  used.lengths.resize(keep);
  used.survivals.resize(keep);
  const auto mu = used.mean();
  const std::size_t K = used.survivals.front().size();
  std::vector<double> sd;
  if (K >= 5) {
    sd = used.stddev();
    for (double& s : sd) s /= std::sqrt(static_cast<double>(K));
  }
  DepolarizingFit fit = keep >= kFreeFitMinPoints ? fit_depolarizing(used.lengths, mu, sd)
                                                  : fit_depolarizing_ideal_spam(used.lengths, mu, sd);
  fit.last_length = used.lengths.back();
  return fit;
}

DepolarizingFit fit_depolarizing(const RBSurvivals& survivals, bool truncate_after_minimum) {
  return fit_depolarizing(survivals, truncate_after_minimum ? decay_window(survivals) : survivals.lengths.size());
}

nlohmann::ordered_json FidelityEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["value"] = value;
  j["error"] = error;
  j["flagged"] = flagged;
  if (!note.empty()) j["note"] = note;
  return j;
}

FidelityEstimate extract_fidelity(const DepolarizingFit& reference, const DepolarizingFit* interleaved) {
  FidelityEstimate f;
  if (!(reference.p > 0 && reference.p <= 1)) throw InvalidArgument("reference p must lie in (0, 1]");
  if (!interleaved) {
    f.value = 1.0 - (1.0 - reference.p) / 2.0;
    f.error = reference.p_err / 2.0;
    return f;
  }
  if (!(interleaved->p > 0 && interleaved->p <= 1)) throw InvalidArgument("interleaved p must lie in (0, 1]");
  const double ratio = interleaved->p / reference.p;
  const double rel = std::hypot(interleaved->p_err / interleaved->p, reference.p_err / reference.p);
  f.error = ratio * rel / 2.0;
  const double combined = std::hypot(interleaved->p_err, reference.p_err);
  if (interleaved->p - reference.p > combined) {
    f.flagged = true;
    f.note = "p_int exceeds p_ref beyond the error bars (unphysical)";
  }
  f.value = std::clamp(1.0 - (1.0 - ratio) / 2.0, 0.0, 1.0);
  return f;
}

nlohmann::ordered_json RBReport::to_json() const {
  auto curve = [](const RBSurvivals& s) {
    nlohmann::ordered_json j;
    j["lengths"] = s.lengths;
    j["mean"] = s.mean();
    j["stddev"] = s.stddev();
    return j;
  };
  nlohmann::ordered_json j;
  j["n"] = n;
  j["fit_window"] = fit_window;
  j["reference"] = curve(reference);
  j["reference"]["fit"] = reference_fit.to_json();
  j["reference"]["clifford_fidelity"] = clifford_fidelity.to_json();
  j["gates"] = nlohmann::ordered_json::array();
  for (const auto& g : gates) {
    nlohmann::ordered_json e;
    e["gate"] = std::string(to_string(g.gate));
    e["curve"] = curve(g.survivals);
    e["fit"] = g.fit.to_json();
    e["fidelity"] = g.fidelity.to_json();
    j["gates"].push_back(std::move(e));
  }
  return j;
}

RBReport run_interleaved_benchmark(const RBConfig& config, const PhysicsBundle& physics, int n,
                                   const std::vector<GateLabel>& gates) {
  RBReport report;
  report.n = n;
  RBConfig ref = config;
  ref.interleaved.reset();
  report.reference = run_rb(ref, physics, n);
  for (GateLabel g : gates) {
    RBConfig c = config;
    c.interleaved = g;
    report.gates.push_back({g, run_rb(c, physics, n), {}, {}});
  }
  // One window for every curve so reference and interleaved decays are
  // compared over the same lengths.
  std::size_t keep = report.reference.lengths.size();
  if (config.truncate_after_minimum) {
    keep = decay_window(report.reference);
    for (const auto& b : report.gates) keep = std::min(keep, decay_window(b.survivals));
  }
  report.fit_window = keep;
  report.reference_fit = fit_depolarizing(report.reference, keep);
  report.clifford_fidelity = extract_fidelity(report.reference_fit);
  for (auto& b : report.gates) {
    b.fit = fit_depolarizing(b.survivals, keep);
    b.fidelity = extract_fidelity(report.reference_fit, &b.fit);
  }
  return report;
}

CalibrationResult calibrate_t1_per_qp(const RBConfig& config, const PhysicsBundle& physics, int n,
                                      const std::vector<GateLabel>& gates, double target, double lo, double hi,
                                      int iterations) {
  if (gates.empty()) throw InvalidArgument("calibration needs at least one gate");
  if (!(lo > 0 && hi > lo)) throw InvalidArgument("calibration bracket must satisfy 0 < lo < hi");
  if (!(target > 0 && target < 1)) throw InvalidArgument("calibration target must lie in (0, 1)");
  CalibrationResult out;
  auto metric = [&](double t1qp) {
    PhysicsBundle p = physics;
    p.decoherence.t1_per_qp = t1qp;
    const RBReport r = run_interleaved_benchmark(config, p, n, gates);
    double sum = 0;
    for (const auto& g : r.gates) sum += g.fidelity.value;
    const double f = sum / static_cast<double>(r.gates.size());
    out.trace.emplace_back(t1qp, f);
    return f;
  };
  double flo = metric(lo), fhi = metric(hi);
  if (!(flo < target && fhi > target)) {
    throw NumericalError("calibration bracket does not straddle the target fidelity");
  }
  // Bisection in log T1_per_qp; fidelity rises with weaker poisoning.
  for (int it = 0; it < iterations; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double f = metric(mid);
    (f < target ? lo : hi) = mid;
    (f < target ? flo : fhi) = f;
  }
  const bool pick_lo = std::abs(flo - target) <= std::abs(fhi - target);
  out.t1_per_qp = pick_lo ? lo : hi;
  out.achieved = pick_lo ? flo : fhi;
  return out;
}

}  // namespace sfqsim
