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

#include "sfqsim/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sfqsim {

namespace {

// (1 - exp(-x)) / x, stable at small x.
double relax_fraction(double x) { return x == 0.0 ? 1.0 : -std::expm1(-x) / x; }

}  // namespace

std::string_view to_string(TurnOnModel model) {
  return model == TurnOnModel::Linear ? "linear" : "threshold";
}

TurnOnModel parse_turn_on_model(std::string_view text) {
  if (text == "linear") return TurnOnModel::Linear;
  if (text == "threshold") return TurnOnModel::Threshold;
  throw InvalidArgument("unknown turn-on model '" + std::string(text) + "'");
}

void QPModel::validate() const {
  if (!(eta >= 0)) throw InvalidArgument("eta must be non-negative");
  if (turn_on_slips < 0) throw InvalidArgument("turn_on_slips must be non-negative");
  if (!(trapping_rate > 0) || !std::isfinite(trapping_rate)) throw InvalidArgument("trapping rate must be positive");
  if (slips_per_cycle < 1) throw InvalidArgument("slips_per_cycle must be >= 1");
  if (!(n_qp_background >= 0)) throw InvalidArgument("n_qp_background must be non-negative");
}

void QPDecayModel::validate() const {
  if (!(n_qp >= 0)) throw InvalidArgument("n_qp must be non-negative");
  if (!(t1_qp > 0)) throw InvalidArgument("t1_qp must be positive");
  if (!(t1_r > 0)) throw InvalidArgument("t1_r must be positive");
}

void DispersionParams::validate() const {
  if (!(gap > 0)) throw InvalidArgument("superconducting gap must be positive");
  if (!(empirical_factor > 0)) throw InvalidArgument("empirical_factor must be positive");
}

double qp_added(std::int64_t n_slips, const QPModel& model) {
  model.validate();
  if (n_slips < 0) throw InvalidArgument("slip count must be non-negative");
  if (model.turn_on == TurnOnModel::Threshold) {
    return model.eta * static_cast<double>(std::max<std::int64_t>(0, n_slips - model.turn_on_slips));
  }
  return model.eta * static_cast<double>(n_slips);
}

double qp_relax(double n_qp, double dt, const QPModel& model) {
  model.validate();
  if (!(dt >= 0)) throw InvalidArgument("dt must be non-negative");
  const double b = model.n_qp_background;
  return b + (n_qp - b) * std::exp(-model.trapping_rate * dt);
}

// ---------------------------------------------------------------------------
// QPIntegrator

QPIntegrator::QPIntegrator(const QPModel& model, std::optional<double> n_initial)
    : model_(model), n_(n_initial.value_or(model.n_qp_background)) {
  model_.validate();
}

double QPIntegrator::step(double dt, double generation) {
  const double s = model_.trapping_rate;
  const double steady = model_.n_qp_background + generation / s;
  const double x = s * dt;
  const double mean = steady + (n_ - steady) * relax_fraction(x);
  n_ = steady + (n_ - steady) * std::exp(-x);
  return mean;
}

double QPIntegrator::advance(double dt, double slip_rate) {
  if (!(dt >= 0)) throw InvalidArgument("dt must be non-negative");
  if (!(slip_rate >= 0)) throw InvalidArgument("slip rate must be non-negative");
  if (dt == 0.0) return n_;
  const double g = model_.eta * slip_rate;
  if (model_.turn_on == TurnOnModel::Threshold && slip_rate > 0) {
    const double remaining = static_cast<double>(model_.turn_on_slips) - slips_;
    if (remaining > 0) {
      const double t_on = remaining / slip_rate;
      slips_ += slip_rate * dt;
      if (t_on >= dt) return step(dt, 0.0);
      const double m1 = step(t_on, 0.0);
      const double m2 = step(dt - t_on, g);
      return (m1 * t_on + m2 * (dt - t_on)) / dt;
    }
  }
  slips_ += slip_rate * dt;
  return step(dt, g);
}

// ---------------------------------------------------------------------------
// QPTrajectory

QPTrajectory::QPTrajectory(QPModel model, std::vector<Segment> segments)
    : model_(std::move(model)), segments_(std::move(segments)) {}

double QPTrajectory::value(double t) const {
  if (segments_.empty()) return model_.n_qp_background;
  const Segment* seg = &segments_.front();
  for (const auto& s : segments_) {
    if (s.start <= t) seg = &s;
  }
  const double tau = std::max(0.0, t - seg->start);
  const double steady = model_.n_qp_background + seg->generation / model_.trapping_rate;
  return steady + (seg->n_start - steady) * std::exp(-model_.trapping_rate * tau);
}

double QPTrajectory::mean(double t0, double t1) const {
  if (!(t1 >= t0)) throw InvalidArgument("mean needs t1 >= t0");
  if (t1 == t0) return value(t0);
  double total = 0.0;
  const double s = model_.trapping_rate;
  for (const auto& seg : segments_) {
    const double a = std::max(t0, seg.start);
    const double b = std::min(t1, seg.stop);
    if (b <= a) continue;
    const double steady = model_.n_qp_background + seg.generation / s;
    const double n_a = steady + (seg.n_start - steady) * std::exp(-s * (a - seg.start));
    total += (b - a) * (steady + (n_a - steady) * relax_fraction(s * (b - a)));
  }
  return total / (t1 - t0);
}

QPTrajectory qp_trajectory(std::span<const DriveWindow> drive, const QPModel& model, double t_end,
                           std::optional<double> n_initial) {
  model.validate();
  if (!(t_end >= 0)) throw InvalidArgument("t_end must be non-negative");
  std::vector<QPTrajectory::Segment> segments;
  const double s = model.trapping_rate;
  double n = n_initial.value_or(model.n_qp_background);
  double t = 0.0;
  double slips = 0.0;

  auto evolve = [&](double dt, double g) {
    const double steady = model.n_qp_background + g / s;
    n = steady + (n - steady) * std::exp(-s * dt);
  };
  auto push = [&](double start, double stop, double slip_rate) {
    if (stop <= start) return;
    if (model.turn_on == TurnOnModel::Threshold && slip_rate > 0) {
      const double remaining = static_cast<double>(model.turn_on_slips) - slips;
      if (remaining > 0) {
        const double t_on = std::min(stop, start + remaining / slip_rate);
        segments.push_back({start, t_on, n, 0.0});
        evolve(t_on - start, 0.0);
        slips += slip_rate * (t_on - start);
        start = t_on;
        if (start >= stop) return;
      }
    }
    const double g = model.eta * slip_rate;
    segments.push_back({start, stop, n, g});
    evolve(stop - start, g);
    slips += slip_rate * (stop - start);
  };

  for (const auto& w : drive) {
    if (w.start < t - 1e-18) throw InvalidArgument("drive windows must be sorted and non-overlapping");
    const double start = std::min(w.start, t_end);
    const double stop = std::min(w.stop, t_end);
    push(t, start, 0.0);
    push(start, stop, w.slip_rate);
    t = std::max(t, stop);
  }
  push(t, t_end, 0.0);
  return QPTrajectory(model, std::move(segments));
}

// ---------------------------------------------------------------------------
// Decay law and fits

double decay_law(double t, const QPDecayModel& model) {
  model.validate();
  if (!(t >= 0)) throw InvalidArgument("t must be non-negative");
  const double residual = std::isinf(model.t1_r) ? 0.0 : t / model.t1_r;
  return std::exp(model.n_qp * std::expm1(-t / model.t1_qp) - residual);
}

namespace {

struct DecayGuess {
  double n_qp;
  double t1_qp;
  double t1_r;
};

DecayGuess guess_decay(std::span<const DecaySample> samples) {
  std::vector<DecaySample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  const double t_max = sorted.back().t;
  std::vector<double> tx, ly;
  for (size_t k = sorted.size() * 2 / 3; k < sorted.size(); ++k) {
    if (sorted[k].p1 > 0) {
      tx.push_back(sorted[k].t);
      ly.push_back(std::log(sorted[k].p1));
    }
  }
  DecayGuess g{0.1, t_max / 20, t_max};
  if (tx.size() >= 2 && tx.front() != tx.back()) {
    const auto [intercept, slope] = linear_regression(tx, ly);
    if (slope < 0) g.t1_r = -1.0 / slope;
    g.n_qp = std::clamp(-intercept, 1e-3, 50.0);
  }
  const double target = -g.n_qp * (1 - std::exp(-1.0));
  for (const auto& s : sorted) {
    if (s.p1 > 0 && std::log(s.p1) + s.t / g.t1_r <= target && s.t > 0) {
      g.t1_qp = s.t;
      break;
    }
  }
  return g;
}

void check_identifiable(std::span<const DecaySample> samples, bool any_fixed, const char* what) {
  if (samples.size() < 5) throw InvalidArgument(std::string(what) + ": need at least 5 samples");
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (!(s.t >= 0) || !std::isfinite(s.p1)) throw InvalidArgument(std::string(what) + ": invalid sample");
    hi = std::max(hi, s.p1);
    lo = std::min(lo, s.p1);
  }
  const bool two_decades = lo <= 0.0 || hi / lo >= 100.0;
  if (!two_decades && !any_fixed) {
    FitResult diag;
    diag.message = "decay spans less than two decades and no parameter is fixed; "
                   "n_qp, T1_qp and T1_r are not jointly identifiable";
    throw FitError(std::string(what) + ": " + diag.message, diag);
  }
}

// Maps a fit performed in units of `t_scale` back to seconds.
void rescale_times(FitResult& fit, const std::vector<size_t>& time_params, double t_scale) {
  for (size_t k : time_params) {
    if (k < fit.values.size()) fit.values[k] *= t_scale;
    if (k < fit.errors.size()) fit.errors[k] *= t_scale;
  }
  for (size_t a : time_params) {
    if (static_cast<Eigen::Index>(a) >= fit.covariance.rows()) continue;
    fit.covariance.row(static_cast<Eigen::Index>(a)) *= t_scale;
    fit.covariance.col(static_cast<Eigen::Index>(a)) *= t_scale;
  }
}

double max_time(std::span<const DecaySample> samples) {
  double t = 0.0;
  for (const auto& s : samples) t = std::max(t, s.t);
  if (!(t > 0)) throw InvalidArgument("decay samples need a positive time");
  return t;
}

}  // namespace

FitResult fit_decay(std::span<const DecaySample> samples, const DecayFitOptions& options) {
  check_identifiable(samples, options.fixed_t1_qp || options.fixed_t1_r, "fit_decay");
  if (!options.weights.empty() && options.weights.size() != samples.size()) {
    throw InvalidArgument("fit_decay: weights length differs from samples");
  }
  const double ts = max_time(samples);
  DecayGuess g = guess_decay(samples);
  if (options.initial) g = {options.initial->n_qp, options.initial->t1_qp, options.initial->t1_r};
  if (options.fixed_t1_qp) g.t1_qp = *options.fixed_t1_qp;
  if (options.fixed_t1_r) g.t1_r = *options.fixed_t1_r;
  if (std::isinf(g.t1_r)) g.t1_r = 1e6 * ts;

  const std::vector<FitParameter> params = {
      {"n_qp", std::clamp(g.n_qp, 0.0, 100.0), 0.0, 100.0, false},
      {"t1_qp", g.t1_qp / ts, 1e-9, 1e9, options.fixed_t1_qp.has_value()},
      {"t1_r", g.t1_r / ts, 1e-9, 1e12, options.fixed_t1_r.has_value()},
  };
  std::vector<double> sw(samples.size(), 1.0);
  for (size_t k = 0; k < options.weights.size(); ++k) sw[k] = std::sqrt(options.weights[k]);
  ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) {
    for (size_t k = 0; k < samples.size(); ++k) {
      const double x = samples[k].t / ts;
      const double model = std::exp(p[0] * std::expm1(-x / p[1]) - x / p[2]);
      r[k] = sw[k] * (samples[k].p1 - model);
    }
  };
  FitResult fit;
  try {
    fit = least_squares(params, samples.size(), fn);
  } catch (FitError& e) {
    FitResult diag = e.diagnostics();
    if (!diag.values.empty()) rescale_times(diag, {1, 2}, ts);
    throw FitError(std::string("fit_decay: ") + e.what(), diag);
  }
  rescale_times(fit, {1, 2}, ts);
  return fit;
}

FitResult fit_decay_paired(std::span<const DecaySample> poisoned, std::span<const DecaySample> unpoisoned,
                           const DecayFitOptions& options) {
  const bool any_fixed = options.fixed_t1_qp || options.fixed_t1_r;
  if (poisoned.size() < 5 || unpoisoned.size() < 5) {
    throw InvalidArgument("fit_decay_paired: need at least 5 samples per curve");
  }
  std::vector<DecaySample> all(poisoned.begin(), poisoned.end());
  all.insert(all.end(), unpoisoned.begin(), unpoisoned.end());
  check_identifiable(all, any_fixed, "fit_decay_paired");

  const double ts = std::max(max_time(poisoned), max_time(unpoisoned));
  const DecayGuess gp = guess_decay(poisoned);
  const DecayGuess gu = guess_decay(unpoisoned);
  double t1_qp = options.fixed_t1_qp.value_or(gp.t1_qp);
  double t1_r = options.fixed_t1_r.value_or(0.5 * (gp.t1_r + gu.t1_r));
  if (std::isinf(t1_r)) t1_r = 1e6 * ts;

  const std::vector<FitParameter> params = {
      {"n_qp_poisoned", std::clamp(gp.n_qp, 0.0, 100.0), 0.0, 100.0, false},
      {"n_qp_unpoisoned", std::clamp(gu.n_qp, 0.0, 100.0), 0.0, 100.0, false},
      {"t1_qp", t1_qp / ts, 1e-9, 1e9, options.fixed_t1_qp.has_value()},
      {"t1_r", t1_r / ts, 1e-9, 1e12, options.fixed_t1_r.has_value()},
  };
  ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) {
    size_t k = 0;
    auto eval = [&](std::span<const DecaySample> data, double n) {
      for (const auto& s : data) {
        const double x = s.t / ts;
        r[k++] = s.p1 - std::exp(n * std::expm1(-x / p[2]) - x / p[3]);
      }
    };
    eval(poisoned, p[0]);
    eval(unpoisoned, p[1]);
  };
  FitResult fit;
  try {
    fit = least_squares(params, all.size(), fn);
  } catch (FitError& e) {
    FitResult diag = e.diagnostics();
    if (!diag.values.empty()) rescale_times(diag, {2, 3}, ts);
    throw FitError(std::string("fit_decay_paired: ") + e.what(), diag);
  }
  rescale_times(fit, {2, 3}, ts);
  return fit;
}

FitResult fit_recovery(std::span<const RecoverySample> samples, std::optional<double> fixed_background) {
  if (samples.size() < (fixed_background ? 3u : 4u)) throw InvalidArgument("fit_recovery: too few samples");
  std::vector<RecoverySample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  const double ts = sorted.back().t;
  if (!(ts > 0) || sorted.front().t < 0 || sorted.front().t == ts) {
    throw InvalidArgument("fit_recovery: need distinct non-negative times");
  }

  const double bg0 = fixed_background.value_or(std::max(0.0, sorted.back().n_qp));
  const double excess_first = std::max(sorted.front().n_qp - bg0, 1e-6);
  double tau0 = ts / 3;
  for (const auto& s : sorted) {
    if (s.n_qp - bg0 <= excess_first / std::exp(1.0)) {
      tau0 = std::max(s.t - sorted.front().t, ts / 1000);
      break;
    }
  }
  const double excess0 = excess_first * std::exp(std::min(sorted.front().t / tau0, 50.0));
  const std::vector<FitParameter> params = {
      {"excess", excess0, 0.0, std::numeric_limits<double>::infinity(), false},
      {"trapping_time", tau0 / ts, 1e-9, 1e9, false},
      {"background", bg0, 0.0, std::numeric_limits<double>::infinity(), fixed_background.has_value()},
  };
  ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) {
    for (size_t k = 0; k < sorted.size(); ++k) {
      r[k] = sorted[k].n_qp - (p[2] + p[0] * std::exp(-(sorted[k].t / ts) / p[1]));
    }
  };
  FitResult fit;
  try {
    fit = least_squares(params, sorted.size(), fn);
  } catch (FitError& e) {
    FitResult diag = e.diagnostics();
    if (!diag.values.empty()) rescale_times(diag, {1}, ts);
    throw FitError(std::string("fit_recovery: ") + e.what(), diag);
  }
  rescale_times(fit, {1}, ts);
  return fit;
}

double dispersion_ratio(double omega10, const DispersionParams& params, bool* in_validity_range) {
  params.validate();
  if (!(omega10 >= 0)) throw InvalidArgument("omega10 must be non-negative");
  const double photon = constants::hbar * omega10;
  if (in_validity_range != nullptr) *in_validity_range = photon < 2.0 * params.gap;
  return params.empirical_factor * -0.5 * (1.0 + std::numbers::pi * std::sqrt(photon / (2.0 * params.gap)));
}

QPRates rates_from_nqp(double n_qp, const DecoherenceParams& dec, const DispersionParams& disp, double omega10) {
  if (!(n_qp >= 0)) throw InvalidArgument("n_qp must be non-negative");
  const double gamma_qp = n_qp / dec.t1_per_qp;
  QPRates rates;
  rates.gamma1 = 1.0 / dec.t1_residual + gamma_qp;
  rates.delta_omega = dispersion_ratio(omega10, disp) * dec.qp_dispersion_factor * gamma_qp;
  return rates;
}

}  // namespace sfqsim
