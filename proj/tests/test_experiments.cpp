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

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "sfqsim/experiments.hpp"
#include "sfqsim/fitting.hpp"

using namespace sfqsim;

namespace {

constexpr double kPi = std::numbers::pi;

PhysicsBundle ideal(double dtheta = kPi / 46) {
  PhysicsBundle p;
  p.transmon.dim = 2;
  p.delta_theta_override = dtheta;
  p.decoherence_enabled = false;
  p.qp_dynamics_enabled = false;
  return p;
}

// Stroboscopic two-level product: kick, then free precession over one period.
double strobe_p1(int pulses, double dtheta, double omega10, double period) {
  using C = std::complex<double>;
  const double c = std::cos(dtheta / 2), s = std::sin(dtheta / 2);
  C a0 = 1.0, a1 = 0.0;
  const C phase = std::exp(C(0, -omega10 * period));
  for (int k = 0; k < pulses; ++k) {
    const C b0 = c * a0 - s * a1;
    const C b1 = s * a0 + c * a1;
    a0 = b0;
    a1 = b1 * (k + 1 < pulses ? phase : C(1.0));
  }
  return std::norm(a1);
}

}  // namespace

TEST_CASE("sweep spec") {
  const SweepSpec s = SweepSpec::linspace("t_s", 0.0, 1.0, 5);
  CHECK(s.values.front() == 0.0);
  CHECK(s.values.back() == 1.0);
  CHECK(s.values[2] == doctest::Approx(0.5));
  CHECK_THROWS_AS(SweepSpec::linspace("t_s", 0.0, 1.0, 0), InvalidArgument);
  CHECK_THROWS_AS((SweepSpec{"t_s", {}, 1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((SweepSpec{"t_s", {1.0}, 0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((SweepSpec{"t_s", {std::nan("")}, 1}.validate()), InvalidArgument);
}

TEST_CASE("rabi trace follows the kick composition") {
  const PhysicsBundle phys = ideal();
  const double period = kTwoPi / phys.omega_d(3);
  const SweepSpec d = SweepSpec::linspace("t_s", 0.0, 200e-9, 401);
  const ExperimentResult r = run_rabi(phys, DriveSpec{3, 0.0}, d);
  CHECK(r.p1(0) == 0.0);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const int pulses = static_cast<int>(std::ceil(d.values[k] / period - 1e-9));
    const double s = std::sin(pulses * kPi / 46 / 2);
    CHECK(std::abs(r.p1(k) - s * s) < 1e-12);
  }

  SUBCASE("28 ns inverts the qubit") {
    const ExperimentResult x = run_rabi(phys, DriveSpec{3, 0.0}, SweepSpec{"t_s", {28e-9}, 1});
    CHECK(x.p1(0) > 0.998);
  }
  SUBCASE("rabi frequency is dtheta f_d / 2 pi") {
    const SweepSpec long_sweep = SweepSpec::linspace("t_s", 0.0, 400e-9, 800);
    const ExperimentResult lr = run_rabi(phys, DriveSpec{3, 0.0}, long_sweep);
    const FitResult fit = fit_damped_cosine(long_sweep.values, lr.p1_row(), true);
    const double expected = (kPi / 46) * (phys.omega_d(3) / kTwoPi) / kTwoPi;
    CHECK(expected == doctest::Approx(17.96e6).epsilon(1e-3));
    CHECK(fit.value("frequency") == doctest::Approx(expected).epsilon(1e-2));
  }
}

TEST_CASE("chevron") {
  const PhysicsBundle phys = ideal();
  const SweepSpec detunings{"detuning_hz", {-4e6, -1e6, 0.0, 1e6, 4e6}, 1};
  const SweepSpec durations = SweepSpec::linspace("t_s", 0.0, 150e-9, 91);
  const ExperimentResult chev = run_chevron(phys, 3, detunings, durations);
  REQUIRE(chev.point_count() == detunings.size() * durations.size());

  SUBCASE("zero-detuning column equals run_rabi bitwise") {
    const ExperimentResult rabi = run_rabi(phys, DriveSpec{3, 0.0}, durations);
    for (std::size_t j = 0; j < durations.size(); ++j) CHECK(chev.populations[chev.index(2, j)] == rabi.populations[j]);
  }
  SUBCASE("each column matches the stroboscopic product") {
    for (std::size_t i = 0; i < detunings.size(); ++i) {
      const double wd = phys.omega_d(3, kTwoPi * detunings.values[i]);
      const double period = kTwoPi / wd;
      for (std::size_t j = 0; j < durations.size(); ++j) {
        const int pulses = static_cast<int>(std::ceil(durations.values[j] / period - 1e-9));
        CHECK(std::abs(chev.p1(i, j) - strobe_p1(pulses, kPi / 46, phys.transmon.omega10, period)) < 1e-10);
      }
    }
  }
  SUBCASE("contrast is largest on resonance and follows the generalized Rabi law") {
    double best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < detunings.size(); ++i) {
      const auto row = chev.p1_row(i);
      const double contrast = *std::max_element(row.begin(), row.end());
      if (contrast > best) best = contrast, best_i = i;
    }
    CHECK(best_i == 2);
    // Continuous two-level limit with effective detuning n * delta.
    const double omega_r = (kPi / 46) * phys.omega_d(3) / kTwoPi;
    for (std::size_t i = 0; i < detunings.size(); ++i) {
      const double delta = 3 * kTwoPi * detunings.values[i];
      const double w = std::hypot(omega_r, delta);
      const auto row = chev.p1_row(i);
      const double peak = *std::max_element(row.begin(), row.end());
      CAPTURE(i);
      CHECK(peak == doctest::Approx(omega_r * omega_r / (w * w)).epsilon(0.03));
    }
  }
  SUBCASE("mirror symmetry") {
    // Exact under a sign flip of the per-pulse phase error.
    const double period = kTwoPi / phys.omega_d(3);
    for (int pulses : {5, 23, 46, 80}) {
      for (double eps : {0.01, 0.05}) {
        const double plus = strobe_p1(pulses, kPi / 46, (kTwoPi * 3 + eps) / period, period);
        const double minus = strobe_p1(pulses, kPi / 46, (kTwoPi * 3 - eps) / period, period);
        CHECK(std::abs(plus - minus) < 1e-12);
      }
    }
    // In trigger-frequency coordinates the period itself shifts with delta,
    // so the map is mirror symmetric only to O(n delta / omega10) plus the
    // pulse-count edges; check the bulk agreement stays small.
    double worst = 0.0;
    for (std::size_t j = 0; j < durations.size(); ++j) worst = std::max(worst, std::abs(chev.p1(1, j) - chev.p1(3, j)));
    CHECK(worst < 0.05);
  }
}

TEST_CASE("ramsey") {
  SUBCASE("no detuning gives a full inversion at every delay") {
    const PhysicsBundle phys = ideal();
    const ExperimentResult r = run_ramsey(phys, DriveSpec{3, 0.0}, SweepSpec::linspace("delay_s", 0.0, 1e-6, 11));
    for (std::size_t k = 0; k < 11; ++k) CHECK(r.p1(k) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("delays snap to whole trigger cycles") {
    const PhysicsBundle phys = ideal();
    const ExperimentResult r = run_ramsey(phys, DriveSpec{3, 0.0}, SweepSpec{"delay_s", {1.3e-9}, 1});
    CHECK(r.axes[0].values[0] == doctest::Approx(2 * kTwoPi / phys.omega_d(3)));
  }
  SUBCASE("fringe frequency is n times the trigger detuning") {
    const PhysicsBundle phys = ideal();
    const SweepSpec delays = SweepSpec::linspace("delay_s", 0.0, 2e-6, 301);
    const ExperimentResult r = run_ramsey(phys, DriveSpec{3, 1e6}, delays);
    const FitResult fit = fit_damped_cosine(r.axes[0].values, r.p1_row(), true);
    CHECK(fit.value("frequency") == doctest::Approx(3e6).epsilon(0.01));
  }
  SUBCASE("envelope decays with the configured T2*") {
    PhysicsBundle phys = ideal();
    phys.decoherence_enabled = true;
    phys.qp.n_qp_background = 0.0;
    const SweepSpec delays = SweepSpec::linspace("delay_s", 0.0, 60e-6, 301);
    const ExperimentResult r = run_ramsey(phys, DriveSpec{3, 0.02e6}, delays);
    const FitResult fit = fit_damped_cosine(r.axes[0].values, r.p1_row());
    CHECK(fit.value("decay_time") == doctest::Approx(phys.decoherence.t2_star_residual).epsilon(0.05));
    CHECK(fit.value("frequency") == doctest::Approx(0.06e6).epsilon(0.01));
  }
}

TEST_CASE("rabi2d symmetry and rays") {
  for (int n : {1, 3}) {
    CAPTURE(n);
    const PhysicsBundle phys = ideal();
    const int grid = 8;  // phases per pi/n
    SweepSpec phases{"phase_rad", {}, 1};
    for (int k = 0; k < 2 * n * grid; ++k) phases.values.push_back(k * kPi / (n * grid));
    const SweepSpec durations = SweepSpec::linspace("t_s", 0.0, 40e-9 * n, 25);
    const ExperimentResult r = run_rabi2d(phys, n, phases, durations);

    double worst = 0.0;
    for (std::size_t i = 0; i + grid < phases.size(); ++i) {
      for (std::size_t j = 0; j < durations.size(); ++j) worst = std::max(worst, std::abs(r.p1(i, j) - r.p1(i + grid, j)));
    }
    CHECK(worst < 1e-6);

    const auto x_ray = r.p1_row(0);
    CHECK(*std::max_element(x_ray.begin(), x_ray.end()) - *std::min_element(x_ray.begin(), x_ray.end()) > 0.99);
    const auto y_ray = r.p1_row(grid / 2);
    for (double v : y_ray) CHECK(std::abs(v - 1.0) < 1e-6);
  }
  SUBCASE("higher levels break the symmetry only weakly") {
    PhysicsBundle phys = ideal();
    phys.transmon.dim = 4;
    const SweepSpec phases{"phase_rad", {0.0, kPi / 3, kPi / 6, kPi / 2}, 1};
    const SweepSpec durations = SweepSpec::linspace("t_s", 0.0, 60e-9, 7);
    const ExperimentResult r = run_rabi2d(phys, 3, phases, durations);
    for (std::size_t j = 0; j < durations.size(); ++j) {
      CHECK(std::abs(r.p1(0, j) - r.p1(1, j)) < 2e-2);
      CHECK(std::abs(r.p1(2, j) - r.p1(3, j)) < 2e-2);
    }
  }
  CHECK_THROWS_AS(run_rabi2d(ideal(), 3, SweepSpec{"phase_rad", {7.0}, 1}, SweepSpec{"t_s", {0.0}, 1}),
                  InvalidArgument);
}

TEST_CASE("staircase") {
  const double dtheta = kPi / 46;
  const PhysicsBundle phys = ideal(dtheta);
  const int n = 41;
  const double period = kTwoPi / phys.omega_d(n);
  CHECK(period == doctest::Approx(8.27e-9).epsilon(1e-3));
  // Eight samples inside each inter-pulse interval.
  SweepSpec d{"t_s", {}, 1};
  const int pulses = 12;
  for (int k = 0; k < pulses; ++k) {
    for (int q = 1; q <= 8; ++q) d.values.push_back((k + q / 9.0) * period);
  }
  const ExperimentResult r = run_staircase(phys, n, d);
  for (int k = 0; k < pulses; ++k) {
    const double level = r.p1(static_cast<std::size_t>(8 * k));
    for (int q = 1; q < 8; ++q) CHECK(std::abs(r.p1(static_cast<std::size_t>(8 * k + q)) - level) <= 1e-12);
    const double s = std::sin((k + 1) * dtheta / 2);
    CHECK(std::abs(level - s * s) < 1e-12);
    if (k > 0) {
      const double step = level - r.p1(static_cast<std::size_t>(8 * (k - 1)));
      const double s0 = std::sin(k * dtheta / 2);
      CHECK(step == doctest::Approx(s * s - s0 * s0).epsilon(1e-9));
    }
  }
  CHECK(r.metadata["pulse_spacing_s"].get<double>() == doctest::Approx(period));
}

TEST_CASE("bias window gates the driver") {
  const PhysicsBundle phys = ideal();
  const SweepSpec bias{"bias", {0.1, 0.5, 0.9}, 1};
  const SweepSpec durations{"t_s", {14e-9, 28e-9}, 1};
  const ExperimentResult r = run_bias_rabi(phys, DriveSpec{3, 0.0}, bias, BiasWindow{0.3, 0.7}, durations);
  CHECK(r.p1(0, 1) == 0.0);
  CHECK(r.p1(1, 1) > 0.998);
  CHECK(r.p1(2, 1) == 0.0);
}

TEST_CASE("shot sampling is seeded per point and independent of threads") {
  const PhysicsBundle phys = ideal();
  const SweepSpec det{"detuning_hz", {-1e6, 0.0, 1e6}, 1};
  const SweepSpec dur = SweepSpec::linspace("t_s", 0.0, 30e-9, 7, 4);
  const ExperimentResult a = run_chevron(phys, 3, det, dur, MeasurementOptions{200, 7, 1});
  const ExperimentResult b = run_chevron(phys, 3, det, dur, MeasurementOptions{200, 7, 4});
  const ExperimentResult c = run_chevron(phys, 3, det, dur, MeasurementOptions{200, 8, 4});
  const ExperimentResult exact = run_chevron(phys, 3, det, dur);
  CHECK(a.populations == b.populations);
  CHECK(a.populations != c.populations);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.populations.size(); ++i) {
    CHECK(a.populations[i][0] + a.populations[i][1] == doctest::Approx(1.0));
    // 800 shots per point: 5 sigma is at most 0.09.
    worst = std::max(worst, std::abs(a.populations[i][1] - exact.populations[i][1]));
  }
  CHECK(worst < 0.09);
}

TEST_CASE("csv output") {
  const PhysicsBundle phys = ideal();
  const ExperimentResult r = run_rabi(phys, DriveSpec{3, 0.0}, SweepSpec{"t_s", {0.0, 14e-9}, 1});
  std::ostringstream out;
  write_csv(r, out);
  std::istringstream in(out.str());
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(header == "t_s,p0,p1");
  CHECK(row0 == "0,1,0");
  const double t = std::stod(row1.substr(0, row1.find(',')));
  CHECK(t == 14e-9);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(r.metadata["physics"]["transmon"]["dim"] == 2);
}
