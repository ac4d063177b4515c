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
#include <numbers>

#include "sfqsim/transmon.hpp"

using namespace sfqsim;

namespace {

constexpr double kPi = std::numbers::pi;

TransmonParams two_level() {
  TransmonParams p;
  p.dim = 2;
  return p;
}

DensityMatrix plus_state(int dim) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(0) = 1.0;
  psi(1) = 1.0;
  return DensityMatrix::pure(psi);
}

// Right-hand side of the Lindblad equation written out term by term.
Matrix lindblad_rhs(const Matrix& rho, const Matrix& h, const Matrix& a, const Matrix& n, double g1, double gphi) {
  const Complex i(0.0, 1.0);
  Matrix out = -i * (h * rho - rho * h);
  auto dissipator = [&](const Matrix& c, double rate) {
    return rate * (c * rho * c.adjoint() - 0.5 * (c.adjoint() * c * rho + rho * c.adjoint() * c));
  };
  out += dissipator(a, g1);
  out += dissipator(n, 2.0 * gphi);
  return out;
}

// Fixed-step RK4 reference integrator, independent of the band solver.
Matrix rk4_reference(Matrix rho, const std::vector<double>& freq, double dt, double g1, double gphi, int steps) {
  const int d = static_cast<int>(rho.rows());
  Matrix h = Matrix::Zero(d, d);
  Matrix n = Matrix::Zero(d, d);
  Matrix a = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    h(k, k) = freq[static_cast<size_t>(k)];
    n(k, k) = k;
    if (k > 0) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  const double step = dt / steps;
  for (int s = 0; s < steps; ++s) {
    const Matrix k1 = lindblad_rhs(rho, h, a, n, g1, gphi);
    const Matrix k2 = lindblad_rhs(rho + 0.5 * step * k1, h, a, n, g1, gphi);
    const Matrix k3 = lindblad_rhs(rho + 0.5 * step * k2, h, a, n, g1, gphi);
    const Matrix k4 = lindblad_rhs(rho + step * k3, h, a, n, g1, gphi);
    rho += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

Matrix random_state(int d, unsigned seed) {
  std::srand(seed);
  Matrix m = Matrix::Random(d, d);
  Matrix rho = m * m.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("level energies follow the Duffing ladder") {
  TransmonParams p;
  const auto e = level_energies(p);
  REQUIRE(e.size() == 4);
  CHECK(e[0] == 0.0);
  CHECK(e[1] == doctest::Approx(2 * kPi * 4.958e9).epsilon(1e-15));
  CHECK(e[2] == doctest::Approx(2 * kPi * 9.696e9).epsilon(1e-12));
  CHECK(e[3] == doctest::Approx(2 * kPi * (3 * 4.958e9 - 3 * 0.220e9)).epsilon(1e-12));
}

TEST_CASE("transmon parameter validation") {
  TransmonParams p;
  p.dim = 1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = TransmonParams{};
  p.omega10 = -1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = TransmonParams{};
  p.alpha = -2 * p.omega10;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("tip angle per pulse") {
  CouplingParams c;
  const double w = 2 * kPi * 4.958e9;

  SUBCASE("zero coupling gives zero") {
    c.coupling_capacitance = 0.0;
    CHECK(delta_theta(c, w) == 0.0);
  }
  SUBCASE("inverted capacitance reproduces pi/46") {
    // Bisection on the tip-angle formula written out here.
    auto tip = [&](double cap) {
      return 400e-18 * 2.067833848e-15 * std::sqrt(2 * w / (1.054571817e-34 * cap));
    };
    double lo = 10e-15, hi = 500e-15;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (tip(mid) > kPi / 46 ? lo : hi) = mid;
    }
    CHECK(lo == doctest::Approx(86.6e-15).epsilon(0.01));
    CHECK(capacitance_for_delta_theta(400e-18, w, kPi / 46) == doctest::Approx(lo).epsilon(1e-9));
    c.capacitance = lo;
    CHECK(delta_theta(c, w) == doctest::Approx(kPi / 46).epsilon(1e-9));
    CouplingParams defaults;
    CHECK(delta_theta(defaults, w) == doctest::Approx(kPi / 46).epsilon(0.01));
  }
  SUBCASE("linear in the coupling capacitance") {
    const double one = delta_theta(c, w);
    c.coupling_capacitance *= 2;
    CHECK(delta_theta(c, w) == 2 * one);
  }
  SUBCASE("scales as C^-1/2") {
    const double one = delta_theta(c, w);
    c.capacitance *= 4;
    CHECK(delta_theta(c, w) == doctest::Approx(one / 2).epsilon(1e-14));
  }
  CHECK(CouplingParams{}.weakly_coupled());
}

TEST_CASE("free evolution") {
  const TransmonParams p = two_level();
  const DensityMatrix plus = plus_state(2);

  CHECK((free_evolve(plus, p, 0.0).matrix() - plus.matrix()).norm() == 0.0);
  const DensityMatrix wrapped = free_evolve(plus, p, kTwoPi / p.omega10);
  CHECK((wrapped.matrix() - plus.matrix()).norm() < 1e-12);

  const DensityMatrix quarter = free_evolve(plus, p, 0.25 * kTwoPi / p.omega10);
  // rho_10 picks up exp(-i omega10 t) = -i.
  CHECK(std::abs(quarter.matrix()(1, 0) - Complex(0.0, -0.5)) < 1e-12);

  const DensityMatrix one = DensityMatrix::basis(2, 1);
  CHECK(free_evolve(one, p, 1.234e-9).population(1) == 1.0);
  CHECK_THROWS_AS(free_evolve(plus, p, -1.0), InvalidArgument);
}

TEST_CASE("SFQ kicks") {
  const TransmonParams p = two_level();
  SUBCASE("zero kick is identity") {
    CHECK((kick_unitary(0.0, 4) - Matrix::Identity(4, 4)).norm() < 1e-15);
  }
  SUBCASE("two-level kick is a y rotation") {
    const double th = 0.37;
    const Matrix u = kick_unitary(th, 2);
    CHECK(std::abs(u(0, 0) - std::cos(th / 2)) < 1e-15);
    CHECK(std::abs(u(1, 0) - std::sin(th / 2)) < 1e-15);
    CHECK(std::abs(u(0, 1) + std::sin(th / 2)) < 1e-15);
    // The general displacement path agrees with the closed form.
    const Matrix u3 = kick_unitary(th, 3);
    CHECK((u3 * u3.adjoint() - Matrix::Identity(3, 3)).norm() < 1e-14);
  }
  SUBCASE("pi kick inverts") {
    CHECK(sfq_kick(DensityMatrix::ground(2), kPi, p).population(1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("ten pi/10 kicks on resonance invert") {
    DensityMatrix rho = DensityMatrix::ground(2);
    for (int k = 0; k < 10; ++k) {
      rho = sfq_kick(rho, kPi / 10, p);
      rho = free_evolve(rho, p, kTwoPi / p.omega10);
    }
    CHECK(rho.population(1) > 1 - 1e-12);
  }
  SUBCASE("resonant kicks compose to sin^2") {
    const double th = 0.013;
    DensityMatrix rho = DensityMatrix::ground(2);
    for (int k = 1; k <= 120; ++k) {
      rho = free_evolve(sfq_kick(rho, th, p), p, kTwoPi / p.omega10);
      CHECK(std::abs(rho.population(1) - std::pow(std::sin(k * th / 2), 2)) < 1e-8);
    }
  }
  SUBCASE("kicks preserve purity") {
    TransmonParams p4;
    DensityMatrix rho = DensityMatrix::unchecked(random_state(4, 3));
    const double before = rho.purity();
    for (int k = 0; k < 50; ++k) rho = free_evolve(sfq_kick(rho, 0.07, p4), p4, 1.3e-11);
    CHECK(std::abs(rho.purity() - before) < 1e-10);
    CHECK(rho.validity_problem().empty());
  }
}

TEST_CASE("leakage after a calibrated pi pulse falls as anharmonicity grows") {
  double previous = 1.0;
  for (double alpha_mhz : {-100.0, -150.0, -200.0, -300.0, -400.0}) {
    TransmonParams p;
    p.alpha = kTwoPi * alpha_mhz * 1e6;
    DensityMatrix rho = DensityMatrix::ground(4);
    for (int k = 0; k < 46; ++k) rho = free_evolve(sfq_kick(rho, kPi / 46, p), p, kTwoPi / p.omega10);
    const double leak = rho.population(2) + rho.population(3);
    CHECK(leak > 0.0);
    CHECK(leak < previous);
    previous = leak;
  }
}

TEST_CASE("decoherence channel") {
  SUBCASE("zero time is identity") {
    const DensityMatrix rho = plus_state(2);
    CHECK((apply_decoherence(rho, 0.0, 1e5, 1e5, 1e6).matrix() - rho.matrix()).norm() < 1e-15);
  }
  SUBCASE("amplitude damping at one T1") {
    const double t1 = 23.6e-6;
    const DensityMatrix out = apply_decoherence(DensityMatrix::basis(2, 1), t1, 1 / t1, 0.0, 0.0);
    CHECK(std::abs(out.population(1) - std::exp(-1.0)) < 1e-6);
    CHECK(out.trace_error() < 1e-10);
  }
  SUBCASE("pure dephasing") {
    const double g = 3e4;
    const double dt = 40e-6;
    const DensityMatrix out = apply_decoherence(plus_state(2), dt, 0.0, g, 0.0);
    CHECK(std::abs(std::abs(out.matrix()(0, 1)) - 0.5 * std::exp(-g * dt)) < 1e-14);
  }
  SUBCASE("frequency shift rotates coherences") {
    const double shift = 2 * kPi * 1e6;
    const double dt = 0.125e-6;
    const DensityMatrix out = apply_decoherence(plus_state(2), dt, 0.0, 0.0, shift);
    const Complex expected = 0.5 * std::exp(Complex(0.0, -shift * dt));
    CHECK(std::abs(out.matrix()(1, 0) - expected) < 1e-14);
  }
  SUBCASE("negative inputs rejected") {
    CHECK_THROWS_AS(apply_decoherence(plus_state(2), -1, 0, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(apply_decoherence(plus_state(2), 1, -1, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(apply_decoherence(plus_state(2), 1, 0, -1, 0), InvalidArgument);
  }
  SUBCASE("multi-level damping matches an RK4 integration of the master equation") {
    for (int d : {2, 3, 4, 5}) {
      const Matrix rho0 = random_state(d, 11u + static_cast<unsigned>(d));
      std::vector<double> freq(static_cast<size_t>(d));
      for (int k = 0; k < d; ++k) freq[static_cast<size_t>(k)] = 2 * kPi * (0.8e6 * k - 0.05e6 * k * k);
      const double g1 = 1.0 / 3e-6;
      const double gphi = 1.0 / 7e-6;
      const double dt = 2.5e-6;
      Matrix exact = rho0;
      detail::lindblad_step(exact, freq, dt, g1, gphi);
      const Matrix ref = rk4_reference(rho0, freq, dt, g1, gphi, 20000);
      CAPTURE(d);
      CHECK((exact - ref).cwiseAbs().maxCoeff() < 1e-10);
      const DensityMatrix checked = DensityMatrix::unchecked(exact);
      CHECK(checked.validity_problem().empty());
    }
  }
  SUBCASE("level k decays at rate k gamma1") {
    const double g1 = 1e5;
    const double dt = 1e-6;
    const DensityMatrix out = apply_decoherence(DensityMatrix::basis(4, 3), dt, g1, 0.0, 0.0);
    CHECK(std::abs(out.population(3) - std::exp(-3 * g1 * dt)) < 1e-14);
    CHECK(std::abs(out.matrix().trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("open evolution splits into free precession and decoherence") {
  // Damping commutes with precession only on a harmonic ladder.
  TransmonParams p;
  p.alpha = 0.0;
  const Matrix rho0 = random_state(4, 5);
  const DensityMatrix rho = DensityMatrix::unchecked(rho0);
  const double g1 = 4e4, gphi = 2e4, dt = 3.3e-7, shift = 2 * kPi * 0.2e6;

  const DensityMatrix a = apply_decoherence(free_evolve(rho, p, dt), dt, g1, gphi, shift);
  const DensityMatrix b = free_evolve(apply_decoherence(rho, dt, g1, gphi, shift), p, dt);
  const DensityMatrix c = evolve_open(rho, p, dt, g1, gphi, shift);
  CHECK((a.matrix() - c.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.matrix() - c.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  // With rates off the two commute for any anharmonicity.
  const TransmonParams duffing;
  const DensityMatrix e = apply_decoherence(free_evolve(rho, duffing, dt), dt, 0.0, 0.0, shift);
  const DensityMatrix f = free_evolve(apply_decoherence(rho, dt, 0.0, 0.0, shift), duffing, dt);
  CHECK((e.matrix() - f.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  // Additivity in dt with rates off.
  const DensityMatrix once = free_evolve(rho, p, 2 * dt);
  const DensityMatrix twice = free_evolve(free_evolve(rho, p, dt), p, dt);
  CHECK((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  const DensityMatrix dec_once = apply_decoherence(rho, 2 * dt, 0.0, 0.0, shift);
  const DensityMatrix dec_twice = apply_decoherence(apply_decoherence(rho, dt, 0.0, 0.0, shift), dt, 0.0, 0.0, shift);
  CHECK((dec_once.matrix() - dec_twice.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density matrix invariants") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 0.7;
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidArgument);
  bad(1, 1) = 0.3;
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidArgument);
  bad(1, 0) = 0.1;
  CHECK_NOTHROW(DensityMatrix{bad});
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityMatrix{neg}, InvalidArgument);
}

TEST_CASE("dephasing rate from T2*") {
  DecoherenceParams d;
  bool clamped = true;
  CHECK(d.gamma_phi(&clamped) == doctest::Approx(1 / 24.4e-6 - 0.5 / 23.6e-6));
  CHECK_FALSE(clamped);
  d.t2_star_residual = 2 * d.t1_residual;
  CHECK(d.gamma_phi(&clamped) == doctest::Approx(0.0).epsilon(1e-12));
  d.t2_star_residual = 2.1 * d.t1_residual;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}
