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

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "sfqsim/rb.hpp"

using namespace sfqsim;

namespace {

constexpr double kPi = std::numbers::pi;

PhysicsBundle ideal() {
  PhysicsBundle p;
  p.transmon.dim = 2;
  p.delta_theta_override = kPi / 46;
  p.decoherence_enabled = false;
  return p;
}

GateSet gate_set(int n = 3) { return GateSet(n, ideal().omega_d(n), kPi / 46); }

}  // namespace

TEST_CASE("config and default grid") {
  const auto grid = RBConfig::default_lengths();
  CHECK(grid.front() == 1);
  CHECK(grid.back() == 200);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
  RBConfig c;
  CHECK_NOTHROW(c.validate());
  c.lengths = {1, 3, 3};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.lengths = {0, 2};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = RBConfig{};
  c.randomizations = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("generated sequences compose to identity") {
  const GateSet gs = gate_set();
  for (std::optional<GateLabel> inter : {std::optional<GateLabel>{}, std::optional{GateLabel::X2},
                                         std::optional{GateLabel::MinusY}}) {
    for (int seed = 0; seed < 50; ++seed) {
      auto rng = rb_stream(static_cast<std::uint64_t>(seed), 1 + seed % 13, 0);
      const CliffordSequence seq = generate_rb_sequence(1 + seed % 13, inter, gs, rng);
      CHECK(compose_sequence(seq.cliffords) == 0);
      // Independent check from the labels' ideal unitaries.
      Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
      for (const auto& c : seq.compiled) {
        for (const auto& g : c) u = ideal_unitary(g.label) * u;
      }
      CHECK(phase_insensitive_overlap(u, Eigen::Matrix2cd::Identity()) >= 1 - 1e-8);
    }
  }
  SUBCASE("interleaved length accounting") {
    auto rng = rb_stream(1, 2, 0);
    const CliffordSequence seq = generate_rb_sequence(2, GateLabel::X2, gs, rng);
    CHECK(seq.cliffords.size() == 5);
    CHECK(seq.interleaved == std::vector<bool>{false, true, false, true, false});
    CHECK(seq.compiled[1].size() == 1);
    CHECK(seq.compiled[1][0].label == GateLabel::X2);
  }
  SUBCASE("identity draw gives identity recovery") {
    for (int seed = 0;; ++seed) {
      auto rng = rb_stream(static_cast<std::uint64_t>(seed), 1, 0);
      const CliffordSequence seq = generate_rb_sequence(1, std::nullopt, gs, rng);
      if (seq.cliffords[0] != 0) continue;
      CHECK(seq.cliffords[1] == 0);
      CHECK(seq.compiled[1].empty());
      break;
    }
  }
  CHECK_THROWS_AS(
      [&] {
        auto rng = rb_stream(0, 0, 0);
        generate_rb_sequence(0, std::nullopt, gs, rng);
      }(),
      InvalidArgument);
}

TEST_CASE("Clifford draws are uniform") {
  const GateSet gs = gate_set();
  std::array<int, 24> counts{};
  const int draws = 100000;
  std::mt19937_64 rng(12345);
  for (int k = 0; k < draws / 10; ++k) {
    const CliffordSequence seq = generate_rb_sequence(10, std::nullopt, gs, rng);
    for (int i = 0; i < 10; ++i) counts[static_cast<std::size_t>(seq.cliffords[static_cast<std::size_t>(i)])]++;
  }
  const double expected = draws / 24.0;
  const double sigma = std::sqrt(draws * (1.0 / 24) * (23.0 / 24));
  for (int c : counts) CHECK(std::abs(c - expected) < 5 * sigma);
}

TEST_CASE("ideal gates survive at every length") {
  RBConfig c;
  c.lengths = {1, 5, 20, 100};
  c.randomizations = 5;
  const RBSurvivals s = run_rb(c, ideal(), 3);
  for (const auto& row : s.survivals) {
    for (double v : row) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("depolarizing hook matches the analytic composition") {
  RBConfig c;
  c.lengths = {1, 2, 4, 8, 16, 32};
  c.randomizations = 6;
  c.depolarizing = 0.03;
  c.seed = 11;
  const RBSurvivals fast = run_rb(c, ideal(), 3);
  const auto mu = fast.mean();
  for (std::size_t i = 0; i < c.lengths.size(); ++i) {
    CHECK(mu[i] == doctest::Approx(0.5 + 0.5 * std::pow(1 - c.depolarizing, c.lengths[i])).epsilon(1e-10));
  }
  SUBCASE("the pulse simulator agrees with the propagator fast path") {
    c.allow_fast_path = false;
    c.lengths = {1, 4, 9};
    const RBSurvivals slow = run_rb(c, ideal(), 3);
    c.allow_fast_path = true;
    const RBSurvivals quick = run_rb(c, ideal(), 3);
    for (std::size_t i = 0; i < c.lengths.size(); ++i) {
      for (int k = 0; k < c.randomizations; ++k) {
        CHECK(std::abs(slow.survivals[i][k] - quick.survivals[i][k]) < 1e-10);
      }
    }
  }
  SUBCASE("interleaving doubles the hooks") {
    c.interleaved = GateLabel::Y2;
    const auto mi = run_rb(c, ideal(), 3).mean();
    for (std::size_t i = 0; i < c.lengths.size(); ++i) {
      CHECK(mi[i] == doctest::Approx(0.5 + 0.5 * std::pow(1 - c.depolarizing, 2 * c.lengths[i])).epsilon(1e-10));
    }
  }
}

TEST_CASE("runs are reproducible and thread independent") {
  PhysicsBundle phys = ideal();
  phys.transmon.dim = 3;
  RBConfig c;
  c.lengths = {1, 3, 7};
  c.randomizations = 4;
  c.seed = 99;
  c.threads = 1;
  const auto a = run_rb(c, phys, 3);
  c.threads = 4;
  const auto b = run_rb(c, phys, 3);
  CHECK(a.survivals == b.survivals);
  c.seed = 100;
  CHECK(run_rb(c, phys, 3).survivals != a.survivals);
}

TEST_CASE("survival decreases with length under decoherence") {
  PhysicsBundle phys = ideal();
  phys.decoherence_enabled = true;
  phys.qp_dynamics_enabled = false;
  phys.decoherence.t1_residual = 1e-6;
  phys.decoherence.t2_star_residual = 1.5e-6;
  RBConfig c;
  c.lengths = {1, 2, 4, 8, 16, 32};
  c.randomizations = 8;
  const auto mu = run_rb(c, phys, 3).mean();
  for (std::size_t i = 1; i < mu.size(); ++i) CHECK(mu[i] <= mu[i - 1]);
}

TEST_CASE("depolarizing fit") {
  const std::vector<int> m = RBConfig::default_lengths();
  SUBCASE("noiseless data") {
    std::vector<double> y;
    for (int v : m) y.push_back(0.5 * std::pow(0.99, v) + 0.5);
    const DepolarizingFit f = fit_depolarizing(m, y);
    CHECK(std::abs(f.p - 0.99) < 1e-6);
    CHECK(f.A == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(f.B == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("1% noise with K = 50") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
      RBSurvivals s;
      s.lengths = m;
      for (int v : m) {
        std::vector<double> row;
        for (int k = 0; k < 50; ++k) row.push_back(0.5 * std::pow(0.99, v) + 0.5 + noise(rng));
        s.survivals.push_back(row);
      }
      const DepolarizingFit f = fit_depolarizing(s);
      CHECK(f.weighted);
      CHECK(f.p == doctest::Approx(0.99).epsilon(0.02));
      CHECK(f.p_err > 0);
    }
  }
  SUBCASE("constant data fails") {
    const std::vector<double> y(m.size(), 1.0);
    CHECK_THROWS_AS(fit_depolarizing(m, y), FitError);
  }
  SUBCASE("too few lengths") {
    const std::vector<int> mm{1, 2};
    const std::vector<double> y{0.9, 0.8};
    CHECK_THROWS_AS(fit_depolarizing(mm, y), InvalidArgument);
  }
  SUBCASE("bounds hold") {
    std::vector<double> y;
    for (int v : m) y.push_back(0.7 * std::pow(0.95, v) + 0.3);
    const DepolarizingFit f = fit_depolarizing(m, y);
    CHECK(f.p > 0);
    CHECK(f.p <= 1);
    CHECK(f.B >= 0);
    CHECK(f.B <= 1);
    CHECK(f.to_json().contains("p_err"));
  }
}

TEST_CASE("fidelity extraction") {
  DepolarizingFit ref, inter;
  ref.p = 0.98;
  inter.p = 0.94;
  CHECK(extract_fidelity(ref, &inter).value == doctest::Approx(1 - (1 - 0.94 / 0.98) / 2));
  CHECK(extract_fidelity(ref, &ref).value == doctest::Approx(1.0));
  ref.p = 1.0;
  CHECK(extract_fidelity(ref).value == 1.0);
  ref.p = 0.9;
  ref.p_err = 0.01;
  CHECK(extract_fidelity(ref).error == doctest::Approx(0.005));
  SUBCASE("unphysical interleaved decay is flagged") {
    inter.p = 0.95;
    inter.p_err = 0.001;
    const FidelityEstimate f = extract_fidelity(ref, &inter);
    CHECK(f.flagged);
    CHECK(f.value == 1.0);
    CHECK(!f.note.empty());
  }
}

TEST_CASE("pipeline recovers an injected depolarizing strength") {
  RBConfig c;
  c.randomizations = 20;
  c.depolarizing = 0.01;
  const RBSurvivals s = run_rb(c, ideal(), 3);
  const DepolarizingFit f = fit_depolarizing(s);
  const FidelityEstimate fid = extract_fidelity(f);
  CHECK((1 - fid.value) == doctest::Approx(c.depolarizing / 2).epsilon(0.1));
}

TEST_CASE("decay window stops at a significant minimum") {
  RBSurvivals s;
  s.lengths = {1, 2, 4, 8, 16, 32};
  const std::vector<double> mu{0.95, 0.9, 0.8, 0.65, 0.6, 0.75};
  for (double v : mu) s.survivals.push_back({v - 0.01, v, v + 0.01, v, v - 0.005, v + 0.005});
  CHECK(decay_window(s) == 5);
  SUBCASE("a rise inside the noise keeps every length") {
    s.survivals.back() = {0.59, 0.61, 0.6, 0.62, 0.6, 0.61};
    CHECK(decay_window(s) == s.lengths.size());
  }
  SUBCASE("a minimum at the second length keeps two") {
    s.survivals[1] = {0.5, 0.5, 0.51, 0.49, 0.5, 0.5};
    CHECK(decay_window(s) == 2);
    const DepolarizingFit f = fit_depolarizing(s, true);
    CHECK(f.ideal_spam);
    CHECK(f.last_length == 2);
  }
}

TEST_CASE("ideal-SPAM fit recovers p with A and B held at 1/2") {
  const std::vector<int> m{1, 2, 3};
  std::vector<double> y;
  for (int v : m) y.push_back(0.5 + 0.5 * std::pow(0.9, v));
  const DepolarizingFit f = fit_depolarizing_ideal_spam(m, y);
  CHECK(f.p == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(f.A == 0.5);
  CHECK(f.B == 0.5);
  CHECK_THROWS_AS(fit_depolarizing_ideal_spam(std::vector<int>{1}, std::vector<double>{0.9}), InvalidArgument);
}

TEST_CASE("interleaved benchmark shares one fit window") {
  PhysicsBundle phys = ideal();
  RBConfig c;
  c.lengths = {1, 2, 4, 8, 16};
  c.randomizations = 5;
  c.depolarizing = 0.02;
  c.truncate_after_minimum = true;
  const RBReport r = run_interleaved_benchmark(c, phys, 3, {GateLabel::X, GateLabel::Y2});
  CHECK(r.fit_window == c.lengths.size());
  CHECK(r.reference_fit.last_length == 16);
  for (const auto& g : r.gates) {
    CHECK(g.fit.last_length == 16);
    // One extra hook per interleaved gate: p_int = p_ref (1 - lambda).
    CHECK(1 - g.fidelity.value == doctest::Approx(c.depolarizing / 2).epsilon(1e-6));
  }
  CHECK(r.to_json()["fit_window"] == 5);
}
