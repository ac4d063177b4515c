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
#include <random>

#include "sfqsim/fitting.hpp"

using namespace sfqsim;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("noiseless exponential is recovered exactly") {
  std::vector<double> x, y;
  for (int k = 0; k < 30; ++k) {
    x.push_back(0.2 * k);
    y.push_back(0.7 * std::exp(-x.back() / 1.9) + 0.1);
  }
  auto model = [](double t, std::span<const double> p) { return p[0] * std::exp(-t / p[1]) + p[2]; };
  const FitResult fit = curve_fit(x, y, {}, model, {{"a", 1.0, 0, kInf}, {"tau", 1.0, 1e-3, kInf}, {"b", 0.0, -1, 1}});
  CHECK(fit.converged);
  CHECK(fit.value("a") == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(fit.value("tau") == doctest::Approx(1.9).epsilon(1e-8));
  CHECK(fit.value("b") == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(fit.residual_norm < 1e-8);
  CHECK_THROWS_AS(fit.value("nope"), InvalidArgument);
}

TEST_CASE("standard errors of a straight-line fit match the textbook formula") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> x, y;
  for (int k = 0; k < 40; ++k) {
    x.push_back(k * 0.25);
    y.push_back(1.5 - 0.3 * x.back() + noise(rng));
  }
  auto model = [](double t, std::span<const double> p) { return p[0] + p[1] * t; };
  const FitResult fit = curve_fit(x, y, {}, model, {{"c", 0.0}, {"m", 0.0}});

  // Oracle: closed-form OLS with residual variance on n - 2 degrees of freedom.
  const auto [c, m] = linear_regression(x, y);
  const double n = static_cast<double>(x.size());
  double mx = 0, sxx = 0, rss = 0;
  for (double v : x) mx += v / n;
  for (double v : x) sxx += (v - mx) * (v - mx);
  for (size_t k = 0; k < x.size(); ++k) rss += std::pow(y[k] - c - m * x[k], 2);
  const double s2 = rss / (n - 2);
  CHECK(fit.value("c") == doctest::Approx(c).epsilon(1e-8));
  CHECK(fit.value("m") == doctest::Approx(m).epsilon(1e-8));
  CHECK(fit.error("m") == doctest::Approx(std::sqrt(s2 / sxx)).epsilon(1e-5));
  CHECK(fit.error("c") == doctest::Approx(std::sqrt(s2 * (1 / n + mx * mx / sxx))).epsilon(1e-5));
  CHECK(fit.covariance(0, 1) == doctest::Approx(-mx * s2 / sxx).epsilon(1e-5));
}

TEST_CASE("bounds, fixing and failure modes") {
  std::vector<double> x = {0, 1, 2, 3, 4, 5};
  std::vector<double> y = {1, 1, 1, 1, 1, 1};
  auto model = [](double t, std::span<const double> p) { return p[0] * std::pow(p[1], t) + p[2]; };

  SUBCASE("constant data cannot identify a decay") {
    CHECK_THROWS_AS(curve_fit(x, y, {}, model, {{"a", 0.5, -1, 1}, {"p", 0.9, 1e-6, 1}, {"b", 0.5, 0, 1}}), FitError);
  }
  SUBCASE("fixed parameters stay put and carry no error") {
    std::vector<double> yy;
    for (double t : x) yy.push_back(0.5 * std::pow(0.8, t) + 0.5);
    const FitResult fit =
        curve_fit(x, yy, {}, model, {{"a", 0.3, -1, 1}, {"p", 0.9, 1e-6, 1}, {"b", 0.5, 0, 1, true}});
    CHECK(fit.value("b") == 0.5);
    CHECK(fit.error("b") == 0.0);
    CHECK(fit.value("p") == doctest::Approx(0.8).epsilon(1e-8));
  }
  SUBCASE("upper bound is respected") {
    std::vector<double> yy;
    for (double t : x) yy.push_back(0.5 * std::pow(1.05, t));
    const FitResult fit =
        curve_fit(x, yy, {}, model, {{"a", 0.4, 0, 1}, {"p", 0.9, 1e-6, 1}, {"b", 0.0, 0, 1, true}});
    CHECK(fit.value("p") <= 1.0);
  }
  SUBCASE("initial outside bounds is rejected") {
    CHECK_THROWS_AS(curve_fit(x, y, {}, model, {{"a", 2, -1, 1}, {"p", 0.9, 0, 1}, {"b", 0.5, 0, 1}}),
                    InvalidArgument);
  }
  SUBCASE("too few points") {
    std::vector<double> xs = {0, 1}, ys = {1, 0.5};
    CHECK_THROWS_AS(curve_fit(xs, ys, {}, model, {{"a", 0.5}, {"p", 0.5}, {"b", 0.0}}), FitError);
  }
  SUBCASE("non-convergence is reported") {
    std::vector<double> yy;
    for (double t : x) yy.push_back(0.5 * std::pow(0.3, t) + 0.2);
    LeastSquaresOptions opt;
    opt.max_iterations = 1;
    try {
      curve_fit(x, yy, {}, model, {{"a", 0.1, -1, 1}, {"p", 0.95, 1e-6, 1}, {"b", 0.9, 0, 1}}, opt);
      FAIL("expected a FitError");
    } catch (const FitError& e) {
      CHECK_FALSE(e.diagnostics().converged);
      CHECK(e.diagnostics().iterations >= 1);
    }
  }
}

TEST_CASE("damped cosine") {
  const double f = 3e6, tau = 24.4e-6;
  std::vector<double> t, y;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int k = 0; k < 400; ++k) {
    t.push_back(k * 0.125e-6);
    y.push_back(0.5 * std::exp(-t.back() / tau) * std::cos(kTwoPi * f * t.back()) + 0.5 + noise(rng));
  }
  const FitResult fit = fit_damped_cosine(t, y);
  CHECK(fit.value("frequency") == doctest::Approx(f).epsilon(1e-3));
  CHECK(fit.value("decay_time") == doctest::Approx(tau).epsilon(0.05));
  CHECK(fit.value("amplitude") == doctest::Approx(0.5).epsilon(0.05));

  std::vector<double> flat;
  for (double v : t) flat.push_back(0.5 * std::cos(kTwoPi * 0.8e6 * v + 0.3) + 0.5);
  const FitResult pure = fit_damped_cosine(t, flat, true);
  CHECK(pure.value("frequency") == doctest::Approx(0.8e6).epsilon(1e-9));
  CHECK(pure.error("decay_time") == 0.0);
}

TEST_CASE("linear regression") {
  std::vector<double> x = {1, 2, 3, 4}, y = {3, 5, 7, 9};
  const auto [c, m] = linear_regression(x, y);
  CHECK(c == doctest::Approx(1.0));
  CHECK(m == doctest::Approx(2.0));
  std::vector<double> same = {1, 1};
  CHECK_THROWS_AS(linear_regression(same, same), InvalidArgument);
}

TEST_CASE("fit report serializes") {
  std::vector<double> x = {0, 1, 2, 3}, y = {0, 2, 4, 6};
  const FitResult fit = curve_fit(x, y, {}, [](double t, std::span<const double> p) { return p[0] * t; }, {{"k", 1.0}});
  const auto doc = fit.to_json();
  CHECK(doc["parameters"][0]["name"] == "k");
  CHECK(doc["converged"] == true);
}
