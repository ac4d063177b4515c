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

#include "sfqsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <ceres/ceres.h>

namespace sfqsim {

double FitResult::value(std::string_view name) const {
  for (size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  throw InvalidArgument("no fit parameter named " + std::string(name));
}

double FitResult::error(std::string_view name) const {
  for (size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return errors[k];
  }
  throw InvalidArgument("no fit parameter named " + std::string(name));
}

nlohmann::ordered_json FitResult::to_json() const {
  nlohmann::ordered_json doc;
  auto& params = doc["parameters"] = nlohmann::ordered_json::array();
  for (size_t k = 0; k < names.size(); ++k) {
    params.push_back({{"name", names[k]}, {"value", values[k]}, {"stderr", errors[k]}, {"fixed", bool(fixed[k])}});
  }
  auto cov = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < covariance.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < covariance.cols(); ++j) row.push_back(covariance(i, j));
    cov.push_back(std::move(row));
  }
  doc["covariance"] = std::move(cov);
  doc["residual_norm"] = residual_norm;
  doc["iterations"] = iterations;
  doc["converged"] = converged;
  doc["message"] = message;
  return doc;
}

namespace {

struct DynamicResidual {
  const ResidualFunction* fn;
  std::size_t num_params;
  std::size_t num_residuals;

  bool operator()(double const* const* blocks, double* residuals) const {
    std::vector<double> p(num_params);
    for (size_t k = 0; k < num_params; ++k) p[k] = blocks[k][0];
    (*fn)(p, std::span<double>(residuals, num_residuals));
    for (size_t k = 0; k < num_residuals; ++k) {
      if (!std::isfinite(residuals[k])) return false;
    }
    return true;
  }
};

// Central-difference Jacobian, columns only for free parameters.
Eigen::MatrixXd numeric_jacobian(const ResidualFunction& fn, std::vector<double> p, std::size_t num_residuals,
                                 const std::vector<FitParameter>& spec, const std::vector<size_t>& free) {
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(num_residuals), static_cast<Eigen::Index>(free.size()));
  std::vector<double> plus(num_residuals), minus(num_residuals);
  for (size_t c = 0; c < free.size(); ++c) {
    const size_t k = free[c];
    const double h = 1e-6 * std::max(std::abs(p[k]), 1e-8);
    const double base = p[k];
    double hi = std::min(base + h, spec[k].upper);
    double lo = std::max(base - h, spec[k].lower);
    if (hi <= lo) hi = lo + h;
    p[k] = hi;
    fn(p, plus);
    p[k] = lo;
    fn(p, minus);
    p[k] = base;
    for (size_t r = 0; r < num_residuals; ++r) {
      jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (plus[r] - minus[r]) / (hi - lo);
    }
  }
  return jac;
}

}  // namespace

FitResult least_squares(const std::vector<FitParameter>& params, std::size_t num_residuals,
                        const ResidualFunction& residual, const LeastSquaresOptions& options) {
  FitResult result;
  const std::size_t np = params.size();
  std::vector<double> values(np);
  std::vector<size_t> free;
  for (size_t k = 0; k < np; ++k) {
    const auto& p = params[k];
    if (!(p.lower <= p.initial && p.initial <= p.upper)) {
      throw InvalidArgument("initial value of " + p.name + " lies outside its bounds");
    }
    result.names.push_back(p.name);
    result.fixed.push_back(p.fixed);
    values[k] = p.initial;
    if (!p.fixed) free.push_back(k);
  }
  if (free.empty()) throw InvalidArgument("least_squares needs at least one free parameter");
  if (num_residuals < free.size()) {
    result.values = values;
    result.errors.assign(np, 0.0);
    result.message = "fewer residuals than free parameters";
    throw FitError(result.message, result);
  }

  ceres::Problem::Options problem_options;
  problem_options.cost_function_ownership = ceres::TAKE_OWNERSHIP;
  ceres::Problem problem(problem_options);
  auto* cost = new ceres::DynamicNumericDiffCostFunction<DynamicResidual, ceres::CENTRAL>(
      new DynamicResidual{&residual, np, num_residuals});
  std::vector<double*> blocks;
  for (size_t k = 0; k < np; ++k) {
    cost->AddParameterBlock(1);
    blocks.push_back(&values[k]);
  }
  cost->SetNumResiduals(static_cast<int>(num_residuals));
  problem.AddResidualBlock(cost, nullptr, blocks);
  for (size_t k = 0; k < np; ++k) {
    if (params[k].fixed) {
      problem.SetParameterBlockConstant(&values[k]);
      continue;
    }
    if (std::isfinite(params[k].lower)) problem.SetParameterLowerBound(&values[k], 0, params[k].lower);
    if (std::isfinite(params[k].upper)) problem.SetParameterUpperBound(&values[k], 0, params[k].upper);
  }

  ceres::Solver::Options solver_options;
  solver_options.trust_region_strategy_type = ceres::LEVENBERG_MARQUARDT;
  solver_options.linear_solver_type = ceres::DENSE_QR;
  solver_options.max_num_iterations = options.max_iterations;
  solver_options.function_tolerance = options.function_tolerance;
  solver_options.parameter_tolerance = options.parameter_tolerance;
  solver_options.gradient_tolerance = options.gradient_tolerance;
  solver_options.logging_type = ceres::SILENT;
  solver_options.minimizer_progress_to_stdout = false;
  solver_options.num_threads = 1;
  ceres::Solver::Summary summary;
  ceres::Solve(solver_options, &problem, &summary);

  result.values = values;
  result.iterations = static_cast<int>(summary.iterations.size());
  result.message = summary.BriefReport();
  result.converged = summary.termination_type == ceres::CONVERGENCE;

  std::vector<double> r(num_residuals);
  residual(values, r);
  double rss = 0.0;
  for (double v : r) rss += v * v;
  result.residual_norm = std::sqrt(rss);

  result.errors.assign(np, 0.0);
  result.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np));
  if (!result.converged) throw FitError("fit did not converge: " + result.message, result);

  // Column-normalize before inverting: parameters may differ by many decades.
  Eigen::MatrixXd jac = numeric_jacobian(residual, values, num_residuals, params, free);
  Eigen::VectorXd col_scale(jac.cols());
  for (Eigen::Index c = 0; c < jac.cols(); ++c) {
    const double norm = jac.col(c).norm();
    col_scale(c) = norm > 0 ? 1.0 / norm : 0.0;
  }
  jac = jac * col_scale.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() == 0 || !(sv.minCoeff() > 1e-9 * sv.maxCoeff())) {
    result.message += " | singular normal matrix: parameters are not identifiable";
    throw FitError(result.message, result);
  }
  const double dof = static_cast<double>(num_residuals - free.size());
  const double scale = dof > 0 ? rss / dof : 0.0;
  const Eigen::MatrixXd scaled_inv = (jac.transpose() * jac).inverse();
  const Eigen::MatrixXd cov = col_scale.asDiagonal() * scaled_inv * col_scale.asDiagonal() * scale;
  for (size_t a = 0; a < free.size(); ++a) {
    for (size_t b = 0; b < free.size(); ++b) {
      result.covariance(static_cast<Eigen::Index>(free[a]), static_cast<Eigen::Index>(free[b])) =
          cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    result.errors[free[a]] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a))));
  }
  return result;
}

FitResult curve_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights,
                    const std::function<double(double, std::span<const double>)>& model,
                    const std::vector<FitParameter>& params, const LeastSquaresOptions& options) {
  if (x.size() != y.size()) throw InvalidArgument("x and y lengths differ");
  if (!weights.empty() && weights.size() != x.size()) throw InvalidArgument("weights length differs from data");
  std::vector<double> sw(x.size(), 1.0);
  for (size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0)) throw InvalidArgument("weights must be non-negative");
    sw[k] = std::sqrt(weights[k]);
  }
  ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) {
    for (size_t k = 0; k < x.size(); ++k) r[k] = sw[k] * (y[k] - model(x[k], p));
  };
  return least_squares(params, x.size(), fn, options);
}

std::pair<double, double> linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear regression needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0) throw InvalidArgument("linear regression needs distinct x values");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

namespace {
constexpr double kNoDecay = 1e300;
}  // namespace

FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y, bool fix_decay) {
  const std::size_t n = t.size();
  if (n < 5 || y.size() != n) throw InvalidArgument("damped cosine fit needs >= 5 samples");
  const auto [tmin_it, tmax_it] = std::minmax_element(t.begin(), t.end());
  const double span = *tmax_it - *tmin_it;
  if (!(span > 0)) throw InvalidArgument("damped cosine fit needs distinct times");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  // Periodogram scan up to the mean-spacing Nyquist frequency.
  const double nyquist = 0.5 * static_cast<double>(n - 1) / span;
  const int grid = static_cast<int>(std::min<std::size_t>(20000, 8 * n + 200));
  double best_f = 1.0 / span;
  double best_power = -1.0;
  for (int g = 1; g <= grid; ++g) {
    const double f = nyquist * g / grid;
    double c = 0, s = 0;
    for (size_t k = 0; k < n; ++k) {
      c += (y[k] - mean) * std::cos(kTwoPi * f * t[k]);
      s += (y[k] - mean) * std::sin(kTwoPi * f * t[k]);
    }
    const double power = c * c + s * s;
    if (power > best_power) {
      best_power = power;
      best_f = f;
    }
  }
  double c = 0, s = 0;
  for (size_t k = 0; k < n; ++k) {
    c += (y[k] - mean) * std::cos(kTwoPi * best_f * t[k]);
    s += (y[k] - mean) * std::sin(kTwoPi * best_f * t[k]);
  }
  const double amp0 = 2.0 * std::sqrt(c * c + s * s) / static_cast<double>(n);
  const double phase0 = std::atan2(-s, c);
  const double df = std::max(nyquist / grid, 1.0 / span);

  std::vector<FitParameter> params = {
      {"amplitude", std::max(amp0, 1e-6), 0.0, std::numeric_limits<double>::infinity(), false},
      {"frequency", best_f, std::max(0.0, best_f - df), best_f + df, false},
      {"phase", phase0, -4 * std::numbers::pi, 4 * std::numbers::pi, false},
      {"decay_time", fix_decay ? kNoDecay : 2.0 * span, 0.0,
       std::numeric_limits<double>::infinity(), fix_decay},
      {"offset", mean, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false},
  };
  if (fix_decay) params[3].lower = params[3].upper = params[3].initial;
  auto model = [](double x, std::span<const double> p) {
    const double envelope = p[3] >= kNoDecay ? 1.0 : std::exp(-x / p[3]);
    return p[0] * envelope * std::cos(kTwoPi * p[1] * x + p[2]) + p[4];
  };
  return curve_fit(t, y, {}, model, params);
}

}  // namespace sfqsim
