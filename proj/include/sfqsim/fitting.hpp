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

#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sfqsim/transmon.hpp"

namespace sfqsim {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> errors;       // one standard error per parameter, 0 if fixed
  std::vector<bool> fixed;
  Eigen::MatrixXd covariance;       // over all parameters, zero rows for fixed ones
  double residual_norm = 0.0;       // sqrt of the weighted sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::string message;

  double value(std::string_view name) const;
  double error(std::string_view name) const;
  nlohmann::ordered_json to_json() const;
};

/// Raised when a fit fails; carries whatever diagnostics were gathered.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, FitResult diagnostics)
      : NumericalError(what), diagnostics_(std::move(diagnostics)) {}
  const FitResult& diagnostics() const { return diagnostics_; }

 private:
  FitResult diagnostics_;
};

struct FitParameter {
  std::string name;
  double initial = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool fixed = false;
};

/// Fills `residuals` for the given parameter values.
using ResidualFunction = std::function<void(std::span<const double> params, std::span<double> residuals)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  double function_tolerance = 1e-15;
  double parameter_tolerance = 1e-14;
  double gradient_tolerance = 1e-16;
};

/// Bounded damped least squares (trust-region Levenberg-Marquardt). Standard
/// errors come from the Jacobian at the optimum scaled by the reduced
/// chi-square. Throws FitError on non-convergence.
FitResult least_squares(const std::vector<FitParameter>& params, std::size_t num_residuals,
                        const ResidualFunction& residual, const LeastSquaresOptions& options = {});

/// Weighted curve fit of y(x) = model(x, params). Empty `weights` means unit weights.
FitResult curve_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights,
                    const std::function<double(double, std::span<const double>)>& model,
                    const std::vector<FitParameter>& params, const LeastSquaresOptions& options = {});

/// Ordinary least-squares line; returns {intercept, slope}.
std::pair<double, double> linear_regression(std::span<const double> x, std::span<const double> y);

/// Decaying cosine y = a exp(-t/tau) cos(2 pi f t + phi) + b. A periodogram scan
/// seeds the frequency. Set `fix_decay` to fit a pure (undamped) cosine.
FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y, bool fix_decay = false);

}  // namespace sfqsim
