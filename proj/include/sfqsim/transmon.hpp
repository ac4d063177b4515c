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

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sfqsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double flux_quantum = 2.067833848e-15;  // Wb
inline constexpr double electron_volt = 1.602176634e-19; // J
}  // namespace constants

/// Thrown when a parameter block or state violates its invariants.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot continue (drift, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated Duffing ladder: E_k / hbar = k*omega10 + alpha*k*(k-1)/2.
struct TransmonParams {
  double omega10 = kTwoPi * 4.958e9;  // rad/s
  double alpha = kTwoPi * -220e6;     // rad/s
  int dim = 4;

  void validate() const;
};

/// Coupling of the SFQ driver to the qubit island.
struct CouplingParams {
  double coupling_capacitance = 400e-18;  // F
  double capacitance = 86.6e-15;          // F
  double flux_quantum = constants::flux_quantum;

  void validate() const;
  /// False when C_c/C > 0.1, where the weak-coupling kick model is suspect.
  bool weakly_coupled() const { return coupling_capacitance / capacitance <= 0.1; }
};

struct DecoherenceParams {
  double t1_residual = 23.6e-6;       // s
  double t2_star_residual = 24.4e-6;  // s
  double t1_per_qp = 10e-6;           // s, qubit lifetime per unit <n_qp>
  double qp_dispersion_factor = 1.0;  // extra multiplier on the QP frequency shift

  void validate() const;
  double gamma1_residual() const { return 1.0 / t1_residual; }
  /// 1/T2* - 1/(2 T1), clamped at zero. `clamped` reports whether clamping
  /// happened.
  double gamma_phi(bool* clamped = nullptr) const;
};

/// Hermitian, unit-trace, positive semidefinite d x d state.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigenTol = 1e-10;

  /// Validates all invariants; throws InvalidArgument on violation.
  explicit DensityMatrix(Matrix rho);

  static DensityMatrix ground(int dim);
  static DensityMatrix basis(int dim, int level);
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

  /// Skips validation. For hot loops that check drift periodically instead.
  static DensityMatrix unchecked(Matrix rho);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }
  Matrix& mutable_matrix() { return rho_; }

  double population(int level) const { return rho_(level, level).real(); }
  std::vector<double> populations() const;
  double purity() const;
  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Empty string when valid, otherwise a description of the first failure.
  std::string validity_problem() const;

 private:
  struct NoCheck {};
  DensityMatrix(Matrix rho, NoCheck) : rho_(std::move(rho)) {}
  Matrix rho_;
};

std::vector<double> level_energies(const TransmonParams& params);

/// Tip angle of one SFQ pulse: C_c * Phi0 * sqrt(2 omega10 / (hbar C)).
double delta_theta(const CouplingParams& coupling, double omega10);

/// Qubit capacitance C that makes delta_theta(C_c, omega10) equal `target`.
double capacitance_for_delta_theta(double coupling_capacitance, double omega10, double target,
                                   double flux_quantum = constants::flux_quantum);

/// Lowering operator truncated to `dim` levels.
Matrix lowering_operator(int dim);

/// exp((dtheta/2)(a^dag - a)); equals a y-rotation by dtheta for dim = 2.
Matrix kick_unitary(double delta_theta, int dim);

/// Lab-frame free precession for dt seconds. `frequency_shift` is added to
/// omega10 for the interval (level k picks up k * shift).
DensityMatrix free_evolve(const DensityMatrix& state, const TransmonParams& params, double dt,
                          double frequency_shift = 0.0);

DensityMatrix sfq_kick(const DensityMatrix& state, double delta_theta,
                       const TransmonParams& params);

/// Dissipative part of an interval: amplitude damping (collapse sqrt(gamma1) a),
/// pure dephasing (collapse sqrt(2 gamma_phi) n) and a coherent frequency
/// shift. Bare precession is not included; see `evolve_open`.
DensityMatrix apply_decoherence(const DensityMatrix& state, double dt, double gamma1,
                                double gamma_phi, double frequency_shift);

/// Exact Lindblad map for one interval with bare precession, frequency shift,
/// damping and dephasing all acting together.
DensityMatrix evolve_open(const DensityMatrix& state, const TransmonParams& params, double dt,
                          double gamma1, double gamma_phi, double frequency_shift);

namespace detail {

/// In-place exact Lindblad step. `level_freq[k]` is the angular frequency of
/// level k during the interval. rho must be Hermitian on entry.
void lindblad_step(Matrix& rho, const std::vector<double>& level_freq, double dt, double gamma1,
                   double gamma_phi);

/// In-place U rho U^dag for diagonal U = diag(exp(-i level_freq[k] dt)).
void diagonal_phase_step(Matrix& rho, const std::vector<double>& level_freq, double dt);

}  // namespace detail

}  // namespace sfqsim
