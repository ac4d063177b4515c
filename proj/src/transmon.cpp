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

#include "sfqsim/transmon.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace sfqsim {

namespace {

std::string describe(const char* what, double value) {
  std::ostringstream os;
  os << what << " (got " << value << ")";
  return os.str();
}

void require_finite(const char* name, double value) {
  if (!std::isfinite(value)) throw InvalidArgument(describe(name, value));
}

// (exp(z) - 1) / z without cancellation for small |z|.
Complex phi1(Complex z) {
  if (z == Complex(0.0, 0.0)) return 1.0;
  const double a = z.real();
  const double b = z.imag();
  const double s = std::sin(0.5 * b);
  const Complex em1(std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b));
  return em1 / z;
}

// Divided difference of exp over the nodes z[idx[0..k]]. Clustered nodes use
// the Taylor series in complete homogeneous polynomials; spread nodes are
// split on their farthest pair so no denominator is below one.
Complex exp_divided_difference(const Complex* z, const int* idx, int count) {
  if (count == 1) return std::exp(z[idx[0]]);
  int fi = 0, fj = 1;
  double spread = 0.0;
  Complex mean = 0.0;
  for (int i = 0; i < count; ++i) {
    mean += z[idx[i]];
    for (int j = i + 1; j < count; ++j) {
      const double dist = std::abs(z[idx[i]] - z[idx[j]]);
      if (dist > spread) spread = dist, fi = i, fj = j;
    }
  }
  if (spread >= 1.0) {
    int without_i[16], without_j[16];
    int a = 0, b = 0;
    for (int k = 0; k < count; ++k) {
      if (k != fi) without_i[a++] = idx[k];
      if (k != fj) without_j[b++] = idx[k];
    }
    return (exp_divided_difference(z, without_i, count - 1) - exp_divided_difference(z, without_j, count - 1)) /
           (z[idx[fj]] - z[idx[fi]]);
  }
  mean /= static_cast<double>(count);
  const int k = count - 1;
  // Terms needed: h_j <= C(j + k, k) r^j, so stop once r^j / j! < 1e-18.
  double r = 0.0;
  double xr[16], xi[16];
  for (int i = 0; i < count; ++i) {
    const Complex x = z[idx[i]] - mean;
    xr[i] = x.real();
    xi[i] = x.imag();
    r = std::max(r, std::abs(x));
  }
  constexpr int kMaxTerms = 28;
  int terms = 0;
  for (double bound = 1.0; terms < kMaxTerms && bound > 1e-18; bound *= r / (terms + 1)) ++terms;
  double hr[kMaxTerms + 1] = {1.0}, hi[kMaxTerms + 1] = {0.0};
  for (int i = 0; i < count; ++i) {
    for (int j = 1; j <= terms; ++j) {
      const double pr = hr[j] + xr[i] * hr[j - 1] - xi[i] * hi[j - 1];
      hi[j] += xr[i] * hi[j - 1] + xi[i] * hr[j - 1];
      hr[j] = pr;
    }
  }
  double inv_fact = 1.0;  // 1 / (j + k)!
  for (int n = 2; n <= k; ++n) inv_fact /= n;
  double sr = 0.0, si = 0.0;
  for (int j = 0; j <= terms; ++j) {
    sr += hr[j] * inv_fact;
    si += hi[j] * inv_fact;
    inv_fact /= (j + k + 1);
  }
  const Complex sum(sr, si);
  return std::exp(mean) * sum;
}

}  // namespace

void TransmonParams::validate() const {
  require_finite("omega10", omega10);
  require_finite("alpha", alpha);
  if (!(omega10 > 0)) throw InvalidArgument(describe("omega10 must be positive", omega10));
  if (dim < 2 || dim > 16) throw InvalidArgument(describe("dim must lie in [2, 16]", dim));
  if (!(std::abs(alpha) < omega10)) {
    throw InvalidArgument(describe("|alpha| must be below omega10", alpha));
  }
}

void CouplingParams::validate() const {
  require_finite("coupling_capacitance", coupling_capacitance);
  require_finite("capacitance", capacitance);
  if (!(coupling_capacitance > 0)) {
    throw InvalidArgument(describe("coupling_capacitance must be positive", coupling_capacitance));
  }
  if (!(capacitance > 0)) {
    throw InvalidArgument(describe("capacitance must be positive", capacitance));
  }
  if (!(flux_quantum > 0)) {
    throw InvalidArgument(describe("flux_quantum must be positive", flux_quantum));
  }
}

void DecoherenceParams::validate() const {
  if (!(t1_residual > 0)) throw InvalidArgument(describe("t1_residual must be positive", t1_residual));
  if (!(t2_star_residual > 0)) {
    throw InvalidArgument(describe("t2_star_residual must be positive", t2_star_residual));
  }
  if (t2_star_residual > 2.0 * t1_residual) {
    throw InvalidArgument(describe("t2_star_residual must not exceed 2*t1_residual", t2_star_residual));
  }
  if (!(t1_per_qp > 0)) throw InvalidArgument(describe("t1_per_qp must be positive", t1_per_qp));
  if (!(qp_dispersion_factor > 0)) {
    throw InvalidArgument(describe("qp_dispersion_factor must be positive", qp_dispersion_factor));
  }
}

double DecoherenceParams::gamma_phi(bool* clamped) const {
  const double raw = 1.0 / t2_star_residual - 0.5 / t1_residual;
  if (clamped != nullptr) *clamped = raw < 0;
  return raw < 0 ? 0.0 : raw;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 2) {
    throw InvalidArgument("density matrix must be square with dim >= 2");
  }
  if (auto problem = validity_problem(); !problem.empty()) throw InvalidArgument(problem);
}

DensityMatrix DensityMatrix::ground(int dim) { return basis(dim, 0); }

DensityMatrix DensityMatrix::basis(int dim, int level) {
  if (dim < 2 || level < 0 || level >= dim) throw InvalidArgument("basis level out of range");
  Matrix rho = Matrix::Zero(dim, dim);
  rho(level, level) = 1.0;
  return DensityMatrix(std::move(rho), NoCheck{});
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  if (!(norm > 0)) throw InvalidArgument("state vector must be nonzero");
  const Eigen::VectorXcd v = psi / norm;
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::unchecked(Matrix rho) { return DensityMatrix(std::move(rho), NoCheck{}); }

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> p(static_cast<size_t>(dim()));
  for (int k = 0; k < dim(); ++k) p[static_cast<size_t>(k)] = population(k);
  return p;
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

double DensityMatrix::trace_error() const { return std::abs(rho_.trace() - Complex(1.0, 0.0)); }

double DensityMatrix::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::string DensityMatrix::validity_problem() const {
  if (!rho_.allFinite()) return "density matrix has non-finite entries";
  if (hermiticity_error() > kHermitianTol) return "density matrix is not Hermitian";
  if (trace_error() > kTraceTol) return "density matrix trace differs from 1";
  if (min_eigenvalue() < -kEigenTol) return "density matrix has a negative eigenvalue";
  return {};
}

// ---------------------------------------------------------------------------
// Operations

std::vector<double> level_energies(const TransmonParams& params) {
  params.validate();
  std::vector<double> e(static_cast<size_t>(params.dim));
  for (int k = 0; k < params.dim; ++k) {
    e[static_cast<size_t>(k)] = k * params.omega10 + params.alpha * k * (k - 1) / 2.0;
  }
  return e;
}

double delta_theta(const CouplingParams& coupling, double omega10) {
  if (!(omega10 > 0)) throw InvalidArgument(describe("omega10 must be positive", omega10));
  if (!(coupling.capacitance > 0)) throw InvalidArgument("capacitance must be positive");
  if (coupling.coupling_capacitance < 0) throw InvalidArgument("coupling capacitance is negative");
  return coupling.coupling_capacitance * coupling.flux_quantum *
         std::sqrt(2.0 * omega10 / (constants::hbar * coupling.capacitance));
}

double capacitance_for_delta_theta(double coupling_capacitance, double omega10, double target,
                                   double flux_quantum) {
  if (!(target > 0) || !(omega10 > 0) || !(coupling_capacitance > 0)) {
    throw InvalidArgument("capacitance inversion needs positive inputs");
  }
  const double q = coupling_capacitance * flux_quantum / target;
  return 2.0 * omega10 * q * q / constants::hbar;
}

Matrix lowering_operator(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Matrix kick_unitary(double delta_theta, int dim) {
  if (dim < 2) throw InvalidArgument("dim must be at least 2");
  Eigen::MatrixXd generator = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) {
    const double s = std::sqrt(static_cast<double>(k));
    generator(k, k - 1) = s;   // a^dag
    generator(k - 1, k) = -s;  // -a
  }
  if (dim == 2) {
    // Closed form keeps the two-level case exact to rounding.
    Matrix u(2, 2);
    const double c = std::cos(0.5 * delta_theta);
    const double s = std::sin(0.5 * delta_theta);
    u << c, -s, s, c;
    return u;
  }
  const Eigen::MatrixXd u = (0.5 * delta_theta * generator).exp();
  return u.cast<Complex>();
}

DensityMatrix free_evolve(const DensityMatrix& state, const TransmonParams& params, double dt,
                          double frequency_shift) {
  if (!(dt >= 0)) throw InvalidArgument(describe("dt must be non-negative", dt));
  if (state.dim() != params.dim) throw InvalidArgument("state dimension does not match params");
  std::vector<double> freq = level_energies(params);
  for (size_t k = 0; k < freq.size(); ++k) freq[k] += static_cast<double>(k) * frequency_shift;
  Matrix rho = state.matrix();
  detail::diagonal_phase_step(rho, freq, dt);
  return DensityMatrix::unchecked(std::move(rho));
}

DensityMatrix sfq_kick(const DensityMatrix& state, double delta_theta,
                       const TransmonParams& params) {
  if (state.dim() != params.dim) throw InvalidArgument("state dimension does not match params");
  const Matrix u = kick_unitary(delta_theta, params.dim);
  return DensityMatrix::unchecked(u * state.matrix() * u.adjoint());
}

DensityMatrix apply_decoherence(const DensityMatrix& state, double dt, double gamma1,
                                double gamma_phi, double frequency_shift) {
  if (!(dt >= 0)) throw InvalidArgument(describe("dt must be non-negative", dt));
  if (!(gamma1 >= 0)) throw InvalidArgument(describe("gamma1 must be non-negative", gamma1));
  if (!(gamma_phi >= 0)) throw InvalidArgument(describe("gamma_phi must be non-negative", gamma_phi));
  std::vector<double> freq(static_cast<size_t>(state.dim()));
  for (size_t k = 0; k < freq.size(); ++k) freq[k] = static_cast<double>(k) * frequency_shift;
  Matrix rho = state.matrix();
  detail::lindblad_step(rho, freq, dt, gamma1, gamma_phi);
  return DensityMatrix::unchecked(std::move(rho));
}

DensityMatrix evolve_open(const DensityMatrix& state, const TransmonParams& params, double dt,
                          double gamma1, double gamma_phi, double frequency_shift) {
  if (!(dt >= 0)) throw InvalidArgument(describe("dt must be non-negative", dt));
  if (!(gamma1 >= 0) || !(gamma_phi >= 0)) throw InvalidArgument("rates must be non-negative");
  if (state.dim() != params.dim) throw InvalidArgument("state dimension does not match params");
  std::vector<double> freq = level_energies(params);
  for (size_t k = 0; k < freq.size(); ++k) freq[k] += static_cast<double>(k) * frequency_shift;
  Matrix rho = state.matrix();
  detail::lindblad_step(rho, freq, dt, gamma1, gamma_phi);
  return DensityMatrix::unchecked(std::move(rho));
}

namespace detail {

void diagonal_phase_step(Matrix& rho, const std::vector<double>& level_freq, double dt) {
  const auto d = rho.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double phase = -(level_freq[static_cast<size_t>(i)] - level_freq[static_cast<size_t>(j)]) * dt;
      const Complex rot(std::cos(phase), std::sin(phase));
      rho(i, j) *= rot;
      rho(j, i) = std::conj(rho(i, j));
    }
  }
}

// The generator never couples coherences rho(i, j) with different i - j, so
// each band q = i - j evolves under its own upper-bidiagonal matrix: damping
// feeds rho(m+q+1, m+1) into rho(m+q, m). Dephasing is diagonal in the band.
void lindblad_step(Matrix& rho, const std::vector<double>& level_freq, double dt, double gamma1,
                   double gamma_phi) {
  const int d = static_cast<int>(rho.rows());
  if (gamma1 == 0.0 && gamma_phi == 0.0) {
    diagonal_phase_step(rho, level_freq, dt);
    return;
  }
  for (int q = 0; q < d; ++q) {
    const int s = d - q;
    auto diag = [&](int m) {
      const double w = level_freq[static_cast<size_t>(m + q)] - level_freq[static_cast<size_t>(m)];
      return Complex(-gamma1 * (2.0 * m + q) / 2.0 - gamma_phi * q * q, -w) * dt;
    };
    auto feed = [&](int m) { return gamma1 * std::sqrt((m + q + 1.0) * (m + 1.0)) * dt; };

    Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 16, 1> x(s);
    for (int m = 0; m < s; ++m) x(m) = rho(m + q, m);

    Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 16, 1> y(s);
    if (s == 1 || gamma1 == 0.0) {
      for (int m = 0; m < s; ++m) y(m) = std::exp(diag(m)) * x(m);
    } else if (s == 2) {
      const Complex a = diag(0);
      const Complex c = diag(1);
      const Complex ea = std::exp(a);
      y(0) = ea * x(0) + feed(0) * ea * phi1(c - a) * x(1);
      y(1) = std::exp(c) * x(1);
    } else {
      // exp of an upper-bidiagonal generator: entry (m, j) is the product of
      // the feeds m..j-1 times the divided difference over diagonals m..j.
      Complex nodes[16];
      int idx[16];
      for (int m = 0; m < s; ++m) nodes[m] = diag(m), idx[m] = m;
      for (int m = 0; m < s; ++m) {
        Complex acc = std::exp(nodes[m]) * x(m);
        double chain = 1.0;
        for (int j = m + 1; j < s; ++j) {
          chain *= feed(j - 1);
          acc += chain * exp_divided_difference(nodes, idx + m, j - m + 1) * x(j);
        }
        y(m) = acc;
      }
    }

    for (int m = 0; m < s; ++m) {
      rho(m + q, m) = y(m);
      if (q != 0) rho(m, m + q) = std::conj(y(m));
    }
  }
  // Populations are real by construction; drop rounding residue.
  for (int k = 0; k < d; ++k) rho(k, k) = rho(k, k).real();
}

}  // namespace detail

}  // namespace sfqsim
