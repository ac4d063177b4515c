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

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfqsim/engine.hpp"
#include "sfqsim/fitting.hpp"

namespace sfqsim {

struct RBConfig {
  std::vector<int> lengths = default_lengths();
  int randomizations = 30;
  std::optional<GateLabel> interleaved;
  std::uint64_t seed = 0;
  /// Test hook: depolarizing strength applied after every random or
  /// interleaved Clifford (not after the recovery).
  double depolarizing = 0.0;
  /// Decoherence-free runs may multiply precomputed Clifford propagators.
  bool allow_fast_path = true;
  /// Fit only up to the survival minimum when survival later rises by more
  /// than three standard errors (relaxation pins the qubit in |0>).
  bool truncate_after_minimum = false;
  unsigned threads = 0;

  void validate() const;
  /// Logarithmically spaced lengths from 1 to max_length, deduplicated.
  static std::vector<int> default_lengths(int max_length = 200, int points = 15);
};

/// m uniformly random Cliffords (each followed by the interleaved gate when
/// given) and the recovery Clifford that makes the ideal product identity.
CliffordSequence generate_rb_sequence(int m, std::optional<GateLabel> interleave, const GateSet& gates,
                                      std::mt19937_64& rng);

/// Random stream for randomization k at length m.
std::mt19937_64 rb_stream(std::uint64_t seed, int m, int k);

struct RBSurvivals {
  std::vector<int> lengths;
  std::vector<std::vector<double>> survivals;  // [length][randomization]

  std::vector<double> mean() const;
  std::vector<double> stddev() const;  // sample standard deviation, 0 for K = 1
};

/// Ground-state survival after each sequence, for subharmonic n.
RBSurvivals run_rb(const RBConfig& config, const PhysicsBundle& physics, int n);

struct DepolarizingFit {
  double A = 0.0, B = 0.0, p = 0.0;
  double A_err = 0.0, B_err = 0.0, p_err = 0.0;
  double residual_norm = 0.0;
  bool weighted = false;
  bool ideal_spam = false;  // A = B = 1/2 held fixed
  int last_length = 0;  // longest sequence inside the fit window
  FitResult fit;

  double at(double m) const;
  nlohmann::ordered_json to_json() const;
};

/// Fits F(m) = A p^m + B with 0 < p <= 1 and 0 <= B <= 1. `sigma` holds
/// per-point standard errors for weighting; empty means unweighted.
DepolarizingFit fit_depolarizing(std::span<const int> lengths, std::span<const double> mean,
                                 std::span<const double> sigma = {});

/// F(m) = (1 + p^m) / 2 with only p free; for windows too short to fit A and B.
DepolarizingFit fit_depolarizing_ideal_spam(std::span<const int> lengths, std::span<const double> mean,
                                            std::span<const double> sigma = {});

/// Fits the first `keep` lengths. Inverse-variance weights from the
/// randomizations when K >= 5. Windows under four lengths use the ideal-SPAM
/// form.
DepolarizingFit fit_depolarizing(const RBSurvivals& survivals, std::size_t keep);
DepolarizingFit fit_depolarizing(const RBSurvivals& survivals, bool truncate_after_minimum = false);

/// Number of leading lengths kept by the truncate-after-minimum rule (at
/// least two when available).
std::size_t decay_window(const RBSurvivals& survivals);

struct FidelityEstimate {
  double value = 0.0;
  double error = 0.0;
  /// Set when p_int exceeds p_ref beyond the combined error bars.
  bool flagged = false;
  std::string note;

  nlohmann::ordered_json to_json() const;
};

/// Reference mode (interleaved == nullptr): average Clifford fidelity
/// 1 - (1 - p)/2. Interleaved mode: gate fidelity 1 - (1 - p_int/p_ref)/2.
FidelityEstimate extract_fidelity(const DepolarizingFit& reference, const DepolarizingFit* interleaved = nullptr);

struct GateBenchmark {
  GateLabel gate;
  RBSurvivals survivals;
  DepolarizingFit fit;
  FidelityEstimate fidelity;
};

struct RBReport {
  int n = 0;
  RBSurvivals reference;
  DepolarizingFit reference_fit;
  FidelityEstimate clifford_fidelity;
  std::vector<GateBenchmark> gates;
  std::size_t fit_window = 0;  // leading lengths shared by every fit

  nlohmann::ordered_json to_json() const;
};

/// Reference run plus one interleaved run per listed gate.
RBReport run_interleaved_benchmark(const RBConfig& config, const PhysicsBundle& physics, int n,
                                   const std::vector<GateLabel>& gates);

struct CalibrationResult {
  double t1_per_qp = 0.0;
  double achieved = 0.0;  // mean gate fidelity at t1_per_qp
  std::vector<std::pair<double, double>> trace;  // (t1_per_qp, mean fidelity) per evaluation
};

/// Bisects T1_per_qp in log space until the mean interleaved fidelity of
/// `gates` at subharmonic n matches `target`. [lo, hi] must bracket it.
CalibrationResult calibrate_t1_per_qp(const RBConfig& config, const PhysicsBundle& physics, int n,
                                      const std::vector<GateLabel>& gates, double target, double lo, double hi,
                                      int iterations = 12);

}  // namespace sfqsim
