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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sfqsim/transmon.hpp"

namespace sfqsim {

/// Uniform SFQ train: pulse k fires at start + (2 pi k + trigger_phase) / omega_d.
struct PulseTrain {
  int n = 1;                    // subharmonic index, omega_d ~ omega10 / n
  double omega_d = 0.0;         // trigger angular frequency, rad/s
  double trigger_phase = 0.0;   // rad, [0, 2 pi)
  int pulse_count = 0;
  double start_time = 0.0;      // s

  void validate() const;
  double period() const { return kTwoPi / omega_d; }
};

std::vector<double> pulse_times(const PulseTrain& train);

/// Equatorial control-axis angle, wrapped to [0, 2 pi). `tau` is the
/// trigger-phase shift expressed in qubit time, tau = dphi / omega10, so the
/// result equals n * dphi; for n = 1 it is the physical timing shift.
double axis_angle(int n, double omega10, double tau);

/// Control-axis angle produced by shifting the trigger phase by `dphi`.
double axis_angle_for_trigger_shift(int n, double dphi);

/// Trigger phase in [0, 2 pi / n) that addresses control axis `axis`.
double trigger_phase_for_axis(int n, double axis);

struct GateCalibration {
  int pulse_count = 0;
  double residual = 0.0;  // N * dtheta - target, |residual| <= dtheta / 2
};

GateCalibration calibrate_gate(double target_angle, double delta_theta);

/// Phase slips generated by `trigger_cycles` cycles of the trigger waveform.
std::int64_t count_phase_slips(std::int64_t trigger_cycles, int slips_per_cycle = 4);

enum class GateLabel { I, X, MinusX, X2, MinusX2, Y, MinusY, Y2, MinusY2 };

inline constexpr std::array<GateLabel, 9> kAllGateLabels = {
    GateLabel::I,  GateLabel::X,      GateLabel::MinusX, GateLabel::X2,     GateLabel::MinusX2,
    GateLabel::Y,  GateLabel::MinusY, GateLabel::Y2,     GateLabel::MinusY2};

std::string_view to_string(GateLabel label);
GateLabel parse_gate_label(std::string_view text);

/// Rotation magnitude (0, pi/2 or pi).
double rotation_angle(GateLabel label);
/// Axis angle measured from +X toward +Y in the SFQ control frame.
double label_axis(GateLabel label);
/// Ideal two-level unitary in the SFQ control frame.
Eigen::Matrix2cd ideal_unitary(GateLabel label);

struct GateDef {
  GateLabel label = GateLabel::I;
  int pulse_count = 0;
  double trigger_phase = 0.0;
  int n = 1;
  double residual = 0.0;  // rotation error left by rounding to whole pulses
};

/// Calibrated gate library for one subharmonic drive.
class GateSet {
 public:
  GateSet(int n, double omega_d, double delta_theta, int identity_cycles = 0);

  int n() const { return n_; }
  double omega_d() const { return omega_d_; }
  double period() const { return kTwoPi / omega_d_; }
  double delta_theta() const { return delta_theta_; }
  const GateDef& gate(GateLabel label) const;
  const std::vector<GateDef>& gates() const { return gates_; }
  bool contains(GateLabel label) const;
  /// Trigger cycles occupied by the gate (identity may idle).
  int cycles(GateLabel label) const;
  double duration(GateLabel label) const { return cycles(label) * period(); }

  nlohmann::ordered_json to_json() const;

 private:
  int n_;
  double omega_d_;
  double delta_theta_;
  int identity_cycles_;
  std::vector<GateDef> gates_;
};

/// The 24-element single-qubit Clifford group in the SFQ control frame.
class CliffordGroup {
 public:
  static constexpr int kSize = 24;
  static const CliffordGroup& instance();

  const Eigen::Matrix2cd& unitary(int index) const;
  /// Index of unitary(a) * unitary(b), i.e. b applied first.
  int compose(int a, int b) const;
  int inverse(int index) const;
  /// Index matching `u` up to global phase, or -1.
  int identify(const Eigen::Matrix2cd& u) const;
  int index_of(GateLabel label) const;
  /// Minimal-pulse decomposition in time order, at most three gates.
  const std::vector<GateLabel>& decomposition(int index) const;

  nlohmann::ordered_json to_json() const;

 private:
  CliffordGroup();
  std::vector<Eigen::Matrix2cd> elements_;
  std::vector<std::vector<GateLabel>> decompositions_;
  std::array<std::array<int, kSize>, kSize> table_{};
  std::array<int, kSize> inverse_{};
};

/// |Tr(a^dag b)| / d, equal to 1 iff a and b agree up to global phase.
double phase_insensitive_overlap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Decomposes Clifford `index` into gates from `basis`. Requires X, Y, +-X/2
/// and +-Y/2 in the basis.
std::vector<GateDef> compile_clifford(int index, const GateSet& basis);

struct CliffordSequence {
  std::vector<int> cliffords;         // group indices in time order, recovery last
  std::vector<bool> interleaved;      // true where the entry is the interleaved gate
  std::vector<std::vector<GateDef>> compiled;  // one gate list per entry

  std::size_t gate_count() const;
  int total_pulses() const;
};

/// Ideal product of a Clifford index list (time order).
int compose_sequence(const std::vector<int>& cliffords);

// ---------------------------------------------------------------------------
// Schedules

/// Interval during which the driver is triggered and slipping phase.
struct DriveWindow {
  double start = 0.0;
  double stop = 0.0;
  double slip_rate = 0.0;  // phase slips per second
};

struct Schedule {
  std::vector<double> pulse_times;    // sorted
  std::vector<DriveWindow> drive;     // sorted, non-overlapping
  std::vector<double> markers;        // boundaries of interest (e.g. Clifford ends)
  double end_time = 0.0;
  std::int64_t total_slips = 0;
};

/// Lays gates onto a continuously running trigger clock. Every gate occupies
/// whole trigger cycles; a gate with trigger phase phi fires once per cycle at
/// (cycle + phi / 2 pi) * period.
class ScheduleBuilder {
 public:
  explicit ScheduleBuilder(double omega_d, int slips_per_cycle = 4, std::int64_t start_cycle = 0);

  void add_train(double trigger_phase, int cycles);
  void add_gate(const GateDef& gate, int identity_cycles = 0);
  void add_gates(const std::vector<GateDef>& gates, int identity_cycles = 0);
  void idle_cycles(std::int64_t cycles);
  void mark();

  std::int64_t cycle() const { return cycle_; }
  double now() const { return cycle_ * period_; }
  double period() const { return period_; }
  Schedule build() const;
  /// Builds with the end time pushed out to `end_time` (not earlier than now()).
  Schedule build(double end_time) const;

 private:
  double omega_d_;
  double period_;
  int slips_per_cycle_;
  std::int64_t cycle_;
  Schedule schedule_;
};

}  // namespace sfqsim
