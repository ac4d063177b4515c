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

#include "sfqsim/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <tuple>

namespace sfqsim {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0) r += kTwoPi;
  // fmod can return 2 pi - eps for tiny negative inputs; fold those to zero.
  if (kTwoPi - r < 1e-12) r = 0.0;
  return r;
}

}  // namespace

void PulseTrain::validate() const {
  if (n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  if (!(omega_d > 0) || !std::isfinite(omega_d)) throw InvalidArgument("omega_d must be positive");
  if (!(trigger_phase >= 0 && trigger_phase < kTwoPi)) {
    throw InvalidArgument("trigger_phase must lie in [0, 2 pi)");
  }
  if (pulse_count < 0) throw InvalidArgument("pulse_count must be non-negative");
  if (!std::isfinite(start_time)) throw InvalidArgument("start_time must be finite");
}

std::vector<double> pulse_times(const PulseTrain& train) {
  train.validate();
  std::vector<double> times(static_cast<size_t>(train.pulse_count));
  for (int k = 0; k < train.pulse_count; ++k) {
    times[static_cast<size_t>(k)] =
        train.start_time + (kTwoPi * k + train.trigger_phase) / train.omega_d;
  }
  return times;
}

double axis_angle(int n, double omega10, double tau) {
  if (n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  return wrap_angle(n * omega10 * tau);
}

double axis_angle_for_trigger_shift(int n, double dphi) {
  if (n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  return wrap_angle(n * dphi);
}

double trigger_phase_for_axis(int n, double axis) {
  if (n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  return wrap_angle(axis) / n;
}

GateCalibration calibrate_gate(double target_angle, double delta_theta) {
  if (!(delta_theta > 0)) throw InvalidArgument("delta_theta must be positive");
  if (!(target_angle >= 0)) throw InvalidArgument("target angle must be non-negative");
  GateCalibration cal;
  cal.pulse_count = static_cast<int>(std::llround(target_angle / delta_theta));
  cal.residual = cal.pulse_count * delta_theta - target_angle;
  return cal;
}

std::int64_t count_phase_slips(std::int64_t trigger_cycles, int slips_per_cycle) {
  if (trigger_cycles < 0) throw InvalidArgument("trigger cycle count must be non-negative");
  if (slips_per_cycle < 1) throw InvalidArgument("slips_per_cycle must be >= 1");
  return trigger_cycles * slips_per_cycle;
}

// ---------------------------------------------------------------------------
// Gate labels

std::string_view to_string(GateLabel label) {
  switch (label) {
    case GateLabel::I: return "I";
    case GateLabel::X: return "X";
    case GateLabel::MinusX: return "-X";
    case GateLabel::X2: return "X/2";
    case GateLabel::MinusX2: return "-X/2";
    case GateLabel::Y: return "Y";
    case GateLabel::MinusY: return "-Y";
    case GateLabel::Y2: return "Y/2";
    case GateLabel::MinusY2: return "-Y/2";
  }
  return "?";
}

GateLabel parse_gate_label(std::string_view text) {
  for (GateLabel label : kAllGateLabels) {
    if (to_string(label) == text) return label;
  }
  throw InvalidArgument("unknown gate label '" + std::string(text) + "'");
}

double rotation_angle(GateLabel label) {
  switch (label) {
    case GateLabel::I: return 0.0;
    case GateLabel::X:
    case GateLabel::MinusX:
    case GateLabel::Y:
    case GateLabel::MinusY: return kPi;
    default: return kPi / 2;
  }
}

double label_axis(GateLabel label) {
  switch (label) {
    case GateLabel::I:
    case GateLabel::X:
    case GateLabel::X2: return 0.0;
    case GateLabel::Y:
    case GateLabel::Y2: return kPi / 2;
    case GateLabel::MinusX:
    case GateLabel::MinusX2: return kPi;
    case GateLabel::MinusY:
    case GateLabel::MinusY2: return 3 * kPi / 2;
  }
  return 0.0;
}

Eigen::Matrix2cd ideal_unitary(GateLabel label) {
  const double theta = rotation_angle(label);
  const double axis = label_axis(label);
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd sx, sy;
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  return std::cos(theta / 2) * Eigen::Matrix2cd::Identity() -
         i * std::sin(theta / 2) * (std::cos(axis) * sx + std::sin(axis) * sy);
}

// ---------------------------------------------------------------------------
// GateSet

GateSet::GateSet(int n, double omega_d, double delta_theta, int identity_cycles)
    : n_(n), omega_d_(omega_d), delta_theta_(delta_theta), identity_cycles_(identity_cycles) {
  if (n < 1) throw InvalidArgument("subharmonic index n must be >= 1");
  if (!(omega_d > 0)) throw InvalidArgument("omega_d must be positive");
  if (!(delta_theta > 0)) throw InvalidArgument("delta_theta must be positive");
  if (identity_cycles < 0) throw InvalidArgument("identity idle cycles must be non-negative");
  const GateCalibration full = calibrate_gate(kPi, delta_theta);
  const GateCalibration half = calibrate_gate(kPi / 2, delta_theta);
  for (GateLabel label : kAllGateLabels) {
    GateDef def;
    def.label = label;
    def.n = n;
    def.trigger_phase = trigger_phase_for_axis(n, label_axis(label));
    const double angle = rotation_angle(label);
    if (angle == kPi) {
      def.pulse_count = full.pulse_count;
      def.residual = full.residual;
    } else if (angle > 0) {
      def.pulse_count = half.pulse_count;
      def.residual = half.residual;
    }
    gates_.push_back(def);
  }
}

const GateDef& GateSet::gate(GateLabel label) const {
  for (const auto& g : gates_) {
    if (g.label == label) return g;
  }
  throw InvalidArgument("gate not in set");
}

bool GateSet::contains(GateLabel label) const {
  return std::any_of(gates_.begin(), gates_.end(), [&](const GateDef& g) { return g.label == label; });
}

int GateSet::cycles(GateLabel label) const {
  if (label == GateLabel::I) return identity_cycles_;
  return gate(label).pulse_count;
}

nlohmann::ordered_json GateSet::to_json() const {
  nlohmann::ordered_json doc;
  doc["n"] = n_;
  doc["omega_d_rad_per_s"] = omega_d_;
  doc["delta_theta_rad"] = delta_theta_;
  doc["identity_cycles"] = identity_cycles_;
  auto& rows = doc["gates"] = nlohmann::ordered_json::array();
  for (const auto& g : gates_) {
    nlohmann::ordered_json row;
    row["label"] = std::string(to_string(g.label));
    row["pulse_count"] = g.pulse_count;
    row["trigger_phase_rad"] = g.trigger_phase;
    row["axis_rad"] = label_axis(g.label);
    row["duration_s"] = duration(g.label);
    row["residual_rad"] = g.residual;
    row["phase_slips"] = count_phase_slips(cycles(g.label));
    rows.push_back(std::move(row));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Clifford group

double phase_insensitive_overlap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

namespace {

// Basis used for decompositions, in tie-break order.
constexpr std::array<GateLabel, 6> kDecompositionBasis = {
    GateLabel::X, GateLabel::Y, GateLabel::X2, GateLabel::MinusX2, GateLabel::Y2, GateLabel::MinusY2};

int pulse_units(GateLabel label) { return rotation_angle(label) == kPi ? 2 : 1; }

}  // namespace

const CliffordGroup& CliffordGroup::instance() {
  static const CliffordGroup group;
  return group;
}

CliffordGroup::CliffordGroup() {
  // Breadth-first closure from the identity under X/2 and Y/2.
  elements_.push_back(Eigen::Matrix2cd::Identity());
  const std::array<Eigen::Matrix2cd, 2> generators = {ideal_unitary(GateLabel::X2),
                                                      ideal_unitary(GateLabel::Y2)};
  std::deque<int> frontier = {0};
  auto find = [this](const Eigen::Matrix2cd& u) {
    for (size_t k = 0; k < elements_.size(); ++k) {
      if (phase_insensitive_overlap(elements_[k], u) > 1 - 1e-9) return static_cast<int>(k);
    }
    return -1;
  };
  while (!frontier.empty()) {
    const int cur = frontier.front();
    frontier.pop_front();
    for (const auto& g : generators) {
      const Eigen::Matrix2cd next = g * elements_[static_cast<size_t>(cur)];
      if (find(next) < 0) {
        elements_.push_back(next);
        frontier.push_back(static_cast<int>(elements_.size()) - 1);
      }
    }
  }
  if (elements_.size() != kSize) throw NumericalError("Clifford closure did not yield 24 elements");

  for (int a = 0; a < kSize; ++a) {
    for (int b = 0; b < kSize; ++b) {
      table_[a][b] = find(elements_[static_cast<size_t>(a)] * elements_[static_cast<size_t>(b)]);
    }
  }
  for (int a = 0; a < kSize; ++a) {
    for (int b = 0; b < kSize; ++b) {
      if (table_[a][b] == 0) inverse_[a] = b;
    }
  }

  // Exhaustive search over sequences of up to three basis gates; keep the
  // cheapest in pulses, then in gate count, then first found.
  using Cost = std::tuple<int, int>;
  std::vector<Cost> best(kSize, Cost{1 << 20, 1 << 20});
  decompositions_.assign(kSize, {});
  best[0] = Cost{0, 0};
  std::vector<GateLabel> seq;
  auto visit = [&](auto&& self, int depth, int element, int units) -> void {
    if (depth > 0) {
      const Cost c{units, depth};
      if (c < best[static_cast<size_t>(element)]) {
        best[static_cast<size_t>(element)] = c;
        decompositions_[static_cast<size_t>(element)] = seq;
      }
    }
    if (depth == 3) return;
    for (GateLabel g : kDecompositionBasis) {
      seq.push_back(g);
      self(self, depth + 1, table_[find(ideal_unitary(g))][element], units + pulse_units(g));
      seq.pop_back();
    }
  };
  visit(visit, 0, 0, 0);
}

const Eigen::Matrix2cd& CliffordGroup::unitary(int index) const {
  if (index < 0 || index >= kSize) throw InvalidArgument("Clifford index out of range");
  return elements_[static_cast<size_t>(index)];
}

int CliffordGroup::compose(int a, int b) const {
  if (a < 0 || a >= kSize || b < 0 || b >= kSize) throw InvalidArgument("Clifford index out of range");
  return table_[a][b];
}

int CliffordGroup::inverse(int index) const {
  if (index < 0 || index >= kSize) throw InvalidArgument("Clifford index out of range");
  return inverse_[index];
}

int CliffordGroup::identify(const Eigen::Matrix2cd& u) const {
  for (int k = 0; k < kSize; ++k) {
    if (phase_insensitive_overlap(elements_[static_cast<size_t>(k)], u) > 1 - 1e-9) return k;
  }
  return -1;
}

int CliffordGroup::index_of(GateLabel label) const { return identify(ideal_unitary(label)); }

const std::vector<GateLabel>& CliffordGroup::decomposition(int index) const {
  if (index < 0 || index >= kSize) throw InvalidArgument("Clifford index out of range");
  return decompositions_[static_cast<size_t>(index)];
}

nlohmann::ordered_json CliffordGroup::to_json() const {
  auto rows = nlohmann::ordered_json::array();
  for (int k = 0; k < kSize; ++k) {
    nlohmann::ordered_json row;
    row["index"] = k;
    auto& gates = row["gates"] = nlohmann::ordered_json::array();
    int units = 0;
    for (GateLabel g : decompositions_[static_cast<size_t>(k)]) {
      gates.push_back(std::string(to_string(g)));
      units += pulse_units(g);
    }
    row["half_pi_units"] = units;
    row["inverse"] = inverse_[k];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GateDef> compile_clifford(int index, const GateSet& basis) {
  const auto& group = CliffordGroup::instance();
  if (index < 0 || index >= CliffordGroup::kSize) throw InvalidArgument("Clifford index out of range");
  for (GateLabel g : kDecompositionBasis) {
    if (!basis.contains(g)) throw InvalidArgument("basis lacks gate " + std::string(to_string(g)));
  }
  std::vector<GateDef> out;
  for (GateLabel g : group.decomposition(index)) out.push_back(basis.gate(g));
  return out;
}

std::size_t CliffordSequence::gate_count() const {
  std::size_t total = 0;
  for (const auto& c : compiled) total += c.size();
  return total;
}

int CliffordSequence::total_pulses() const {
  int total = 0;
  for (const auto& c : compiled) {
    for (const auto& g : c) total += g.pulse_count;
  }
  return total;
}

int compose_sequence(const std::vector<int>& cliffords) {
  const auto& group = CliffordGroup::instance();
  int acc = 0;
  for (int c : cliffords) acc = group.compose(c, acc);
  return acc;
}

// ---------------------------------------------------------------------------
// ScheduleBuilder

ScheduleBuilder::ScheduleBuilder(double omega_d, int slips_per_cycle, std::int64_t start_cycle)
    : omega_d_(omega_d), period_(kTwoPi / omega_d), slips_per_cycle_(slips_per_cycle), cycle_(start_cycle) {
  if (!(omega_d > 0)) throw InvalidArgument("omega_d must be positive");
  if (slips_per_cycle < 1) throw InvalidArgument("slips_per_cycle must be >= 1");
}

void ScheduleBuilder::add_train(double trigger_phase, int cycles) {
  if (cycles < 0) throw InvalidArgument("train length must be non-negative");
  if (!(trigger_phase >= 0 && trigger_phase < kTwoPi)) {
    throw InvalidArgument("trigger phase must lie in [0, 2 pi)");
  }
  if (cycles == 0) return;
  const double offset = trigger_phase / kTwoPi;
  for (int k = 0; k < cycles; ++k) {
    schedule_.pulse_times.push_back((static_cast<double>(cycle_ + k) + offset) * period_);
  }
  const double start = now();
  const double stop = static_cast<double>(cycle_ + cycles) * period_;
  const double rate = slips_per_cycle_ / period_;
  auto& drive = schedule_.drive;
  if (!drive.empty() && drive.back().stop == start && drive.back().slip_rate == rate) {
    drive.back().stop = stop;
  } else {
    drive.push_back({start, stop, rate});
  }
  schedule_.total_slips += count_phase_slips(cycles, slips_per_cycle_);
  cycle_ += cycles;
}

void ScheduleBuilder::add_gate(const GateDef& gate, int identity_cycles) {
  if (gate.label == GateLabel::I) {
    idle_cycles(identity_cycles);
    return;
  }
  add_train(gate.trigger_phase, gate.pulse_count);
}

void ScheduleBuilder::add_gates(const std::vector<GateDef>& gates, int identity_cycles) {
  for (const auto& g : gates) add_gate(g, identity_cycles);
}

void ScheduleBuilder::idle_cycles(std::int64_t cycles) {
  if (cycles < 0) throw InvalidArgument("idle length must be non-negative");
  cycle_ += cycles;
}

void ScheduleBuilder::mark() { schedule_.markers.push_back(now()); }

Schedule ScheduleBuilder::build() const { return build(now()); }

Schedule ScheduleBuilder::build(double end_time) const {
  Schedule s = schedule_;
  s.end_time = std::max(end_time, now());
  return s;
}

}  // namespace sfqsim
