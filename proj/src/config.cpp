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

#include "sfqsim/config.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace sfqsim {

using json = nlohmann::ordered_json;

namespace {

struct Kind {
  ExperimentKind kind;
  const char* name;
};

constexpr Kind kKinds[] = {
    {ExperimentKind::Rabi, "rabi"},           {ExperimentKind::Chevron, "chevron"},
    {ExperimentKind::Ramsey, "ramsey"},       {ExperimentKind::Rabi2d, "rabi2d"},
    {ExperimentKind::Staircase, "staircase"}, {ExperimentKind::RB, "rb"},
    {ExperimentKind::QPPoison, "qp-poison"},  {ExperimentKind::QPRecovery, "qp-recovery"},
    {ExperimentKind::FitDecay, "fit-decay"},  {ExperimentKind::Dispersion, "dispersion"},
};

// Collects errors while walking a document. Each object checks its own keys.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  // Returns the object at key (or nullptr when absent) and checks its keys.
  const json* object(const json& parent, const char* key, const std::string& path,
                     std::initializer_list<const char*> allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& j = parent.at(key);
    const std::string p = join(path, key);
    if (!j.is_object()) {
      error(p, "expected an object");
      return nullptr;
    }
    keys(j, p, allowed);
    return &j;
  }

  void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
      if (!ok.count(k)) error(join(path, k), "unknown key");
    }
  }

  void number(const json* obj, const char* key, const std::string& path, double& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_number()) return error(join(path, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) return error(join(path, key), "must be finite");
    out = d;
  }

  void optional_number(const json* obj, const char* key, const std::string& path, std::optional<double>& out) {
    if (!obj || !obj->contains(key)) return;
    if (obj->at(key).is_null()) {
      out.reset();
      return;
    }
    double d = 0;
    const std::size_t before = errors.size();
    number(obj, key, path, d);
    if (errors.size() == before) out = d;
  }

  template <class Int>
  void integer(const json* obj, const char* key, const std::string& path, Int& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_number_integer()) return error(join(path, key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) return error(join(path, key), "must be non-negative");
      const auto u = v.get<std::uint64_t>();
      if (u > std::numeric_limits<Int>::max()) return error(join(path, key), "out of range");
      out = static_cast<Int>(u);
    } else {
      const auto s = v.get<std::int64_t>();
      if (s < std::numeric_limits<Int>::min() || s > std::numeric_limits<Int>::max()) {
        return error(join(path, key), "out of range");
      }
      out = static_cast<Int>(s);
    }
  }

  void boolean(const json* obj, const char* key, const std::string& path, bool& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_boolean()) return error(join(path, key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const json* obj, const char* key, const std::string& path, std::string& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_string()) return error(join(path, key), "expected a string");
    out = v.get<std::string>();
  }

  void optional_string(const json* obj, const char* key, const std::string& path, std::optional<std::string>& out) {
    if (!obj || !obj->contains(key)) return;
    if (obj->at(key).is_null()) {
      out.reset();
      return;
    }
    std::string s;
    const std::size_t before = errors.size();
    string(obj, key, path, s);
    if (errors.size() == before) out = s;
  }

  // Runs a validate() and records its message under `path`.
  template <class F>
  void check(const std::string& path, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      error(path, e.what());
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

void read_physics(Reader& r, const json& doc, PhysicsBundle& p) {
  const json* phys = r.object(doc, "physics", "", {"transmon", "coupling", "decoherence", "qp", "dispersion"});
  if (!phys) return;
  const std::string base = "physics";

  if (const json* t = r.object(*phys, "transmon", base, {"omega10_hz", "alpha_hz", "dim"})) {
    const std::string path = base + ".transmon";
    double f10 = p.transmon.omega10 / kTwoPi, fa = p.transmon.alpha / kTwoPi;
    r.number(t, "omega10_hz", path, f10);
    r.number(t, "alpha_hz", path, fa);
    r.integer(t, "dim", path, p.transmon.dim);
    p.transmon.omega10 = kTwoPi * f10;
    p.transmon.alpha = kTwoPi * fa;
  }
  if (const json* c = r.object(*phys, "coupling", base, {"coupling_capacitance_f", "capacitance_f", "delta_theta_rad"})) {
    const std::string path = base + ".coupling";
    r.number(c, "coupling_capacitance_f", path, p.coupling.coupling_capacitance);
    r.number(c, "capacitance_f", path, p.coupling.capacitance);
    r.optional_number(c, "delta_theta_rad", path, p.delta_theta_override);
  }
  if (const json* d = r.object(*phys, "decoherence", base,
                               {"enabled", "t1_residual_s", "t2_star_residual_s", "t1_per_qp_s", "qp_dispersion_factor"})) {
    const std::string path = base + ".decoherence";
    r.boolean(d, "enabled", path, p.decoherence_enabled);
    r.number(d, "t1_residual_s", path, p.decoherence.t1_residual);
    r.number(d, "t2_star_residual_s", path, p.decoherence.t2_star_residual);
    r.number(d, "t1_per_qp_s", path, p.decoherence.t1_per_qp);
    r.number(d, "qp_dispersion_factor", path, p.decoherence.qp_dispersion_factor);
  }
  if (const json* q = r.object(*phys, "qp", base,
                               {"dynamics_enabled", "eta", "turn_on", "turn_on_slips", "trapping_time_s",
                                "slips_per_cycle", "n_qp_background"})) {
    const std::string path = base + ".qp";
    r.boolean(q, "dynamics_enabled", path, p.qp_dynamics_enabled);
    r.number(q, "eta", path, p.qp.eta);
    std::string turn_on(to_string(p.qp.turn_on));
    r.string(q, "turn_on", path, turn_on);
    r.check(path + ".turn_on", [&] { p.qp.turn_on = parse_turn_on_model(turn_on); });
    r.integer(q, "turn_on_slips", path, p.qp.turn_on_slips);
    double tau = p.qp.trapping_time();
    r.number(q, "trapping_time_s", path, tau);
    if (tau > 0) {
      p.qp.trapping_rate = 1.0 / tau;
    } else {
      r.error(path + ".trapping_time_s", "must be positive");
    }
    r.integer(q, "slips_per_cycle", path, p.qp.slips_per_cycle);
    r.number(q, "n_qp_background", path, p.qp.n_qp_background);
  }
  if (const json* d = r.object(*phys, "dispersion", base, {"gap_ev", "empirical_factor"})) {
    const std::string path = base + ".dispersion";
    double gap_ev = p.dispersion.gap / constants::electron_volt;
    r.number(d, "gap_ev", path, gap_ev);
    p.dispersion.gap = gap_ev * constants::electron_volt;
    r.number(d, "empirical_factor", path, p.dispersion.empirical_factor);
  }
}

void validate_physics(Reader& r, const PhysicsBundle& p) {
  r.check("physics.transmon", [&] { p.transmon.validate(); });
  if (!p.delta_theta_override) {
    r.check("physics.coupling", [&] { p.coupling.validate(); });
  } else if (!(*p.delta_theta_override > 0)) {
    r.error("physics.coupling.delta_theta_rad", "must be positive");
  }
  r.check("physics.decoherence", [&] { p.decoherence.validate(); });
  r.check("physics.qp", [&] { p.qp.validate(); });
  r.check("physics.dispersion", [&] { p.dispersion.validate(); });
}

void read_sweeps(Reader& r, const json& doc, ExperimentKind kind, std::vector<SweepSpec>& sweeps) {
  if (!doc.contains("sweeps")) return;
  const json& s = doc.at("sweeps");
  if (!s.is_object()) return r.error("sweeps", "expected an object");
  const auto axes = experiment_axes(kind);
  for (const auto& [axis, spec] : s.items()) {
    const std::string path = "sweeps." + axis;
    const bool known =
        std::any_of(axes.begin(), axes.end(), [&](const AxisRequirement& a) { return a.axis == axis; });
    if (!known) {
      r.error(path, "unknown axis for experiment '" + std::string(to_string(kind)) + "'");
      continue;
    }
    if (!spec.is_object()) {
      r.error(path, "expected an object");
      continue;
    }
    r.keys(spec, path, {"values", "start", "stop", "count", "repetitions"});
    SweepSpec out{axis, {}, 1};
    r.integer(&spec, "repetitions", path, out.repetitions);
    const bool has_values = spec.contains("values");
    const bool has_range = spec.contains("start") || spec.contains("stop") || spec.contains("count");
    if (has_values == has_range) {
      r.error(path, "give either 'values' or 'start'/'stop'/'count'");
      continue;
    }
    if (has_values) {
      const json& v = spec.at("values");
      if (!v.is_array()) {
        r.error(path + ".values", "expected an array of numbers");
        continue;
      }
      bool ok = true;
      for (const auto& x : v) {
        if (!x.is_number()) ok = false;
        else out.values.push_back(x.get<double>());
      }
      if (!ok) {
        r.error(path + ".values", "expected an array of numbers");
        continue;
      }
    } else {
      for (const char* k : {"start", "stop", "count"}) {
        if (!spec.contains(k)) r.error(path + "." + k, "missing required field");
      }
      double start = 0, stop = 0;
      std::int64_t count = 0;
      const std::size_t before = r.errors.size();
      r.number(&spec, "start", path, start);
      r.number(&spec, "stop", path, stop);
      r.integer(&spec, "count", path, count);
      if (r.errors.size() != before) continue;
      if (count < 1) {
        r.error(path + ".count", "must be >= 1");
        continue;
      }
      out = SweepSpec::linspace(axis, start, stop, static_cast<std::size_t>(count), out.repetitions);
    }
    r.check(path, [&] { out.validate(); });
    for (auto& existing : sweeps) {
      if (existing.axis == axis) existing = out;
    }
    if (std::none_of(sweeps.begin(), sweeps.end(), [&](const SweepSpec& e) { return e.axis == axis; })) {
      sweeps.push_back(out);
    }
  }
  // Keep experiment axis order.
  std::vector<SweepSpec> ordered;
  for (const auto& a : axes) {
    for (const auto& sw : sweeps) {
      if (sw.axis == a.axis) ordered.push_back(sw);
    }
  }
  sweeps = std::move(ordered);
}

void read_rb(Reader& r, const json& doc, RBSettings& rb) {
  const json* j = r.object(doc, "rb", "",
                           {"lengths", "randomizations", "subharmonics", "gates", "depolarizing",
                            "truncate_after_minimum", "allow_fast_path"});
  if (!j) return;
  if (j->contains("lengths")) {
    const json& v = j->at("lengths");
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); })) {
      r.error("rb.lengths", "expected an array of integers");
    } else {
      rb.config.lengths = v.get<std::vector<int>>();
    }
  }
  r.integer(j, "randomizations", "rb", rb.config.randomizations);
  if (j->contains("subharmonics")) {
    const json& v = j->at("subharmonics");
    if (!v.is_array() || v.empty() ||
        !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer() && x.get<int>() >= 1; })) {
      r.error("rb.subharmonics", "expected a non-empty array of integers >= 1");
    } else {
      rb.subharmonics = v.get<std::vector<int>>();
    }
  }
  if (j->contains("gates")) {
    const json& v = j->at("gates");
    if (!v.is_array()) {
      r.error("rb.gates", "expected an array of gate labels");
    } else {
      rb.gates.clear();
      for (const auto& g : v) {
        if (!g.is_string()) {
          r.error("rb.gates", "expected an array of gate labels");
          continue;
        }
        r.check("rb.gates", [&] { rb.gates.push_back(parse_gate_label(g.get<std::string>())); });
      }
    }
  }
  r.number(j, "depolarizing", "rb", rb.config.depolarizing);
  r.boolean(j, "truncate_after_minimum", "rb", rb.config.truncate_after_minimum);
  r.boolean(j, "allow_fast_path", "rb", rb.config.allow_fast_path);
}

json sweep_json(const SweepSpec& s) {
  return {{"values", s.values}, {"repetitions", s.repetitions}};
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) {
  for (const auto& k : kKinds) {
    if (text == k.name) return k.kind;
  }
  return std::nullopt;
}

const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& k : kKinds) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

namespace {
std::string join_errors(const std::vector<std::string>& errors) {
  std::string s = "invalid configuration:";
  for (const auto& e : errors) s += "\n  " + e;
  return s;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

const SweepSpec* RunConfig::sweep(std::string_view axis) const {
  for (const auto& s : sweeps) {
    if (s.axis == axis) return &s;
  }
  return nullptr;
}

std::vector<AxisRequirement> experiment_axes(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rabi: return {{"bias", false}, {"t_s"}};
    case ExperimentKind::Chevron: return {{"detuning_hz"}, {"t_s"}};
    case ExperimentKind::Ramsey: return {{"delay_s"}};
    case ExperimentKind::Rabi2d: return {{"phase_rad"}, {"t_s"}};
    case ExperimentKind::Staircase: return {{"t_s"}};
    case ExperimentKind::QPPoison: return {{"slips"}, {"t_s"}};
    case ExperimentKind::QPRecovery: return {{"t_s"}};
    case ExperimentKind::Dispersion: return {{"n_qp"}};
    case ExperimentKind::RB:
    case ExperimentKind::FitDecay: return {};
  }
  return {};
}

RunConfig default_config(ExperimentKind kind) {
  RunConfig c;
  c.experiment = kind;
  c.rb.config.truncate_after_minimum = true;
  switch (kind) {
    case ExperimentKind::Rabi:
      c.sweeps = {SweepSpec::linspace("t_s", 0.0, 100e-9, 201)};
      break;
    case ExperimentKind::Chevron:
      c.sweeps = {SweepSpec::linspace("detuning_hz", -10e6, 10e6, 41), SweepSpec::linspace("t_s", 0.0, 100e-9, 101)};
      break;
    case ExperimentKind::Ramsey:
      c.drive.detuning_hz = 1e6;
      c.sweeps = {SweepSpec::linspace("delay_s", 0.0, 1e-6, 201)};
      break;
    case ExperimentKind::Rabi2d: {
      SweepSpec phi = SweepSpec::linspace("phase_rad", 0.0, kTwoPi, 73);
      phi.values.pop_back();  // [0, 2 pi)
      c.sweeps = {phi, SweepSpec::linspace("t_s", 0.0, 60e-9, 61)};
      break;
    }
    case ExperimentKind::Staircase:
      c.drive.n = 41;
      c.sweeps = {SweepSpec::linspace("t_s", 0.0, 400e-9, 801)};
      break;
    case ExperimentKind::QPPoison:
      c.sweeps = {SweepSpec{"slips", {0, 160, 320, 480, 640, 960, 1280}, 1},
                  SweepSpec::linspace("t_s", 0.0, 150e-6, 151)};
      break;
    case ExperimentKind::QPRecovery:
      c.sweeps = {SweepSpec::linspace("t_s", 0.0, 80e-6, 41)};
      break;
    case ExperimentKind::Dispersion:
      c.sweeps = {SweepSpec::linspace("n_qp", 0.0, 2.0, 21)};
      break;
    case ExperimentKind::RB:
    case ExperimentKind::FitDecay:
      break;
  }
  return c;
}

RunConfig parse_config(const json& doc) {
  Reader r;
  if (!doc.is_object()) throw ConfigError({"config: expected a JSON object"});
  r.keys(doc, "",
         {"experiment", "seed", "output_dir", "physics", "drive", "measurement", "sweeps", "bias_window", "rb",
          "qp_poison", "qp_recovery", "fit_decay"});
  if (!doc.contains("experiment")) {
    r.error("experiment", "missing required field");
    throw ConfigError(r.errors);
  }
  std::string name;
  r.string(&doc, "experiment", "", name);
  const auto kind = parse_experiment_kind(name);
  if (!kind) {
    std::string options;
    for (const auto& k : kKinds) options += std::string(options.empty() ? "" : ", ") + k.name;
    r.error("experiment", "unknown experiment '" + name + "' (expected one of " + options + ")");
    throw ConfigError(r.errors);
  }
  RunConfig c = default_config(*kind);
  r.integer(&doc, "seed", "", c.seed);
  r.string(&doc, "output_dir", "", c.output_dir);
  if (c.output_dir.empty()) r.error("output_dir", "must not be empty");

  read_physics(r, doc, c.physics);
  if (const json* d = r.object(doc, "drive", "", {"n", "detuning_hz"})) {
    r.integer(d, "n", "drive", c.drive.n);
    r.number(d, "detuning_hz", "drive", c.drive.detuning_hz);
  }
  if (c.drive.n < 1) r.error("drive.n", "must be >= 1");
  if (const json* m = r.object(doc, "measurement", "", {"shots", "threads"})) {
    r.integer(m, "shots", "measurement", c.shots);
    r.integer(m, "threads", "measurement", c.threads);
  }
  if (c.shots < 0) r.error("measurement.shots", "must be >= 0");
  read_sweeps(r, doc, *kind, c.sweeps);
  if (const json* b = r.object(doc, "bias_window", "", {"low", "high"})) {
    r.number(b, "low", "bias_window", c.bias.low);
    r.number(b, "high", "bias_window", c.bias.high);
  }
  if (c.bias.low > c.bias.high) r.error("bias_window", "low must not exceed high");
  read_rb(r, doc, c.rb);
  r.check("rb", [&] { c.rb.config.validate(); });
  if (const json* q = r.object(doc, "qp_poison", "", {"cycle_rate_hz"})) {
    r.number(q, "cycle_rate_hz", "qp_poison", c.poison_rate_hz);
  }
  if (!(c.poison_rate_hz > 0)) r.error("qp_poison.cycle_rate_hz", "must be positive");
  if (const json* q = r.object(doc, "qp_recovery", "", {"burst_slips", "cycle_rate_hz", "relative_noise"})) {
    r.number(q, "burst_slips", "qp_recovery", c.burst.slips);
    r.number(q, "cycle_rate_hz", "qp_recovery", c.burst.cycle_rate_hz);
    r.number(q, "relative_noise", "qp_recovery", c.recovery_noise);
  }
  r.check("qp_recovery", [&] { c.burst.validate(); });
  if (c.recovery_noise < 0) r.error("qp_recovery.relative_noise", "must be >= 0");
  if (const json* f = r.object(doc, "fit_decay", "",
                               {"input", "unpoisoned_input", "paired", "fixed_t1_qp_s", "fixed_t1_r_s"})) {
    r.optional_string(f, "input", "fit_decay", c.fit_decay.input);
    r.optional_string(f, "unpoisoned_input", "fit_decay", c.fit_decay.unpoisoned_input);
    r.boolean(f, "paired", "fit_decay", c.fit_decay.paired);
    r.optional_number(f, "fixed_t1_qp_s", "fit_decay", c.fit_decay.fixed_t1_qp);
    r.optional_number(f, "fixed_t1_r_s", "fit_decay", c.fit_decay.fixed_t1_r);
  }
  if (c.fit_decay.unpoisoned_input && !c.fit_decay.input) {
    r.error("fit_decay.unpoisoned_input", "needs fit_decay.input as well");
  }
  for (const auto* v : {&c.fit_decay.fixed_t1_qp, &c.fit_decay.fixed_t1_r}) {
    if (*v && !(**v > 0)) r.error("fit_decay", "fixed lifetimes must be positive");
  }
  validate_physics(r, c.physics);
  for (const auto& a : experiment_axes(*kind)) {
    if (a.required && !c.sweep(a.axis)) r.error("sweeps." + a.axis, "missing required field");
  }
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["physics"] = physics_to_json(c.physics);
  j["drive"] = {{"n", c.drive.n}, {"detuning_hz", c.drive.detuning_hz}};
  j["measurement"] = {{"shots", c.shots}, {"threads", c.threads}};
  json sweeps = json::object();
  for (const auto& s : c.sweeps) sweeps[s.axis] = sweep_json(s);
  if (!c.sweeps.empty()) j["sweeps"] = std::move(sweeps);
  switch (c.experiment) {
    case ExperimentKind::Rabi:
      j["bias_window"] = {{"low", c.bias.low}, {"high", c.bias.high}};
      break;
    case ExperimentKind::RB: {
      json gates = json::array();
      for (GateLabel g : c.rb.gates) gates.push_back(std::string(to_string(g)));
      j["rb"] = {{"lengths", c.rb.config.lengths},
                 {"randomizations", c.rb.config.randomizations},
                 {"subharmonics", c.rb.subharmonics},
                 {"gates", gates},
                 {"depolarizing", c.rb.config.depolarizing},
                 {"truncate_after_minimum", c.rb.config.truncate_after_minimum},
                 {"allow_fast_path", c.rb.config.allow_fast_path}};
      break;
    }
    case ExperimentKind::QPPoison:
      j["qp_poison"] = {{"cycle_rate_hz", c.poison_rate_hz}};
      break;
    case ExperimentKind::QPRecovery:
      j["qp_recovery"] = {{"burst_slips", c.burst.slips},
                          {"cycle_rate_hz", c.burst.cycle_rate_hz},
                          {"relative_noise", c.recovery_noise}};
      break;
    case ExperimentKind::FitDecay: {
      auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
      j["fit_decay"] = {{"input", opt(c.fit_decay.input)},
                        {"unpoisoned_input", opt(c.fit_decay.unpoisoned_input)},
                        {"paired", c.fit_decay.paired},
                        {"fixed_t1_qp_s", opt(c.fit_decay.fixed_t1_qp)},
                        {"fixed_t1_r_s", opt(c.fit_decay.fixed_t1_r)}};
      break;
    }
    default:
      break;
  }
  return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

json paper_defaults_preset() {
  // C chosen so that a 400 aF coupling capacitor gives pi/46 per pulse.
  const double omega10 = kTwoPi * 4.958e9;
  const double c = capacitance_for_delta_theta(400e-18, omega10, std::numbers::pi / 46);
  return {{"physics",
           {{"transmon", {{"omega10_hz", 4.958e9}, {"alpha_hz", -220e6}, {"dim", 4}}},
            {"coupling", {{"coupling_capacitance_f", 400e-18}, {"capacitance_f", c}, {"delta_theta_rad", nullptr}}},
            {"decoherence",
             {{"enabled", true},
              {"t1_residual_s", 23.6e-6},
              {"t2_star_residual_s", 24.4e-6},
              {"t1_per_qp_s", kCalibratedT1PerQP},
              {"qp_dispersion_factor", 1.0}}},
            {"qp",
             {{"dynamics_enabled", true},
              {"eta", 1.6e-3},
              {"turn_on", "linear"},
              {"turn_on_slips", 0},
              {"trapping_time_s", 17.6e-6},
              {"slips_per_cycle", 4},
              {"n_qp_background", 0.10}}},
            {"dispersion", {{"gap_ev", 180e-6}, {"empirical_factor", 1.5}}}}}};
}

std::optional<json> find_preset(std::string_view name) {
  if (name == "paper-defaults") return paper_defaults_preset();
  return std::nullopt;
}

json unwrap_sidecar(const json& document) {
  if (document.is_object() && document.contains("format") && document.at("format") == "sfqsim-sidecar/1") {
    if (!document.contains("config")) throw ConfigError({"sidecar: missing 'config'"});
    return document.at("config");
  }
  return document;
}

}  // namespace sfqsim
