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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfqsim/config.hpp"

namespace sfqsim {

using json = nlohmann::ordered_json;

namespace {

struct Artifacts {
  std::string csv;
  json results;
  std::ostringstream summary;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void summarize_populations(const ExperimentResult& r, std::ostream& out) {
  out << "grid points: " << r.point_count() << '\n';
  for (const auto& a : r.axes) {
    const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
    out << "axis " << a.axis << ": " << a.values.size() << " values in [" << format_double(*lo) << ", "
        << format_double(*hi) << "]\n";
  }
  double pmin = 1, pmax = 0;
  for (const auto& p : r.populations) pmin = std::min(pmin, p[1]), pmax = std::max(pmax, p[1]);
  out << "P1 range: [" << fmt("%.6f", pmin) << ", " << fmt("%.6f", pmax) << "]\n";
}

// Damped-cosine fit of a 1-D trace; reports the frequency when it converges.
void summarize_oscillation(const ExperimentResult& r, const char* label, std::ostream& out, json& results) {
  try {
    const FitResult f = fit_damped_cosine(r.axes.back().values, r.p1_row(0));
    out << label << ": " << fmt("%.6g", f.value("frequency")) << " Hz (+- " << fmt("%.2g", f.error("frequency"))
        << ")\n";
    results["oscillation_fit"] = f.to_json();
  } catch (const std::exception& e) {
    out << label << ": not determined (" << e.what() << ")\n";
  }
}

void population_artifacts(const ExperimentResult& r, Artifacts& a) {
  std::ostringstream csv;
  write_csv(r, csv);
  a.csv = csv.str();
  a.results = r.metadata;
  summarize_populations(r, a.summary);
}

void run_rb_experiment(const RunConfig& c, Artifacts& a) {
  std::ostringstream csv;
  csv << "n,curve,m,k,survival\n";
  a.results["benchmarks"] = json::array();
  RBConfig rc = c.rb.config;
  rc.seed = c.seed;
  rc.threads = c.threads;
  for (int n : c.rb.subharmonics) {
    RBReport report;
    if (c.rb.gates.empty()) {
      report.n = n;
      report.reference = run_rb(rc, c.physics, n);
      report.reference_fit = fit_depolarizing(report.reference, rc.truncate_after_minimum);
      report.fit_window = static_cast<std::size_t>(
          std::find(report.reference.lengths.begin(), report.reference.lengths.end(), report.reference_fit.last_length) -
          report.reference.lengths.begin() + 1);
      report.clifford_fidelity = extract_fidelity(report.reference_fit);
    } else {
      report = run_interleaved_benchmark(rc, c.physics, n, c.rb.gates);
    }
    auto rows = [&](const std::string& curve, const RBSurvivals& s) {
      for (std::size_t i = 0; i < s.lengths.size(); ++i) {
        for (std::size_t k = 0; k < s.survivals[i].size(); ++k) {
          csv << n << ',' << curve << ',' << s.lengths[i] << ',' << k << ',' << format_double(s.survivals[i][k])
              << '\n';
        }
      }
    };
    rows("reference", report.reference);
    for (const auto& g : report.gates) rows(std::string(to_string(g.gate)), g.survivals);
    a.results["benchmarks"].push_back(report.to_json());

    auto& out = a.summary;
    out << "n = " << n << " (fit window: first " << report.fit_window << " lengths)\n";
    out << "  reference  p = " << fmt("%.6f", report.reference_fit.p) << " +- " << fmt("%.2g", report.reference_fit.p_err)
        << "   Clifford fidelity = " << fmt("%.4f", report.clifford_fidelity.value) << " +- "
        << fmt("%.2g", report.clifford_fidelity.error) << '\n';
    for (const auto& g : report.gates) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-9s  p = %.6f +- %.2g   gate fidelity = %.4f +- %.2g%s\n",
                    std::string(to_string(g.gate)).c_str(), g.fit.p, g.fit.p_err, g.fidelity.value, g.fidelity.error,
                    g.fidelity.flagged ? "   FLAGGED" : "");
      out << line;
    }
  }
  a.csv = csv.str();
}

void run_fit_decay(const RunConfig& c, Artifacts& a) {
  auto load = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open decay data '" + path + "'");
    return read_decay_csv(in);
  };
  std::vector<DecaySample> poisoned, unpoisoned;
  bool paired = false;
  if (c.fit_decay.input) {
    poisoned = load(*c.fit_decay.input);
    if (c.fit_decay.unpoisoned_input) {
      unpoisoned = load(*c.fit_decay.unpoisoned_input);
      paired = true;
    }
    a.results["source"] = *c.fit_decay.input;
  } else {
    poisoned = bundled_decay_dataset(true);
    if (c.fit_decay.paired) {
      unpoisoned = bundled_decay_dataset(false);
      paired = true;
    }
    a.results["source"] = "bundled synthetic dataset (n_qp 1.03 and 0.10, T1_qp 4 us, T1_r 25 us, 1% noise)";
  }
  DecayFitOptions opt;
  opt.fixed_t1_qp = c.fit_decay.fixed_t1_qp;
  opt.fixed_t1_r = c.fit_decay.fixed_t1_r;
  const FitResult f = paired ? fit_decay_paired(poisoned, unpoisoned, opt) : fit_decay(poisoned, opt);
  a.results["fit"] = f.to_json();

  const double t1qp = f.value("t1_qp"), t1r = f.value("t1_r");
  const double n_p = paired ? f.value("n_qp_poisoned") : f.value("n_qp");
  std::ostringstream csv;
  csv << "curve,time_s,p1,p1_fit\n";
  auto rows = [&](const char* name, const std::vector<DecaySample>& d, double n) {
    for (const auto& s : d) {
      csv << name << ',' << format_double(s.t) << ',' << format_double(s.p1) << ','
          << format_double(decay_law(s.t, {n, t1qp, t1r})) << '\n';
    }
  };
  rows("poisoned", poisoned, n_p);
  if (paired) rows("unpoisoned", unpoisoned, f.value("n_qp_unpoisoned"));
  a.csv = csv.str();

  auto& out = a.summary;
  out << (paired ? "paired fit (shared T1_qp, T1_r)\n" : "single-curve fit\n");
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-16s = %.6g +- %.2g%s\n", f.names[i].c_str(), f.values[i], f.errors[i],
                  f.fixed[i] ? " (fixed)" : "");
    out << line;
  }
  out << "  residual norm    = " << fmt("%.4g", f.residual_norm) << '\n';
}

Artifacts run(const RunConfig& c) {
  Artifacts a;
  const MeasurementOptions m = c.measurement();
  const auto axis = [&](const char* name) -> const SweepSpec& { return *c.sweep(name); };
  switch (c.experiment) {
    case ExperimentKind::Rabi: {
      const ExperimentResult r = c.sweep("bias") ? run_bias_rabi(c.physics, c.drive, axis("bias"), c.bias, axis("t_s"), m)
                                                 : run_rabi(c.physics, c.drive, axis("t_s"), m);
      population_artifacts(r, a);
      if (r.axes.size() == 1) summarize_oscillation(r, "Rabi frequency", a.summary, a.results);
      break;
    }
    case ExperimentKind::Chevron:
      population_artifacts(run_chevron(c.physics, c.drive.n, axis("detuning_hz"), axis("t_s"), m), a);
      break;
    case ExperimentKind::Ramsey: {
      const ExperimentResult r = run_ramsey(c.physics, c.drive, axis("delay_s"), m);
      population_artifacts(r, a);
      summarize_oscillation(r, "fringe frequency", a.summary, a.results);
      break;
    }
    case ExperimentKind::Rabi2d:
      population_artifacts(run_rabi2d(c.physics, c.drive.n, axis("phase_rad"), axis("t_s"), m), a);
      break;
    case ExperimentKind::Staircase:
      population_artifacts(run_staircase(c.physics, c.drive.n, axis("t_s"), m), a);
      break;
    case ExperimentKind::RB:
      run_rb_experiment(c, a);
      break;
    case ExperimentKind::QPPoison: {
      const ExperimentResult r = run_qp_poison(c.physics, axis("slips"), axis("t_s"), c.poison_rate_hz, m);
      population_artifacts(r, a);
      const PoisonAnalysis an = analyze_qp_poison(r);
      a.results["analysis"] = an.to_json();
      a.summary << "fitted n_qp per burst:\n";
      for (std::size_t i = 0; i < an.slips.size(); ++i) {
        a.summary << "  " << fmt("%8.0f", an.slips[i]) << " slips: " << fmt("%.4f", an.n_qp[i]) << " +- "
                  << fmt("%.2g", an.n_qp_err[i]) << '\n';
      }
      a.summary << "QPs per slip (slope): " << fmt("%.4e", an.slope) << ", intercept " << fmt("%.4f", an.intercept)
                << '\n';
      break;
    }
    case ExperimentKind::QPRecovery: {
      const QPRecoveryResult r = run_qp_recovery(c.physics, c.burst, axis("t_s"), c.recovery_noise, c.seed);
      std::ostringstream csv;
      write_csv(r, csv);
      a.csv = csv.str();
      a.results = r.to_json();
      a.summary << "n_qp after burst: " << fmt("%.4f", r.n_qp.front()) << '\n';
      a.summary << "fitted trapping time: " << fmt("%.4g", r.fit.value("trapping_time")) << " s +- "
                << fmt("%.2g", r.fit.error("trapping_time")) << '\n';
      a.summary << "delta_omega vs Gamma slope: " << fmt("%.9f", r.slope) << '\n';
      break;
    }
    case ExperimentKind::FitDecay:
      run_fit_decay(c, a);
      break;
    case ExperimentKind::Dispersion: {
      const DispersionSweep d = run_dispersion(c.physics, axis("n_qp"));
      std::ostringstream csv;
      write_csv(d, csv);
      a.csv = csv.str();
      a.results = d.to_json();
      a.summary << "delta_omega / Gamma (bare):       " << fmt("%.6f", d.bare_ratio) << '\n';
      a.summary << "delta_omega / Gamma (with factor): " << fmt("%.6f", d.ratio) << '\n';
      a.summary << "parametric slope:                 " << fmt("%.6f", d.slope) << '\n';
      if (!d.in_validity_range) a.summary << "warning: hbar omega10 >= 2 Delta, outside the model's range\n";
      break;
    }
  }
  return a;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

RunOutcome dispatch(const RunConfig& config) {
  namespace fs = std::filesystem;
  RunOutcome outcome;
  const std::string name(to_string(config.experiment));
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  json sidecar;
  sidecar["format"] = "sfqsim-sidecar/1";
  sidecar["config"] = to_json(config);
  std::ostringstream summary;
  summary << "sfqsim " << name << " (seed " << config.seed << ")\n";
  try {
    Artifacts a = run(config);
    write_file(dir / (name + ".csv"), a.csv);
    outcome.files.push_back(name + ".csv");
    sidecar["status"] = "complete";
    sidecar["results"] = std::move(a.results);
    summary << a.summary.str();
  } catch (const std::exception& e) {
    // Partial runs leave no CSV; sidecar and summary say why.
    std::error_code ignored;
    fs::remove(dir / (name + ".csv"), ignored);
    sidecar["status"] = "failed";
    sidecar["error"] = e.what();
    summary << "FAILED: " << e.what() << '\n';
    outcome.exit_code = 1;
  }
  write_file(dir / (name + ".json"), sidecar.dump(2) + "\n");
  outcome.files.push_back(name + ".json");
  outcome.summary = summary.str();
  write_file(dir / (name + "_summary.txt"), outcome.summary);
  outcome.files.push_back(name + "_summary.txt");
  return outcome;
}

}  // namespace sfqsim
