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

// Command-line front end: one subcommand per experiment.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfqsim/config.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
};

json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config '" + path + "' is not valid JSON: " + e.what());
  }
}

int run(const std::string& experiment, const Options& o) {
  json doc = json::object();
  if (!o.preset.empty()) {
    const auto preset = sfqsim::find_preset(o.preset);
    if (!preset) {
      std::cerr << "error: unknown preset '" << o.preset << "' (available: paper-defaults)\n";
      return 2;
    }
    doc = *preset;
  }
  if (!o.config_path.empty()) {
    const json user = sfqsim::unwrap_sidecar(read_document(o.config_path));
    if (!user.is_object()) {
      std::cerr << "error: config must be a JSON object\n";
      return 2;
    }
    if (user.contains("experiment") && user.at("experiment") != experiment) {
      std::cerr << "error: config is for experiment " << user.at("experiment").dump() << ", not '" << experiment
                << "'\n";
      return 2;
    }
    doc.merge_patch(user);
  }
  doc["experiment"] = experiment;
  if (o.seed) doc["seed"] = *o.seed;
  if (!o.out.empty()) doc["output_dir"] = o.out;

  sfqsim::RunConfig config;
  try {
    config = sfqsim::parse_config(doc);
  } catch (const sfqsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const sfqsim::RunOutcome outcome = sfqsim::dispatch(config);
  std::cout << outcome.summary;
  std::cout << "wrote";
  for (const auto& f : outcome.files) std::cout << ' ' << config.output_dir << '/' << f;
  std::cout << '\n';
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-level simulator for SFQ control of a transmon qubit"};
  app.require_subcommand(1);
  Options o;
  std::string chosen;
  for (sfqsim::ExperimentKind kind : sfqsim::all_experiments()) {
    const std::string name(sfqsim::to_string(kind));
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", o.config_path, "JSON config or a previous run's sidecar")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "bundled parameter set applied beneath the config")
        ->check(CLI::IsMember({"paper-defaults"}));
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->callback([&chosen, name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);
  try {
    return run(chosen, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
