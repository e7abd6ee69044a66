#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tentlab/banach.hpp"
#include "tentlab/serialize.hpp"
#include "tentlab/space.hpp"

namespace tentlab {

// One experiment request: the canonical JSON (presets expanded, defaults
// filled in, unknown keys rejected) plus the objects every runner needs.
// Identical canonical JSON means identical output bytes.
struct ExperimentConfig {
  Json canonical;
  std::string experiment;
  std::shared_ptr<const SpaceGrid> space;
  BanachSpace X;
  int corpus_count = 0;
  std::uint64_t seed = 0;
  std::string generator;
  Json params;
  Json gates;
};

// Throws std::invalid_argument on unknown experiment names, unknown keys,
// or malformed values.
ExperimentConfig parse_config(const Json& user);

struct GateCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string op;  // "<=" or ">="
  bool pass = false;
};

struct ExperimentResult {
  CsvTable table;
  std::vector<GateCheck> gates;
  Json metrics;
  bool all_pass = true;
  // extra JSON files keyed by basename (atom dumps and the like)
  std::vector<std::pair<std::string, Json>> artifacts;

  Json summary(const ExperimentConfig& cfg) const;
};

const std::vector<std::string>& experiment_names();
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// File-level entry point behind `tentlab run`: reads the config, applies the
// optional seed override, runs, writes <experiment>.csv and
// <experiment>_summary.json under out_dir, logs one line per gate.
// Exit status: 0 all gates pass, 1 gate failure, 2 invalid config or
// unknown experiment.
int run_config_file(const std::string& config_path, const std::string& out_dir,
                    const std::uint64_t* seed_override, std::ostream& log);

}  // namespace tentlab
