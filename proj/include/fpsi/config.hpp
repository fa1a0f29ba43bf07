#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fpsi/experiments.hpp"

namespace fpsi {

enum class ExperimentKind { Example1, Example2, Custom };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& s);

/// Everything a run needs. `custom` uses the Example-1 geometry with zero
/// data and a smooth initial state (the free-decay setting of the energy tests).
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::Example1;
  SchemeKind scheme = SchemeKind::NonIterative;

  std::vector<double> dts;  // Example 1 time-step series; one entry for the other experiments
  double T = 1.0;

  int n = 32;  // Example 1 and custom: cells per unit length
  int nx = 120, ny_fluid = 10, ny_wall = 2;
  DarcyPair darcy = DarcyPair::RT1P1dc;
  bool flux_sides = false;

  PhysicalParams params;
  PulseBC pulse;
  bool honor_bjs = false;
  std::vector<double> slice_times;

  IterationControl iteration;

  std::string out_dir = "out";
  bool write_vtk = false;
  int vtk_every = 0;  // 0: only at slice times (Example 2) or the final step
  bool write_jsonl = true;
  bool write_mu = false;
};

/// Defaults for one experiment before any file value is applied.
RunConfig default_config(ExperimentKind kind);

/// Parses a small TOML subset: [section] headers, key = value with numbers,
/// booleans, quoted strings and flat arrays, # comments. Unknown keys and
/// invalid values raise ConfigError naming "section.key".
/// `overrides` holds (key path, value text) pairs that replace file entries;
/// bare words are taken as strings. `dt` and `dts` replace each other, and
/// `params.gamma` replaces `params.gamma_f` and `params.gamma_p`.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;
RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Checks the parameter invariants and run settings.
void validate(const RunConfig& c);

/// Text that parse_config maps back to the same configuration.
std::string to_config_text(const RunConfig& c);

}  // namespace fpsi
