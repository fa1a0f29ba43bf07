#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpsi/config.hpp"

namespace fpsi {

/// Relative output directories are placed under $FPSI_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::string& dir);

struct RunReport {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;  // everything written, summary.json last
  int not_converged = 0;                     // iterative steps that hit k_max without meeting eps
  ConvergenceTable table;                    // example1 only
};

/// Solves the configured experiment and writes:
///   example1  convergence.csv (one row per dt), energy_<k>.jsonl per dt
///   example2  slice_t<time>.csv per slice time, energy.jsonl
///   custom    energy.jsonl
/// plus optional VTK snapshots and mu traces, config.toml and summary.json.
/// Progress lines go to `log`. Throws on IO errors.
RunReport run_command(const RunConfig& config, std::ostream& log);

/// One example1 series per gamma in <out>/gamma_<value>/, and gamma_rates.csv
/// with the final-pair rate of every norm.
RunReport gamma_study(const RunConfig& config, const std::vector<double>& gammas, std::ostream& log);

}  // namespace fpsi
