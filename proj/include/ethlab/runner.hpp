#pragma once

#include <iosfwd>
#include <string>

#include "ethlab/verify.hpp"

namespace ethlab {

// Exit codes of the command-line entry points.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitContract = 2;

// Directory that holds the outputs of one config: <out_dir>/<experiment>-<hash>.
std::string report_dir_for(const ExperimentConfig& cfg);

// Writes report.json, scan.csv, config.json and auxiliary files; returns the directory.
std::string write_report(const ExperimentConfig& cfg, const ScanReport& r);

// Loads, runs and writes one experiment. ETHLAB_WORKERS overrides cfg.workers.
int run_config_file(const std::string& path, std::ostream& out, std::ostream& err);

// Summarises every report.json below dir.
int report_directory(const std::string& dir, std::ostream& out, std::ostream& err);

// Prints m, rho-style data and M for one spectral parameter "re,im".
int solve_point(const std::string& deformation, const std::string& w, int n, std::ostream& out,
                std::ostream& err);

}  // namespace ethlab
