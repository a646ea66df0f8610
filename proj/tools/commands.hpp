#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bghz/state.hpp"

namespace bghz::cli {

enum ExitCode { kOk = 0, kFailure = 1, kWarnings = 2 };

struct RunConfig {
  std::string command = "table1";
  double gamma = 0.8;  // fixed-gain commands
  double gamma_min = 0.05;
  double gamma_max = 0.85;
  int steps = 17;
  int n = 3;
  NumericPolicy policy;
  double eta_min = 0.0;
  double eta_max = 1.0;
  int eta_steps = 21;
  bool projected = false;
  int l_max = 12;   // ptable
  int k_max = 5;    // pk
  unsigned threads = 0;
  std::string out;  // empty writes to standard output

  void validate() const;
};

const std::vector<std::string>& command_names();

/// Runs one command. CSV goes to `csv`; thresholds and diagnostics go to
/// `report` as '#' comment lines. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& csv, std::ostream& report);

}  // namespace bghz::cli
