#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bghz/errors.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using bghz::cli::RunConfig;
  RunConfig config;
  if (const char* env = std::getenv("BGHZ_BITS")) {
    try {
      config.policy.bits = std::stol(env);
    } catch (const std::exception&) {
      std::cerr << "error: BGHZ_BITS must be an integer, got '" << env << "'\n";
      return bghz::cli::kFailure;
    }
  }

  CLI::App app{"Bright GHZ state resummation and non-classicality sweeps"};
  std::string normalization = "unitary";
  app.add_option("--cmd", config.command, "Command")
      ->check(CLI::IsMember(bghz::cli::command_names()))
      ->capture_default_str();
  app.add_option("--gamma", config.gamma, "Gain for fixed-gain commands")->capture_default_str();
  app.add_option("--gamma-min", config.gamma_min, "First grid gain")->capture_default_str();
  app.add_option("--gamma-max", config.gamma_max, "Last grid gain")->capture_default_str();
  app.add_option("--steps", config.steps, "Number of grid gains")->capture_default_str();
  app.add_option("--n", config.n, "Beam count for pk, dist and ptable")->capture_default_str();
  app.add_option("--cutoff", config.policy.cutoff, "Maximum emission order (negative: automatic)")
      ->capture_default_str();
  app.add_option("--max-cutoff", config.policy.max_cutoff, "Cap for the automatic cutoff")->capture_default_str();
  app.add_option("--pade-order", config.policy.pade_order, "Highest diagonal Pade order")->capture_default_str();
  app.add_option("--tol", config.policy.tol, "Convergence tolerance of the diagonal sequence")
      ->capture_default_str();
  app.add_option("--bits", config.policy.bits, "Evaluation precision in bits (default from BGHZ_BITS)")
      ->capture_default_str();
  app.add_option("--tail-target", config.policy.tail_target, "Tail mass that ends the automatic cutoff")
      ->capture_default_str();
  app.add_option("--normalization", normalization, "Truncated state normalization")
      ->check(CLI::IsMember({"unitary", "retained"}))
      ->capture_default_str();
  app.add_option("--eta-min", config.eta_min, "Lowest detector efficiency")->capture_default_str();
  app.add_option("--eta-max", config.eta_max, "Highest detector efficiency")->capture_default_str();
  app.add_option("--eta-steps", config.eta_steps, "Efficiency grid size for the lossy command")
      ->capture_default_str();
  app.add_flag("--projected", config.projected, "Remove the vacuum before evaluating witnesses");
  app.add_option("--l-max", config.l_max, "Highest power for ptable")->capture_default_str();
  app.add_option("--k-max", config.k_max, "Highest order for pk")->capture_default_str();
  app.add_option("--threads", config.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
  app.add_option("--out", config.out, "Output CSV path (default: standard output)");
  CLI11_PARSE(app, argc, argv);
  config.policy.normalization = normalization == "retained" ? bghz::StateNormalization::Retained
                                                            : bghz::StateNormalization::Unitary;

  std::ostringstream csv;
  std::ostringstream report;
  int code = bghz::cli::kFailure;
  try {
    code = bghz::cli::run(config, csv, report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bghz::cli::kFailure;
  }
  if (config.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open " << config.out << '\n';
      return bghz::cli::kFailure;
    }
    file << csv.str();
  }
  std::cout << report.str();
  return code;
}
