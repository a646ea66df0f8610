#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "bghz/csv.hpp"
#include "bghz/errors.hpp"
#include "bghz/nonclassicality.hpp"
#include "bghz/series_core.hpp"
#include "bghz/stokes.hpp"

namespace bghz::cli {

namespace {

constexpr int kTable1Rows = 10;

bool state_converged(const BGHZState& state) {
  if (state.divergent) {
    return false;
  }
  return std::all_of(state.coefficients.begin(), state.coefficients.end(),
                     [](const Coefficient& c) { return c.converged; });
}

std::vector<std::string> state_flags(const BGHZState& state) {
  std::vector<std::string> flags;
  if (state.beyond_validity) {
    flags.push_back("beyond validity guard");
  }
  if (state.divergent) {
    flags.push_back("photon number divergence");
  }
  return flags;
}

SweepPoint point_from(const BGHZState& state, double value) {
  SweepPoint point;
  point.value = value;
  point.converged = state_converged(state);
  point.warnings = state_flags(state);
  return point;
}

BGHZState prepare(double gamma, const RunConfig& config) {
  BGHZState state = build_bghz(gamma, config.policy);
  return config.projected ? project_out_vacuum(state) : state;
}

std::string label(const RunConfig& config) {
  std::ostringstream os;
  os << "cmd=" << config.command;
  if (config.command == "table1" || config.command == "state" || config.command == "dist" ||
      config.command == "lossy") {
    os << " gamma=" << format_number(config.gamma);
  } else if (config.command != "ptable") {
    os << " gamma_min=" << format_number(config.gamma_min) << " gamma_max=" << format_number(config.gamma_max)
       << " steps=" << config.steps;
  }
  if (config.command == "pk" || config.command == "dist" || config.command == "ptable") {
    os << " n=" << config.n;
  }
  if (config.command == "ptable") {
    os << " l_max=" << config.l_max;
  }
  if (config.command == "eta" || config.command == "lossy") {
    os << " eta_min=" << format_number(config.eta_min) << " eta_max=" << format_number(config.eta_max);
  }
  if (config.command == "lossy") {
    os << " eta_steps=" << config.eta_steps;
  }
  if (config.command == "w1" || config.command == "w2") {
    os << " projected=" << (config.projected ? 1 : 0);
  }
  return os.str();
}

int sweep_exit(const SweepResult& sweep, std::ostream& report) {
  for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
    const SweepPoint& p = sweep.points[i];
    if (!p.error.empty()) {
      report << "# point " << format_number(sweep.axis[i]) << " failed: " << p.error << '\n';
    }
    for (const auto& w : p.warnings) {
      report << "# point " << format_number(sweep.axis[i]) << " warning: " << w << '\n';
    }
  }
  if (sweep.all_failed()) {
    return kFailure;
  }
  return sweep.any_warning() ? kWarnings : kOk;
}

int cmd_table1(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  std::vector<TripleDistribution> dists;
  bool flagged = false;
  for (int n = 1; n <= 3; ++n) {
    dists.push_back(photon_distribution({n, config.gamma, config.policy}));
    const auto& d = dists.back();
    flagged = flagged || d.divergent || d.beyond_validity;
    report << "# n=" << n << " cutoff=" << d.cutoff() << " tail_bound=" << format_number(d.tail_bound) << '\n';
    for (const auto& w : d.warnings) {
      report << "# n=" << n << " warning: " << w << '\n';
    }
  }
  csv << "k,p_n1,p_n2,p_n3\n";
  for (int k = 0; k <= kTable1Rows; ++k) {
    csv << k;
    for (const auto& d : dists) {
      const double p = k <= d.cutoff() ? d.probs[static_cast<std::size_t>(k)] : 0.0;
      csv << ',' << format_number(p);
    }
    csv << '\n';
  }
  return flagged ? kWarnings : kOk;
}

int cmd_pk(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const auto grid = linear_grid(config.gamma_min, config.gamma_max, config.steps);
  std::vector<TripleDistribution> dists(grid.size());
  std::vector<std::string> errors(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        try {
          dists[i] = photon_distribution({config.n, grid[i], config.policy});
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      },
      config.threads);
  csv << "gamma";
  for (int k = 0; k <= config.k_max; ++k) {
    csv << ",p" << k;
  }
  csv << ",converged\n";
  bool flagged = false;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& d = dists[i];
    const bool failed = !errors[i].empty();
    failures += failed ? 1 : 0;
    flagged = flagged || failed || d.divergent || d.beyond_validity;
    if (failed) {
      report << "# point " << format_number(grid[i]) << " failed: " << errors[i] << '\n';
    }
    csv << format_number(grid[i]);
    for (int k = 0; k <= config.k_max; ++k) {
      double p = std::nan("");
      if (!failed) {
        p = k <= d.cutoff() ? d.probs[static_cast<std::size_t>(k)] : 0.0;
      }
      csv << ',' << format_number(p);
    }
    csv << ',' << (failed || d.divergent ? 0 : 1) << '\n';
  }
  if (failures == grid.size()) {
    return kFailure;
  }
  return flagged ? kWarnings : kOk;
}

int cmd_mermin(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const auto grid = linear_grid(config.gamma_min, config.gamma_max, config.steps);
  std::vector<double> agreement(grid.size(), 0.0);
  const SweepResult sweep = run_sweep(
      grid,
      [&](double gamma) {
        const BGHZState state = build_bghz(gamma, config.policy);
        const MerminValue m = mermin(state);
        const auto idx = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), gamma) - grid.begin());
        agreement[idx] = m.agreement();
        return point_from(state, m.value);
      },
      config.threads);
  write_sweep_csv(csv, sweep, "gamma");
  report << "# max |lhs - |4t + 2 p_vac|| = " << format_number(*std::max_element(agreement.begin(), agreement.end()))
         << '\n';
  // Bracket from the first violating grid point to the top of the guarded range.
  double lower = std::nan("");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sweep.points[i].error.empty() && sweep.points[i].value > 2.0) {
      lower = grid[i];
      break;
    }
  }
  const double upper = std::min(config.gamma_max, config.policy.divergence_guard);
  if (std::isnan(lower) || !(upper > lower)) {
    report << "# gamma_tr=none (no violating grid point below the validity guard)\n";
  } else {
    try {
      const Threshold th = gamma_threshold(config.policy, lower, upper);
      report << "# gamma_tr=" << format_number(th.value) << " bracket=[" << format_number(th.lower) << ','
             << format_number(th.upper) << "]\n";
    } catch (const NoCrossing& e) {
      report << "# gamma_tr=none (" << e.what() << ")\n";
    }
  }
  return sweep_exit(sweep, report);
}

int cmd_eta(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const auto grid = linear_grid(config.gamma_min, config.gamma_max, config.steps);
  const SweepResult sweep = run_sweep(
      grid,
      [&](double gamma) {
        const BGHZState state = build_bghz(gamma, config.policy);
        SweepPoint point = point_from(state, lossy_mermin_lhs(state, config.eta_max));
        try {
          point.extra = eta_threshold(state, 1e-3, config.eta_min, config.eta_max).value;
        } catch (const NoCrossing&) {
          point.extra.reset();
        }
        return point;
      },
      config.threads);
  write_sweep_csv(csv, sweep, "gamma", "eta_tr");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& p = sweep.points[i];
    if (p.error.empty() && p.extra) {
      report << "# eta_tr(gamma=" << format_number(grid[i]) << ")=" << format_number(*p.extra) << '\n';
      break;
    }
  }
  return sweep_exit(sweep, report);
}

int cmd_lossy(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const BGHZState state = build_bghz(config.gamma, config.policy);
  const auto grid = linear_grid(config.eta_min, config.eta_max, config.eta_steps);
  const SweepResult sweep = run_sweep(
      grid, [&](double eta) { return point_from(state, lossy_mermin_lhs(state, eta)); }, config.threads);
  write_sweep_csv(csv, sweep, "eta");
  return sweep_exit(sweep, report);
}

int cmd_witness(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const bool first = config.command == "w1";
  const auto grid = linear_grid(config.gamma_min, config.gamma_max, config.steps);
  std::vector<double> agreement(grid.size(), 0.0);
  const SweepResult sweep = run_sweep(
      grid,
      [&](double gamma) {
        const BGHZState state = prepare(gamma, config);
        const WitnessValue w = first ? witness_w1(state) : witness_w2(state);
        const auto idx = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), gamma) - grid.begin());
        agreement[idx] = std::abs(w.value - w.closed_form);
        return point_from(state, w.value);
      },
      config.threads);
  write_sweep_csv(csv, sweep, "gamma");
  report << "# max |generic - closed form| = "
         << format_number(*std::max_element(agreement.begin(), agreement.end())) << '\n';
  return sweep_exit(sweep, report);
}

int cmd_tensor(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const auto grid = linear_grid(config.gamma_min, config.gamma_max, config.steps);
  std::vector<CorrelationTensor> tensors(grid.size());
  std::vector<std::string> flags(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const BGHZState state = build_bghz(grid[i], config.policy);
        tensors[i] = tensor_t(state);
        if (!state_flags(state).empty()) {
          flags[i] = state_flags(state).front();
        }
      },
      config.threads);
  write_tensor_csv(csv, tensors);
  double worst = 0.0;
  for (const auto& t : tensors) {
    worst = std::max(worst, t.cross_check);
  }
  report << "# max |closed-form t - generic T111| = " << format_number(worst) << '\n';
  bool flagged = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!flags[i].empty()) {
      flagged = true;
      report << "# point " << format_number(grid[i]) << " warning: " << flags[i] << '\n';
    }
  }
  return flagged ? kWarnings : kOk;
}

int cmd_ptable(const RunConfig& config, std::ostream& csv, std::ostream&) {
  build_p_table(config.n, config.l_max).write_csv(csv);
  return kOk;
}

int cmd_state(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const BGHZState state = build_bghz(config.gamma, config.policy);
  report << "# cutoff=" << state.cutoff() << " norm_residual=" << format_number(state.norm_residual()) << '\n';
  write_state_csv(csv, state);
  return state_flags(state).empty() ? kOk : kWarnings;
}

int cmd_dist(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  const TripleDistribution d = photon_distribution({config.n, config.gamma, config.policy});
  report << "# cutoff=" << d.cutoff() << " tail_bound=" << format_number(d.tail_bound) << '\n';
  for (const auto& w : d.warnings) {
    report << "# warning: " << w << '\n';
  }
  write_distribution_csv(csv, d);
  return d.divergent || d.beyond_validity ? kWarnings : kOk;
}

}  // namespace

void RunConfig::validate() const {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    throw InvalidConfiguration("unknown command '" + command + "'");
  }
  policy.validate();
  if (!(gamma >= 0.0)) {
    throw InvalidConfiguration("gamma must be non-negative");
  }
  if (!(gamma_min >= 0.0) || steps < 1 || (steps > 1 && !(gamma_max > gamma_min))) {
    throw InvalidConfiguration("gain grid must be non-empty and increasing from a non-negative start");
  }
  if (n < 1) {
    throw InvalidConfiguration("n must be positive");
  }
  if (!(eta_min >= 0.0 && eta_max <= 1.0 && eta_max > eta_min) || eta_steps < 1) {
    throw InvalidConfiguration("efficiency grid must lie in [0, 1] and be increasing");
  }
  if (l_max < 0 || k_max < 0) {
    throw InvalidConfiguration("l_max and k_max must be non-negative");
  }
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"table1", "pk",     "mermin", "eta",   "lossy", "w1",
                                              "w2",     "tensor", "ptable", "state", "dist"};
  return names;
}

int run(const RunConfig& config, std::ostream& csv, std::ostream& report) {
  config.validate();
  write_policy_comment(csv, label(config), config.policy);
  const std::string& c = config.command;
  if (c == "table1") return cmd_table1(config, csv, report);
  if (c == "pk") return cmd_pk(config, csv, report);
  if (c == "mermin") return cmd_mermin(config, csv, report);
  if (c == "eta") return cmd_eta(config, csv, report);
  if (c == "lossy") return cmd_lossy(config, csv, report);
  if (c == "w1" || c == "w2") return cmd_witness(config, csv, report);
  if (c == "tensor") return cmd_tensor(config, csv, report);
  if (c == "ptable") return cmd_ptable(config, csv, report);
  if (c == "state") return cmd_state(config, csv, report);
  return cmd_dist(config, csv, report);
}

}  // namespace bghz::cli
