#include "bghz/nonclassicality.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include <gmpxx.h>

#include "bghz/errors.hpp"

namespace bghz {

namespace {

constexpr double kClassicalBound = 2.0;

// w_j = sum_{ia + ib = j} C(ka, ia) C(kb, ib) (ia - ib) / j for j = 0 ... ka + kb,
// built exactly and rounded once.
const std::vector<double>& loss_weights(int ka, int kb) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<double>> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace({ka, kb});
  if (!inserted) {
    return it->second;
  }
  const int total = ka + kb;
  std::vector<mpq_class> exact(static_cast<std::size_t>(total) + 1, mpq_class(0));
  mpz_class ca, cb;
  for (int ia = 0; ia <= ka; ++ia) {
    mpz_bin_uiui(ca.get_mpz_t(), static_cast<unsigned long>(ka), static_cast<unsigned long>(ia));
    for (int ib = 0; ib <= kb; ++ib) {
      if (ia + ib == 0) {
        continue;
      }
      mpz_bin_uiui(cb.get_mpz_t(), static_cast<unsigned long>(kb), static_cast<unsigned long>(ib));
      exact[static_cast<std::size_t>(ia + ib)] += mpq_class(ca * cb * (ia - ib), ia + ib);
    }
  }
  auto& weights = it->second;
  weights.reserve(exact.size());
  for (auto& w : exact) {
    w.canonicalize();
    weights.push_back(w.get_d());
  }
  return weights;
}

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw InvalidConfiguration("detector efficiency must lie in [0, 1], got " + std::to_string(eta));
  }
}

// |E(1,1,1) - E(1,2,2) - E(2,1,2) - E(2,2,1)| for the two per-party observables.
double mermin_combination(const BGHZState& state, const LocalObservable& first, const LocalObservable& second) {
  const int K = state.cutoff();
  const ShellOperator x = shell_operator(first, 2 * K, K);
  const ShellOperator y = shell_operator(second, 2 * K, K);
  return std::abs(contract(state, x, x, x) - contract(state, x, y, y) - contract(state, y, x, y) -
                  contract(state, y, y, x));
}

BGHZState prepared_state(double gamma, bool projected, const NumericPolicy& policy) {
  BGHZState state = build_bghz(gamma, policy);
  return projected ? project_out_vacuum(state) : state;
}

// Sum over the non-vacuum support of |amp|^2 ((q - m) / (q + m))^2.
double s3_second_moment(const BGHZState& state) {
  double total = 0.0;
  for (int q = 0; q <= state.cutoff(); ++q) {
    for (int m = 0; m <= state.cutoff(); ++m) {
      if (q + m == 0) {
        continue;
      }
      const double d = static_cast<double>(q - m) / static_cast<double>(q + m);
      total += std::norm(state.amp(q, m)) * d * d;
    }
  }
  return total;
}

template <typename Fn>
Threshold bisect(Fn above, double lo, double hi, double tol, int evaluations) {
  // Invariant: above(lo) != above(hi).
  const bool lo_above = above(lo);
  ++evaluations;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const bool mid_above = above(mid);
    ++evaluations;
    if (mid_above == lo_above) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), lo, hi, evaluations};
}

}  // namespace

void LossModel::validate() const { check_eta(eta); }

double per_party_loss_factor(int ka, int kb, double eta) {
  if (ka < 0 || kb < 0) {
    throw InvalidConfiguration("photon numbers must be non-negative");
  }
  check_eta(eta);
  const int total = ka + kb;
  const double lost = 1.0 - eta;
  double value = -std::pow(lost, total);
  if (total == 0) {
    return value;
  }
  const auto& weights = loss_weights(ka, kb);
  for (int j = 1; j <= total; ++j) {
    const double w = weights[static_cast<std::size_t>(j)];
    if (w != 0.0) {
      value += w * std::pow(eta, j) * std::pow(lost, total - j);
    }
  }
  return value;
}

LocalObservable lossy_observable(int basis, double eta) {
  check_eta(eta);
  MeasurementBasis::of(basis);
  return {basis, [eta](int ka, int kb) { return per_party_loss_factor(ka, kb, eta); }};
}

MerminValue mermin(const BGHZState& state) {
  MerminValue out;
  out.gamma = state.gamma();
  out.value = mermin_combination(state, local_observable(StokesOp::S1Primed), local_observable(StokesOp::S2Primed));
  out.t = state.coefficients.empty() ? stokes_expectation(state, {StokesOp::S1, StokesOp::S1, StokesOp::S1})
                                     : closed_form_t(state);
  out.p_vac = state.vacuum_probability();
  out.reduced = std::abs(4.0 * out.t + 2.0 * out.p_vac);
  out.beyond_validity = state.beyond_validity;
  out.warnings = state.warnings;
  return out;
}

MerminValue mermin(double gamma, const NumericPolicy& policy) { return mermin(build_bghz(gamma, policy)); }

double mermin_lhs(double gamma, const NumericPolicy& policy) { return mermin(gamma, policy).value; }

double lossy_mermin_lhs(const BGHZState& state, double eta) {
  return mermin_combination(state, lossy_observable(1, eta), lossy_observable(2, eta));
}

double lossy_mermin_lhs(double gamma, double eta, const NumericPolicy& policy) {
  return lossy_mermin_lhs(build_bghz(gamma, policy), eta);
}

Threshold gamma_threshold(const NumericPolicy& policy, double lower, double upper, double tol) {
  if (!(lower >= 0.0 && upper > lower && tol > 0.0)) {
    throw InvalidConfiguration("gamma threshold needs 0 <= lower < upper and a positive tolerance");
  }
  auto violated = [&](double gamma) { return mermin_lhs(gamma, policy) > kClassicalBound; };
  int evaluations = 1;
  if (!violated(lower)) {
    throw NoCrossing("Mermin LHS does not exceed 2 at gamma=" + std::to_string(lower));
  }
  const double step = 0.05;
  double prev = lower;
  while (prev < upper) {
    const double next = std::min(upper, prev + step);
    bool next_violated = true;
    try {
      next_violated = violated(next);
    } catch (const DivergenceError&) {
      break;
    }
    ++evaluations;
    if (!next_violated) {
      return bisect(violated, prev, next, tol, evaluations);
    }
    prev = next;
  }
  throw NoCrossing("Mermin LHS stays above 2 on [" + std::to_string(lower) + ", " + std::to_string(upper) + "]");
}

Threshold eta_threshold(const BGHZState& state, double tol, double lower, double upper) {
  if (!(tol > 0.0)) {
    throw InvalidConfiguration("eta threshold tolerance must be positive");
  }
  check_eta(lower);
  check_eta(upper);
  if (!(upper > lower)) {
    throw InvalidConfiguration("eta search range is empty");
  }
  auto violated = [&](double eta) { return lossy_mermin_lhs(state, eta) > kClassicalBound; };
  int evaluations = 1;
  if (!violated(upper)) {
    throw NoCrossing("not violated at eta=" + std::to_string(upper) + " for gamma=" + std::to_string(state.gamma()));
  }
  const double step = 0.05;
  double prev = upper;
  while (prev > lower) {
    const double next = std::max(lower, prev - step);
    ++evaluations;
    if (!violated(next)) {
      return bisect(violated, next, prev, tol, evaluations);
    }
    prev = next;
  }
  throw NoCrossing("lossy Mermin LHS exceeds 2 down to eta=" + std::to_string(lower));
}

Threshold eta_threshold(double gamma, const NumericPolicy& policy, double tol) {
  return eta_threshold(build_bghz(gamma, policy), tol);
}

WitnessValue witness_w1(const BGHZState& state) {
  using enum StokesOp;
  WitnessValue out;
  out.gamma = state.gamma();
  out.projected = state.vacuum_removed;
  out.value = 1.5 * stokes_expectation(state, {S0, S0, S0}) - stokes_expectation(state, {S1, S1, S1}) -
              0.5 * (stokes_expectation(state, {S3, S3, S0}) + stokes_expectation(state, {S0, S3, S3}) +
                     stokes_expectation(state, {S3, S0, S3}));
  const double t = state.coefficients.empty() ? stokes_expectation(state, {S1, S1, S1}) : closed_form_t(state);
  out.closed_form = 1.5 * (state.norm() - state.vacuum_probability()) - t - 1.5 * s3_second_moment(state);
  out.beyond_validity = state.beyond_validity;
  out.warnings = state.warnings;
  return out;
}

WitnessValue witness_w1(double gamma, bool projected, const NumericPolicy& policy) {
  return witness_w1(prepared_state(gamma, projected, policy));
}

WitnessValue witness_w2(const BGHZState& state) {
  using enum StokesOp;
  WitnessValue out;
  out.gamma = state.gamma();
  out.projected = state.vacuum_removed;
  out.value = stokes_expectation(state, {S1, S2, S2}) + stokes_expectation(state, {S2, S1, S2}) +
              stokes_expectation(state, {S2, S2, S1}) - stokes_expectation(state, {S1, S1, S1}) +
              stokes_expectation(state, {Pi, Pi, Pi});
  const double t = state.coefficients.empty() ? stokes_expectation(state, {S1, S1, S1}) : closed_form_t(state);
  out.closed_form = -4.0 * t + state.norm() - state.vacuum_probability();
  out.beyond_validity = state.beyond_validity;
  out.warnings = state.warnings;
  return out;
}

WitnessValue witness_w2(double gamma, bool projected, const NumericPolicy& policy) {
  return witness_w2(prepared_state(gamma, projected, policy));
}

double mermin_operator(const JointFockState& state) {
  using enum StokesOp;
  return stokes_expectation(state, {S1, S2, S2}) + stokes_expectation(state, {S2, S1, S2}) +
         stokes_expectation(state, {S2, S2, S1}) - stokes_expectation(state, {S1, S1, S1});
}

bool SweepResult::all_failed() const {
  return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return !p.error.empty(); });
}

bool SweepResult::any_warning() const {
  return std::any_of(points.begin(), points.end(),
                     [](const SweepPoint& p) { return !p.warnings.empty() || !p.converged; });
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, count)));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& thread : pool) {
    thread.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

SweepResult run_sweep(const std::vector<double>& axis, const std::function<SweepPoint(double)>& point,
                      unsigned threads) {
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw InvalidConfiguration("sweep axis must be strictly increasing");
    }
  }
  SweepResult result;
  result.axis = axis;
  result.points.resize(axis.size());
  parallel_for(
      axis.size(),
      [&](std::size_t i) {
        SweepPoint& slot = result.points[i];
        try {
          slot = point(axis[i]);
        } catch (const std::exception& e) {
          slot = SweepPoint{};
          slot.value = std::numeric_limits<double>::quiet_NaN();
          slot.converged = false;
          slot.error = e.what();
        }
      },
      threads);
  return result;
}

std::vector<double> linear_grid(double lo, double hi, int steps) {
  if (steps < 1) {
    throw InvalidConfiguration("grid needs at least one point");
  }
  if (steps == 1) {
    return {lo};
  }
  if (!(hi > lo)) {
    throw InvalidConfiguration("grid upper end must exceed the lower end");
  }
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    // Snapped to 12 decimals so that e.g. 0.05 + 7 * 0.05 prints as 0.4.
    const double raw = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    grid[static_cast<std::size_t>(i)] = std::round(raw * 1e12) / 1e12;
  }
  return grid;
}

}  // namespace bghz
