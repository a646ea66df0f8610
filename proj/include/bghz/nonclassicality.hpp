#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bghz/state.hpp"
#include "bghz/stokes.hpp"

namespace bghz {

/// Identical detector efficiency for all six detectors.
struct LossModel {
  double eta = 1.0;
  void validate() const;
};

/// Expected local outcome of a normalized Stokes measurement when each of
/// the ka + kb photons is detected independently with probability eta. The
/// no-click outcome counts as -1.
double per_party_loss_factor(int ka, int kb, double eta);

/// per_party_loss_factor as a diagonal observable in the given basis.
LocalObservable lossy_observable(int basis, double eta);

struct MerminValue {
  double gamma = 0.0;
  double value = 0.0;     // |<S1'S1'S1'> - <S1'S2'S2'> - <S2'S1'S2'> - <S2'S2'S1'>|
  double reduced = 0.0;   // |4t + 2 p_vac|
  double t = 0.0;
  double p_vac = 0.0;
  bool beyond_validity = false;
  std::vector<std::string> warnings;

  double agreement() const { return std::abs(value - reduced); }
};

MerminValue mermin(const BGHZState& state);
MerminValue mermin(double gamma, const NumericPolicy& policy = {});
double mermin_lhs(double gamma, const NumericPolicy& policy = {});

double lossy_mermin_lhs(const BGHZState& state, double eta);
double lossy_mermin_lhs(double gamma, double eta, const NumericPolicy& policy = {});

struct Threshold {
  double value = 0.0;
  double lower = 0.0;  // bracket that contains the crossing
  double upper = 0.0;
  int evaluations = 0;
};

/// Largest-violation boundary in gamma: the point where mermin_lhs falls to
/// 2, searched upward from `lower` on a coarse grid and then bisected.
/// Throws NoCrossing when the LHS stays above 2 on the whole range.
Threshold gamma_threshold(const NumericPolicy& policy = {}, double lower = 0.05, double upper = 0.9,
                          double tol = 1e-3);

/// Efficiency below which the lossy LHS no longer exceeds 2, searched
/// downward from `upper`. Throws NoCrossing when the state does not violate
/// the inequality at `upper`.
Threshold eta_threshold(const BGHZState& state, double tol = 1e-3, double lower = 0.0, double upper = 1.0);
Threshold eta_threshold(double gamma, const NumericPolicy& policy = {}, double tol = 1e-3);

struct WitnessValue {
  double gamma = 0.0;
  double value = 0.0;        // generic evaluator
  double closed_form = 0.0;  // from t, p_vac and the S3 moments
  bool projected = false;
  bool beyond_validity = false;
  std::vector<std::string> warnings;

  bool entangled() const { return value < 0.0; }
};

/// 3/2 <S0S0S0> - <S1S1S1> - 1/2 (<S3S3S0> + <S0S3S3> + <S3S0S3>).
WitnessValue witness_w1(const BGHZState& state);
WitnessValue witness_w1(double gamma, bool projected, const NumericPolicy& policy = {});

/// <M> + <Pi Pi Pi> with M = S1S2S2 + S2S1S2 + S2S2S1 - S1S1S1.
WitnessValue witness_w2(const BGHZState& state);
WitnessValue witness_w2(double gamma, bool projected, const NumericPolicy& policy = {});

/// Expectation of M alone, for any joint state.
double mermin_operator(const JointFockState& state);

struct SweepPoint {
  double value = 0.0;
  std::optional<double> extra;  // e.g. eta threshold at this gain
  bool converged = true;
  std::string error;            // non-empty when the point failed
  std::vector<std::string> warnings;
};

struct SweepResult {
  std::vector<double> axis;
  std::vector<SweepPoint> points;
  std::optional<double> threshold;

  bool all_failed() const;
  bool any_warning() const;
};

/// Runs body(0) ... body(count - 1) on up to `threads` workers (0 uses the
/// hardware concurrency). The first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

/// Evaluates `point` on every axis value on a worker pool; results are kept
/// in axis order. Exceptions become failed points.
SweepResult run_sweep(const std::vector<double>& axis, const std::function<SweepPoint(double)>& point,
                      unsigned threads = 0);

/// Evenly spaced grid of `steps` points from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, int steps);

}  // namespace bghz
