#pragma once

#include <complex>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bghz/pade.hpp"
#include "bghz/series_core.hpp"

namespace bghz {

/// How a truncated three-beam state is normalized. Unitary keeps the
/// resummed amplitudes as they are, so the weight beyond the cutoff stays
/// missing; Retained rescales the kept amplitudes to unit norm.
enum class StateNormalization { Unitary, Retained };

/// Numeric policy shared by every resummed quantity.
struct NumericPolicy {
  int pade_order = 40;       // highest diagonal approximant [N/N]
  double tol = 1e-10;        // convergence tolerance of the diagonal sequence
  mpfr_prec_t bits = 256;    // evaluation precision
  int cutoff = -1;           // maximum emission order K; negative selects it automatically
  int max_cutoff = 60;       // cap for the automatic cutoff
  double tail_target = 1e-10;
  double divergence_guard = 0.9;
  StateNormalization normalization = StateNormalization::Unitary;

  std::string describe() const;
  void validate() const;
};

/// Resummed amplitude of (A_n^dagger)^k |vacuum>.
struct Coefficient {
  int k = 0;
  std::complex<long double> value;       // C_k, including the i^k phase
  std::complex<double> fock_amplitude;   // C_k (k!)^(n/2), amplitude of the normalized Fock ket
  bool converged = false;
  int order_used = 0;
};

/// Exact series and diagonal Pade sequences for one beam count. Both depend
/// only on (n, pade_order), so one engine serves every gain value. Sequences
/// are built on first use; lookups are thread-safe.
class CoefficientEngine {
 public:
  CoefficientEngine(int n, int pade_order, int max_k = 60);

  int n() const { return n_; }
  int pade_order() const { return pade_order_; }
  int max_k() const { return max_k_; }

  const DiagonalSequence& sequence(int k) const;
  Coefficient coefficient(int k, double gamma, const NumericPolicy& policy) const;

  /// Process-wide engine for (n, pade_order, max_k).
  static std::shared_ptr<const CoefficientEngine> shared(int n, int pade_order, int max_k = 60);

 private:
  int n_;
  int pade_order_;
  int max_k_;
  RecurrenceTable table_;
  mutable std::mutex mutex_;
  mutable std::deque<std::unique_ptr<DiagonalSequence>> sequences_;
};

/// C_k = (i gamma)^k * [diagonal resummation of c_series(k, n) at u = -gamma^2].
Coefficient resummed_coefficient(int n, int k, double gamma, const NumericPolicy& policy = {});

struct BrightStateSpec {
  int n = 3;
  double gamma = 0.8;
  NumericPolicy policy;

  // Set when gamma reaches the divergence guard for n >= 3.
  bool beyond_validity() const { return n >= 3 && gamma >= policy.divergence_guard; }
};

/// Photon-number (emission order) distribution p(k) = |C_k|^2 (k!)^n. Under
/// StateNormalization::Retained the weights are divided by their sum plus
/// the tail estimate.
struct TripleDistribution {
  int n = 0;
  double gamma = 0.0;
  std::vector<double> probs;       // p(0) ... p(K)
  double tail_bound = 0.0;         // estimated mass beyond K, on the same scale as probs
  double mean = 0.0;               // sum_k k p(k) over the retained orders
  double raw_total = 0.0;          // sum of unnormalized |C_k|^2 (k!)^n over k <= K
  std::vector<Coefficient> coefficients;
  bool truncated_by_resummation = false;  // automatic cutoff stopped at a non-converged order
  bool divergent = false;          // p(k) k^2 non-decreasing over the last five orders
  bool beyond_validity = false;
  std::vector<std::string> warnings;

  int cutoff() const { return static_cast<int>(probs.size()) - 1; }
};

/// Throws DivergenceError when an explicitly requested cutoff contains a
/// non-converged coefficient.
TripleDistribution photon_distribution(const BrightStateSpec& spec);

/// Estimated probability beyond the last entry of an unnormalized,
/// eventually decreasing sequence: the larger of a geometric and a power-law
/// extrapolation of the final two terms. Infinite when neither decays.
double tail_estimate(const std::vector<double>& raw);

/// Three-beam state sum_{q,m} amp(q,m) |q,m>|q,m>|q,m>, where each party
/// holds q photons in mode a and m in mode b.
class BGHZState {
 public:
  BGHZState(double gamma, int cutoff, std::vector<std::complex<double>> amps, double norm_residual);

  double gamma() const { return gamma_; }
  int cutoff() const { return cutoff_; }
  double norm_residual() const { return norm_residual_; }

  /// Zero outside 0 <= q, m <= cutoff.
  std::complex<double> amp(int q, int m) const;
  double vacuum_probability() const { return std::norm(amp(0, 0)); }
  double norm() const;

  bool vacuum_removed = false;
  bool beyond_validity = false;
  bool divergent = false;  // photon-number divergence flag of the distribution
  std::vector<std::string> warnings;
  // Three-beam coefficients C_0 ... C_K the amplitudes were built from; empty
  // for states assembled by hand.
  std::vector<Coefficient> coefficients;

 private:
  double gamma_;
  int cutoff_;
  std::vector<std::complex<double>> amps_;  // row-major (q, m)
  double norm_residual_;
};

/// amp(q, m) = C_q C_m (q! m!)^(3/2), rescaled to unit norm only under
/// StateNormalization::Retained. The cutoff follows the three-beam photon
/// distribution at this gain.
BGHZState build_bghz(double gamma, const NumericPolicy& policy = {});

/// Removes the all-vacuum component and divides by 1 - p_vac, the non-vacuum
/// weight of a unit-norm state. On this state family a local vacuum in any
/// party implies the global vacuum, so this equals the product of local
/// non-vacuum projectors.
BGHZState project_out_vacuum(const BGHZState& state);

void write_distribution_csv(std::ostream& out, const TripleDistribution& dist);
void write_state_csv(std::ostream& out, const BGHZState& state);

}  // namespace bghz
