#pragma once

#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "bghz/real.hpp"
#include "bghz/series_core.hpp"

namespace bghz {

/// Rational function num(x)/den(x) whose Taylor expansion reproduces a
/// series through order N + M. den[0] is always 1.
struct PadeApproximant {
  int N = 0;
  int M = 0;
  std::vector<Rational> num;
  std::vector<Rational> den;
  // Order originally asked for; differs from (N, M) after a singular-system step-down.
  int requested_N = 0;
  int requested_M = 0;

  bool reduced() const { return N != requested_N || M != requested_M; }
};

/// Builds [N/M] from c_0..c_{N+M} by exact Gaussian elimination on the
/// denominator system. A singular system steps down to [N-1/M-1] (never
/// below [0/0], which is c_0 itself).
PadeApproximant build_pade(std::span<const Rational> series, int N, int M);

/// Horner evaluation of num(x)/den(x) at the given binary precision.
/// Throws PoleProximity when |den(x)| < 2^(-bits/2) * sum_m |Y_m| |x|^m.
Real evaluate(const PadeApproximant& approx, const Real& x, mpfr_prec_t bits);

/// Diagonal sequence [1/1], [2/2], ... of one exact series.
///
/// The approximants are the even convergents of the corresponding continued
/// fraction c_0 / (1 - a_1 x / (1 - a_2 x / (1 - ...))). The a_i come from
/// the quotient-difference table, run on the exact coefficients at four
/// times the evaluation precision and accepted only where a second pass at
/// eight times agrees to the evaluation precision. Orders past a breakdown
/// (zero divisor or disagreement) are built exactly by build_pade instead.
/// Nothing here depends on the evaluation point, so one sequence serves a
/// whole sweep. Thread-safe.
class DiagonalSequence {
 public:
  DiagonalSequence(std::span<const Rational> series, int max_order);

  int max_order() const { return max_order_; }
  const Rational& leading() const { return series_.front(); }
  std::span<const Rational> series() const { return series_; }

  /// Orders >= this value are evaluated from build_pade rather than the
  /// continued fraction at the given precision.
  int fallback_from(mpfr_prec_t bits) const;

  /// Exact [order/order], built by Gaussian elimination.
  PadeApproximant approximant(int order) const;

  /// Values of [1/1] ... [max_order/max_order] at x. Orders whose denominator
  /// vanishes to working precision are returned as NaN.
  std::vector<Real> evaluate_all(const Real& x, mpfr_prec_t bits) const;

 private:
  struct ContinuedFraction {
    std::vector<Real> coeffs;  // c_0, a_1, a_2, ...
    int fallback_from = 0;
  };
  const ContinuedFraction& continued_fraction(mpfr_prec_t bits) const;

  std::vector<Rational> series_;
  int max_order_;

  mutable std::mutex cache_mutex_;
  mutable std::map<mpfr_prec_t, ContinuedFraction> cache_;
};

struct ResummationResult {
  Real value;
  bool converged = false;
  int order_used = 0;
  // Successive diagonal values [1/1], [2/2], ... up to order_used.
  std::vector<Real> diagnostics;
};

struct ResumOptions {
  int max_order = 40;
  double tol = 1e-10;
  mpfr_prec_t bits = 256;
};

/// Evaluates the diagonal sequence at x and stops once two successive
/// differences satisfy |v_N - v_{N-1}| <= tol * max(1, |v_N|). The test is
/// applied to scale * v; value and diagnostics are reported unscaled.
ResummationResult resum(const DiagonalSequence& sequence, const Real& x, const ResumOptions& options,
                        const Real* scale = nullptr);

/// Convenience wrapper: builds the sequence from 2 * max_order + 1 terms.
ResummationResult diagonal_resum(std::span<const Rational> series, const Real& x,
                                 const ResumOptions& options = {});

}  // namespace bghz
