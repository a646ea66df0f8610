#include "bghz/pade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "bghz/errors.hpp"

namespace bghz {

namespace {

const Rational& coeff_or_zero(std::span<const Rational> series, int index) {
  static const Rational zero(0);
  if (index < 0 || index >= static_cast<int>(series.size())) {
    return zero;
  }
  return series[static_cast<std::size_t>(index)];
}

// Solves the square system in place; nullopt when singular.
std::optional<std::vector<Rational>> solve_exact(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) {
      ++pivot;
    }
    if (pivot == n) {
      return std::nullopt;
    }
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      if (a[row][col] == 0) {
        continue;
      }
      const Rational factor = a[row][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) {
        a[row][c] -= factor * a[col][c];
      }
      b[row] -= factor * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Rational acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) {
      acc -= a[i][c] * x[c];
    }
    x[i] = acc / a[i][i];
  }
  return x;
}

std::optional<PadeApproximant> try_pade(std::span<const Rational> series, int N, int M) {
  PadeApproximant out;
  out.N = N;
  out.M = M;
  out.den.assign(static_cast<std::size_t>(M) + 1, Rational(0));
  out.den[0] = 1;
  if (M > 0) {
    // sum_{m=1}^{M} Y_m c_{N+j-m} = -c_{N+j}, j = 1..M
    std::vector<std::vector<Rational>> a(static_cast<std::size_t>(M), std::vector<Rational>(static_cast<std::size_t>(M)));
    std::vector<Rational> b(static_cast<std::size_t>(M));
    for (int j = 1; j <= M; ++j) {
      for (int m = 1; m <= M; ++m) {
        a[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(m - 1)] = coeff_or_zero(series, N + j - m);
      }
      b[static_cast<std::size_t>(j - 1)] = -coeff_or_zero(series, N + j);
    }
    auto y = solve_exact(std::move(a), std::move(b));
    if (!y) {
      return std::nullopt;
    }
    std::copy(y->begin(), y->end(), out.den.begin() + 1);
  }
  out.num.assign(static_cast<std::size_t>(N) + 1, Rational(0));
  for (int i = 0; i <= N; ++i) {
    Rational acc(0);
    for (int m = 0; m <= std::min(i, M); ++m) {
      acc += out.den[static_cast<std::size_t>(m)] * coeff_or_zero(series, i - m);
    }
    out.num[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

// Horner with a running bound sum |coef| |x|^i for the pole test.
void horner(const std::vector<Rational>& coeffs, const Real& x, mpfr_prec_t bits, Real& value, Real& scale) {
  value = Real(bits);
  scale = Real(bits);
  const Real ax = abs(x);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    const Real c(*it, bits);
    value = value * x + c;
    scale = scale * ax + abs(c);
  }
}

bool near_pole(const Real& den, const Real& scale, mpfr_prec_t bits) {
  return abs(den) < pow2(-static_cast<long>(bits / 2), bits) * scale;
}

Real quiet_nan(mpfr_prec_t bits) {
  Real out(bits);
  mpfr_set_nan(out.get());
  return out;
}

}  // namespace

PadeApproximant build_pade(std::span<const Rational> series, int N, int M) {
  if (N < 0 || M < 0) {
    throw InvalidConfiguration("Pade degrees must be non-negative");
  }
  if (static_cast<int>(series.size()) < N + M + 1) {
    throw InvalidConfiguration("Pade [" + std::to_string(N) + "/" + std::to_string(M) + "] needs " +
                               std::to_string(N + M + 1) + " coefficients, got " + std::to_string(series.size()));
  }
  int n = N;
  int m = M;
  while (true) {
    if (auto approx = try_pade(series, n, m)) {
      approx->requested_N = N;
      approx->requested_M = M;
      return *std::move(approx);
    }
    if (m == 0) {
      // Unreachable: M = 0 never builds a linear system.
      throw DivergenceError("degenerate series");
    }
    n = std::max(n - 1, 0);
    --m;
  }
}

Real evaluate(const PadeApproximant& approx, const Real& x, mpfr_prec_t bits) {
  if (bits < 64) {
    throw InvalidConfiguration("evaluation precision must be at least 64 bits");
  }
  Real num(bits), num_scale(bits), den(bits), den_scale(bits);
  horner(approx.num, x, bits, num, num_scale);
  horner(approx.den, x, bits, den, den_scale);
  if (near_pole(den, den_scale, bits)) {
    throw PoleProximity("denominator of [" + std::to_string(approx.N) + "/" + std::to_string(approx.M) +
                        "] vanishes at x = " + x.to_string(12));
  }
  return num / den;
}

namespace {

// Continued-fraction coefficients a_1, a_2, ... from the quotient-difference
// table at the given precision:
//   q_1^(k)     = c_{k+1} / c_k
//   e_j^(k)     = q_j^(k+1) - q_j^(k) + e_{j-1}^(k+1)
//   q_{j+1}^(k) = q_j^(k+1) e_j^(k+1) / e_j^(k)
// with a_{2j-1} = q_j^(0) and a_{2j} = e_j^(0). Stops early at a zero divisor.
std::vector<Real> quotient_difference(std::span<const Rational> series, int max_order, mpfr_prec_t bits) {
  std::vector<Real> a;
  const std::size_t length = series.size();
  std::vector<Real> q;
  q.reserve(length);
  for (std::size_t k = 0; k + 1 < length; ++k) {
    if (series[k] == 0) {
      return a;
    }
    q.emplace_back(Rational(series[k + 1] / series[k]), bits);
  }
  std::vector<Real> e(q.size() + 1, Real(bits));
  for (int j = 1; j <= max_order; ++j) {
    a.push_back(q.front());
    std::vector<Real> next_e;
    next_e.reserve(q.size() - 1);
    for (std::size_t k = 0; k + 1 < q.size(); ++k) {
      next_e.push_back(q[k + 1] - q[k] + e[k + 1]);
    }
    e = std::move(next_e);
    a.push_back(e.front());
    if (j == max_order) {
      break;
    }
    std::vector<Real> next_q;
    next_q.reserve(e.size() - 1);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
      if (e[k].is_zero()) {
        return a;
      }
      next_q.push_back(q[k + 1] * e[k + 1] / e[k]);
    }
    q = std::move(next_q);
  }
  return a;
}

}  // namespace

DiagonalSequence::DiagonalSequence(std::span<const Rational> series, int max_order)
    : series_(series.begin(), series.end()), max_order_(max_order) {
  if (max_order < 0) {
    throw InvalidConfiguration("max_order must be non-negative");
  }
  const int needed = 2 * max_order + 1;
  if (static_cast<int>(series_.size()) < needed) {
    throw InvalidConfiguration("diagonal sequence to order " + std::to_string(max_order) + " needs " +
                               std::to_string(needed) + " coefficients, got " + std::to_string(series_.size()));
  }
  series_.resize(static_cast<std::size_t>(needed));
}

const DiagonalSequence::ContinuedFraction& DiagonalSequence::continued_fraction(mpfr_prec_t bits) const {
  std::lock_guard lock(cache_mutex_);
  auto it = cache_.find(bits);
  if (it != cache_.end()) {
    return it->second;
  }
  ContinuedFraction cf;
  cf.coeffs.emplace_back(series_.front(), bits);
  if (max_order_ > 0) {
    const mpfr_prec_t work = std::max<mpfr_prec_t>(4 * bits, 1024);
    const auto low = quotient_difference(series_, max_order_, work);
    const auto high = quotient_difference(series_, max_order_, 2 * work);
    const Real tolerance = pow2(-static_cast<long>(bits) - 16, bits);
    std::size_t accepted = 0;
    while (accepted < low.size() && accepted < high.size()) {
      const Real& lo = low[accepted];
      const Real& hi = high[accepted];
      const bool agree = hi.is_zero() ? lo.is_zero() : abs(lo - hi) <= tolerance * abs(hi);
      if (!agree) {
        break;
      }
      cf.coeffs.emplace_back(Real(bits) + hi);
      ++accepted;
    }
    // A zero a_i ends the fraction: the series is rational and later orders
    // need the exact step-down.
    for (std::size_t i = 1; i < cf.coeffs.size(); ++i) {
      if (cf.coeffs[i].is_zero()) {
        accepted = i - 1;
        cf.coeffs.resize(i);
        break;
      }
    }
    cf.fallback_from = static_cast<int>(accepted / 2) + 1;
  } else {
    cf.fallback_from = 1;
  }
  return cache_.emplace(bits, std::move(cf)).first->second;
}

int DiagonalSequence::fallback_from(mpfr_prec_t bits) const { return continued_fraction(bits).fallback_from; }

PadeApproximant DiagonalSequence::approximant(int order) const {
  if (order < 0 || order > max_order_) {
    throw InvalidConfiguration("order " + std::to_string(order) + " outside the diagonal sequence");
  }
  return build_pade(series_, order, order);
}

std::vector<Real> DiagonalSequence::evaluate_all(const Real& x, mpfr_prec_t bits) const {
  if (bits < 64) {
    throw InvalidConfiguration("evaluation precision must be at least 64 bits");
  }
  const ContinuedFraction& cf = continued_fraction(bits);
  std::vector<Real> values;
  values.reserve(static_cast<std::size_t>(max_order_));
  const int cf_orders = std::min(max_order_, cf.fallback_from - 1);
  if (cf_orders > 0) {
    const Real ax = abs(x);
    // Convergents P_i / Q_i with P_i = P_{i-1} + alpha_i P_{i-2}, alpha_1 = c_0,
    // alpha_{i+1} = -a_i x; [N/N] is convergent 2N + 1. The qs sequence bounds
    // sum |coef| |x|^i of Q for the pole test. Start from (P_0, P_1) = (0, c_0)
    // and (Q_0, Q_1) = (1, 1).
    Real p_prev(0.0, bits), p_cur(cf.coeffs.front());
    Real q_prev(1.0, bits), q_cur(1.0, bits);
    Real qs_prev(1.0, bits), qs_cur(1.0, bits);
    for (int i = 0; i < 2 * cf_orders; ++i) {
      const Real& a = cf.coeffs[static_cast<std::size_t>(i) + 1];
      const Real alpha = -(a * x);
      Real p_next = p_cur + alpha * p_prev;
      Real q_next = q_cur + alpha * q_prev;
      Real qs_next = qs_cur + abs(a) * ax * qs_prev;
      p_prev = std::move(p_cur);
      p_cur = std::move(p_next);
      q_prev = std::move(q_cur);
      q_cur = std::move(q_next);
      qs_prev = std::move(qs_cur);
      qs_cur = std::move(qs_next);
      if (i % 2 == 1) {
        values.push_back(near_pole(q_cur, qs_cur, bits) ? quiet_nan(bits) : p_cur / q_cur);
      }
    }
  }
  for (int order = cf_orders + 1; order <= max_order_; ++order) {
    try {
      values.push_back(evaluate(approximant(order), x, bits));
    } catch (const PoleProximity&) {
      values.push_back(quiet_nan(bits));
    }
  }
  return values;
}

ResummationResult resum(const DiagonalSequence& sequence, const Real& x, const ResumOptions& options,
                        const Real* scale) {
  if (options.max_order < 1 || options.max_order > sequence.max_order()) {
    throw InvalidConfiguration("resummation order " + std::to_string(options.max_order) +
                               " outside the available diagonal sequence");
  }
  ResummationResult result;
  const Real leading(sequence.leading(), options.bits);
  if (x.is_zero()) {
    result.value = leading;
    result.converged = true;
    result.order_used = 0;
    return result;
  }
  const auto values = sequence.evaluate_all(x, options.bits);
  const Real one(1.0, options.bits);
  const Real unit_scale(1.0, options.bits);
  const Real& s = scale ? *scale : unit_scale;
  const auto close = [&](const Real& a, const Real& b) {
    if (mpfr_nan_p(a.get()) || mpfr_nan_p(b.get())) {
      return false;
    }
    const Real sa = abs(s * a);
    const Real bound = Real(options.tol, options.bits) * (sa > one ? sa : one);
    return abs(s * (a - b)) <= bound;
  };
  int hits = 0;
  for (int order = 1; order <= options.max_order; ++order) {
    const Real& v = values[static_cast<std::size_t>(order) - 1];
    result.diagnostics.push_back(v);
    const Real& previous = order == 1 ? leading : values[static_cast<std::size_t>(order) - 2];
    hits = close(v, previous) ? hits + 1 : 0;
    result.order_used = order;
    if (hits >= 2) {
      break;
    }
  }
  result.value = result.diagnostics.back();
  result.converged = hits >= 1 && !mpfr_nan_p(result.value.get());
  return result;
}

ResummationResult diagonal_resum(std::span<const Rational> series, const Real& x, const ResumOptions& options) {
  if (static_cast<int>(series.size()) < 2 * options.max_order + 1) {
    throw InvalidConfiguration("diagonal resummation to order " + std::to_string(options.max_order) + " needs " +
                               std::to_string(2 * options.max_order + 1) + " coefficients");
  }
  const DiagonalSequence sequence(series, options.max_order);
  return resum(sequence, x, options);
}

}  // namespace bghz
