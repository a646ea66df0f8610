#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bghz/errors.hpp"
#include "bghz/pade.hpp"
#include "oracles.hpp"

using namespace bghz;

namespace {

std::vector<Rational> exp_series(int terms) {
  std::vector<Rational> out;
  Rational c(1);
  for (int j = 0; j < terms; ++j) {
    out.push_back(c);
    c /= j + 1;
  }
  return out;
}

std::vector<Rational> euler_series(int terms) {
  std::vector<Rational> out;
  Integer f(1);
  for (int j = 0; j < terms; ++j) {
    out.emplace_back(j % 2 == 0 ? f : Integer(-f));
    f *= j + 1;
  }
  return out;
}

Rational random_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-20, 20);
  std::uniform_int_distribution<int> den(1, 9);
  Rational r(num(rng), den(rng));
  r.canonicalize();
  return r;
}

// Taylor coefficients of num/den through order `terms - 1`.
std::vector<Rational> expand(const std::vector<Rational>& num, const std::vector<Rational>& den, int terms) {
  std::vector<Rational> out;
  for (int i = 0; i < terms; ++i) {
    Rational b = i < static_cast<int>(num.size()) ? num[static_cast<std::size_t>(i)] : Rational(0);
    for (int m = 1; m <= i && m < static_cast<int>(den.size()); ++m) {
      b -= den[static_cast<std::size_t>(m)] * out[static_cast<std::size_t>(i - m)];
    }
    out.push_back(b / den[0]);
  }
  return out;
}

std::vector<Rational> multiply(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  std::vector<Rational> out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  while (out.size() > 1 && out.back() == 0) {
    out.pop_back();
  }
  return out;
}

Rational horner(const std::vector<Rational>& p, const Rational& x) {
  Rational acc(0);
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

double error_at(const PadeApproximant& approx, const Rational& x, const Rational& exact, mpfr_prec_t bits) {
  const Real value = evaluate(approx, Real(x, bits), bits);
  const Real reference(exact, 4096);
  return abs(Real(value.to_string(400), 4096) - reference).to_double();
}

}  // namespace

TEST_CASE("geometric series [0/1] is exactly 1/(1-x)") {
  const std::vector<Rational> series{1, 1, 1, 1};
  const auto approx = build_pade(series, 0, 1);
  REQUIRE(approx.num.size() == 1);
  REQUIRE(approx.den.size() == 2);
  CHECK(approx.num[0] == 1);
  CHECK(approx.den[0] == 1);
  CHECK(approx.den[1] == -1);
  CHECK_FALSE(approx.reduced());
  CHECK(evaluate(approx, Real(0.5, 256), 256).to_double() == 2.0);
}

TEST_CASE("exp [1/1] is (1 + x/2)/(1 - x/2)") {
  const auto series = exp_series(3);
  const auto approx = build_pade(series, 1, 1);
  CHECK(approx.num == std::vector<Rational>{Rational(1), Rational(1, 2)});
  CHECK(approx.den == std::vector<Rational>{Rational(1), Rational(-1, 2)});
  CHECK(evaluate(approx, Real(0.0, 256), 256).to_double() == 1.0);
}

TEST_CASE("polynomial passthrough") {
  const std::vector<Rational> series{1, 0};
  const auto approx = build_pade(series, 1, 0);
  CHECK(approx.num == std::vector<Rational>{Rational(1), Rational(0)});
  CHECK(approx.den == std::vector<Rational>{Rational(1)});
}

TEST_CASE("exp [5/5] at 1 agrees with e") {
  const auto approx = build_pade(exp_series(11), 5, 5);
  CHECK(std::abs(evaluate(approx, Real(1.0, 256), 256).to_double() - std::exp(1.0)) < 1e-7);
}

TEST_CASE("singular systems step down the diagonal") {
  // 1 + x^2 + x^4 + ... : the [1/1] system has a zero pivot.
  const std::vector<Rational> series{1, 0, 1, 0, 1};
  const auto approx = build_pade(series, 1, 1);
  CHECK(approx.reduced());
  CHECK(approx.requested_N == 1);
  CHECK(approx.requested_M == 1);
  CHECK(approx.N == 0);
  CHECK(approx.M == 0);
  CHECK(approx.num[0] == 1);
}

TEST_CASE("argument validation") {
  const std::vector<Rational> series{1, 1, 1};
  CHECK_THROWS_AS(build_pade(series, 2, 1), InvalidConfiguration);
  CHECK_THROWS_AS(build_pade(series, -1, 1), InvalidConfiguration);
  CHECK_THROWS_AS(evaluate(build_pade(series, 0, 1), Real(0.5, 256), 32), InvalidConfiguration);
  CHECK_THROWS_AS(DiagonalSequence(series, 2), InvalidConfiguration);
}

TEST_CASE("pole proximity is signalled") {
  const std::vector<Rational> series{1, 1, 1};
  CHECK_THROWS_AS(evaluate(build_pade(series, 0, 1), Real(1.0, 256), 256), PoleProximity);
}

TEST_CASE("random series are matched through order N + M") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> degree(0, 6);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int N = degree(rng);
    const int M = degree(rng);
    std::vector<Rational> series;
    for (int j = 0; j <= N + M; ++j) {
      series.push_back(random_rational(rng));
    }
    const auto approx = build_pade(series, N, M);
    CAPTURE(trial);
    REQUIRE(approx.den[0] == 1);
    const int order = approx.N + approx.M;
    const auto taylor = expand(approx.num, approx.den, order + 1);
    for (int j = 0; j <= order; ++j) {
      CHECK(taylor[static_cast<std::size_t>(j)] == series[static_cast<std::size_t>(j)]);
    }
    checked += approx.reduced() ? 0 : 1;
  }
  CHECK(checked > 150);
}

TEST_CASE("rational functions are reproduced by [d/d]") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> degree(1, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = degree(rng);
    std::vector<Rational> p, q{Rational(1)};
    for (int j = 0; j <= d; ++j) {
      p.push_back(random_rational(rng));
    }
    for (int j = 1; j <= d; ++j) {
      q.push_back(random_rational(rng));
    }
    const auto series = expand(p, q, 2 * d + 1);
    const auto approx = build_pade(series, d, d);
    CAPTURE(trial);
    CHECK(multiply(approx.num, q) == multiply(p, approx.den));
    for (const Rational& x : {Rational(1, 7), Rational(-2, 3), Rational(5, 4)}) {
      const Rational den = horner(q, x);
      if (den == 0) {
        continue;
      }
      const Rational exact = horner(p, x) / den;
      CHECK(error_at(approx, x, exact, 256) <= 1e-60 * std::max(1.0, std::abs(exact.get_d())));
    }
  }
}

TEST_CASE("more bits never increase the error") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rational> p, q{Rational(1)};
    for (int j = 0; j <= 4; ++j) {
      p.push_back(random_rational(rng));
    }
    for (int j = 1; j <= 4; ++j) {
      q.push_back(random_rational(rng));
    }
    const auto approx = build_pade(expand(p, q, 9), 4, 4);
    const Rational x(3, 11);
    const Rational exact = horner(p, x) / horner(q, x);
    double previous = INFINITY;
    for (mpfr_prec_t bits : {64, 128, 256, 512, 1024}) {
      const double err = error_at(approx, x, exact, bits);
      CHECK(err <= previous);
      previous = err;
    }
  }
}

TEST_CASE("diagonal sequence agrees with exact approximants") {
  const auto series = c_series(0, 3, 61).coeffs;
  const DiagonalSequence sequence(series, 30);
  const Real x(-0.49, 256);
  const auto values = sequence.evaluate_all(x, 256);
  REQUIRE(values.size() == 30);
  for (int order : {1, 2, 5, 13, 22, 30}) {
    const Real exact = evaluate(sequence.approximant(order), x, 512);
    const Real& fast = values[static_cast<std::size_t>(order) - 1];
    CAPTURE(order);
    CHECK(abs(fast - exact).to_double() <= 1e-60 * std::abs(exact.to_double()));
  }
}

TEST_CASE("convergent series: exp at 0.64") {
  const auto result = diagonal_resum(exp_series(81), Real(0.64, 256));
  CHECK(result.converged);
  CHECK(std::abs(result.value.to_double() - std::exp(0.64)) <= 1e-10 * std::exp(0.64));
  CHECK(result.order_used < 40);
  CHECK(result.diagnostics.size() == static_cast<std::size_t>(result.order_used));
}

TEST_CASE("Euler series at 0.2 matches the Borel integral") {
  const auto result = diagonal_resum(euler_series(81), Real(0.2, 256));
  CHECK(result.converged);
  CHECK(std::abs(result.value.to_double() - oracles::euler_integral(0.2)) <= 1e-6);
}

TEST_CASE("any series at zero returns the leading coefficient") {
  const auto result = diagonal_resum(euler_series(81), Real(0.0, 256));
  CHECK(result.converged);
  CHECK(result.order_used == 0);
  CHECK(result.value.to_double() == 1.0);
}

TEST_CASE("three-beam series stop converging at gain 1.2") {
  // The low orders still settle at this gain; from k = 10 on the diagonal
  // sequence no longer does, while the same series are fine at 0.8. The
  // test is applied to the Fock amplitude gamma^k (k!)^(3/2) v.
  for (int k : {10, 11, 12}) {
    const auto series = c_series(k, 3, 81).coeffs;
    const DiagonalSequence sequence(series, 40);
    CAPTURE(k);
    const auto fock_scale = [k](double gamma) { return Real(std::pow(gamma, k) * std::pow(std::tgamma(k + 1.0), 1.5), 256); };
    const Real scale = fock_scale(1.2);
    const auto beyond = resum(sequence, Real(-1.44, 256), ResumOptions{}, &scale);
    CHECK_FALSE(beyond.converged);
    CHECK(beyond.order_used == 40);
    const Real scale_08 = fock_scale(0.8);
    CHECK(resum(sequence, Real(-0.64, 256), ResumOptions{}, &scale_08).converged);
  }
}
