#include <doctest.h>

#include <Eigen/Dense>

#include <sstream>
#include <string>

#include "bghz/errors.hpp"
#include "bghz/series_core.hpp"

using namespace bghz;

namespace {

// Scalar c in A^l (A^dagger)^p |vacuum> = c (A^dagger)^(p-l) |vacuum> for
// A = a_1 ... a_n, by dense matrices on each mode truncated to p photons.
double brute_force_ladder(int n, int l, int p) {
  const int dim = p + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) {
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  // Every mode carries the same photon number, so the n-mode amplitude is
  // the n-th power of the single-mode one.
  Eigen::VectorXd ket = Eigen::VectorXd::Zero(dim);
  ket(0) = 1.0;
  for (int j = 0; j < p; ++j) {
    ket = a.transpose() * ket;
  }
  for (int j = 0; j < l; ++j) {
    ket = a * ket;
  }
  // (a^dagger)^m |0> = sqrt(m!) |m>
  return std::pow(ket(p - l) / std::sqrt(std::tgamma(p - l + 1.0)), n);
}

}  // namespace

TEST_CASE("table entries at small orders") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(build_p_table(n, 0).at(0, 0) == 1);
  }
  CHECK(build_p_table(2, 3).at(1, 3) == 5);
  CHECK(build_p_table(3, 3).at(2, 3) == 0);
  CHECK(build_p_table(3, 4).at(2, 4) == 1 + 8 + 27);
}

TEST_CASE("table rejects invalid configurations") {
  CHECK_THROWS_AS(build_p_table(0, 4), InvalidConfiguration);
  CHECK_THROWS_AS(build_p_table(-1, 4), InvalidConfiguration);
  CHECK_THROWS_AS(build_p_table(2, -1), InvalidConfiguration);
  CHECK_THROWS_AS(build_p_table(2, 4).at(0, 6), InvalidConfiguration);
}

TEST_CASE("recurrence matches the nested sums") {
  for (int n = 1; n <= 4; ++n) {
    const auto table = build_p_table(n, 12);
    for (int l = 0; l <= 12; ++l) {
      for (int k = 0; k <= l; ++k) {
        CAPTURE(n);
        CAPTURE(k);
        CAPTURE(l);
        if ((l - k) % 2 == 0) {
          CHECK(table.at(k, l) == p_explicit(k, n, l));
        } else {
          CHECK(table.at(k, l) == 0);
        }
      }
    }
  }
}

TEST_CASE("entries are positive and non-decreasing in l") {
  for (int n = 1; n <= 4; ++n) {
    const auto table = build_p_table(n, 20);
    for (int k = 0; k <= 18; ++k) {
      for (int l = k; l + 2 <= 20; l += 2) {
        CHECK(table.at(k, l) > 0);
        CHECK(table.at(k, l + 2) >= table.at(k, l));
      }
    }
  }
}

TEST_CASE("every entry is rebuilt exactly from its neighbours") {
  for (int n = 1; n <= 4; ++n) {
    const auto table = build_p_table(n, 30);
    for (int l = 1; l <= 30; ++l) {
      for (int k = l % 2; k <= l; k += 2) {
        Integer power;
        mpz_ui_pow_ui(power.get_mpz_t(), static_cast<unsigned long>(k + 1), static_cast<unsigned long>(n));
        CHECK(table.at(k, l) == table.at(k - 1, l - 1) + power * table.at(k + 1, l - 1));
      }
    }
  }
}

TEST_CASE("nested-sum examples") {
  CHECK(p_explicit(3, 1, 3) == 1);
  CHECK(p_explicit(3, 4, 3) == 1);
  // One summation: 1 + 2^2 + 3^2.
  CHECK(p_explicit(2, 2, 4) == 14);
  // Two summations: 1 * (1 + 2^2).
  CHECK(p_explicit(0, 2, 4) == 5);
  CHECK(p_explicit(1, 3, 5) == build_p_table(3, 5).at(1, 5));
  CHECK_THROWS_AS(p_explicit(1, 3, 4), InvalidConfiguration);
  CHECK_THROWS_AS(p_explicit(-1, 3, 3), InvalidConfiguration);
  CHECK_THROWS_AS(p_explicit(4, 3, 2), InvalidConfiguration);
}

TEST_CASE("ladder coefficients") {
  CHECK(ladder_coefficient(1, 1, 1) == 1);
  CHECK(ladder_coefficient(3, 1, 2) == 8);
  CHECK(ladder_coefficient(2, 2, 2) == 4);
  CHECK(ladder_coefficient(2, 3, 2) == 0);
  CHECK_THROWS_AS(ladder_coefficient(0, 1, 1), InvalidConfiguration);
  for (int n = 1; n <= 3; ++n) {
    for (int p = 0; p <= 5; ++p) {
      for (int l = 0; l <= p; ++l) {
        CAPTURE(n);
        CAPTURE(l);
        CAPTURE(p);
        CHECK(ladder_coefficient(n, l, p).get_d() == doctest::Approx(brute_force_ladder(n, l, p)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("coherent series is the Taylor expansion of exp(u/2)") {
  const auto series = c_series(0, 1, 12);
  REQUIRE(series.coeffs.size() == 12);
  CHECK(series.coeffs[0] == Rational(1));
  CHECK(series.coeffs[1] == Rational(1, 2));
  CHECK(series.coeffs[2] == Rational(1, 8));
  Rational expected(1);
  for (int j = 0; j < 12; ++j) {
    CHECK(series.coeffs[static_cast<std::size_t>(j)] == expected);
    expected /= 2 * (j + 1);
  }
}

TEST_CASE("series leading terms") {
  for (int n = 1; n <= 4; ++n) {
    const auto series = c_series(1, n, 1);
    REQUIRE(series.coeffs.size() == 1);
    CHECK(series.coeffs[0] == Rational(1));
  }
  const auto series = c_series(2, 3, 2);
  CHECK(series.coeffs[0] == Rational(1, 2));
  CHECK(series.coeffs[1] == Rational(3, 2));
  CHECK_THROWS_AS(c_series(0, 0, 3), InvalidConfiguration);
  CHECK_THROWS_AS(c_series(0, 2, 0), InvalidConfiguration);
}

TEST_CASE("table csv dump") {
  std::ostringstream out;
  build_p_table(2, 4).write_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("k,l,n,value\n", 0) == 0);
  CHECK(text.find("0,4,2,5\n") != std::string::npos);
  CHECK(text.find("2,4,2,14\n") != std::string::npos);
  // Plain decimal integers only.
  CHECK(text.find_first_not_of("0123456789,\n", text.find('\n')) == std::string::npos);
}
