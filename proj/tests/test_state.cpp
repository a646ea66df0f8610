#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "bghz/errors.hpp"
#include "bghz/state.hpp"
#include "oracles.hpp"

using namespace bghz;

namespace {

TripleDistribution distribution(int n, double gamma, NumericPolicy policy = {}) {
  return photon_distribution(BrightStateSpec{n, gamma, policy});
}

}  // namespace

TEST_CASE("coherent-state coefficients") {
  CHECK(std::abs(resummed_coefficient(1, 0, 0.8).value) == doctest::Approx(std::exp(-0.32)).epsilon(1e-12));
  for (int k = 0; k <= 10; ++k) {
    const auto c = resummed_coefficient(1, k, 0.8);
    const auto expected = oracles::coherent_coefficient(0.8, k);
    CAPTURE(k);
    CHECK(c.converged);
    CHECK(std::abs(std::complex<double>(c.value) - expected) <= 1e-12);
  }
}

TEST_CASE("two-mode squeezed vacuum coefficients") {
  const auto c1 = resummed_coefficient(2, 1, 0.8);
  const double expected = std::pow(std::tanh(0.8), 2) / std::pow(std::cosh(0.8), 2);
  CHECK(std::norm(c1.fock_amplitude) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(std::norm(c1.fock_amplitude) == doctest::Approx(0.246).epsilon(1e-3));
  for (int k = 0; k <= 10; ++k) {
    const auto c = resummed_coefficient(2, k, 0.8);
    CAPTURE(k);
    CHECK(std::abs(std::complex<double>(c.value) - oracles::squeezed_coefficient(0.8, k)) <= 1e-12);
  }
}

TEST_CASE("vacuum persists at zero gain") {
  for (int n = 1; n <= 3; ++n) {
    const auto c = resummed_coefficient(n, 0, 0.0);
    CHECK(c.converged);
    CHECK(c.value == std::complex<long double>(1.0L, 0.0L));
    const auto dist = distribution(n, 0.0);
    CHECK(dist.probs.front() == 1.0);
    for (std::size_t k = 1; k < dist.probs.size(); ++k) {
      CHECK(dist.probs[k] == 0.0);
    }
  }
}

TEST_CASE("one- and two-beam distributions match closed forms") {
  for (int step = 1; step <= 8; ++step) {
    const double gamma = 0.1 * step;
    const auto coherent = distribution(1, gamma);
    const auto squeezed = distribution(2, gamma);
    CAPTURE(gamma);
    for (std::size_t k = 0; k < coherent.probs.size(); ++k) {
      CHECK(std::abs(coherent.probs[k] - oracles::coherent_pk(gamma, static_cast<int>(k))) <= 1e-6);
    }
    for (std::size_t k = 0; k < squeezed.probs.size(); ++k) {
      CHECK(std::abs(squeezed.probs[k] - oracles::squeezed_pk(gamma, static_cast<int>(k))) <= 1e-6);
    }
  }
}

TEST_CASE("three-beam distribution at gain 0.8") {
  const auto dist = distribution(3, 0.8);
  REQUIRE(dist.cutoff() >= 10);
  CHECK_FALSE(dist.divergent);
  CHECK_FALSE(dist.beyond_validity);
  // Printed to two significant figures; one unit of the last digit.
  CHECK(std::abs(dist.probs[0] - 0.60) <= 0.01);
  CHECK(std::abs(dist.probs[1] - 0.16) <= 0.01);
  CHECK(std::abs(dist.probs[4] - 0.024) <= 0.001);
  double total = 0.0;
  for (double p : dist.probs) {
    total += p;
  }
  // Unitary weights are reported as resummed; the tail estimate accounts
  // for most of the missing mass.
  CHECK(total == doctest::Approx(dist.raw_total).epsilon(1e-14));
  CHECK(total < 1.0);
  CHECK(std::abs(total + dist.tail_bound - 1.0) < 5e-3);
  CHECK(dist.probs[0] == doctest::Approx(std::norm(dist.coefficients[0].fock_amplitude)).epsilon(1e-14));

  NumericPolicy retained;
  retained.normalization = StateNormalization::Retained;
  const auto rescaled = distribution(3, 0.8, retained);
  double rescaled_total = rescaled.tail_bound;
  for (double p : rescaled.probs) {
    rescaled_total += p;
  }
  CHECK(rescaled_total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vacuum weight grows with the beam count") {
  const auto d1 = distribution(1, 0.8);
  const auto d2 = distribution(2, 0.8);
  const auto d3 = distribution(3, 0.8);
  CHECK(d3.probs[0] > d2.probs[0]);
  CHECK(d2.probs[0] > d1.probs[0]);
  const std::size_t common = std::min(d2.probs.size(), d3.probs.size());
  REQUIRE(common > 10);
  for (std::size_t k = 4; k < common; ++k) {
    CAPTURE(k);
    CHECK(d3.probs[k] > d2.probs[k]);
  }
  CHECK(d3.probs[3] < d2.probs[3]);
}

TEST_CASE("divergence is flagged past the validity guard") {
  const auto dist = distribution(3, 1.2);
  CHECK(dist.beyond_validity);
  CHECK(dist.divergent);
  CHECK_FALSE(dist.warnings.empty());

  NumericPolicy fixed;
  fixed.cutoff = 12;
  CHECK_THROWS_AS(distribution(3, 1.2, fixed), DivergenceError);
}

TEST_CASE("tail estimate") {
  std::vector<double> geometric;
  for (int k = 0; k <= 10; ++k) {
    geometric.push_back(std::pow(0.5, k));
  }
  // Never below the geometric remainder.
  CHECK(tail_estimate(geometric) >= std::pow(0.5, 10) - 1e-15);
  CHECK(std::isfinite(tail_estimate(geometric)));
  // A 1/k decay has no finite tail.
  CHECK(std::isinf(tail_estimate({1.0, 0.5, 1.0 / 3.0})));
  CHECK(std::isinf(tail_estimate({1.0, 1.0, 1.0})));
}

TEST_CASE("policy validation and description") {
  NumericPolicy policy;
  CHECK_NOTHROW(policy.validate());
  CHECK(policy.describe().find("normalization=unitary") != std::string::npos);
  policy.normalization = StateNormalization::Retained;
  CHECK(policy.describe().find("normalization=retained") != std::string::npos);
  policy.tol = 0.0;
  CHECK_THROWS_AS(policy.validate(), InvalidConfiguration);
  policy = {};
  policy.bits = 32;
  CHECK_THROWS_AS(policy.validate(), InvalidConfiguration);
  CHECK_THROWS_AS(distribution(0, 0.5), InvalidConfiguration);
  CHECK_THROWS_AS(distribution(3, -0.5), InvalidConfiguration);
}

TEST_CASE("bright state at zero gain is the vacuum") {
  const auto state = build_bghz(0.0);
  CHECK(state.amp(0, 0) == std::complex<double>(1.0, 0.0));
  for (int q = 0; q <= state.cutoff(); ++q) {
    for (int m = 0; m <= state.cutoff(); ++m) {
      if (q + m > 0) {
        CHECK(state.amp(q, m) == std::complex<double>(0.0, 0.0));
      }
    }
  }
  CHECK_THROWS_AS(project_out_vacuum(state), VacuumOnlyState);
}

TEST_CASE("bright state amplitudes") {
  const auto state = build_bghz(0.8);
  REQUIRE(state.coefficients.size() == static_cast<std::size_t>(state.cutoff()) + 1);
  for (int q = 0; q <= state.cutoff(); ++q) {
    for (int m = 0; m <= state.cutoff(); ++m) {
      CHECK(state.amp(q, m) == state.amp(m, q));
    }
  }
  for (int q : {0, 1, 3}) {
    for (int m : {0, 2, 5}) {
      const auto cq = std::complex<double>(state.coefficients[static_cast<std::size_t>(q)].value);
      const auto cm = std::complex<double>(state.coefficients[static_cast<std::size_t>(m)].value);
      const double factorials = std::pow(std::tgamma(q + 1.0) * std::tgamma(m + 1.0), 1.5);
      CHECK(std::abs(state.amp(q, m) - cq * cm * factorials) <= 1e-12);
    }
  }
  // Unitary normalization keeps the resummed weights: the norm is the square
  // of the retained three-beam weight and the rest is the missing tail.
  const auto dist = distribution(3, 0.8);
  CHECK(state.norm() == doctest::Approx(dist.raw_total * dist.raw_total).epsilon(1e-12));
  CHECK(state.norm() < 1.0);
  CHECK(state.norm_residual() == doctest::Approx(1.0 - state.norm()).epsilon(1e-12));
  CHECK(state.vacuum_probability() == doctest::Approx(std::norm(state.coefficients[0].fock_amplitude) *
                                                      std::norm(state.coefficients[0].fock_amplitude)).epsilon(1e-12));
  CHECK_FALSE(state.beyond_validity);
}

TEST_CASE("retained normalization rescales to unit norm") {
  NumericPolicy policy;
  policy.normalization = StateNormalization::Retained;
  policy.cutoff = 6;
  const auto state = build_bghz(0.8, policy);
  CHECK(state.cutoff() == 6);
  CHECK(state.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(state.norm_residual() > 1e-4);
}

TEST_CASE("vacuum projection in the small-gain limit") {
  const auto projected = project_out_vacuum(build_bghz(0.01));
  CHECK(projected.vacuum_removed);
  CHECK(projected.amp(0, 0) == std::complex<double>(0.0, 0.0));
  CHECK(std::abs(projected.amp(1, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(std::abs(projected.amp(0, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(projected.norm() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("csv dumps") {
  std::ostringstream dist_out, state_out;
  write_distribution_csv(dist_out, distribution(1, 0.5));
  CHECK(dist_out.str().rfind("k,p\n0,", 0) == 0);
  NumericPolicy policy;
  policy.cutoff = 2;
  write_state_csv(state_out, build_bghz(0.5, policy));
  const std::string text = state_out.str();
  CHECK(text.rfind("q,m,re_amp,im_amp\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 9);
}
