#include "bghz/state.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "bghz/errors.hpp"

namespace bghz {

namespace {

// (i)^k as a unit complex number.
template <typename T>
std::complex<T> i_power(int k) {
  switch (k % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

// gamma^k (k!)^(n/2) at the given precision.
Real fock_scale(double gamma, int k, int n, mpfr_prec_t bits) {
  Real out(bits);
  Real g(gamma, bits);
  mpfr_pow_ui(out.get(), g.get(), static_cast<unsigned long>(k), MPFR_RNDN);
  Real fact(bits);
  mpfr_fac_ui(fact.get(), static_cast<unsigned long>(k), MPFR_RNDN);
  mpfr_pow_ui(fact.get(), fact.get(), static_cast<unsigned long>(n), MPFR_RNDN);
  mpfr_sqrt(fact.get(), fact.get(), MPFR_RNDN);
  return out * fact;
}

constexpr int kDivergenceWindow = 5;

}  // namespace

std::string NumericPolicy::describe() const {
  std::ostringstream os;
  os << "pade_order=" << pade_order << " tol=" << tol << " bits=" << bits << " cutoff=";
  if (cutoff < 0) {
    os << "auto";
  } else {
    os << cutoff;
  }
  os << " max_cutoff=" << max_cutoff << " tail_target=" << tail_target << " divergence_guard=" << divergence_guard
     << " normalization=" << (normalization == StateNormalization::Unitary ? "unitary" : "retained");
  return os.str();
}

void NumericPolicy::validate() const {
  if (pade_order < 1) {
    throw InvalidConfiguration("pade_order must be at least 1");
  }
  if (!(tol > 0.0)) {
    throw InvalidConfiguration("tol must be positive");
  }
  if (bits < 64) {
    throw InvalidConfiguration("bits must be at least 64");
  }
  if (max_cutoff < 0 || cutoff > 200) {
    throw InvalidConfiguration("cutoff out of range");
  }
  if (!(tail_target > 0.0)) {
    throw InvalidConfiguration("tail_target must be positive");
  }
}

CoefficientEngine::CoefficientEngine(int n, int pade_order, int max_k)
    : n_(n), pade_order_(pade_order), max_k_(max_k), table_(n, max_k + 4 * pade_order) {
  if (pade_order < 1) {
    throw InvalidConfiguration("pade_order must be at least 1");
  }
  if (max_k < 0) {
    throw InvalidConfiguration("max_k must be non-negative");
  }
}

const DiagonalSequence& CoefficientEngine::sequence(int k) const {
  if (k < 0 || k > max_k_) {
    throw InvalidConfiguration("emission order " + std::to_string(k) + " outside engine range [0, " +
                               std::to_string(max_k_) + "]");
  }
  std::lock_guard lock(mutex_);
  while (static_cast<int>(sequences_.size()) <= k) {
    const int next = static_cast<int>(sequences_.size());
    const FormalSeries series = c_series(table_, next, 2 * pade_order_ + 1);
    sequences_.push_back(std::make_unique<DiagonalSequence>(series.coeffs, pade_order_));
  }
  return *sequences_[static_cast<std::size_t>(k)];
}

Coefficient CoefficientEngine::coefficient(int k, double gamma, const NumericPolicy& policy) const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidConfiguration("gain must be finite and non-negative");
  }
  if (policy.pade_order > pade_order_) {
    throw InvalidConfiguration("policy pade_order exceeds the engine order");
  }
  const DiagonalSequence& seq = sequence(k);
  Real g(gamma, policy.bits);
  const Real x = -(g * g);
  const Real scale = fock_scale(gamma, k, n_, policy.bits);
  const ResumOptions options{policy.pade_order, policy.tol, policy.bits};
  const ResummationResult res = resum(seq, x, options, &scale);

  Real gk(policy.bits);
  mpfr_pow_ui(gk.get(), g.get(), static_cast<unsigned long>(k), MPFR_RNDN);
  const Real magnitude = res.value * gk;
  const Real amplitude = res.value * scale;

  Coefficient out;
  out.k = k;
  out.value = i_power<long double>(k) * mpfr_get_ld(magnitude.get(), MPFR_RNDN);
  out.fock_amplitude = i_power<double>(k) * amplitude.to_double();
  out.converged = res.converged;
  out.order_used = res.order_used;
  return out;
}

std::shared_ptr<const CoefficientEngine> CoefficientEngine::shared(int n, int pade_order, int max_k) {
  static std::mutex registry_mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const CoefficientEngine>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[{n, pade_order, max_k}];
  if (!slot) {
    slot = std::make_shared<const CoefficientEngine>(n, pade_order, max_k);
  }
  return slot;
}

Coefficient resummed_coefficient(int n, int k, double gamma, const NumericPolicy& policy) {
  policy.validate();
  const auto engine = CoefficientEngine::shared(n, policy.pade_order, std::max(policy.max_cutoff, k));
  return engine->coefficient(k, gamma, policy);
}

double tail_estimate(const std::vector<double>& raw) {
  if (raw.empty()) {
    return 0.0;
  }
  const double last = raw.back();
  if (last == 0.0) {
    return 0.0;
  }
  if (raw.size() < 2) {
    return std::numeric_limits<double>::infinity();
  }
  const double prev = raw[raw.size() - 2];
  const double K = static_cast<double>(raw.size() - 1);
  const double ratio = last / prev;
  if (!(ratio < 1.0)) {
    return std::numeric_limits<double>::infinity();
  }
  const double geometric = last * ratio / (1.0 - ratio);
  // p(k) ~ last (K/k)^s summed over k > K by the midpoint integral.
  const double slope = std::log(prev / last) / std::log(K / (K - 1.0));
  double power_law = 0.0;
  if (slope > 1.0) {
    power_law = last * std::pow(K, slope) * std::pow(K + 0.5, 1.0 - slope) / (slope - 1.0);
  } else {
    power_law = std::numeric_limits<double>::infinity();
  }
  return std::max(geometric, power_law);
}

TripleDistribution photon_distribution(const BrightStateSpec& spec) {
  spec.policy.validate();
  if (spec.n < 1) {
    throw InvalidConfiguration("beam count n must be positive");
  }
  if (!(spec.gamma >= 0.0)) {
    throw InvalidConfiguration("gain must be non-negative");
  }
  const NumericPolicy& policy = spec.policy;
  const bool automatic = policy.cutoff < 0;
  const int k_limit = automatic ? policy.max_cutoff : policy.cutoff;
  const auto engine = CoefficientEngine::shared(spec.n, policy.pade_order, std::max(policy.max_cutoff, k_limit));

  TripleDistribution dist;
  dist.n = spec.n;
  dist.gamma = spec.gamma;
  dist.beyond_validity = spec.beyond_validity();
  if (dist.beyond_validity) {
    dist.warnings.push_back("gain at or beyond the validity guard " + std::to_string(policy.divergence_guard));
  }

  std::vector<double> raw;
  double tail = 0.0;
  for (int k = 0; k <= k_limit; ++k) {
    Coefficient c = engine->coefficient(k, spec.gamma, policy);
    if (!c.converged) {
      if (!automatic || k == 0) {
        throw DivergenceError("coefficient C_" + std::to_string(k) + " did not converge by order [" +
                              std::to_string(c.order_used) + "/" + std::to_string(c.order_used) + "]");
      }
      dist.truncated_by_resummation = true;
      dist.warnings.push_back("cutoff limited by resummation convergence at k=" + std::to_string(k));
      break;
    }
    raw.push_back(std::norm(c.fock_amplitude));
    dist.coefficients.push_back(c);
    if (automatic && k >= 1) {
      const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
      const double t = tail_estimate(raw);
      if (t / (total + t) < policy.tail_target) {
        break;
      }
    }
  }
  tail = raw.size() >= 2 ? tail_estimate(raw) : 0.0;
  if (!std::isfinite(tail)) {
    dist.warnings.push_back("tail estimate is unbounded; tail mass not accounted for");
    tail = 0.0;
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  const double norm = policy.normalization == StateNormalization::Retained ? total + tail : 1.0;
  dist.raw_total = total;
  dist.tail_bound = tail / norm;
  dist.probs.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    dist.probs.push_back(raw[k] / norm);
    dist.mean += static_cast<double>(k) * dist.probs.back();
  }
  if (static_cast<int>(raw.size()) > kDivergenceWindow) {
    bool non_decreasing = true;
    const std::size_t start = raw.size() - kDivergenceWindow;
    for (std::size_t k = start + 1; k < raw.size(); ++k) {
      const double prev = raw[k - 1] * static_cast<double>((k - 1) * (k - 1));
      const double cur = raw[k] * static_cast<double>(k * k);
      if (cur < prev) {
        non_decreasing = false;
        break;
      }
    }
    if (non_decreasing) {
      dist.divergent = true;
      dist.warnings.push_back("p(k) k^2 non-decreasing over the last five orders: mean photon number diverges");
    }
  }
  return dist;
}

BGHZState::BGHZState(double gamma, int cutoff, std::vector<std::complex<double>> amps, double norm_residual)
    : gamma_(gamma), cutoff_(cutoff), amps_(std::move(amps)), norm_residual_(norm_residual) {
  const auto side = static_cast<std::size_t>(cutoff) + 1;
  if (cutoff < 0 || amps_.size() != side * side) {
    throw InvalidConfiguration("BGHZ amplitude table does not match the cutoff");
  }
}

std::complex<double> BGHZState::amp(int q, int m) const {
  if (q < 0 || m < 0 || q > cutoff_ || m > cutoff_) {
    return {0.0, 0.0};
  }
  return amps_[static_cast<std::size_t>(q) * (static_cast<std::size_t>(cutoff_) + 1) + static_cast<std::size_t>(m)];
}

double BGHZState::norm() const {
  double total = 0.0;
  for (const auto& a : amps_) {
    total += std::norm(a);
  }
  return total;
}

BGHZState build_bghz(double gamma, const NumericPolicy& policy) {
  BrightStateSpec spec{3, gamma, policy};
  const TripleDistribution dist = photon_distribution(spec);
  const int K = dist.cutoff();
  const auto side = static_cast<std::size_t>(K) + 1;
  std::vector<std::complex<double>> amps(side * side);
  double norm = 0.0;
  for (int q = 0; q <= K; ++q) {
    for (int m = 0; m <= K; ++m) {
      const auto a = dist.coefficients[static_cast<std::size_t>(q)].fock_amplitude *
                     dist.coefficients[static_cast<std::size_t>(m)].fock_amplitude;
      amps[static_cast<std::size_t>(q) * side + static_cast<std::size_t>(m)] = a;
      norm += std::norm(a);
    }
  }
  if (policy.normalization == StateNormalization::Retained) {
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& a : amps) {
      a *= scale;
    }
  }
  BGHZState state(gamma, K, std::move(amps), std::abs(1.0 - norm));
  state.beyond_validity = dist.beyond_validity;
  state.divergent = dist.divergent;
  state.warnings = dist.warnings;
  state.coefficients = dist.coefficients;
  state.coefficients.resize(side);
  return state;
}

BGHZState project_out_vacuum(const BGHZState& state) {
  const int K = state.cutoff();
  const auto side = static_cast<std::size_t>(K) + 1;
  std::vector<std::complex<double>> amps(side * side);
  double norm = 0.0;
  for (int q = 0; q <= K; ++q) {
    for (int m = 0; m <= K; ++m) {
      if (q == 0 && m == 0) {
        continue;
      }
      const auto a = state.amp(q, m);
      amps[static_cast<std::size_t>(q) * side + static_cast<std::size_t>(m)] = a;
      norm += std::norm(a);
    }
  }
  const double weight = 1.0 - state.vacuum_probability();
  if (!(norm > 0.0) || !(weight > 0.0)) {
    throw VacuumOnlyState("state has no weight outside the vacuum");
  }
  const double scale = 1.0 / std::sqrt(weight);
  for (auto& a : amps) {
    a *= scale;
  }
  BGHZState out(state.gamma(), K, std::move(amps), state.norm_residual());
  out.vacuum_removed = true;
  out.beyond_validity = state.beyond_validity;
  out.divergent = state.divergent;
  out.warnings = state.warnings;
  out.coefficients = state.coefficients;
  return out;
}

void write_distribution_csv(std::ostream& out, const TripleDistribution& dist) {
  out << "k,p\n";
  out.precision(17);
  for (std::size_t k = 0; k < dist.probs.size(); ++k) {
    out << k << ',' << dist.probs[k] << '\n';
  }
}

void write_state_csv(std::ostream& out, const BGHZState& state) {
  out << "q,m,re_amp,im_amp\n";
  out.precision(17);
  for (int q = 0; q <= state.cutoff(); ++q) {
    for (int m = 0; m <= state.cutoff(); ++m) {
      const auto a = state.amp(q, m);
      out << q << ',' << m << ',' << a.real() << ',' << a.imag() << '\n';
    }
  }
}

}  // namespace bghz
