#include "bghz/stokes.hpp"

#include <cmath>
#include <mutex>
#include <ostream>
#include <string>

#include "bghz/errors.hpp"

namespace bghz {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Matrix2 multiply(const Matrix2& a, const Matrix2& b) {
  Matrix2 out{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    }
  }
  return out;
}

Matrix2 adjoint(const Matrix2& a) {
  Matrix2 out{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[i][j] = std::conj(a[j][i]);
    }
  }
  return out;
}

void check_party(int party) {
  if (party < 0 || party > 2) {
    throw InvalidConfiguration("party index must be 0, 1 or 2, got " + std::to_string(party));
  }
}

// Normalized difference (ka - kb) / (ka + kb), zero on the vacuum.
double normalized_difference(int ka, int kb) {
  const int total = ka + kb;
  return total == 0 ? 0.0 : static_cast<double>(ka - kb) / static_cast<double>(total);
}

}  // namespace

MeasurementBasis MeasurementBasis::of(int index) {
  MeasurementBasis basis;
  basis.index = index;
  const Complex i(0.0, 1.0);
  switch (index) {
    case 1:
      basis.unitary = {{{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}}};
      break;
    case 2:
      basis.unitary = {{{kInvSqrt2, i * kInvSqrt2}, {kInvSqrt2, -i * kInvSqrt2}}};
      break;
    case 3:
      basis.unitary = {{{1.0, 0.0}, {0.0, 1.0}}};
      break;
    default:
      throw InvalidConfiguration("measurement basis index must be 1, 2 or 3, got " + std::to_string(index));
  }
  return basis;
}

int basis_of(StokesOp op) {
  switch (op) {
    case StokesOp::S1:
    case StokesOp::S1Primed:
      return 1;
    case StokesOp::S2:
    case StokesOp::S2Primed:
      return 2;
    case StokesOp::S3:
    case StokesOp::S3Primed:
      return 3;
    default:
      return 0;
  }
}

double stokes_eigenvalue(StokesOp op, int ka, int kb) {
  const bool vacuum = ka + kb == 0;
  switch (op) {
    case StokesOp::S0:
    case StokesOp::Pi:
      return vacuum ? 0.0 : 1.0;
    case StokesOp::Vacuum:
      return vacuum ? 1.0 : 0.0;
    case StokesOp::S1:
    case StokesOp::S2:
    case StokesOp::S3:
      return normalized_difference(ka, kb);
    case StokesOp::S1Primed:
    case StokesOp::S2Primed:
    case StokesOp::S3Primed:
      return vacuum ? -1.0 : normalized_difference(ka, kb);
  }
  return 0.0;
}

LocalObservable local_observable(StokesOp op) {
  return {basis_of(op), [op](int ka, int kb) { return stokes_eigenvalue(op, ka, kb); }};
}

ShellRotation::ShellRotation(const Matrix2& map, int max_total) {
  if (max_total < 0) {
    throw InvalidConfiguration("shell rotation needs a non-negative photon number");
  }
  shells_.resize(static_cast<std::size_t>(max_total) + 1);
  shells_[0] = {Complex(1.0)};
  for (int total = 1; total <= max_total; ++total) {
    const auto side = static_cast<std::size_t>(total) + 1;
    const auto& prev = shells_[static_cast<std::size_t>(total) - 1];
    auto& cur = shells_[static_cast<std::size_t>(total)];
    cur.assign(side * side, Complex(0.0));
    auto prev_at = [&](int r, int p) -> Complex {
      if (r < 0 || r > total - 1 || p < 0 || p > total - 1) {
        return 0.0;
      }
      return prev[static_cast<std::size_t>(r) * (side - 1) + static_cast<std::size_t>(p)];
    };
    for (int p = 0; p <= total; ++p) {
      // |p, N-p> = old_0^dagger |p-1, N-p> / sqrt(p), or old_1^dagger |0, N-1> / sqrt(N) for p = 0.
      const int mode = p > 0 ? 0 : 1;
      const int source = p > 0 ? p - 1 : 0;
      const double norm = 1.0 / std::sqrt(static_cast<double>(p > 0 ? p : total));
      for (int r = 0; r <= total; ++r) {
        const Complex value = map[mode][0] * std::sqrt(static_cast<double>(r)) * prev_at(r - 1, source) +
                              map[mode][1] * std::sqrt(static_cast<double>(total - r)) * prev_at(r, source);
        cur[static_cast<std::size_t>(r) * side + static_cast<std::size_t>(p)] = norm * value;
      }
    }
  }
}

const std::vector<Complex>& ShellRotation::shell(int total) const {
  if (total < 0 || total > max_total()) {
    throw InvalidConfiguration("shell " + std::to_string(total) + " outside the rotation table");
  }
  return shells_[static_cast<std::size_t>(total)];
}

std::shared_ptr<const ShellRotation> ShellRotation::between(int from, int to, int max_total) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const ShellRotation>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{from, to}];
  if (!slot || slot->max_total() < max_total) {
    // c_from^dagger = U_from a^dagger and a^dagger = U_to^dagger c_to^dagger.
    const Matrix2 map = multiply(MeasurementBasis::of(from).unitary, adjoint(MeasurementBasis::of(to).unitary));
    const int size = slot ? std::max(max_total, 2 * slot->max_total()) : std::max(max_total, 16);
    slot = std::make_shared<const ShellRotation>(map, size);
  }
  return slot;
}

JointFockState::JointFockState(std::map<Occupation, Complex> amps, std::array<int, 3> bases)
    : amps_(std::move(amps)), bases_(bases) {
  for (int b : bases_) {
    MeasurementBasis::of(b);
  }
  for (const auto& [occ, value] : amps_) {
    for (int v : occ) {
      if (v < 0) {
        throw InvalidConfiguration("occupation numbers must be non-negative");
      }
    }
  }
}

JointFockState JointFockState::from_bghz(const BGHZState& state) {
  JointFockState out;
  const int K = state.cutoff();
  for (int q = 0; q <= K; ++q) {
    for (int m = 0; m <= K; ++m) {
      const Complex a = state.amp(q, m);
      if (a != Complex(0.0)) {
        out.add({q, m, q, m, q, m}, a);
      }
    }
  }
  return out;
}

double JointFockState::norm() const {
  double total = 0.0;
  for (const auto& [occ, value] : amps_) {
    total += std::norm(value);
  }
  return total;
}

Complex JointFockState::amp(const Occupation& occ) const {
  auto it = amps_.find(occ);
  return it == amps_.end() ? Complex(0.0) : it->second;
}

int JointFockState::max_party_total() const {
  int out = 0;
  for (const auto& [occ, value] : amps_) {
    for (int party = 0; party < 3; ++party) {
      out = std::max(out, occ[2 * party] + occ[2 * party + 1]);
    }
  }
  return out;
}

void JointFockState::add(const Occupation& occ, Complex value) { amps_[occ] += value; }

JointFockState rotate_party(const JointFockState& state, int party, int basis) {
  check_party(party);
  MeasurementBasis::of(basis);
  const int from = state.basis(party);
  if (from == basis) {
    return state;
  }
  const auto rotation = ShellRotation::between(from, basis, state.max_party_total());
  std::map<Occupation, Complex> out;
  const auto ia = static_cast<std::size_t>(2 * party);
  for (const auto& [occ, value] : state.amps()) {
    const int p = occ[ia];
    const int total = p + occ[ia + 1];
    const auto& w = rotation->shell(total);
    const auto side = static_cast<std::size_t>(total) + 1;
    for (int r = 0; r <= total; ++r) {
      const Complex c = w[static_cast<std::size_t>(r) * side + static_cast<std::size_t>(p)];
      if (c == Complex(0.0)) {
        continue;
      }
      Occupation target = occ;
      target[ia] = r;
      target[ia + 1] = total - r;
      out[target] += c * value;
    }
  }
  std::array<int, 3> bases{state.basis(0), state.basis(1), state.basis(2)};
  bases[static_cast<std::size_t>(party)] = basis;
  return JointFockState(std::move(out), bases);
}

double expectation(const JointFockState& state, const LocalSettings& settings) {
  JointFockState rotated = state;
  for (int party = 0; party < 3; ++party) {
    const int basis = settings[static_cast<std::size_t>(party)].basis;
    if (basis != 0) {
      rotated = rotate_party(rotated, party, basis);
    }
  }
  double total = 0.0;
  for (const auto& [occ, value] : rotated.amps()) {
    double product = std::norm(value);
    for (int party = 0; party < 3 && product != 0.0; ++party) {
      product *= settings[static_cast<std::size_t>(party)].value(occ[2 * party], occ[2 * party + 1]);
    }
    total += product;
  }
  return total;
}

double stokes_expectation(const JointFockState& state, const StokesTriple& ops) {
  return expectation(state, {local_observable(ops[0]), local_observable(ops[1]), local_observable(ops[2])});
}

ShellOperator shell_operator(const LocalObservable& observable, int max_total, int cutoff) {
  ShellOperator out(static_cast<std::size_t>(max_total) + 1);
  const int basis = observable.basis;
  std::shared_ptr<const ShellRotation> rotation;
  if (basis != 0 && basis != 3) {
    rotation = ShellRotation::between(3, basis, max_total);
  }
  for (int total = 0; total <= max_total; ++total) {
    const auto side = static_cast<std::size_t>(total) + 1;
    auto& op = out[static_cast<std::size_t>(total)];
    op.assign(side * side, Complex(0.0));
    std::vector<double> diag(side);
    for (std::size_t r = 0; r < side; ++r) {
      diag[r] = observable.value(static_cast<int>(r), total - static_cast<int>(r));
    }
    if (!rotation) {
      for (std::size_t r = 0; r < side; ++r) {
        op[r * side + r] = diag[r];
      }
      continue;
    }
    // O[q'][q] = sum_r conj(W[r][q']) f(r) W[r][q]
    const auto lo = static_cast<std::size_t>(cutoff < 0 ? 0 : std::max(0, total - cutoff));
    const auto hi = static_cast<std::size_t>(cutoff < 0 ? total : std::min(total, cutoff));
    const auto& w = rotation->shell(total);
    for (std::size_t r = 0; r < side; ++r) {
      if (diag[r] == 0.0) {
        continue;
      }
      const Complex* row = &w[r * side];
      for (std::size_t qp = lo; qp <= hi; ++qp) {
        const Complex left = std::conj(row[qp]) * diag[r];
        for (std::size_t q = lo; q <= hi; ++q) {
          op[qp * side + q] += left * row[q];
        }
      }
    }
  }
  return out;
}

double contract(const BGHZState& state, const ShellOperator& first, const ShellOperator& second,
                const ShellOperator& third) {
  const int K = state.cutoff();
  const int max_total = 2 * K;
  for (const ShellOperator* op : {&first, &second, &third}) {
    if (static_cast<int>(op->size()) < max_total + 1) {
      throw InvalidConfiguration("shell operator does not cover the state's photon numbers");
    }
  }
  std::complex<long double> total = 0.0L;
  for (int N = 0; N <= max_total; ++N) {
    const int lo = std::max(0, N - K);
    const int hi = std::min(N, K);
    const auto side = static_cast<std::size_t>(N) + 1;
    const auto shell = static_cast<std::size_t>(N);
    for (int qp = lo; qp <= hi; ++qp) {
      const Complex left = std::conj(state.amp(qp, N - qp));
      if (left == Complex(0.0)) {
        continue;
      }
      for (int q = lo; q <= hi; ++q) {
        const Complex right = state.amp(q, N - q);
        if (right == Complex(0.0)) {
          continue;
        }
        const std::size_t idx = static_cast<std::size_t>(qp) * side + static_cast<std::size_t>(q);
        const Complex term = left * first[shell][idx] * second[shell][idx] * third[shell][idx] * right;
        total += std::complex<long double>(term.real(), term.imag());
      }
    }
  }
  return static_cast<double>(total.real());
}

double expectation(const BGHZState& state, const LocalSettings& settings) {
  const int K = state.cutoff();
  return contract(state, shell_operator(settings[0], 2 * K, K), shell_operator(settings[1], 2 * K, K),
                  shell_operator(settings[2], 2 * K, K));
}

double stokes_expectation(const BGHZState& state, const StokesTriple& ops) {
  return expectation(state, {local_observable(ops[0]), local_observable(ops[1]), local_observable(ops[2])});
}

double closed_form_t(const BGHZState& state) {
  const int K = state.cutoff();
  const auto& coeffs = state.coefficients;
  if (static_cast<int>(coeffs.size()) < K + 1) {
    throw InvalidConfiguration("closed-form t needs the coefficients the state was built from");
  }
  using Cplx = std::complex<long double>;
  std::vector<long double> factorial3(static_cast<std::size_t>(2 * K) + 2, 1.0L);
  for (std::size_t j = 1; j < factorial3.size(); ++j) {
    const long double jj = static_cast<long double>(j);
    factorial3[j] = factorial3[j - 1] * jj * jj * jj;
  }
  auto C = [&](int k) -> Cplx {
    return k < 0 || k > K ? Cplx(0.0L) : coeffs[static_cast<std::size_t>(k)].value;
  };
  auto fact3 = [&](int k) { return factorial3[static_cast<std::size_t>(k)]; };
  // The state's amplitudes are c * C_q C_m (q! m!)^(3/2) on its support, and
  // its norm fixes c^2.
  long double support = 0.0L;
  for (int q = 0; q <= K; ++q) {
    for (int m = 0; m <= K; ++m) {
      if (state.vacuum_removed && q == 0 && m == 0) {
        continue;
      }
      support += std::norm(C(q) * C(m)) * fact3(q) * fact3(m);
    }
  }
  // t = sum_{k>=1} sum_{m=0}^{k} [ conj(C_{k-m-1} C_{m+1}) ((k-m)! (m+1)!)^3
  //                              + conj(C_{m-1} C_{k-m+1}) (m! (k-m+1)!)^3 ] C_m C_{k-m} / k^3
  Cplx total = 0.0L;
  for (int k = 1; k <= 2 * K; ++k) {
    const long double k3 = static_cast<long double>(k) * k * k;
    for (int m = 0; m <= k; ++m) {
      const Cplx right = C(m) * C(k - m);
      if (right == Cplx(0.0L)) {
        continue;
      }
      Cplx bracket = 0.0L;
      if (k - m - 1 >= 0) {
        bracket += std::conj(C(k - m - 1) * C(m + 1)) * (fact3(k - m) * fact3(m + 1));
      }
      if (m - 1 >= 0) {
        bracket += std::conj(C(m - 1) * C(k - m + 1)) * (fact3(m) * fact3(k - m + 1));
      }
      total += bracket * right / k3;
    }
  }
  return static_cast<double>(total.real() * static_cast<long double>(state.norm()) / support);
}

CorrelationTensor tensor_t(const BGHZState& state) {
  CorrelationTensor tensor;
  tensor.gamma = state.gamma();
  tensor.t = state.coefficients.empty() ? stokes_expectation(state, {StokesOp::S1, StokesOp::S1, StokesOp::S1})
                                        : closed_form_t(state);
  const StokesOp ops[3] = {StokesOp::S1, StokesOp::S2, StokesOp::S3};
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      for (int k = 1; k <= 3; ++k) {
        const auto idx = CorrelationTensor::index(i, j, k);
        const int twos = (i == 2) + (j == 2) + (k == 2);
        const bool has_three = i == 3 || j == 3 || k == 3;
        if (!has_three && twos == 0) {
          tensor.elements[idx] = tensor.t;
        } else if (!has_three && twos == 2) {
          tensor.elements[idx] = -tensor.t;
        }
        tensor.generic[idx] = stokes_expectation(state, {ops[i - 1], ops[j - 1], ops[k - 1]});
      }
    }
  }
  tensor.cross_check = std::abs(tensor.t - tensor.generic_at(1, 1, 1));
  return tensor;
}

CorrelationTensor tensor_t(double gamma, const NumericPolicy& policy) { return tensor_t(build_bghz(gamma, policy)); }

void write_tensor_csv(std::ostream& out, const std::vector<CorrelationTensor>& tensors) {
  out << "gamma,i,j,k,value\n";
  const auto old_precision = out.precision(17);
  for (const auto& tensor : tensors) {
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        for (int k = 1; k <= 3; ++k) {
          out << tensor.gamma << ',' << i << ',' << j << ',' << k << ',' << tensor.generic_at(i, j, k) << '\n';
        }
      }
    }
  }
  out.precision(old_precision);
}

}  // namespace bghz
