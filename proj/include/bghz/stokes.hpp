#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include "bghz/state.hpp"

namespace bghz {

using Complex = std::complex<double>;
using Matrix2 = std::array<std::array<Complex, 2>, 2>;

/// Polarization basis of one party. Row s of the unitary expresses the
/// creation operator of measurement mode s in terms of the H/V creation
/// operators: c_s^dagger = sum_j unitary[s][j] a_j^dagger.
/// Index 1 is +-45 degrees, 2 is circular (R/L), 3 is H/V.
struct MeasurementBasis {
  int index = 3;
  Matrix2 unitary{};

  static MeasurementBasis of(int index);
};

/// Observables diagonal in some per-party measurement basis.
enum class StokesOp { S0, S1, S2, S3, S1Primed, S2Primed, S3Primed, Pi, Vacuum };

/// Basis in which the operator is diagonal; 0 for operators that only
/// depend on the total photon number.
int basis_of(StokesOp op);

/// Eigenvalue on |ka, kb> of the operator's own basis.
double stokes_eigenvalue(StokesOp op, int ka, int kb);

/// A diagonal per-party observable: value(ka, kb) on the occupations of
/// `basis` (0 means any basis).
struct LocalObservable {
  int basis = 0;
  std::function<double(int, int)> value;
};

LocalObservable local_observable(StokesOp op);

using LocalSettings = std::array<LocalObservable, 3>;
using StokesTriple = std::array<StokesOp, 3>;

/// Amplitudes of |r, N - r> (new modes) for every |p, N - p> (old modes) of
/// a two-mode passive transformation old_j^dagger = sum_s map[j][s] new_s^dagger.
class ShellRotation {
 public:
  ShellRotation(const Matrix2& map, int max_total);

  int max_total() const { return static_cast<int>(shells_.size()) - 1; }
  /// Row-major (N + 1) x (N + 1) matrix W[r][p].
  const std::vector<Complex>& shell(int total) const;

  /// Rotation from basis `from` to basis `to`, shared and grown on demand.
  static std::shared_ptr<const ShellRotation> between(int from, int to, int max_total);

 private:
  std::vector<std::vector<Complex>> shells_;
};

using Occupation = std::array<int, 6>;  // (ka, kb) of parties 1, 2, 3

/// Sparse three-party six-mode Fock state. Each party's occupations are
/// expressed in that party's current measurement basis.
class JointFockState {
 public:
  JointFockState() = default;
  explicit JointFockState(std::map<Occupation, Complex> amps, std::array<int, 3> bases = {3, 3, 3});

  static JointFockState from_bghz(const BGHZState& state);

  const std::map<Occupation, Complex>& amps() const { return amps_; }
  int basis(int party) const { return bases_.at(static_cast<std::size_t>(party)); }
  double norm() const;
  Complex amp(const Occupation& occ) const;
  int max_party_total() const;

  // Accumulates into an existing entry.
  void add(const Occupation& occ, Complex value);
  void set_basis(int party, int basis) { bases_.at(static_cast<std::size_t>(party)) = basis; }

 private:
  std::map<Occupation, Complex> amps_;
  std::array<int, 3> bases_{3, 3, 3};
};

/// Expresses `party` (0, 1 or 2) in another measurement basis. Per-party
/// photon numbers and the norm are preserved.
JointFockState rotate_party(const JointFockState& state, int party, int basis);

double expectation(const JointFockState& state, const LocalSettings& settings);
double stokes_expectation(const JointFockState& state, const StokesTriple& ops);

/// Same functionals on the BGHZ state without expanding it: each party's
/// observable is reduced to a matrix on the (q, N - q) shell and the three
/// matrices are contracted against the shared amplitudes.
double expectation(const BGHZState& state, const LocalSettings& settings);
double stokes_expectation(const BGHZState& state, const StokesTriple& ops);

/// Per-shell matrices <q', N - q'| O |q, N - q> in the H/V basis, for
/// shells 0 ... max_total. With a non-negative `cutoff` only entries with
/// both q and N - q (and q', N - q') at most cutoff are filled; the rest are
/// left zero.
using ShellOperator = std::vector<std::vector<Complex>>;
ShellOperator shell_operator(const LocalObservable& observable, int max_total, int cutoff = -1);

/// <BGHZ| O_1 O_2 O_3 |BGHZ> for per-party shell operators covering 2 * cutoff.
double contract(const BGHZState& state, const ShellOperator& first, const ShellOperator& second,
                const ShellOperator& third);

/// T_ijk = <S_i S_j S_k> for i, j, k in {1, 2, 3}.
struct CorrelationTensor {
  double gamma = 0.0;
  double t = 0.0;                     // closed-form double sum
  std::array<double, 27> elements{};  // sign pattern applied to t
  std::array<double, 27> generic{};   // every element from the generic evaluator
  double cross_check = 0.0;           // |t - generic T_111|

  static std::size_t index(int i, int j, int k) { return static_cast<std::size_t>(9 * (i - 1) + 3 * (j - 1) + (k - 1)); }
  double at(int i, int j, int k) const { return elements[index(i, j, k)]; }
  double generic_at(int i, int j, int k) const { return generic[index(i, j, k)]; }
};

/// Closed-form t from the Fock amplitudes of the (renormalized) state.
double closed_form_t(const BGHZState& state);

CorrelationTensor tensor_t(const BGHZState& state);
CorrelationTensor tensor_t(double gamma, const NumericPolicy& policy = {});

/// Columns gamma,i,j,k,value; one row per element of every tensor.
void write_tensor_csv(std::ostream& out, const std::vector<CorrelationTensor>& tensors);

}  // namespace bghz
