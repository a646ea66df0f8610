#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace bghz {

using Integer = mpz_class;
using Rational = mpq_class;

/// Exact weights P(k, l) of (A_n^dagger)^k |vacuum> in H^l |vacuum>, where
/// H = A_n^dagger + A_n and A_n^dagger is the product of n creation operators.
///
/// Entries are stored only for 0 <= k <= l <= l_max with (l - k) even; every
/// other index reads as zero. Built once, then immutable.
class RecurrenceTable {
 public:
  RecurrenceTable(int n, int l_max);

  int n() const { return n_; }
  int l_max() const { return l_max_; }

  /// P(k, l); zero outside the stored parity-matched triangle.
  /// Throws InvalidConfiguration when l exceeds l_max.
  const Integer& at(int k, int l) const;

  /// Writes rows "k,l,n,value" for every stored entry, ordered by l then k.
  void write_csv(std::ostream& out) const;

 private:
  int n_;
  int l_max_;
  // rows_[l] holds k = l%2, l%2+2, ..., l.
  std::vector<std::vector<Integer>> rows_;
};

RecurrenceTable build_p_table(int n, int l_max);

/// Nested-sum closed form of P(k, l) with (l - k)/2 summations:
/// sum_{i=1}^{k+1} i^n sum_{j=1}^{i+1} j^n ... ; one when no sums remain.
/// Independent of the recurrence; used to cross-check it.
Integer p_explicit(int k, int n, int l);

/// prod_{j=1}^{l} (p - j + 1)^n, the scalar in A_n^l (A_n^dagger)^p |vacuum>.
/// Returns zero when l > p (the state is annihilated).
Integer ladder_coefficient(int n, int l, int p);

/// Coefficients c_j = P(k, k+2j) / (k+2j)! of the divergent series for the
/// amplitude C_k = (i Gamma)^k sum_j c_j u^j with u = -Gamma^2.
struct FormalSeries {
  int k = 0;
  int n = 1;
  std::vector<Rational> coeffs;
};

FormalSeries c_series(int k, int n, int terms);
FormalSeries c_series(const RecurrenceTable& table, int k, int terms);

}  // namespace bghz
