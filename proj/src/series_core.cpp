#include "bghz/series_core.hpp"

#include <ostream>
#include <string>

#include "bghz/errors.hpp"

namespace bghz {

namespace {

const Integer kZero{0};

Integer power(int base, int exponent) {
  Integer out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(exponent));
  return out;
}

Integer factorial(int value) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(value));
  return out;
}

}  // namespace

RecurrenceTable::RecurrenceTable(int n, int l_max) : n_(n), l_max_(l_max) {
  if (n < 1) {
    throw InvalidConfiguration("beam count n must be positive, got " + std::to_string(n));
  }
  if (l_max < 0) {
    throw InvalidConfiguration("l_max must be non-negative, got " + std::to_string(l_max));
  }
  rows_.resize(static_cast<std::size_t>(l_max) + 1);
  rows_[0] = {Integer(1)};
  for (int l = 1; l <= l_max; ++l) {
    auto& row = rows_[static_cast<std::size_t>(l)];
    row.reserve(static_cast<std::size_t>(l / 2 + 1));
    for (int k = l % 2; k <= l; k += 2) {
      // P(k, l) = P(k-1, l-1) + (k+1)^n P(k+1, l-1)
      Integer value = at(k - 1, l - 1);
      const Integer& up = at(k + 1, l - 1);
      if (up != 0) {
        value += power(k + 1, n) * up;
      }
      row.push_back(std::move(value));
    }
  }
}

const Integer& RecurrenceTable::at(int k, int l) const {
  if (l > l_max_) {
    throw InvalidConfiguration("requested l=" + std::to_string(l) + " beyond table l_max=" + std::to_string(l_max_));
  }
  if (k < 0 || l < 0 || k > l || (l - k) % 2 != 0) {
    return kZero;
  }
  return rows_[static_cast<std::size_t>(l)][static_cast<std::size_t>(k / 2)];
}

void RecurrenceTable::write_csv(std::ostream& out) const {
  out << "k,l,n,value\n";
  for (int l = 0; l <= l_max_; ++l) {
    for (int k = l % 2; k <= l; k += 2) {
      out << k << ',' << l << ',' << n_ << ',' << at(k, l).get_str() << '\n';
    }
  }
}

RecurrenceTable build_p_table(int n, int l_max) { return RecurrenceTable(n, l_max); }

Integer p_explicit(int k, int n, int l) {
  if (k < 0 || l < k || n < 1) {
    throw InvalidConfiguration("p_explicit requires l >= k >= 0 and n >= 1");
  }
  if ((l - k) % 2 != 0) {
    throw InvalidConfiguration("p_explicit requires l - k even");
  }
  const int sums = (l - k) / 2;
  // inner[x] holds the innermost-so-far nested sum with upper limit x.
  // Level s reaches upper limits up to k + 1 + (sums - s).
  const int max_upper = k + 1 + sums;
  std::vector<Integer> inner(static_cast<std::size_t>(max_upper) + 2, Integer(1));
  for (int level = 1; level <= sums; ++level) {
    std::vector<Integer> next(inner.size(), Integer(0));
    Integer running(0);
    const int reach = k + 1 + (sums - level);
    for (int x = 1; x <= reach; ++x) {
      running += power(x, n) * inner[static_cast<std::size_t>(x) + 1];
      next[static_cast<std::size_t>(x)] = running;
    }
    inner = std::move(next);
  }
  return inner[static_cast<std::size_t>(k) + 1];
}

Integer ladder_coefficient(int n, int l, int p) {
  if (n < 1 || l < 0 || p < 0) {
    throw InvalidConfiguration("ladder_coefficient requires n >= 1 and non-negative l, p");
  }
  if (l > p) {
    return Integer(0);
  }
  Integer out(1);
  for (int j = 1; j <= l; ++j) {
    out *= power(p - j + 1, n);
  }
  return out;
}

FormalSeries c_series(const RecurrenceTable& table, int k, int terms) {
  if (k < 0 || terms < 1) {
    throw InvalidConfiguration("c_series requires k >= 0 and at least one term");
  }
  FormalSeries series{k, table.n(), {}};
  series.coeffs.reserve(static_cast<std::size_t>(terms));
  for (int j = 0; j < terms; ++j) {
    const int l = k + 2 * j;
    Rational c(table.at(k, l), factorial(l));
    c.canonicalize();
    series.coeffs.push_back(std::move(c));
  }
  return series;
}

FormalSeries c_series(int k, int n, int terms) {
  if (k < 0 || terms < 1) {
    throw InvalidConfiguration("c_series requires k >= 0 and at least one term");
  }
  return c_series(build_p_table(n, k + 2 * (terms - 1)), k, terms);
}

}  // namespace bghz
