#include "bghz/real.hpp"

#include <algorithm>
#include <utility>

#include "bghz/errors.hpp"

namespace bghz {

namespace {

mpfr_prec_t checked_bits(mpfr_prec_t bits) {
  if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) {
    throw InvalidConfiguration("precision out of MPFR range: " + std::to_string(bits));
  }
  return bits;
}

// Raises the precision of lhs to cover rhs, keeping its value.
void widen(mpfr_ptr lhs, mpfr_srcptr rhs) {
  if (mpfr_get_prec(rhs) > mpfr_get_prec(lhs)) {
    mpfr_prec_round(lhs, mpfr_get_prec(rhs), MPFR_RNDN);
  }
}

}  // namespace

Real::Real(mpfr_prec_t bits) {
  mpfr_init2(value_, checked_bits(bits));
  mpfr_set_zero(value_, 1);
}

Real::Real(double value, mpfr_prec_t bits) : Real(bits) { mpfr_set_d(value_, value, MPFR_RNDN); }

Real::Real(const mpq_class& value, mpfr_prec_t bits) : Real(bits) {
  mpfr_set_q(value_, value.get_mpq_t(), MPFR_RNDN);
}

Real::Real(const std::string& decimal, mpfr_prec_t bits) : Real(bits) {
  if (mpfr_set_str(value_, decimal.c_str(), 10, MPFR_RNDN) != 0) {
    throw InvalidConfiguration("not a decimal number: " + decimal);
  }
}

Real::Real(const Real& other) {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
  // Steal by swapping with a minimal placeholder so the moved-from object stays valid.
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other) {
  if (this != &other) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  if (this != &other) {
    mpfr_swap(value_, other.value_);
  }
  return *this;
}

Real::~Real() { mpfr_clear(value_); }

std::string Real::to_string(int digits) const {
  char* raw = nullptr;
  mpfr_asprintf(&raw, "%.*Rg", digits, value_);
  std::string out(raw);
  mpfr_free_str(raw);
  return out;
}

Real& Real::operator+=(const Real& rhs) {
  widen(value_, rhs.value_);
  mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator-=(const Real& rhs) {
  widen(value_, rhs.value_);
  mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator*=(const Real& rhs) {
  widen(value_, rhs.value_);
  mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator/=(const Real& rhs) {
  widen(value_, rhs.value_);
  mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real operator-(Real value) {
  mpfr_neg(value.get(), value.get(), MPFR_RNDN);
  return value;
}

Real abs(Real value) {
  mpfr_abs(value.get(), value.get(), MPFR_RNDN);
  return value;
}

Real exp(const Real& value) {
  Real out(value.bits());
  mpfr_exp(out.get(), value.get(), MPFR_RNDN);
  return out;
}

Real pow2(long exponent, mpfr_prec_t bits) {
  Real out(1.0, bits);
  mpfr_mul_2si(out.get(), out.get(), exponent, MPFR_RNDN);
  return out;
}

}  // namespace bghz
