#pragma once

/*
 * Arbitrary-precision binary floating point on top of MPFR.
 *
 * Every Real carries its own precision (bits of mantissa).  Binary
 * operations round to the larger of the two operand precisions, so
 * precision never degrades silently along a computation; narrowing is
 * explicit via round_to().  Values are exact dyadic rationals, which the
 * induction layer exploits: orbits of dyadic IETs stay exact as long as
 * enough mantissa is carried.
 *
 * Serialization uses C99 hex floats ("0x1.8p-1"), which round-trip
 * exactly at any precision.
 */

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

#include "errors.hpp"

namespace ietlab {

class Real {
  public:
    Real() { mpfr_init2(v_, 53); mpfr_set_zero(v_, 1); }
    explicit Real(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Real(double x, mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_d(v_, x, MPFR_RNDN); }
    Real(long x, mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_si(v_, x, MPFR_RNDN); }

    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(v_, 53); mpfr_swap(v_, o.v_); }
    Real& operator=(const Real& o) {
        if (this != &o) { mpfr_set_prec(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
        return *this;
    }
    Real& operator=(Real&& o) noexcept { if (this != &o) mpfr_swap(v_, o.v_); return *this; }
    ~Real() { mpfr_clear(v_); }

    static Real from_string(const std::string& s, mpfr_prec_t prec);  // decimal or 0x hex
    static Real pow2(long e, mpfr_prec_t prec);                       // 2^e exactly

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    Real round_to(mpfr_prec_t prec) const;

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    std::string to_hex() const;                   // exact, "0x..p.." form
    std::string to_decimal(size_t digits) const;  // for display only

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    int cmp(const Real& o) const { return mpfr_cmp(v_, o.v_); }

    bool operator<(const Real& o) const { return cmp(o) < 0; }
    bool operator<=(const Real& o) const { return cmp(o) <= 0; }
    bool operator>(const Real& o) const { return cmp(o) > 0; }
    bool operator>=(const Real& o) const { return cmp(o) >= 0; }
    bool operator==(const Real& o) const { return cmp(o) == 0; }
    bool operator!=(const Real& o) const { return cmp(o) != 0; }

    Real operator-() const;
    Real operator+(const Real& o) const;
    Real operator-(const Real& o) const;
    Real operator*(const Real& o) const;
    Real operator/(const Real& o) const;
    Real& operator+=(const Real& o) { *this = *this + o; return *this; }
    Real& operator-=(const Real& o) { *this = *this - o; return *this; }
    Real& operator*=(const Real& o) { *this = *this * o; return *this; }
    Real& operator/=(const Real& o) { *this = *this / o; return *this; }

    Real abs() const;
    Real log() const;   // domain checked
    Real exp() const;
    Real sqrt() const;  // domain checked
    Real floor() const;
    Real frac() const;  // x - floor(x), in [0,1)
    Real cos() const;
    Real sin() const;
    static Real pi(mpfr_prec_t prec);

    /* Raw handle for the few call sites (mpz bridging, printf) that need it. */
    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

  private:
    mpfr_t v_;

    static mpfr_prec_t join(const Real& a, const Real& b) {
        mpfr_prec_t pa = mpfr_get_prec(a.v_), pb = mpfr_get_prec(b.v_);
        return pa > pb ? pa : pb;
    }
};

inline Real min(const Real& a, const Real& b) { return a < b ? a : b; }
inline Real max(const Real& a, const Real& b) { return a > b ? a : b; }

}  // namespace ietlab
