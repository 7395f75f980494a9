#include "real.hpp"

#include <cstdlib>

namespace ietlab {

Real Real::from_string(const std::string& s, mpfr_prec_t prec) {
    Real r(prec);
    /* base 0: auto-detects 0x / 0b prefixes, else decimal */
    if (mpfr_set_str(r.v_, s.c_str(), 0, MPFR_RNDN) != 0 && mpfr_nan_p(r.v_)) {
        throw UsageError("unparseable real literal: " + s);
    }
    return r;
}

Real Real::pow2(long e, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_ui_2exp(r.v_, 1, e, MPFR_RNDN);
    return r;
}

Real Real::round_to(mpfr_prec_t prec) const {
    Real r(prec);
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
}

std::string Real::to_hex() const {
    char* buf = nullptr;
    /* %Ra prints the exact value (hex mantissa, binary exponent) */
    if (mpfr_asprintf(&buf, "%Ra", v_) < 0) throw Error(errc::internal, "mpfr_asprintf failed");
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

std::string Real::to_decimal(size_t digits) const {
    char* buf = nullptr;
    if (mpfr_asprintf(&buf, "%.*Rg", static_cast<int>(digits), v_) < 0)
        throw Error(errc::internal, "mpfr_asprintf failed");
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

Real Real::operator-() const {
    Real r(prec());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
}

#define IETLAB_BINOP(name, fn)                          \
    Real Real::operator name(const Real& o) const {     \
        Real r(join(*this, o));                         \
        fn(r.v_, v_, o.v_, MPFR_RNDN);                  \
        return r;                                       \
    }
IETLAB_BINOP(+, mpfr_add)
IETLAB_BINOP(-, mpfr_sub)
IETLAB_BINOP(*, mpfr_mul)
#undef IETLAB_BINOP

Real Real::operator/(const Real& o) const {
    if (o.is_zero()) throw Error(errc::internal, "division by exact zero");
    Real r(join(*this, o));
    mpfr_div(r.v_, v_, o.v_, MPFR_RNDN);
    return r;
}

Real Real::abs() const {
    Real r(prec());
    mpfr_abs(r.v_, v_, MPFR_RNDN);
    return r;
}

Real Real::log() const {
    if (sign() <= 0) throw Error(errc::internal, "log of non-positive value");
    Real r(prec());
    mpfr_log(r.v_, v_, MPFR_RNDN);
    return r;
}

Real Real::exp() const {
    Real r(prec());
    mpfr_exp(r.v_, v_, MPFR_RNDN);
    return r;
}

Real Real::sqrt() const {
    if (sign() < 0) throw Error(errc::internal, "sqrt of negative value");
    Real r(prec());
    mpfr_sqrt(r.v_, v_, MPFR_RNDN);
    return r;
}

Real Real::floor() const {
    Real r(prec());
    mpfr_floor(r.v_, v_);
    return r;
}

Real Real::cos() const {
    Real r(prec());
    mpfr_cos(r.v_, v_, MPFR_RNDN);
    return r;
}

Real Real::sin() const {
    Real r(prec());
    mpfr_sin(r.v_, v_, MPFR_RNDN);
    return r;
}

Real Real::pi(mpfr_prec_t prec) {
    Real r(prec);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
}

Real Real::frac() const {
    /* exact: floor is exact and the subtraction fits in max precision */
    Real f = floor();
    Real r(prec());
    mpfr_sub(r.v_, v_, f.v_, MPFR_RNDN);
    if (r.sign() < 0) { /* guard against -0 style edge */
        mpfr_add_ui(r.v_, r.v_, 1, MPFR_RNDN);
    }
    return r;
}

}  // namespace ietlab
