#pragma once

/*
 * Shared test fixtures.
 *
 * golden_iet(pb): the rotation by the inverse golden ratio as a d=2
 * exchange, with lambda_0 the pb-bit rounding of 1/phi and lambda_1 its
 * exact complement (2^pb - m fits in pb bits whenever m > 2^(pb-1), so
 * both lengths are exact pb-bit dyadics summing to exactly 1).  Its
 * continued fraction is [0; 2, 1, 1, ...] up to the dyadic truncation
 * depth, so Zorich substeps are 2, 1, 1, ... and heights are Fibonacci.
 */

#include <vector>

#include "core/iet.hpp"
#include "core/real.hpp"

namespace ietlab_test {

inline ietlab::Iet golden_iet(mpfr_prec_t pb) {
    using ietlab::Real;
    Real five(5.0, pb + 16);
    Real l0 = ((five.sqrt() - Real(1.0, pb + 16)) / Real(2.0, pb + 16)).round_to(pb);
    Real l1(pb);
    mpfr_ui_sub(l1.raw(), 1, l0.raw(), MPFR_RNDN);  // exact: see header comment
    return ietlab::Iet({l0, l1}, ietlab::Permutation::parse("2 1"), pb);
}

/* Fibonacci with F(1) = F(2) = 1 */
inline mpz_class fib(long n) {
    mpz_class a = 0, b = 1;
    for (long i = 0; i < n; ++i) {
        mpz_class t = a + b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace ietlab_test
