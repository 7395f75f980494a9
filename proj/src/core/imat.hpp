#pragma once

/*
 * Small dense matrices over the integers (GMP), used for Rauzy-Veech and
 * Zorich cocycle blocks.  Everything here is exact; entries grow to
 * thousands of bits along long paths and that is fine.
 *
 * Norm convention throughout the lab: ||A|| = sum of |entries|.
 */

#include <gmpxx.h>

#include <string>
#include <vector>

#include "real.hpp"

namespace ietlab {

struct IMat {
    int n = 0;
    std::vector<mpz_class> a;  // row-major

    IMat() = default;
    explicit IMat(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0) {}
    static IMat identity(int dim);

    mpz_class& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const mpz_class& at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    IMat operator*(const IMat& o) const;
    std::vector<mpz_class> operator*(const std::vector<mpz_class>& v) const;
    IMat transpose() const;
    bool operator==(const IMat&) const = default;

    mpz_class det() const;       // fraction-free (Bareiss)
    mpz_class norm_sum() const;  // sum |a_ij|
    bool strictly_positive() const;
    bool nonnegative() const;
    long max_entry_bits() const;

    std::string str() const;  // for logs/tests
};

/* matrix-vector product in Real arithmetic at the given precision */
std::vector<Real> apply_real(const IMat& A, const std::vector<Real>& v, mpfr_prec_t prec);

}  // namespace ietlab
