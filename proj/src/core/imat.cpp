#include "imat.hpp"

namespace ietlab {

IMat IMat::identity(int dim) {
    IMat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1;
    return m;
}

IMat IMat::operator*(const IMat& o) const {
    IMat r(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const mpz_class& aik = at(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < n; ++j) r.at(i, j) += aik * o.at(k, j);
        }
    return r;
}

std::vector<mpz_class> IMat::operator*(const std::vector<mpz_class>& v) const {
    std::vector<mpz_class> r(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[i] += at(i, j) * v[j];
    return r;
}

IMat IMat::transpose() const {
    IMat r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.at(j, i) = at(i, j);
    return r;
}

mpz_class IMat::det() const {
    /* Bareiss: division-free growth control, exact for integer matrices */
    IMat m = *this;
    mpz_class prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m.at(k, k) == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (m.at(i, k) != 0) { p = i; break; }
            if (p < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                mpz_class t = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                mpz_divexact(m.at(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
        prev = m.at(k, k);
    }
    return sign * m.at(n - 1, n - 1);
}

mpz_class IMat::norm_sum() const {
    mpz_class s = 0;
    for (const mpz_class& x : a) s += abs(x);
    return s;
}

bool IMat::strictly_positive() const {
    for (const mpz_class& x : a)
        if (x <= 0) return false;
    return true;
}

bool IMat::nonnegative() const {
    for (const mpz_class& x : a)
        if (x < 0) return false;
    return true;
}

long IMat::max_entry_bits() const {
    size_t bits = 1;
    for (const mpz_class& x : a) bits = std::max(bits, mpz_sizeinbase(x.get_mpz_t(), 2));
    return static_cast<long>(bits);
}

std::string IMat::str() const {
    std::string out = "[";
    for (int i = 0; i < n; ++i) {
        out += i ? "; " : "";
        for (int j = 0; j < n; ++j) {
            if (j) out += " ";
            out += at(i, j).get_str();
        }
    }
    return out + "]";
}

std::vector<Real> apply_real(const IMat& A, const std::vector<Real>& v, mpfr_prec_t prec) {
    std::vector<Real> r(A.n, Real(prec));
    for (int i = 0; i < A.n; ++i) {
        Real acc(0.0, prec);
        for (int j = 0; j < A.n; ++j) {
            Real t(prec);
            mpfr_mul_z(t.raw(), v[j].raw(), A.at(i, j).get_mpz_t(), MPFR_RNDN);
            acc += t;
        }
        r[i] = acc;
    }
    return r;
}

}  // namespace ietlab
