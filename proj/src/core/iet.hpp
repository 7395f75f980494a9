#pragma once

/*
 * Interval exchange transformations T = (lambda, pi) on [0,1).
 *
 * Conventions.  Subintervals are half-open, indexed 0..d-1 left to right:
 * I_j = [L_j, L_{j+1}) with L_j = sum_{i<j} lambda_i.  pi[j] is the image
 * position of interval j, so T translates I_j onto the pi[j]-th interval
 * of the rearranged partition:
 *     T(x) = x - L_j + sum_{i : pi[i] < pi[j]} lambda_i   for x in I_j.
 *
 * Lengths are dyadic rationals (precision_bits-bit mantissas).  Orbits of
 * dyadic points are computed exactly: every orbit point is a multiple of
 * 2^-precision_bits in [0,1), so a fixed guard precision suffices and no
 * rounding ever occurs.  Equality tests are therefore exact; proximity
 * below tau = 2^-(precision_bits/2) without exact equality reports
 * precision exhaustion instead of guessing.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "real.hpp"

namespace ietlab {

struct Permutation {
    std::vector<int> img;  // 0-based image positions

    int size() const { return static_cast<int>(img.size()); }
    int operator[](int j) const { return img[j]; }
    std::vector<int> inverse() const;
    bool operator==(const Permutation&) const = default;
    bool operator<(const Permutation& o) const { return img < o.img; }

    /* 1-based external form: "2 1", "(5 4 3 2 1)", or "5,4,3,2,1" */
    static Permutation parse(const std::string& s);
    std::string str() const;
};

/* no pi-invariant prefix {0..k}, k < d-1 */
bool is_irreducible(const Permutation& p);
/* length of the smallest invariant prefix {1..k}, k < d; -1 if irreducible */
int reducible_prefix(const Permutation& p);

class Iet {
  public:
    Iet(std::vector<Real> lengths, Permutation perm, mpfr_prec_t precision_bits);

    int d() const { return perm_.size(); }
    const Permutation& perm() const { return perm_; }
    const std::vector<Real>& lengths() const { return lengths_; }
    mpfr_prec_t precision_bits() const { return pb_; }
    const Real& tolerance() const { return tau_; }

    /* sorted 0 = z_0 < z_1 < ... < z_d = 1 (left endpoints plus 1) */
    const std::vector<Real>& discontinuities() const { return cumL_; }

    /* index j with L_j <= x < L_{j+1} */
    int subinterval(const Real& x) const;
    Real evaluate(const Real& x) const;
    Real evaluate_inverse(const Real& y) const;
    Real iterate(const Real& x, long n) const;  // n may be negative
    /* translation offset applied on subinterval j */
    const Real& offset(int j) const { return off_[j]; }

    std::string to_json() const;
    static Iet from_json(const std::string& json);

    /* precision at which orbit arithmetic is exact: lengths have mantissas
       of precision_bits and magnitude >= tau, so every cut point and orbit
       point is a multiple of 2^-(precision_bits * 3/2) */
    mpfr_prec_t work_prec() const { return pb_ + pb_ / 2 + 24; }

  private:
    Permutation perm_;
    std::vector<int> pinv_;
    std::vector<Real> lengths_;
    mpfr_prec_t pb_;
    Real tau_;
    std::vector<Real> cumL_;  // d+1 domain cut points
    std::vector<Real> imgL_;  // d+1 image cut points
    std::vector<Real> off_;   // per-interval translation
};

/* lambda ~ Dirichlet(1,...,1) via normalized -log of uniform dyadics;
   component i uses stream (seed, i+1), so leading digits are stable
   across precision_bits for a fixed seed. */
Iet sample_iet(const Permutation& perm, uint64_t seed, mpfr_prec_t precision_bits);

struct KeaneReport {
    bool ok;
    long iterate;             // first collision step when !ok
    std::string description;  // what collided
};

/* Iterates every interior discontinuity `depth` steps looking for an exact
   collision among orbit points and discontinuities.  Near-collision within
   tau without exact equality raises PrecisionExhausted. */
KeaneReport check_keane(const Iet& T, long depth);

}  // namespace ietlab
