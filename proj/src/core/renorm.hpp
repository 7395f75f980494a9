#pragma once

/*
 * Rauzy-Veech induction and Zorich acceleration with exact integer
 * bookkeeping.
 *
 * Step conventions (classical single-permutation notation; intervals are
 * relabeled by position after each step).  Write e = d-1 (last index,
 * 0-based), k = pi^-1(e) (interval sent to the last image position),
 * pe = pi(e).
 *
 * Type 'a'  (lambda_e > lambda_k): induce on [0, 1 - lambda_k).
 *   lengths:  lambda'_e = lambda_e - lambda_k, rest unchanged.
 *   perm:     pi'(j) = pi(j)        if pi(j) <= pe
 *             pi'(j) = pi(j) + 1    if pe < pi(j) < e
 *             pi'(k) = pe + 1.
 *   matrix:   Z = I + E(e,k), so lambda = Z lambda'.
 *
 * Type 'b'  (lambda_e < lambda_k): induce on [0, 1 - lambda_e).
 *   lengths:  lambda'_j = lambda_j (j < k), lambda'_k = lambda_k - lambda_e,
 *             lambda'_{k+1} = lambda_e, lambda'_j = lambda_{j-1} (j >= k+2).
 *   perm:     pi'(j) = pi(j) (j <= k), pi'(k+1) = pe, pi'(j) = pi(j-1) (j >= k+2).
 *   matrix:   row j<k: Z[j][j]=1;  row k: Z[k][k]=Z[k][k+1]=1;
 *             row k<j<e: Z[j][j+1]=1;  row e: Z[e][k+1]=1.
 *
 * Exact ties raise TieError (the input is degenerate for induction).
 *
 * A Zorich step groups the maximal run of same-type Rauzy steps.  The path
 * stores exact integer length numerators num^(n) with lambda^(n) =
 * num^(n) / 2^scale, so the cocycle identities
 *     num^(m) = Z^(m,n) num^(n),   h^(n) = (Z^(m,n))^T h^(m)
 * hold exactly, and det Z^(m,n) = +-1 exactly.  Induction stops with
 * PrecisionExhausted once |lambda^(n)| < 2^-(precision_bits/2): at that
 * point the dyadic input carries no further information.
 */

#include <cstdint>
#include <vector>

#include "iet.hpp"
#include "imat.hpp"

namespace ietlab {

enum class RauzyKind : char { a = 'a', b = 'b' };

/* combinatorial Rauzy moves (length-independent) */
Permutation rauzy_move_a(const Permutation& p);
Permutation rauzy_move_b(const Permutation& p);
/* BFS closure under both moves; result sorted */
std::vector<Permutation> rauzy_class(const Permutation& p);

struct StepRecord {
    RauzyKind type;
    long substeps;
    IMat Z;     // lambda^(n) = Z lambda^(n+1)
    IMat Zinv;  // exact inverse (product of elementary inverses)
    Permutation perm_after;
    std::vector<mpz_class> num_after;  // exact length numerators
    std::vector<mpz_class> h_after;    // heights h^(n+1)
};

struct InductionCaps {
    long substep_cap = 1000000;  // Rauzy substeps per Zorich step
    /* when true, running out of dyadic budget truncates the path (flagged
       via budget_exhausted()) instead of throwing PrecisionExhausted */
    bool stop_on_budget = false;
};

class InductionPath {
  public:
    InductionPath(Iet base, size_t zorich_steps, InductionCaps caps = {});

    bool budget_exhausted() const { return budget_exhausted_; }

    const Iet& base() const { return base_; }
    size_t length() const { return steps_.size(); }
    long scale_exp() const { return scale_exp_; }  // lambda = num / 2^scale_exp
    const StepRecord& step(size_t k) const { return steps_[k]; }

    const Permutation& perm_at(size_t n) const;
    const std::vector<mpz_class>& num_at(size_t n) const;
    const std::vector<mpz_class>& heights_at(size_t n) const;

    IMat cocycle(size_t m, size_t n) const;      // Z^(m,n) = Z_m ... Z_{n-1}
    IMat cocycle_inv(size_t m, size_t n) const;  // exact inverse product

    /* |lambda^(n)| = sum of lengths of the inducing interval */
    Real lambda_norm(size_t n, mpfr_prec_t prec) const;
    /* solves Z^(0,n) x = lambda^(0) through the exact inverse product and
       cross-checks against the subtraction chain before converting */
    std::vector<Real> lengths_at(size_t n, mpfr_prec_t prec) const;
    std::vector<Real> renormalized_lengths(size_t n, mpfr_prec_t prec) const;
    /* renormalized induced IET R^n(T); for inspection and evaluation */
    Iet induced_iet(size_t n, mpfr_prec_t prec) const;

  private:
    Iet base_;
    long scale_exp_;
    mpz_class low_water_;  // PrecisionExhausted threshold on sum(num)
    bool budget_exhausted_ = false;
    Permutation perm0_;
    std::vector<mpz_class> num0_;
    std::vector<mpz_class> h0_;
    std::vector<StepRecord> steps_;
};

/* Unrenormalized chart of the level-n induced map acting on
   [0, |lambda^(n)|) in original coordinates: exact evaluation without
   building a renormalized Iet. */
struct LevelChart {
    size_t level;
    Permutation perm;
    Real norm;                    // |lambda^(n)|
    std::vector<Real> cumL;       // d+1 cut points
    std::vector<Real> widths;     // lengths
    std::vector<Real> off;        // translation per subinterval
    std::vector<mpz_class> heights;

    int subinterval(const Real& x) const;
    Real evaluate(const Real& x) const;  // one step of the induced map
};
LevelChart make_level_chart(const InductionPath& path, size_t n);

/* Hilbert projective metric on the positive cone, and Birkhoff-style
   contraction data for nonnegative matrices. */
Real hilbert_distance(const std::vector<Real>& u, const std::vector<Real>& v);
/* projective diameter D(A) = max over column pairs of d_H(A e_j, A e_k);
   +inf (mpfr inf) when columns have incompatible supports */
Real contraction_diameter(const IMat& A, mpfr_prec_t prec);
/* A u / |A u|_1 */
std::vector<Real> project_apply(const IMat& A, const std::vector<Real>& u, mpfr_prec_t prec);

/* ln of a positive big integer, as double */
double ln_mpz(const mpz_class& x);

/* Times n_k whose every backward block satisfies
   ln ||Z^(n,n_k)|| <= c1 * (n_k - n); operational stand-in for
   exponentially-bounded cocycle growth.  n_k = 0 qualifies vacuously but is
   omitted. */
std::vector<size_t> growth_times_exp_bound(const InductionPath& path, double c1);
/* Times m_k whose backward single-step norms satisfy
   ||Z_{m_k-1-n}|| <= c2 * exp(eps n) for all 0 <= n < m_k. */
std::vector<size_t> growth_times_subexp_bound(const InductionPath& path, double eps, double c2);

}  // namespace ietlab
