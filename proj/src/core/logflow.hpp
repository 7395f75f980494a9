#pragma once

/*
 * Roof functions with logarithmic singularities and the special flow.
 *
 * With u(x) = 1/{x}, v(x) = 1/(1-{x}) (1-periodic), a roof with right
 * singularities z+_i (constants C+_i) and left singularities z-_i (C-_i)
 * and a trigonometric smooth part g is
 *
 *   f(x)  = norm * ( sum_i C+_i |ln {x - z+_i}| + sum_i C-_i |ln {z-_i - x}| + g(x) )
 *   f'(x) = norm * ( sum_i C-_i v(x - z-_i)    - sum_i C+_i u(x - z+_i)    + g'(x) )
 *
 * norm makes the integral 1: each |ln| term integrates to 1 over a period
 * and the DC-free trigonometric g to 0, so norm = 1/(sum C+ + sum C-)
 * exactly.  The singularities are symmetric when sum C+ = sum C-.
 *
 * The special flow moves (x,y) up at unit speed under the graph of f and
 * jumps (x, f(x)) -> (Tx, 0): phi_t(x,0) = (T^{r(x,t)} x, t - S_f^{r(x,t)}(x))
 * with r(x,t) = max { r : S_f^r(x) < t }.
 *
 * Everything here is the multiprecision reference implementation; the
 * double-precision engine used for large Monte-Carlo sweeps lives in
 * fastflow and is cross-checked against this one.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "renorm.hpp"
#include "rigidity.hpp"

namespace ietlab {

struct RoofSing {
    Real z;  // position; right in [0,1), left in (0,1]
    Real C;  // strictly positive constant
};

struct RoofSpec {
    std::vector<RoofSing> right;
    std::vector<RoofSing> left;
    /* g(x) = sum_m cos_coefs[m] cos(2 pi (m+1) x) + sin_coefs[m] sin(2 pi (m+1) x) */
    std::vector<double> cos_coefs;
    std::vector<double> sin_coefs;

    /* TOML: [[right]] z=, C= / [[left]] z=, C= / [smooth] cos=[...], sin=[...] */
    static RoofSpec from_toml(const std::string& text, mpfr_prec_t prec);
    std::string to_toml() const;

    /* single pair at z+=0, z-=1 */
    static RoofSpec single_pair(double cplus, double cminus, mpfr_prec_t prec);
    /* s1 = s2 = s (even), constants in equal quadruples (C+_{2q} = C+_{2q+1} =
       C-_{2q} = C-_{2q+1} = q+1), positions equally spaced; always symmetric */
    static RoofSpec hamiltonian_quadruples(int s, mpfr_prec_t prec);
};

class Roof {
  public:
    Roof(RoofSpec spec, mpfr_prec_t prec);

    const RoofSpec& spec() const { return spec_; }
    mpfr_prec_t prec() const { return prec_; }
    const Real& normalization() const { return norm_; }
    const Real& tolerance() const { return tau_; }
    bool symmetric() const { return symmetric_; }
    size_t s1() const { return spec_.right.size(); }
    size_t s2() const { return spec_.left.size(); }

    /* normalized f and f'; SingularHit(iterate=-1) within tau of a singularity */
    Real value(const Real& x) const;
    Real derivative(const Real& x) const;
    /* unnormalized smooth part and its derivative */
    Real smooth(const Real& x) const;
    Real smooth_derivative(const Real& x) const;

  private:
    RoofSpec spec_;
    mpfr_prec_t prec_;
    Real norm_;
    Real tau_;
    bool symmetric_;
};

/* S_f^r(x) = sum_{i<r} f(T^i x); S^0 = 0; derivative=true sums f' instead.
   SingularHit carries the offending iterate index. */
Real birkhoff_sum(const Iet& T, const Roof& roof, const Real& x, long r, bool derivative = false);

/* r(x,t) = max { r : S_f^r(x) < t } for t > 0, by incremental summation */
long return_count(const Iet& T, const Roof& roof, const Real& x, const Real& t,
                  long cap = 100000000);

struct FlowPoint {
    Real x, y;
};

/* phi_t(x,y); t of any sign; requires 0 <= y < f(x) */
FlowPoint flow_map(const Iet& T, const Roof& roof, const FlowPoint& p, const Real& t,
                   long cap = 100000000);

struct MinDistances {
    std::vector<Real> x_min;  // per right singularity
    std::vector<Real> y_min;  // per left singularity
};

/* componentwise minima of {T^s z0 - z+_i} and {z-_i - T^s z0} over 0 <= s < r;
   distances mod 1, matching the 1-periodic kernels */
MinDistances min_distances(const Iet& T, const Roof& roof, const Real& z0, long r);

struct BoundCheck {
    double lhs, rhs;
    bool ok;
    long r;
    std::vector<double> x_min, y_min;
};

/* |S_{f'}^{h_j}(z0)| <= M h_j + sum C+_i/x_i^min + sum C-_i/y_i^min at the
   centered base point z0 of I^(n)_j (constants normalized like f') */
BoundCheck tower_derivative_bound_check(const InductionPath& path, const Roof& roof, size_t n,
                                        int j, double M);

/* same inequality with constant M' for arbitrary z0 in I^(n)_j and r <= h_j */
BoundCheck general_sum_bound_check(const InductionPath& path, const Roof& roof, size_t n, int j,
                                   const Real& z0, long r, double Mprime);

struct TowerSegment {
    Real start;  // orbit point opening the segment
    int tower;   // j
    long len;    // steps spent in this segment
    bool full;   // len == h_j (a complete ride from the base)
};

/* Cuts the orbit segment z0, ..., T^{r-1} z0 at its visits to the level-n
   inducing interval: one possibly partial leading segment, full tower rides,
   and one remainder. Sum of lengths = r. */
std::vector<TowerSegment> decompose_along_towers(const InductionPath& path, size_t n,
                                                 const Real& z0, long r);

struct StretchReport {
    int k = -1;   // position in the balanced subsequence (filled by the sweep)
    size_t level; // n_k
    long r_k;
    int samples;
    double max_sum, min_sum;
    double mean_sum;
    double spread;  // max - min
    int singular_retries;
};

/* Samples E_k (uniform floor level x uniform position in J_k), computes
   S_f^{r_k} with the double-precision engine, reports the spread. */
StretchReport stretch_over_rigidity_set(const InductionPath& path, const Roof& roof,
                                        const RigiditySet& rs, int samples, uint64_t seed);

}  // namespace ietlab
