#pragma once

/*
 * Rigidity sets from big Rohlin towers.
 *
 * At a balanced level n pick the tower j0 maximizing h_j lambda_j (>= 1/d
 * by pigeonhole).  The first-return map of T to the tower base I^(n)_{j0}
 * is an IET of at most d+2 subintervals; pick the widest piece (width >=
 * parent/(d+2)), shrink it to the centered fraction beta, and call that
 * J_k.  The set E_k = union of T^i J_k over the tower levels i < h_{j0}
 * then has measure h_{j0} Leb(J_k) >= beta/(d(d+2)), and r_k = first
 * return time of the chosen piece acts on E_k as a near-identity: each
 * floor slice returns into its own floor.
 *
 * Return times grow with the tower heights, so the return map is computed
 * by walking the level-n induced map (one step per tower traversal, r_k
 * recovered exactly as sum of visit counts times heights) rather than one
 * T-step at a time.  Verification runs the same accelerated walk of J_k,
 * certifies disjointness per tower from the landing positions, and when
 * r_k is small enough re-walks the whole orbit under T directly as an
 * independent route; for large r_k the direct route checks a prefix.
 *
 * All interval arithmetic here is exact (dyadic endpoints, straddle
 * checks at every step); verification failures throw rather than round.
 */

#include <vector>

#include "towers.hpp"

namespace ietlab {

struct InducedIet {
    Real parent_a, parent_b;        // inducing interval [a,b)
    std::vector<Real> cuts;         // m+1 cut points, cuts[0]=a, cuts[m]=b
    std::vector<long> return_times; // per piece, in steps of the walked map
    std::vector<Real> image_left;   // landing position of each piece in [a,b)
    std::vector<std::vector<long>> visits;  // per piece: visit count per subinterval
    size_t pieces() const { return return_times.size(); }
};

/* First-return map of T to [a,b) by exact forward interval splitting.
   A piece needing more than max_steps applications raises RunTooLong. */
InducedIet induce_on_interval(const Iet& T, const Real& a, const Real& b, long max_steps);

/* Same, but walking the level-n induced map of a chart; one step covers a
   whole tower, so T-return times are sum_j visits[j] * heights[j]. */
InducedIet induce_on_chart(const LevelChart& ch, const Real& a, const Real& b, long max_steps);

/* argmax of h_j lambda_j, ties to the smallest index (exact comparison) */
int select_big_tower(const TowerSystem& ts);
/* argmax piece width, ties to the smallest index */
int select_big_subinterval(const InducedIet& ind);

struct RigiditySet {
    size_t level;      // n_k
    int j0;            // big tower
    int l0;            // chosen piece of the induced map
    Real parent_a, parent_b;  // I^(n_k)_{j0}
    Real Jk_a, Jk_b;   // centered beta-fraction of the chosen piece
    long r_k;          // first-return time of the piece under T
    long height;       // h_{j0}
    Real measure;      // height * Leb(J_k)
    double beta;
};

/* max_return caps r_k in T-steps; max_return <= 0 means machine range only */
RigiditySet build_rigidity_set(const InductionPath& path, size_t n_k, double beta = 0.5,
                               long max_return = 0);

struct RigidityCheck {
    bool measure_ok;        // measure >= beta/(d(d+2))
    bool floors_ok;         // T^{r_k}(F cap E_k) subset F for every floor F
    bool disjoint_ok;       // T^i J_k, 0 <= i < r_k pairwise disjoint
    bool return_ok;         // r_k recomputed from the J_k walk agrees
    double alpha;           // the measure bound used
    long direct_steps;      // T-steps replayed by the direct route
    bool ok() const { return measure_ok && floors_ok && disjoint_ok && return_ok; }
};

/* Certifies the rigidity properties with exact interval arithmetic: the
   accelerated level walk always runs; the direct T-walk replays the full
   orbit when r_k <= direct_cap and a bounded prefix otherwise.
   Structural breakage (a slice straddling a discontinuity mid-flight)
   throws VerificationFailed; a clean negative result is reported. */
RigidityCheck verify_rigidity(const InductionPath& path, const RigiditySet& rs,
                              long direct_cap = 200000);

}  // namespace ietlab
