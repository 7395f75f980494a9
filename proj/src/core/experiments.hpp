#pragma once

/*
 * End-to-end experiment drivers.
 *
 * The mixing diagnostic estimates mu(phi_t A cap B) by Monte-Carlo over
 * rectangles A = base interval x height interval (their measure is exact
 * since the flow's invariant measure is dx dy with total mass int f = 1).
 * The non-mixing signature follows the rigidity mechanism: along the
 * balanced subsequence, E_k carries near-period t_k = mean of S_f^{r_k}.
 * The probe rectangle A_k sits over the base of the rigidity tower (the
 * footprint of the column containing E_k): the whole induced piece that
 * J_k sits in returns to that base after exactly r_k steps, so the
 * horizontal return is certain and only the vertical displacement
 * t_k - S_f^{r_k}(x), bounded by the stretch spread, can move points out
 * of A_k.  A correlation at time t_k that stays above the mu(A)^2 mixing
 * baseline by a margin is the signature.  The contrast sweeps (spread,
 * cancellation, bound checks with frozen constants) compare symmetric
 * and asymmetric roofs over the same base dynamics.
 *
 * Verdicts are signatures, never proofs.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "logflow.hpp"
#include "rigidity.hpp"
#include "towers.hpp"

namespace ietlab {

struct Rect {
    double x0, x1;  // base interval
    double y0, y1;  // height interval; y1 must stay below f on [x0,x1)
    double measure() const { return (x1 - x0) * (y1 - y0); }
};

struct CorrEstimate {
    double estimate;  // mu(phi_t A cap B) estimate
    double stderr_;   // binomial
    long samples;
    int singular_retries;
};

/* samples p uniform in A, tests phi_t(p) in B, scales the hit rate by mu(A) */
CorrEstimate estimate_correlation(const Iet& T, const Roof& roof, const Rect& A, const Rect& B,
                                  double t, long samples, uint64_t seed);

struct CorrelationRow {
    int k;
    size_t level;
    long r_k;
    double t;
    double estimate, stderr_;
    double muA, muB;
    std::string kind;  // "rigidity" or "generic"
};

struct NonmixingResult {
    std::vector<CorrelationRow> rows;
    bool signature;       // every tested rigidity time cleared the margin
    double margin;        // required excess over mu(A)^2, in units of mu(A)
    std::string verdict;  // "NON_MIXING_SIGNATURE" or "NO_SIGNATURE"
    int tested_k;
};

/* the last `want` balanced levels whose rigidity sets verify with
   r_k <= rk_cap, in ascending r_k order */
std::vector<RigiditySet> collect_rigidity_sets(const InductionPath& path, double nu, double beta,
                                               long rk_cap, int want);

/* Builds rigidity sets along the balanced subsequence (largest `want_k`
   feasible levels under rk_cap), sets t_k = mean S_f^{r_k} over E_k, and
   estimates the return correlation of the tower-base rectangle
   A_k = I^(n_k)_{j0} x [0, y1] at t_k and at the detuned generic time
   1.37 t_k.  y1 = min(col_height, 0.9 min f on the base): an absolute
   column height keeps the probe sensitive to vertical smearing even when
   the base sits near a singularity where the roof towers above 1. */
NonmixingResult nonmixing_experiment(const InductionPath& path, const Roof& roof, double nu,
                                     double beta, long rk_cap, long samples, uint64_t seed,
                                     double margin = 0.1, int want_k = 3,
                                     double col_height = 0.35);

struct DeviationRow {
    size_t m, n;
    long gap;
    double max_eps;
};

struct DeviationDecay {
    std::vector<DeviationRow> rows;
    double slope, intercept, r2;  // least squares of ln max_eps vs gap
};

/* deviation tables over all balanced pairs, with a log-linear decay fit */
DeviationDecay deviation_decay_experiment(const InductionPath& path, double nu,
                                          size_t max_pairs = 400);

struct ProgressionFit {
    size_t sing_index;
    bool right_side;
    long points;
    double slope;    // least squares through the origin of dist(j) vs j
    double target;   // lambda^(n)_{j0} / delta^(n)_{j0} = 1 / h_{j0}
    double max_rel_residual;
    double median_rel_lo;  // median relative residual over j in [1, sqrt r]
    double median_rel_hi;  // over j in (sqrt r, r]
};

/* ordered-distance progression x_i(j) ~ j * lambda_{j0}/delta_{j0} at a
   balanced level, from the centered base point of the big tower */
ProgressionFit progression_experiment(const InductionPath& path, const Roof& roof,
                                      size_t sing_index, bool right_side, size_t level);

struct CancellationRow {
    size_t n;
    int j;             // tower realizing the max of |S_{f'}|/h
    long h;            // big-tower height (the level scale)
    double sum_abs;    // |S_{f'}^{h_j}| at the maximizing grid point
    double per_h;      // max over grid points of |S_{f'}^{h_j}| / h_j
    double per_hlogh;  // max over grid points of |S_{f'}^{h_j}| / (h_j ln h_j)
};

struct CancellationTable {
    std::vector<CancellationRow> symmetric;
    std::vector<CancellationRow> asymmetric;
};

/*
 * Derivative sums for both roofs at every balanced time with big-tower
 * height <= hcap, evaluated at the centers of a fixed 8-cell split of
 * every tower base, max per level.  A single point can cancel
 * accidentally at one level (the exact base midpoint does so on alternate
 * golden levels, where reflection conjugates T to its inverse) and sink
 * the series minimum; the grid max is pinned by the closest singular
 * approach, which scales like h, so the series tracks the sup bound.
 * Callers window the rows (last 4, first vs rest) as needed.
 */
CancellationTable cancellation_experiment(const InductionPath& path, const Roof& sym,
                                          const Roof& asym, double nu, long hcap);

struct BoundSweepRow {
    size_t n;
    long h;
    double lhs, rhs;
    bool ok;
};

struct BoundSweep {
    double M;            // fitted on the prefix, then frozen
    size_t fit_prefix;   // number of leading balanced times used for the fit
    std::vector<BoundSweepRow> rows;  // all tested times, prefix included
    bool all_ok_after_fit;
};

/* fits M on the first fit_prefix balanced times (largest (lhs - singular
   terms)/h, clamped at 0) and checks the linear-growth bound at every
   later balanced time with height <= hcap */
BoundSweep bound_sweep(const InductionPath& path, const Roof& roof, double nu, long hcap,
                       size_t fit_prefix = 4);

}  // namespace ietlab
