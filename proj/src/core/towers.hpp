#pragma once

/*
 * Rohlin towers over the induction levels.
 *
 * At level n the inducing interval [0, |lambda^(n)|) splits into
 * I^(n)_j, and the tower over I^(n)_j has height h^(n)_j; its floors
 * T^l I^(n)_j, 0 <= l < h_j, partition [0,1).  Visit counts between
 * levels are cocycle entries; the brute-force geometric count is kept as
 * an independent route and the two must agree exactly.
 *
 * A level is nu-balanced when max/min of lengths and of heights are both
 * <= nu (compared exactly against the rational value of nu).  Between
 * selected balanced times we keep only those whose connecting cocycle
 * block is strictly positive; those blocks drive contraction-rate and
 * deviation diagnostics.
 */

#include <optional>
#include <vector>

#include "renorm.hpp"

namespace ietlab {

struct TowerSystem {
    size_t level;
    std::vector<Real> base_left;      // d+1 cut points of the inducing interval
    std::vector<Real> base_lengths;   // lambda^(n)
    std::vector<mpz_class> base_nums; // exact numerators: lambda_j = num_j * 2^-scale
    std::vector<mpz_class> heights;   // h^(n)
    std::vector<Real> densities;      // h_j * lambda_j (each <= 1, sum = |lambda^(0)|)
    Real lambda_norm;                 // |lambda^(n)|
};

TowerSystem make_towers(const InductionPath& path, size_t n);

struct Floor {
    int tower;      // j
    long level;     // l
    Real left;      // floor = [left, left + width)
    Real width;
    Real mid;
};

struct FloorPartition {
    size_t level;
    std::vector<Floor> floors;        // tower-major, level-minor order
    std::vector<size_t> by_left;      // index sorted by left endpoint
};

/* Materializes all floors by exact forward iteration of base midpoints.
   Total floor count above `cap` raises RunTooLong. */
FloorPartition materialize_floors(const InductionPath& path, size_t n, long cap = 1000000);

/* exact count of tower-j floors fully contained in [a,b); b < a wraps */
long count_in_interval(const FloorPartition& part, int tower, const Real& a, const Real& b);

/* N^(m,n)_ij: visits of the orbit of I^(n)_j to I^(m)_i before first return;
   primary route: cocycle entries */
IMat visit_counts(const InductionPath& path, size_t m, size_t n);
/* independent geometric route: classify each level-n floor against the
   level-m base partition; requires sum of heights at n within cap */
IMat visit_counts_brute(const InductionPath& path, size_t m, size_t n, long cap = 1000000);

std::vector<size_t> find_balanced_times(const InductionPath& path, double nu);

struct BalancedBlocks {
    double nu;
    std::vector<size_t> times;  // b_0 < b_1 < ...  (subset of balanced times)
    std::vector<IMat> blocks;   // B_k = Z^(b_k, b_{k+1}), all strictly positive
};

/* greedy subsequence of balanced times with strictly positive blocks */
BalancedBlocks make_balanced_blocks(const InductionPath& path, double nu);

/* Theta^(k,k') = sum_{n=0}^{k-k'} ||B_{k'+n-1}|| / d^(gamma n), with
   B_{-1} taken as B_0 */
double theta(const BalancedBlocks& blocks, int d, size_t k, size_t kprime, double gamma);

struct DeviationReport {
    size_t m, n;
    std::vector<double> eps;  // d x d row-major: N_ij = h_j^(n) lambda_i^(m) (1 + eps_ij)
    double max_abs_eps;
    double gamma_fit;  // NaN unless filled by a sweep
};

DeviationReport deviation_report(const InductionPath& path, size_t m, size_t n);

struct OrderedDistances {
    /* per singularity, the r distances mod 1, sorted increasing */
    std::vector<std::vector<Real>> right;  // {T^t z0 - zbar} for right singularities
    std::vector<std::vector<Real>> left;   // {zbar - T^t z0} for left singularities
};

/* Distances from the first r orbit points of z0 to each singularity, mod 1.
   A distance below the IET tolerance raises SingularHit. */
OrderedDistances ordered_singularity_distances(const Iet& T, const std::vector<Real>& right_pos,
                                               const std::vector<Real>& left_pos, const Real& z0,
                                               long r);

/* smallest k such that some floor of the partition at time b_k is contained
   in [a,b); nullopt when no k within the block sequence fits under the cap */
std::optional<size_t> k_of_interval(const InductionPath& path, const BalancedBlocks& blocks,
                                    const Real& a, const Real& b, long cap = 1000000);

}  // namespace ietlab
