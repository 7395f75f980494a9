#include "towers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ietlab {

TowerSystem make_towers(const InductionPath& path, size_t n) {
    LevelChart ch = make_level_chart(path, n);
    TowerSystem ts;
    ts.level = n;
    ts.base_left = ch.cumL;
    ts.base_lengths = ch.widths;
    ts.base_nums = path.num_at(n);
    ts.heights = ch.heights;
    ts.lambda_norm = ch.norm;
    for (size_t j = 0; j < ch.widths.size(); ++j) {
        Real h(ch.widths[j].prec());
        mpfr_set_z(h.raw(), ch.heights[j].get_mpz_t(), MPFR_RNDN);
        ts.densities.push_back(h * ch.widths[j]);
    }
    return ts;
}

FloorPartition materialize_floors(const InductionPath& path, size_t n, long cap) {
    LevelChart ch = make_level_chart(path, n);
    const int d = path.base().d();
    mpz_class total = 0;
    for (const mpz_class& h : ch.heights) total += h;
    if (total > cap) throw RunTooLong("floor materialization cap exceeded");

    FloorPartition part;
    part.level = n;
    part.floors.reserve(total.get_ui());
    const Iet& T = path.base();
    Real half = Real::pow2(-1, 32);
    for (int j = 0; j < d; ++j) {
        const Real& w = ch.widths[j];
        Real mid = ch.cumL[j] + w * half;
        const long hj = ch.heights[j].get_si();
        for (long l = 0; l < hj; ++l) {
            part.floors.push_back(Floor{j, l, mid - w * half, w, mid});
            if (l + 1 < hj) mid = T.evaluate(mid);
        }
    }
    part.by_left.resize(part.floors.size());
    for (size_t i = 0; i < part.by_left.size(); ++i) part.by_left[i] = i;
    std::sort(part.by_left.begin(), part.by_left.end(), [&](size_t a, size_t b) {
        return part.floors[a].left < part.floors[b].left;
    });
    return part;
}

namespace {

long count_in_segment(const FloorPartition& part, int tower, const Real& a, const Real& b) {
    long cnt = 0;
    for (const Floor& f : part.floors) {
        if (f.tower != tower) continue;
        if (a <= f.left && f.left + f.width <= b) ++cnt;
    }
    return cnt;
}

}  // namespace

long count_in_interval(const FloorPartition& part, int tower, const Real& a, const Real& b) {
    if (a <= b) return count_in_segment(part, tower, a, b);
    /* wrapped interval [a,1) u [0,b) */
    Real one(1.0, a.prec());
    Real zero(0.0, a.prec());
    return count_in_segment(part, tower, a, one) + count_in_segment(part, tower, zero, b);
}

IMat visit_counts(const InductionPath& path, size_t m, size_t n) {
    if (m > n) throw UsageError("visit counts need m <= n");
    return path.cocycle(m, n);
}

IMat visit_counts_brute(const InductionPath& path, size_t m, size_t n, long cap) {
    if (m > n) throw UsageError("visit counts need m <= n");
    const int d = path.base().d();
    FloorPartition part = materialize_floors(path, n, cap);
    LevelChart chm = make_level_chart(path, m);
    IMat N(d);
    for (const Floor& f : part.floors) {
        if (f.mid >= chm.norm) continue;  // floor outside the level-m inducing interval
        const int i = chm.subinterval(f.mid);
        /* refinement must be exact: the whole floor sits inside I^(m)_i */
        if (!(chm.cumL[i] <= f.left) || !(f.left + f.width <= chm.cumL[i + 1]))
            throw VerificationFailed("floor straddles the level-m partition");
        N.at(i, f.tower) += 1;
    }
    return N;
}

std::vector<size_t> find_balanced_times(const InductionPath& path, double nu) {
    if (!(nu >= 1.0)) throw UsageError("nu must be >= 1");
    mpq_class nu_q(nu);  // exact binary rational
    std::vector<size_t> out;
    for (size_t n = 0; n <= path.length(); ++n) {
        const std::vector<mpz_class>& num = path.num_at(n);
        const std::vector<mpz_class>& h = path.heights_at(n);
        mpz_class lmin = num[0], lmax = num[0], hmin = h[0], hmax = h[0];
        for (const mpz_class& x : num) { lmin = std::min(lmin, x); lmax = std::max(lmax, x); }
        for (const mpz_class& x : h) { hmin = std::min(hmin, x); hmax = std::max(hmax, x); }
        /* lmax/lmin <= nu, exactly */
        if (lmax * nu_q.get_den() <= nu_q.get_num() * lmin &&
            hmax * nu_q.get_den() <= nu_q.get_num() * hmin)
            out.push_back(n);
    }
    return out;
}

BalancedBlocks make_balanced_blocks(const InductionPath& path, double nu) {
    std::vector<size_t> times = find_balanced_times(path, nu);
    BalancedBlocks bb;
    bb.nu = nu;
    for (size_t t : times) {
        if (bb.times.empty()) { bb.times.push_back(t); continue; }
        IMat B = path.cocycle(bb.times.back(), t);
        if (B.strictly_positive()) {
            bb.blocks.push_back(std::move(B));
            bb.times.push_back(t);
        }
    }
    return bb;
}

double theta(const BalancedBlocks& blocks, int d, size_t k, size_t kprime, double gamma) {
    if (kprime > k || k > blocks.blocks.size()) throw UsageError("theta needs k' <= k <= #blocks");
    double sum = 0.0;
    for (size_t n = 0; n + kprime <= k; ++n) {
        const size_t bi = (kprime + n == 0) ? 0 : kprime + n - 1;  // B_{-1} := B_0
        double ln_norm = ln_mpz(blocks.blocks[bi].norm_sum());
        sum += std::exp(ln_norm - gamma * static_cast<double>(n) * std::log(d));
    }
    return sum;
}

DeviationReport deviation_report(const InductionPath& path, size_t m, size_t n) {
    if (m >= n) throw UsageError("deviation report needs m < n");
    const int d = path.base().d();
    IMat N = path.cocycle(m, n);
    const std::vector<mpz_class>& num_m = path.num_at(m);
    const std::vector<mpz_class>& h_n = path.heights_at(n);
    mpz_class scale = mpz_class(1) << static_cast<unsigned>(path.scale_exp());

    DeviationReport rep;
    rep.m = m;
    rep.n = n;
    rep.eps.resize(static_cast<size_t>(d) * d);
    rep.max_abs_eps = 0.0;
    rep.gamma_fit = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            /* eps = N_ij / (h_j lambda_i) - 1, exactly as a rational */
            mpq_class e(N.at(i, j) * scale - h_n[j] * num_m[i], h_n[j] * num_m[i]);
            e.canonicalize();
            const double v = e.get_d();
            rep.eps[static_cast<size_t>(i) * d + j] = v;
            rep.max_abs_eps = std::max(rep.max_abs_eps, std::fabs(v));
        }
    return rep;
}

OrderedDistances ordered_singularity_distances(const Iet& T, const std::vector<Real>& right_pos,
                                               const std::vector<Real>& left_pos, const Real& z0,
                                               long r) {
    if (r <= 0) throw UsageError("need r >= 1");
    OrderedDistances od;
    od.right.resize(right_pos.size());
    od.left.resize(left_pos.size());
    const Real& tau = T.tolerance();
    Real one(1.0, z0.prec());
    Real p = z0;
    for (long t = 0; t < r; ++t) {
        if (t > 0) p = T.evaluate(p);
        auto push = [&](std::vector<Real>& dst, const Real& diff) {
            Real m = diff;
            if (m.sign() < 0) m += one;
            if (m < tau || (one - m) < tau)
                throw SingularHit(t, "orbit point within tolerance of a singularity");
            dst.push_back(m);
        };
        for (size_t i = 0; i < right_pos.size(); ++i) push(od.right[i], p - right_pos[i]);
        for (size_t i = 0; i < left_pos.size(); ++i) push(od.left[i], left_pos[i] - p);
    }
    for (auto& v : od.right) std::sort(v.begin(), v.end());
    for (auto& v : od.left) std::sort(v.begin(), v.end());
    return od;
}

std::optional<size_t> k_of_interval(const InductionPath& path, const BalancedBlocks& blocks,
                                    const Real& a, const Real& b, long cap) {
    if (!(a < b)) throw UsageError("need a < b");
    for (size_t k = 0; k < blocks.times.size(); ++k) {
        FloorPartition part;
        try {
            part = materialize_floors(path, blocks.times[k], cap);
        } catch (const RunTooLong&) {
            return std::nullopt;
        }
        for (const Floor& f : part.floors)
            if (a <= f.left && f.left + f.width <= b) return k;
    }
    return std::nullopt;
}

}  // namespace ietlab
