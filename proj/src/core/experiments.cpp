#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastflow.hpp"
#include "rigidity.hpp"
#include "rng.hpp"

namespace ietlab {

namespace {

/* grid minimum of the roof over [a,b); midpoint probes, singular grazes
   skipped (the minimum sits away from the singularities) */
double min_roof_on(const FastRoof& f, double a, double b, int grid) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        double x = a + (b - a) * (i + 0.5) / (grid + 1);
        try {
            best = std::min(best, f.value(x));
        } catch (const SingularHit&) {
        }
    }
    if (!std::isfinite(best))
        throw Error(errc::internal, "roof minimum probe found no regular point");
    return best;
}

struct FlowWalk {
    double x, y;
    long steps;
};

/* forward flow in the double engine: (x,y) at time 0 to time t >= 0 */
FlowWalk flow_forward(const FastIet& T, const FastRoof& f, double x, double y, double t,
                      long cap) {
    double w = y + t;
    long steps = 0;
    for (;;) {
        double v = f.value(x);
        if (w < v) break;
        w -= v;
        x = T.evaluate(x);
        if (++steps > cap) throw RunTooLong("correlation: flow walk exceeded the step cap");
    }
    return {x, w, steps};
}

double tower_midpoint(const TowerSystem& ts, int j) {
    return (ts.base_left[(size_t)j] + ts.base_lengths[(size_t)j] * Real(0.5, 64)).to_double();
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CorrEstimate estimate_correlation(const Iet& T, const Roof& roof, const Rect& A, const Rect& B,
                                  double t, long samples, uint64_t seed) {
    if (!(A.x0 < A.x1) || !(A.y0 < A.y1) || !(B.x0 < B.x1) || !(B.y0 < B.y1))
        throw UsageError("correlation: degenerate rectangle");
    if (!(t >= 0)) throw UsageError("correlation: time must be nonnegative");
    if (samples <= 0) throw UsageError("correlation: samples must be positive");
    FastIet ft = make_fast_iet(T);
    FastRoof fr = make_fast_roof(roof);
    if (A.x0 < 0 || A.x1 > ft.total || B.x0 < 0 || B.x1 > ft.total)
        throw OutOfDomain("correlation: rectangle leaves the base interval");
    double minA = min_roof_on(fr, A.x0, A.x1, 256);
    double minB = min_roof_on(fr, B.x0, B.x1, 256);
    if (A.y0 < 0 || B.y0 < 0 || A.y1 > minA || B.y1 > minB)
        throw OutOfDomain("correlation: rectangle pokes above the roof");

    /* the roof integrates to 1, so a time-t orbit makes about t base steps;
       the global roof minimum caps the count */
    double fmin = min_roof_on(fr, 0.0, ft.total, 2048);
    long cap = (long)(2.0 * t / fmin) + 4096;

    long hits = 0;
    int retries = 0;
    const int retry_cap = 1000;
    for (long s = 0; s < samples; ++s) {
        RngStream rng(seed, (uint64_t(3) << 32) + (uint64_t)s);
        for (int att = 0;; ++att) {
            double x = A.x0 + rng.next_double() * (A.x1 - A.x0);
            double y = A.y0 + rng.next_double() * (A.y1 - A.y0);
            try {
                FlowWalk wk = flow_forward(ft, fr, x, y, t, cap);
                if (wk.x >= B.x0 && wk.x < B.x1 && wk.y >= B.y0 && wk.y < B.y1) ++hits;
                break;
            } catch (const SingularHit&) {
                ++retries;
                if (att >= retry_cap)
                    throw RunTooLong("correlation: singular retries exhausted");
            }
        }
    }
    double p = (double)hits / (double)samples;
    CorrEstimate ce;
    ce.estimate = A.measure() * p;
    ce.stderr_ = A.measure() * std::sqrt(std::max(p * (1.0 - p), 0.0) / (double)samples);
    ce.samples = samples;
    ce.singular_retries = retries;
    return ce;
}

std::vector<RigiditySet> collect_rigidity_sets(const InductionPath& path, double nu, double beta,
                                               long rk_cap, int want) {
    if (want <= 0) throw UsageError("rigidity collection: want must be positive");
    if (rk_cap <= 0) throw UsageError("rigidity collection: rk_cap must be positive");
    std::vector<size_t> bal = find_balanced_times(path, nu);
    std::vector<RigiditySet> sets;
    for (auto it = bal.rbegin(); it != bal.rend() && (int)sets.size() < want; ++it) {
        RigiditySet rs;
        try {
            rs = build_rigidity_set(path, *it, beta, rk_cap);
        } catch (const RunTooLong&) {
            continue;  // r_k above the cap at this level
        }
        if (rs.r_k > rk_cap) continue;
        if (!verify_rigidity(path, rs).ok()) continue;
        sets.push_back(std::move(rs));
    }
    std::reverse(sets.begin(), sets.end());  // ascending r_k
    return sets;
}

NonmixingResult nonmixing_experiment(const InductionPath& path, const Roof& roof, double nu,
                                     double beta, long rk_cap, long samples, uint64_t seed,
                                     double margin, int want_k, double col_height) {
    if (samples <= 0) throw UsageError("nonmixing: samples must be positive");
    if (!(col_height > 0.0)) throw UsageError("nonmixing: column height must be positive");

    std::vector<RigiditySet> sets = collect_rigidity_sets(path, nu, beta, rk_cap, want_k);
    if (sets.empty())
        throw VerificationFailed("nonmixing: no feasible rigidity level under the cap");

    const Iet& T = path.base();
    FastRoof fr = make_fast_roof(roof);

    NonmixingResult out;
    out.margin = margin;
    out.tested_k = (int)sets.size();
    out.signature = true;

    int stretch_samples = (int)std::min<long>(samples, 1000);
    for (size_t ki = 0; ki < sets.size(); ++ki) {
        const RigiditySet& rs = sets[ki];
        StretchReport st =
            fast_stretch(path, roof, rs, stretch_samples, seed + 17 * (uint64_t)(ki + 1));
        double t_k = st.mean_sum;

        /* probe rectangle over the rigidity tower base: the chosen induced
           piece returns there after exactly r_k steps */
        double a0 = rs.parent_a.to_double();
        double a1 = rs.parent_b.to_double();
        double y1 = std::min(col_height, 0.9 * min_roof_on(fr, a0, a1, 256));
        Rect A{a0, a1, 0.0, y1};
        double muA = A.measure();

        CorrEstimate rig =
            estimate_correlation(T, roof, A, A, t_k, samples, seed + 1000003 * (uint64_t)(ki + 1));
        CorrEstimate gen = estimate_correlation(T, roof, A, A, 1.37 * t_k, samples,
                                                seed + 2000003 * (uint64_t)(ki + 1));

        CorrelationRow row;
        row.k = (int)ki;
        row.level = rs.level;
        row.r_k = rs.r_k;
        row.muA = muA;
        row.muB = muA;
        row.t = t_k;
        row.estimate = rig.estimate;
        row.stderr_ = rig.stderr_;
        row.kind = "rigidity";
        out.rows.push_back(row);

        row.t = 1.37 * t_k;
        row.estimate = gen.estimate;
        row.stderr_ = gen.stderr_;
        row.kind = "generic";
        out.rows.push_back(row);

        if (!(rig.estimate >= muA * muA + margin * muA)) out.signature = false;
    }
    out.verdict = out.signature ? "NON_MIXING_SIGNATURE" : "NO_SIGNATURE";
    return out;
}

DeviationDecay deviation_decay_experiment(const InductionPath& path, double nu,
                                          size_t max_pairs) {
    std::vector<size_t> bal = find_balanced_times(path, nu);
    if (bal.size() < 2)
        throw VerificationFailed("deviation decay: need at least two balanced times");

    DeviationDecay out;
    for (size_t i = 0; i < bal.size() && out.rows.size() < max_pairs; ++i)
        for (size_t j = i + 1; j < bal.size() && out.rows.size() < max_pairs; ++j) {
            DeviationReport rep = deviation_report(path, bal[i], bal[j]);
            if (!(rep.max_abs_eps > 0)) continue;  // exact agreement has no log point
            out.rows.push_back({bal[i], bal[j], (long)(bal[j] - bal[i]), rep.max_abs_eps});
        }
    if (out.rows.size() < 2)
        throw VerificationFailed("deviation decay: not enough pairs for a fit");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = (double)out.rows.size();
    for (const auto& r : out.rows) {
        double x = (double)r.gap, y = std::log(r.max_eps);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double den = n * sxx - sx * sx;
    if (!(den > 0)) throw VerificationFailed("deviation decay: degenerate gap spread");
    out.slope = (n * sxy - sx * sy) / den;
    out.intercept = (sy - out.slope * sx) / n;

    double ybar = sy / n, ssr = 0, sst = 0;
    for (const auto& r : out.rows) {
        double y = std::log(r.max_eps);
        double fit = out.intercept + out.slope * (double)r.gap;
        ssr += (y - fit) * (y - fit);
        sst += (y - ybar) * (y - ybar);
    }
    out.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    return out;
}

ProgressionFit progression_experiment(const InductionPath& path, const Roof& roof,
                                      size_t sing_index, bool right_side, size_t level) {
    TowerSystem ts = make_towers(path, level);
    int j0 = select_big_tower(ts);
    if (!ts.heights[(size_t)j0].fits_slong_p())
        throw RunTooLong("progression: tower height exceeds long");
    long r = ts.heights[(size_t)j0].get_si();
    if (r < 2) throw UsageError("progression: tower too short for a fit");

    Real z0 = ts.base_left[(size_t)j0] + ts.base_lengths[(size_t)j0] * Real(0.5, 64);
    std::vector<Real> right_pos, left_pos;
    for (const auto& s : roof.spec().right) right_pos.push_back(s.z);
    for (const auto& s : roof.spec().left) left_pos.push_back(s.z);
    size_t nside = right_side ? right_pos.size() : left_pos.size();
    if (sing_index >= nside) throw UsageError("progression: singularity index out of range");

    OrderedDistances od = ordered_singularity_distances(path.base(), right_pos, left_pos, z0, r);
    const std::vector<Real>& dist = right_side ? od.right[sing_index] : od.left[sing_index];

    ProgressionFit out;
    out.sing_index = sing_index;
    out.right_side = right_side;
    out.points = r;
    out.target = (ts.base_lengths[(size_t)j0] / ts.densities[(size_t)j0]).to_double();

    double sxy = 0, sxx = 0;
    for (long j = 1; j <= r; ++j) {
        double x = (double)j;
        sxy += x * dist[(size_t)j - 1].to_double();
        sxx += x * x;
    }
    out.slope = sxy / sxx;

    std::vector<double> rel;
    rel.reserve((size_t)r);
    double maxrel = 0;
    for (long j = 1; j <= r; ++j) {
        double fit = out.slope * (double)j;
        double e = std::abs(dist[(size_t)j - 1].to_double() - fit) / fit;
        rel.push_back(e);
        maxrel = std::max(maxrel, e);
    }
    out.max_rel_residual = maxrel;

    size_t cut = std::min(rel.size(), (size_t)std::llround(std::sqrt((double)r)));
    out.median_rel_lo = median_of(std::vector<double>(rel.begin(), rel.begin() + cut));
    out.median_rel_hi = median_of(std::vector<double>(rel.begin() + cut, rel.end()));
    return out;
}

CancellationTable cancellation_experiment(const InductionPath& path, const Roof& sym,
                                          const Roof& asym, double nu, long hcap) {
    std::vector<size_t> bal = find_balanced_times(path, nu);

    FastIet ft = make_fast_iet(path.base());
    FastRoof fs = make_fast_roof(sym);
    FastRoof fa = make_fast_roof(asym);

    /*
     * Per-level sup proxy: evaluate at the centers of a fixed Q-cell split
     * of every tower base and take the max of the normalized sums.  The
     * exact base midpoint is a reflection-symmetric point for self-dual
     * bases (golden: x -> 1-x conjugates T to T^{-1} and f' is odd), where
     * the sum collapses on alternate levels; off-center cell points carry
     * an unpaired closest approach ~ Q/(lambda h) at every level, so the
     * grid max tracks the sup bound instead of the symmetry accident.
     */
    constexpr int kCells = 8;
    auto level_row = [&](const TowerSystem& ts, size_t n, long hbig,
                         const FastRoof& fr) -> CancellationRow {
        CancellationRow row{n, 0, hbig, 0.0, -1.0, -1.0};
        for (size_t j = 0; j < ts.heights.size(); ++j) {
            if (!ts.heights[j].fits_slong_p()) continue;
            long hj = ts.heights[j].get_si();
            if (hj < 2) continue;
            double a = ts.base_left[j].to_double();
            double w = ts.base_lengths[j].to_double();
            double lg = std::log((double)hj);
            for (int q = 0; q < kCells; ++q) {
                double x = a + w * ((2.0 * q + 1.0) / (2.0 * kCells));
                double s = std::abs(fast_birkhoff(ft, fr, x, hj, true));
                double ph = s / (double)hj;
                if (ph > row.per_h) {
                    row.j = (int)j;
                    row.sum_abs = s;
                    row.per_h = ph;
                }
                row.per_hlogh = std::max(row.per_hlogh, s / ((double)hj * lg));
            }
        }
        if (row.per_h < 0)
            throw VerificationFailed("cancellation: level has no usable tower");
        return row;
    };

    CancellationTable out;
    for (size_t n : bal) {
        if (n == 0) continue;
        TowerSystem ts = make_towers(path, n);
        int j0 = select_big_tower(ts);
        if (!ts.heights[(size_t)j0].fits_slong_p()) continue;
        long h = ts.heights[(size_t)j0].get_si();
        if (h < 2 || h > hcap) continue;
        out.symmetric.push_back(level_row(ts, n, h, fs));
        out.asymmetric.push_back(level_row(ts, n, h, fa));
    }
    if (out.symmetric.empty())
        throw VerificationFailed("cancellation: no balanced time under the height cap");
    return out;
}

BoundSweep bound_sweep(const InductionPath& path, const Roof& roof, double nu, long hcap,
                       size_t fit_prefix) {
    if (fit_prefix == 0) throw UsageError("bound sweep: fit_prefix must be positive");
    std::vector<size_t> bal = find_balanced_times(path, nu);

    struct Pick {
        size_t n;
        long h;
        double z0;
    };
    std::vector<Pick> picks;
    for (size_t n : bal) {
        if (n == 0) continue;
        TowerSystem ts = make_towers(path, n);
        int j0 = select_big_tower(ts);
        if (!ts.heights[(size_t)j0].fits_slong_p()) continue;
        long h = ts.heights[(size_t)j0].get_si();
        if (h < 2 || h > hcap) continue;
        picks.push_back({n, h, tower_midpoint(ts, j0)});
    }
    if (picks.size() <= fit_prefix)
        throw VerificationFailed("bound sweep: not enough balanced times under the cap");

    FastIet ft = make_fast_iet(path.base());
    FastRoof fr = make_fast_roof(roof);

    /* rhs at M = 0 isolates the singular closest-approach terms */
    std::vector<FastBound> at0;
    for (const auto& p : picks) at0.push_back(fast_bound_check(ft, fr, p.z0, p.h, 0.0));

    double M = 0;
    for (size_t i = 0; i < fit_prefix; ++i)
        M = std::max(M, std::max(0.0, (at0[i].lhs - at0[i].rhs) / (double)picks[i].h));

    BoundSweep out;
    out.M = M;
    out.fit_prefix = fit_prefix;
    out.all_ok_after_fit = true;
    for (size_t i = 0; i < picks.size(); ++i) {
        double rhs = M * (double)picks[i].h + at0[i].rhs;
        bool ok = at0[i].lhs <= rhs * (1.0 + 1e-9);
        out.rows.push_back({picks[i].n, picks[i].h, at0[i].lhs, rhs, ok});
        if (i >= fit_prefix && !ok) out.all_ok_after_fit = false;
    }
    return out;
}

}  // namespace ietlab
