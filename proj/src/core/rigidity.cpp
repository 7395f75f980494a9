#include "rigidity.hpp"

#include <algorithm>
#include <deque>

#include "errors.hpp"

namespace ietlab {

namespace {

/* T_n-steps allowed per piece before the walk is declared stuck */
constexpr long kLevelStepCap = 200000;
/* direct T-steps replayed as a prefix cross-check when r_k is too large */
constexpr long kDirectPrefix = 1024;

struct Piece {
    Real s, e;    // subinterval of [a,b)
    Real is, ie;  // current image under the walked map
    long steps;
    std::vector<long> visits;  // per subinterval of the walked map
};

int locate(const std::vector<Real>& cuts, const Real& x) {
    // index j with cuts[j] <= x < cuts[j+1]
    auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
    return static_cast<int>(it - cuts.begin()) - 1;
}

InducedIet induce_core(const std::vector<Real>& cuts, const std::vector<Real>& offs,
                       const Real& a, const Real& b, long max_steps, const char* what) {
    if (!(a < b) || a < Real(0.0, 64) || cuts.back() < b)
        throw UsageError(std::string(what) + ": [a,b) not inside the domain");
    const int d = static_cast<int>(offs.size());

    // split points: interior discontinuities of the walked map plus the gate posts
    std::vector<Real> splits;
    for (int j = 1; j < d; ++j) splits.push_back(cuts[j]);
    splits.push_back(a);
    splits.push_back(b);

    std::deque<Piece> work;
    work.push_back(Piece{a, b, a, b, 0, std::vector<long>(static_cast<size_t>(d), 0)});
    std::vector<Piece> done;

    while (!work.empty()) {
        Piece p = std::move(work.front());
        work.pop_front();

        if (p.steps >= 1 && !(p.is < a) && !(b < p.ie)) {
            done.push_back(std::move(p));
            continue;
        }

        // find the smallest split point strictly inside (is, ie)
        const Real* z = nullptr;
        for (const Real& c : splits)
            if (p.is < c && c < p.ie && (z == nullptr || c < *z)) z = &c;

        if (z != nullptr) {
            Real off = *z - p.is;  // exact: dyadics
            Real smid = p.s + off;
            work.push_back(Piece{p.s, smid, p.is, *z, p.steps, p.visits});
            work.push_back(Piece{smid, p.e, *z, p.ie, p.steps, p.visits});
            continue;
        }

        // image lies in a single continuity interval: translate it whole
        if (p.steps >= max_steps)
            throw RunTooLong(std::string(what) + ": first-return walk exceeded the step cap");
        int j = locate(cuts, p.is);
        // ie <= right end of the continuity interval; equality allowed
        if (cuts[static_cast<size_t>(j) + 1] < p.ie)
            throw Error(errc::internal, std::string(what) + ": unsplit piece straddles a cut");
        p.is = p.is + offs[static_cast<size_t>(j)];
        p.ie = p.ie + offs[static_cast<size_t>(j)];
        p.steps += 1;
        p.visits[static_cast<size_t>(j)] += 1;
        work.push_back(std::move(p));
    }

    std::sort(done.begin(), done.end(), [](const Piece& x, const Piece& y) { return x.s < y.s; });
    if (done.empty()) throw Error(errc::internal, std::string(what) + ": no pieces");
    if (static_cast<int>(done.size()) > d + 2)
        throw VerificationFailed(std::string(what) + ": more than d+2 return pieces");

    InducedIet out;
    out.parent_a = a;
    out.parent_b = b;
    for (const Piece& p : done) {
        out.cuts.push_back(p.s);
        out.return_times.push_back(p.steps);
        out.image_left.push_back(p.is);
        out.visits.push_back(p.visits);
    }
    out.cuts.push_back(b);
    // pieces must tile [a,b) exactly
    for (size_t i = 0; i + 1 < done.size(); ++i)
        if (!(done[i].e == done[i + 1].s))
            throw Error(errc::internal, std::string(what) + ": pieces do not tile");
    if (!(done.front().s == a) || !(done.back().e == b))
        throw Error(errc::internal, std::string(what) + ": pieces do not cover");
    return out;
}

}  // namespace

InducedIet induce_on_interval(const Iet& T, const Real& a, const Real& b, long max_steps) {
    std::vector<Real> offs;
    offs.reserve(static_cast<size_t>(T.d()));
    for (int j = 0; j < T.d(); ++j) offs.push_back(T.offset(j));
    return induce_core(T.discontinuities(), offs, a, b, max_steps, "induce_on_interval");
}

InducedIet induce_on_chart(const LevelChart& ch, const Real& a, const Real& b, long max_steps) {
    return induce_core(ch.cumL, ch.off, a, b, max_steps, "induce_on_chart");
}

int select_big_tower(const TowerSystem& ts) {
    const int d = static_cast<int>(ts.heights.size());
    int best = 0;
    mpz_class best_mass = ts.heights[0] * ts.base_nums[0];
    for (int j = 1; j < d; ++j) {
        mpz_class m = ts.heights[j] * ts.base_nums[j];
        if (m > best_mass) {
            best_mass = m;
            best = j;
        }
    }
    return best;
}

int select_big_subinterval(const InducedIet& ind) {
    int best = 0;
    Real bw = ind.cuts[1] - ind.cuts[0];
    for (size_t l = 1; l < ind.pieces(); ++l) {
        Real w = ind.cuts[l + 1] - ind.cuts[l];
        if (bw < w) {
            bw = w;
            best = static_cast<int>(l);
        }
    }
    return best;
}

namespace {

mpz_class exact_return_time(const std::vector<long>& visits, const std::vector<mpz_class>& h) {
    mpz_class r = 0;
    for (size_t j = 0; j < visits.size(); ++j) r += visits[j] * h[j];
    return r;
}

Real mpz_to_real(const mpz_class& z, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_z(r.raw(), z.get_mpz_t(), MPFR_RNDN);
    return r;
}

}  // namespace

RigiditySet build_rigidity_set(const InductionPath& path, size_t n_k, double beta,
                               long max_return) {
    if (!(beta > 0.0) || beta > 1.0) throw UsageError("build_rigidity_set: beta outside (0,1]");
    LevelChart ch = make_level_chart(path, n_k);
    const int d = static_cast<int>(ch.widths.size());
    const std::vector<mpz_class>& num = path.num_at(n_k);

    int j0 = 0;
    mpz_class best_mass = ch.heights[0] * num[0];
    for (int j = 1; j < d; ++j) {
        mpz_class m = ch.heights[static_cast<size_t>(j)] * num[static_cast<size_t>(j)];
        if (m > best_mass) {
            best_mass = m;
            j0 = j;
        }
    }

    Real a = ch.cumL[static_cast<size_t>(j0)];
    Real b = ch.cumL[static_cast<size_t>(j0) + 1];

    InducedIet ind = induce_on_chart(ch, a, b, kLevelStepCap);
    int l0 = select_big_subinterval(ind);

    mpz_class rk = exact_return_time(ind.visits[static_cast<size_t>(l0)], ch.heights);
    if (!rk.fits_slong_p())
        throw RunTooLong("build_rigidity_set: return time exceeds machine range");
    if (max_return > 0 && rk > max_return)
        throw RunTooLong("build_rigidity_set: return time exceeds cap");
    if (!ch.heights[static_cast<size_t>(j0)].fits_slong_p())
        throw RunTooLong("build_rigidity_set: tower height exceeds machine range");

    Real w = ind.cuts[static_cast<size_t>(l0) + 1] - ind.cuts[static_cast<size_t>(l0)];
    const mpfr_prec_t pw = mpfr_get_prec(w.raw()) + 80;
    Real half = Real(0.5, pw);
    Real betaR(beta, pw);
    Real mid = ind.cuts[static_cast<size_t>(l0)].round_to(pw) + w.round_to(pw) * half;
    Real hw = w.round_to(pw) * betaR * half;

    /* Snap the endpoints inward onto the grid 2^-K: translation offsets are
       multiples of 2^-scale, so every later orbit point stays on the grid
       and interval arithmetic in the walks is exact at any level. */
    const long K = path.scale_exp() + 24;
    const mpfr_prec_t pj = static_cast<mpfr_prec_t>(K) + 8;
    auto snap_to_grid = [&](const Real& x, bool up) -> Real {
        Real t(std::max(mpfr_get_prec(x.raw()), pj));
        mpfr_mul_2si(t.raw(), x.raw(), K, MPFR_RNDN);  // exact: power-of-two scaling
        mpfr_rint(t.raw(), t.raw(), up ? MPFR_RNDU : MPFR_RNDD);
        Real out(pj);
        mpfr_div_2si(out.raw(), t.raw(), K, MPFR_RNDN);  // exact: K+1 bits fit in pj
        return out;
    };

    RigiditySet rs;
    rs.level = n_k;
    rs.j0 = j0;
    rs.l0 = l0;
    rs.parent_a = a;
    rs.parent_b = b;
    rs.Jk_a = snap_to_grid(mid - hw, true);
    rs.Jk_b = snap_to_grid(mid + hw, false);
    if (!(rs.Jk_a < rs.Jk_b))
        throw PrecisionExhausted("build_rigidity_set: beta fraction collapses on the dyadic grid");
    rs.r_k = rk.get_si();
    rs.height = ch.heights[static_cast<size_t>(j0)].get_si();
    // height < 2^63 and the grid width has K+1 bits, so K+80 keeps this exact
    rs.measure =
        mpz_to_real(ch.heights[static_cast<size_t>(j0)], static_cast<mpfr_prec_t>(K) + 80) *
        (rs.Jk_b - rs.Jk_a);
    rs.beta = beta;
    return rs;
}

namespace {

/* Translate [ia,ib) by one step of T, requiring it to sit inside a single
   continuity interval. Throws on straddle. */
void step_rigid(const Iet& T, Real& ia, Real& ib, const char* what) {
    int j = T.subinterval(ia);
    if (T.discontinuities()[static_cast<size_t>(j) + 1] < ib)
        throw VerificationFailed(std::string("rigidity: ") + what +
                                 " straddles a discontinuity mid-flight");
    Real t = T.offset(j);
    ia = ia + t;
    ib = ib + t;
}

}  // namespace

RigidityCheck verify_rigidity(const InductionPath& path, const RigiditySet& rs, long direct_cap) {
    const Iet& T = path.base();
    const int d = T.d();
    LevelChart ch = make_level_chart(path, rs.level);

    RigidityCheck chk;
    chk.alpha = rs.beta / (static_cast<double>(d) * static_cast<double>(d + 2));
    chk.direct_steps = 0;

    // (i) measure bound
    Real alphaR(chk.alpha, mpfr_get_prec(rs.measure.raw()));
    chk.measure_ok = !(rs.measure < alphaR);

    // accelerated walk: iterate J_k under the level map until it returns to
    // the parent base, logging the landing position inside every tower base
    Real ja = rs.Jk_a, jb = rs.Jk_b;
    Real width = rs.Jk_b - rs.Jk_a;
    std::vector<std::vector<Real>> base_lefts(static_cast<size_t>(d));
    std::vector<Real> landing_seq;  // T_n-orbit of Jk_a, for the direct cross-check
    mpz_class r_acc = 0;
    for (long m = 0;; ++m) {
        if (m >= 1 && !(ja < rs.parent_a) && !(rs.parent_b < jb)) break;
        if (m >= kLevelStepCap)
            throw RunTooLong("verify_rigidity: level walk exceeded the step cap");
        int j = ch.subinterval(ja);
        if (ch.cumL[static_cast<size_t>(j) + 1] < jb)
            throw VerificationFailed("rigidity: J_k slice straddles a level cut mid-flight");
        base_lefts[static_cast<size_t>(j)].push_back(ja);
        landing_seq.push_back(ja);
        r_acc += ch.heights[static_cast<size_t>(j)];
        ja += ch.off[static_cast<size_t>(j)];
        jb += ch.off[static_cast<size_t>(j)];
    }
    chk.return_ok = r_acc.fits_slong_p() && r_acc.get_si() == rs.r_k;

    // (ii) floor containment: the floors are rigid translates of the base,
    // so T^{r_k} maps every slice of E_k into its own floor exactly when
    // K = T^{r_k}(J_k) lands inside the parent base
    chk.floors_ok = !(ja < rs.parent_a) && !(rs.parent_b < jb);

    // (iii) disjointness of T^i J_k for 0 <= i < r_k: iterates in distinct
    // towers or at distinct heights live in disjoint floors, so it reduces
    // to disjointness of the landings per tower base; adjacent sorted gaps
    // >= width give pairwise disjointness
    chk.disjoint_ok = true;
    for (int j = 0; j < d && chk.disjoint_ok; ++j) {
        std::vector<Real>& ls = base_lefts[static_cast<size_t>(j)];
        std::sort(ls.begin(), ls.end());
        for (size_t i = 0; i + 1 < ls.size(); ++i) {
            if (ls[i + 1] - ls[i] < width) {
                chk.disjoint_ok = false;
                break;
            }
        }
    }

    // direct route: replay the orbit one T-step at a time.  Full replay
    // checks first-return minimality, disjointness and the final landing;
    // above the cap a prefix still certifies rigidity near the bottom.
    const bool full = rs.r_k <= direct_cap;
    const long nsteps = full ? rs.r_k : std::min(rs.r_k, kDirectPrefix);
    Real da = rs.Jk_a, db = rs.Jk_b;
    std::vector<Real> lefts;
    lefts.reserve(static_cast<size_t>(nsteps));
    // cumulative T-steps at which the walk hands over to the next tower
    mpz_class next_boundary = ch.heights[static_cast<size_t>(ch.subinterval(rs.Jk_a))];
    size_t seq_pos = 1;
    for (long i = 0; i < nsteps; ++i) {
        if (i > 0) {
            // no early return: [da,db) must avoid the parent base entirely
            if (da < rs.parent_b && rs.parent_a < db)
                chk.return_ok = false;
        }
        lefts.push_back(da);
        step_rigid(T, da, db, "J_k iterate");
        chk.direct_steps += 1;
        // at tower handovers the direct position must equal the level walk's
        if (next_boundary == i + 1 && seq_pos < landing_seq.size()) {
            if (!(da == landing_seq[seq_pos])) chk.return_ok = false;
            int j = ch.subinterval(landing_seq[seq_pos]);
            next_boundary += ch.heights[static_cast<size_t>(j)];
            ++seq_pos;
        }
    }
    if (full) {
        if (!(da == ja) || !(db == jb)) chk.return_ok = false;
    }
    std::sort(lefts.begin(), lefts.end());
    for (size_t i = 0; i + 1 < lefts.size() && chk.disjoint_ok; ++i)
        if (lefts[i + 1] - lefts[i] < width) chk.disjoint_ok = false;

    return chk;
}

}  // namespace ietlab
