#include "renorm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ietlab {

Permutation rauzy_move_a(const Permutation& p) {
    const int d = p.size(), e = d - 1, pe = p[e];
    if (pe == e) throw UsageError("move undefined: pi fixes the last position");
    std::vector<int> img(d);
    for (int j = 0; j < d; ++j) {
        if (p[j] <= pe) img[j] = p[j];
        else if (p[j] < e) img[j] = p[j] + 1;
        else img[j] = pe + 1;  // j = pi^-1(e)
    }
    return Permutation{img};
}

Permutation rauzy_move_b(const Permutation& p) {
    const int d = p.size(), e = d - 1, pe = p[e];
    const int k = p.inverse()[e];
    if (k == e) throw UsageError("move undefined: pi fixes the last interval");
    std::vector<int> img(d);
    for (int j = 0; j <= k; ++j) img[j] = p[j];
    img[k + 1] = pe;
    for (int j = k + 2; j < d; ++j) img[j] = p[j - 1];
    return Permutation{img};
}

std::vector<Permutation> rauzy_class(const Permutation& p) {
    if (!is_irreducible(p)) throw UsageError("Rauzy class of a reducible permutation");
    std::set<Permutation> seen{p};
    std::vector<Permutation> queue{p};
    while (!queue.empty()) {
        Permutation q = queue.back();
        queue.pop_back();
        for (Permutation r : {rauzy_move_a(q), rauzy_move_b(q)}) {
            if (seen.insert(r).second) queue.push_back(r);
        }
    }
    return {seen.begin(), seen.end()};
}

namespace {

struct ExactState {
    std::vector<mpz_class> num;
    Permutation perm;
    std::vector<mpz_class> h;
};

/* one Rauzy step in place; updates Z (right-multiply) and Zinv
   (left-multiply) accumulators */
RauzyKind rauzy_substep(ExactState& st, IMat& Z, IMat& Zinv) {
    const int d = st.perm.size(), e = d - 1;
    const int k = st.perm.inverse()[e];
    const int pe = st.perm[e];
    const int c = cmp(st.num[e], st.num[k]);
    if (c == 0) throw TieError("exact Rauzy tie: degenerate lengths");

    IMat S = IMat::identity(d), Si = IMat::identity(d);
    if (c > 0) {  // type a
        st.num[e] -= st.num[k];
        st.h[k] += st.h[e];
        st.perm = rauzy_move_a(st.perm);
        S.at(e, k) = 1;
        Si.at(e, k) = -1;
        Z = Z * S;
        Zinv = Si * Zinv;
        return RauzyKind::a;
    }
    /* type b */
    std::vector<mpz_class> num(d), h(d);
    for (int j = 0; j < k; ++j) { num[j] = st.num[j]; }
    num[k] = st.num[k] - st.num[e];
    num[k + 1] = st.num[e];
    for (int j = k + 2; j < d; ++j) num[j] = st.num[j - 1];
    /* heights transform by the transpose: h'_j = sum_i Z_ij h_i */
    for (int j = 0; j < k; ++j) h[j] = st.h[j];
    h[k] = st.h[k];
    h[k + 1] = st.h[k] + st.h[e];
    for (int j = k + 2; j < d; ++j) h[j] = st.h[j - 1];

    IMat Zb(d), Zbi(d);
    for (int j = 0; j < k; ++j) { Zb.at(j, j) = 1; Zbi.at(j, j) = 1; }
    Zb.at(k, k) = 1;
    Zb.at(k, k + 1) = 1;
    for (int j = k + 1; j < e; ++j) Zb.at(j, j + 1) = 1;
    Zb.at(e, k + 1) = 1;
    Zbi.at(k, k) = 1;
    Zbi.at(k, e) = -1;
    Zbi.at(k + 1, e) = 1;
    for (int j = k + 2; j < d; ++j) Zbi.at(j, j - 1) = 1;

    st.num = std::move(num);
    st.h = std::move(h);
    st.perm = rauzy_move_b(st.perm);
    Z = Z * Zb;
    Zinv = Zbi * Zinv;
    return RauzyKind::b;
}

mpz_class sum_vec(const std::vector<mpz_class>& v) {
    mpz_class s = 0;
    for (const mpz_class& x : v) s += x;
    return s;
}

}  // namespace

InductionPath::InductionPath(Iet base, size_t zorich_steps, InductionCaps caps)
    : base_(std::move(base)), perm0_(base_.perm()) {
    if (!is_irreducible(perm0_))
        throw UsageError("induction needs an irreducible permutation");
    const int d = base_.d();
    const long pb = static_cast<long>(base_.precision_bits());
    scale_exp_ = pb + (pb + 1) / 2;
    /* num_i = lambda_i * 2^scale is exact: lambda_i >= tau = 2^-(pb/2) has
       its least significant bit at or above 2^-scale */
    num0_.resize(d);
    for (int i = 0; i < d; ++i) {
        Real t = base_.lengths()[i];
        mpfr_t shifted;
        mpfr_init2(shifted, mpfr_get_prec(t.raw()) + 4);
        mpfr_mul_2si(shifted, t.raw(), scale_exp_, MPFR_RNDN);
        if (!mpfr_integer_p(shifted)) {
            mpfr_clear(shifted);
            throw PrecisionExhausted("length is not a precision_bits dyadic");
        }
        mpfr_get_z(num0_[i].get_mpz_t(), shifted, MPFR_RNDN);
        mpfr_clear(shifted);
    }
    mpz_class one = 1;
    low_water_ = one << static_cast<unsigned>(scale_exp_ - pb / 2);

    h0_.assign(d, 1);
    ExactState st{num0_, perm0_, h0_};
    steps_.reserve(zorich_steps);
    for (size_t n = 0; n < zorich_steps; ++n) {
        if (sum_vec(st.num) < low_water_) {
            if (caps.stop_on_budget) { budget_exhausted_ = true; return; }
            throw PrecisionExhausted("inducing interval below tolerance at step " +
                                     std::to_string(n));
        }
        IMat Z = IMat::identity(d), Zinv = IMat::identity(d);
        const RauzyKind first = rauzy_substep(st, Z, Zinv);
        long substeps = 1;
        for (;;) {
            if (sum_vec(st.num) < low_water_) {
                if (caps.stop_on_budget) { budget_exhausted_ = true; return; }
                throw PrecisionExhausted("inducing interval below tolerance inside step " +
                                         std::to_string(n));
            }
            /* peek the comparison for the next type */
            const int e = d - 1, k = st.perm.inverse()[e];
            const int c = cmp(st.num[e], st.num[k]);
            if (c == 0) throw TieError("exact Rauzy tie inside Zorich step");
            const RauzyKind next = c > 0 ? RauzyKind::a : RauzyKind::b;
            if (next != first) break;
            rauzy_substep(st, Z, Zinv);
            if (++substeps > caps.substep_cap)
                throw RunTooLong("Zorich substep cap exceeded: near-degenerate lengths");
        }
        steps_.push_back(StepRecord{first, substeps, std::move(Z), std::move(Zinv),
                                    st.perm, st.num, st.h});
    }
}

const Permutation& InductionPath::perm_at(size_t n) const {
    if (n > steps_.size()) throw UsageError("level beyond path length");
    return n == 0 ? perm0_ : steps_[n - 1].perm_after;
}

const std::vector<mpz_class>& InductionPath::num_at(size_t n) const {
    if (n > steps_.size()) throw UsageError("level beyond path length");
    return n == 0 ? num0_ : steps_[n - 1].num_after;
}

const std::vector<mpz_class>& InductionPath::heights_at(size_t n) const {
    if (n > steps_.size()) throw UsageError("level beyond path length");
    return n == 0 ? h0_ : steps_[n - 1].h_after;
}

IMat InductionPath::cocycle(size_t m, size_t n) const {
    if (m > n || n > steps_.size()) throw UsageError("bad cocycle range");
    IMat P = IMat::identity(base_.d());
    for (size_t k = m; k < n; ++k) P = P * steps_[k].Z;
    return P;
}

IMat InductionPath::cocycle_inv(size_t m, size_t n) const {
    if (m > n || n > steps_.size()) throw UsageError("bad cocycle range");
    IMat P = IMat::identity(base_.d());
    for (size_t k = m; k < n; ++k) P = steps_[k].Zinv * P;
    return P;
}

Real InductionPath::lambda_norm(size_t n, mpfr_prec_t prec) const {
    mpz_class s = sum_vec(num_at(n));
    Real r(prec);
    mpfr_set_z_2exp(r.raw(), s.get_mpz_t(), -scale_exp_, MPFR_RNDN);
    return r;
}

std::vector<Real> InductionPath::lengths_at(size_t n, mpfr_prec_t prec) const {
    /* independent exact route: x = (Z^(0,n))^-1 num^(0) */
    std::vector<mpz_class> x = cocycle_inv(0, n) * num0_;
    if (x != num_at(n))
        throw Error(errc::internal, "cocycle inverse disagrees with subtraction chain");
    std::vector<Real> out;
    out.reserve(x.size());
    for (const mpz_class& xi : x) {
        Real r(prec);
        mpfr_set_z_2exp(r.raw(), xi.get_mpz_t(), -scale_exp_, MPFR_RNDN);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Real> InductionPath::renormalized_lengths(size_t n, mpfr_prec_t prec) const {
    const std::vector<mpz_class>& num = num_at(n);
    mpz_class s = sum_vec(num);
    std::vector<Real> out;
    Real den(prec + 16);
    mpfr_set_z(den.raw(), s.get_mpz_t(), MPFR_RNDN);
    for (const mpz_class& xi : num) {
        Real t(prec + 16);
        mpfr_set_z(t.raw(), xi.get_mpz_t(), MPFR_RNDN);
        out.push_back((t / den).round_to(prec));
    }
    return out;
}

Iet InductionPath::induced_iet(size_t n, mpfr_prec_t prec) const {
    return Iet(renormalized_lengths(n, prec), perm_at(n), prec);
}

int LevelChart::subinterval(const Real& x) const {
    const int d = perm.size();
    if (x.sign() < 0 || x >= cumL[d]) throw OutOfDomain("point outside inducing interval");
    int lo = 0, hi = d - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (cumL[mid] <= x) lo = mid; else hi = mid - 1;
    }
    return lo;
}

Real LevelChart::evaluate(const Real& x) const {
    return x.round_to(std::max(x.prec(), cumL[0].prec())) + off[subinterval(x)];
}

LevelChart make_level_chart(const InductionPath& path, size_t n) {
    const int d = path.base().d();
    /* exact: all quantities are multiples of 2^-scale_exp */
    const mpfr_prec_t pg = static_cast<mpfr_prec_t>(path.scale_exp()) + 24;
    const std::vector<mpz_class>& num = path.num_at(n);
    const Permutation& perm = path.perm_at(n);
    std::vector<int> pinv = perm.inverse();

    LevelChart ch;
    ch.level = n;
    ch.perm = perm;
    ch.heights = path.heights_at(n);
    ch.cumL.assign(d + 1, Real(pg));
    ch.widths.assign(d, Real(pg));
    ch.off.assign(d, Real(pg));

    auto to_real = [&](const mpz_class& z) {
        Real r(pg);
        mpfr_set_z_2exp(r.raw(), z.get_mpz_t(), -path.scale_exp(), MPFR_RNDN);
        return r;
    };
    Real sum(0.0, pg);
    for (int j = 0; j < d; ++j) {
        ch.cumL[j] = sum;
        ch.widths[j] = to_real(num[j]);
        sum += ch.widths[j];
    }
    ch.cumL[d] = sum;
    ch.norm = sum;
    std::vector<Real> imgL(d + 1, Real(pg));
    Real isum(0.0, pg);
    for (int k = 0; k < d; ++k) {
        imgL[k] = isum;
        isum += ch.widths[pinv[k]];
    }
    for (int j = 0; j < d; ++j) ch.off[j] = imgL[perm[j]] - ch.cumL[j];
    return ch;
}

Real hilbert_distance(const std::vector<Real>& u, const std::vector<Real>& v) {
    if (u.size() != v.size() || u.empty()) throw UsageError("dimension mismatch");
    mpfr_prec_t p = 64;
    for (const Real& x : u) p = std::max(p, x.prec());
    for (const Real& x : v) p = std::max(p, x.prec());
    Real mx(p), mn(p);
    bool first = true;
    for (size_t i = 0; i < u.size(); ++i) {
        if (u[i].sign() <= 0 || v[i].sign() <= 0)
            throw UsageError("Hilbert distance needs strictly positive vectors");
        Real r = u[i].round_to(p) / v[i];
        if (first) { mx = r; mn = r; first = false; }
        else { mx = max(mx, r); mn = min(mn, r); }
    }
    return (mx / mn).log();
}

Real contraction_diameter(const IMat& A, mpfr_prec_t prec) {
    const int n = A.n;
    /* D(A) = max_{j,k} ln max_i(a_ij/a_ik) + ln max_i(a_ik/a_ij); attained at
       vertex pairs of the simplex.  Ratio maxima computed exactly in mpq. */
    bool any_zero = false;
    for (int j = 0; j < n && !any_zero; ++j)
        for (int i = 0; i < n; ++i)
            if (A.at(i, j) == 0) { any_zero = true; break; }
    if (any_zero) {
        /* nonnegative with zeros: diameter infinite unless columns are
           pairwise proportional in support AND ratio, which we do not chase */
        Real inf(prec);
        mpfr_set_inf(inf.raw(), 1);
        return inf;
    }
    mpq_class best = 1;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            mpq_class up = 0, dn = 0;
            for (int i = 0; i < n; ++i) {
                mpq_class r(A.at(i, j), A.at(i, k));
                r.canonicalize();
                if (r > up) up = r;
                mpq_class ri(A.at(i, k), A.at(i, j));
                ri.canonicalize();
                if (ri > dn) dn = ri;
            }
            mpq_class prod = up * dn;
            if (prod > best) best = prod;
        }
    Real r(prec);
    mpfr_set_q(r.raw(), best.get_mpq_t(), MPFR_RNDN);
    return r.log();
}

std::vector<Real> project_apply(const IMat& A, const std::vector<Real>& u, mpfr_prec_t prec) {
    std::vector<Real> w = apply_real(A, u, prec + 16);
    Real s(0.0, prec + 16);
    for (const Real& x : w) {
        if (x.sign() < 0) throw UsageError("projective action needs a nonnegative image");
        s += x;
    }
    if (s.sign() <= 0) throw UsageError("projective action collapsed to zero");
    std::vector<Real> out;
    for (Real& x : w) out.push_back((x / s).round_to(prec));
    return out;
}

double ln_mpz(const mpz_class& x) {
    if (x <= 0) throw UsageError("ln of non-positive integer");
    signed long exp2;
    double m = mpz_get_d_2exp(&exp2, x.get_mpz_t());
    return std::log(m) + static_cast<double>(exp2) * std::log(2.0);
}

std::vector<size_t> growth_times_exp_bound(const InductionPath& path, double c1) {
    std::vector<size_t> out;
    const size_t len = path.length();
    for (size_t nk = 1; nk <= len; ++nk) {
        IMat P = IMat::identity(path.base().d());
        bool ok = true;
        for (size_t back = 1; back <= nk; ++back) {
            P = path.step(nk - back).Z * P;  // Z^(nk-back, nk)
            if (ln_mpz(P.norm_sum()) > c1 * static_cast<double>(back) + 1e-12) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(nk);
    }
    return out;
}

std::vector<size_t> growth_times_subexp_bound(const InductionPath& path, double eps, double c2) {
    std::vector<size_t> out;
    const size_t len = path.length();
    std::vector<double> ln_norms(len);
    for (size_t k = 0; k < len; ++k) ln_norms[k] = ln_mpz(path.step(k).Z.norm_sum());
    const double lc2 = std::log(c2);
    for (size_t mk = 1; mk <= len; ++mk) {
        bool ok = true;
        for (size_t n = 0; n < mk; ++n) {
            if (ln_norms[mk - 1 - n] > lc2 + eps * static_cast<double>(n) + 1e-12) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(mk);
    }
    return out;
}

}  // namespace ietlab
