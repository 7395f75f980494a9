#include "iet.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "json.hpp"
#include "rng.hpp"

namespace ietlab {

std::vector<int> Permutation::inverse() const {
    std::vector<int> inv(img.size());
    for (size_t j = 0; j < img.size(); ++j) inv[img[j]] = static_cast<int>(j);
    return inv;
}

Permutation Permutation::parse(const std::string& s) {
    std::string t;
    for (char c : s) t += (c == '(' || c == ')' || c == ',') ? ' ' : c;
    std::istringstream in(t);
    std::vector<int> img;
    int v;
    while (in >> v) img.push_back(v - 1);
    Permutation p{img};
    std::vector<bool> seen(img.size(), false);
    if (img.empty()) throw UsageError("empty permutation");
    for (int x : img) {
        if (x < 0 || x >= p.size() || seen[x]) throw UsageError("not a permutation: " + s);
        seen[x] = true;
    }
    return p;
}

std::string Permutation::str() const {
    std::string out;
    for (size_t j = 0; j < img.size(); ++j) {
        if (j) out += ' ';
        out += std::to_string(img[j] + 1);
    }
    return out;
}

int reducible_prefix(const Permutation& p) {
    int mx = -1;
    for (int j = 0; j + 1 < p.size(); ++j) {
        mx = std::max(mx, p[j]);
        if (mx == j) return j + 1;  // {0..j} invariant
    }
    return -1;
}

bool is_irreducible(const Permutation& p) { return reducible_prefix(p) < 0; }

Iet::Iet(std::vector<Real> lengths, Permutation perm, mpfr_prec_t precision_bits)
    : perm_(std::move(perm)),
      pinv_(perm_.inverse()),
      lengths_(std::move(lengths)),
      pb_(precision_bits),
      tau_(Real::pow2(-static_cast<long>(precision_bits / 2), 64)) {
    const int d = perm_.size();
    if (d < 2) throw UsageError("need at least two intervals");
    if (static_cast<int>(lengths_.size()) != d) throw UsageError("lengths/perm size mismatch");

    /* guard precision: partial sums of valid dyadic lengths stay exact */
    const mpfr_prec_t pg = work_prec();
    Real sum(0.0, pg);
    cumL_.assign(d + 1, Real(pg));
    for (int j = 0; j < d; ++j) {
        if (lengths_[j].sign() <= 0) throw UsageError("lengths must be positive");
        if (lengths_[j] < tau_)
            throw PrecisionExhausted("length below tolerance at construction");
        cumL_[j] = sum;
        sum += lengths_[j].round_to(pg);
    }
    cumL_[d] = sum;
    if ((sum - Real(1.0, pg)).abs() > tau_)
        throw UsageError("lengths must sum to 1 within tolerance");

    imgL_.assign(d + 1, Real(pg));
    Real isum(0.0, pg);
    for (int k = 0; k < d; ++k) {
        imgL_[k] = isum;
        isum += lengths_[pinv_[k]].round_to(pg);
    }
    imgL_[d] = isum;
    off_.assign(d, Real(pg));
    for (int j = 0; j < d; ++j) off_[j] = imgL_[perm_[j]] - cumL_[j];
}

int Iet::subinterval(const Real& x) const {
    if (x.sign() < 0 || x >= cumL_[d()]) throw OutOfDomain("point outside [0,1)");
    int lo = 0, hi = d() - 1;
    while (lo < hi) {  // largest j with L_j <= x
        int mid = (lo + hi + 1) / 2;
        if (cumL_[mid] <= x) lo = mid; else hi = mid - 1;
    }
    return lo;
}

Real Iet::evaluate(const Real& x) const {
    const int j = subinterval(x);
    /* stationary precision: results stay exact, no per-step creep */
    mpfr_prec_t p = std::max(x.prec(), work_prec());
    return x.round_to(p) + off_[j];
}

Real Iet::evaluate_inverse(const Real& y) const {
    if (y.sign() < 0 || y >= imgL_[d()]) throw OutOfDomain("point outside [0,1)");
    int lo = 0, hi = d() - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (imgL_[mid] <= y) lo = mid; else hi = mid - 1;
    }
    const int j = pinv_[lo];
    mpfr_prec_t p = std::max(y.prec(), work_prec());
    return y.round_to(p) - off_[j];
}

Real Iet::iterate(const Real& x, long n) const {
    Real p = x;
    for (long i = 0; i < n; ++i) p = evaluate(p);
    for (long i = 0; i > n; --i) p = evaluate_inverse(p);
    return p;
}

std::string Iet::to_json() const {
    nlohmann::json j;
    j["d"] = d();
    std::vector<int> perm1;
    for (int v : perm_.img) perm1.push_back(v + 1);
    j["perm"] = perm1;
    std::vector<std::string> ls;
    for (const Real& l : lengths_) ls.push_back(l.to_hex());
    j["lengths"] = ls;
    j["precision_bits"] = static_cast<long>(pb_);
    return j.dump();
}

Iet Iet::from_json(const std::string& json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const std::exception& e) {
        throw UsageError(std::string("bad IET JSON: ") + e.what());
    }
    if (!j.contains("perm") || !j.contains("lengths") || !j.contains("precision_bits"))
        throw UsageError("IET JSON needs perm, lengths, precision_bits");
    std::vector<int> img;
    for (int v : j["perm"].get<std::vector<int>>()) img.push_back(v - 1);
    const mpfr_prec_t pb = j["precision_bits"].get<long>();
    if (pb < 16 || pb > (1 << 22)) throw UsageError("unreasonable precision_bits");
    std::vector<Real> ls;
    for (const auto& s : j["lengths"].get<std::vector<std::string>>())
        ls.push_back(Real::from_string(s, pb));
    return Iet(std::move(ls), Permutation{img}, pb);
}

Iet sample_iet(const Permutation& perm, uint64_t seed, mpfr_prec_t precision_bits) {
    if (int k = reducible_prefix(perm); k > 0)
        throw UsageError("permutation is reducible: the prefix {1.." + std::to_string(k) +
                         "} is invariant in " + perm.str());
    const int d = perm.size();
    std::vector<Real> e;
    Real sum(0.0, precision_bits + 16);
    for (int i = 0; i < d; ++i) {
        RngStream st(seed, static_cast<uint64_t>(i) + 1);
        Real u = st.next_unit(precision_bits);
        Real x = -u.log();  // Exp(1)
        e.push_back(x);
        sum += x;
    }
    std::vector<Real> lambda;
    for (int i = 0; i < d; ++i) lambda.push_back((e[i] / sum).round_to(precision_bits));
    return Iet(std::move(lambda), perm, precision_bits);
}

KeaneReport check_keane(const Iet& T, long depth) {
    struct Cmp {
        bool operator()(const Real& a, const Real& b) const { return a < b; }
    };
    /* every recorded point, with its provenance (orbit index, iterate) */
    std::map<Real, std::pair<int, long>, Cmp> seen;
    const int d = T.d();
    std::vector<Real> pts;
    for (int i = 1; i < d; ++i) {
        pts.push_back(T.discontinuities()[i]);
        seen.emplace(pts.back(), std::make_pair(i, 0L));
    }
    const Real& tau = T.tolerance();
    auto describe = [](int orbit, long it) {
        return "orbit of z_" + std::to_string(orbit) + " at iterate " + std::to_string(it);
    };
    for (long m = 1; m <= depth; ++m) {
        for (int i = 0; i < d - 1; ++i) {
            pts[i] = T.evaluate(pts[i]);
            auto it = seen.lower_bound(pts[i]);
            /* exact orbits: equality is honest, tau-near without equality is
               an information-budget failure */
            for (auto cand : {it, (it == seen.begin() ? seen.end() : std::prev(it))}) {
                if (cand == seen.end()) continue;
                Real gap = (cand->first - pts[i]).abs();
                if (gap.is_zero()) {
                    return KeaneReport{false, m,
                                       describe(i + 1, m) + " hits " +
                                           describe(cand->second.first, cand->second.second)};
                }
                if (gap < tau)
                    throw PrecisionExhausted("orbit separation below tolerance at iterate " +
                                             std::to_string(m));
            }
            seen.emplace(pts[i], std::make_pair(i + 1, m));
        }
    }
    return KeaneReport{true, 0, ""};
}

}  // namespace ietlab
