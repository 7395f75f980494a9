#include "logflow.hpp"

#include <sstream>

#include "errors.hpp"
#include "fastflow.hpp"
#include "toml_lite.hpp"

namespace ietlab {

namespace {

Real sum_constants(const std::vector<RoofSing>& v, mpfr_prec_t prec) {
    Real s(prec);
    for (const RoofSing& rs : v) s += rs.C;
    return s;
}

}  // namespace

RoofSpec RoofSpec::from_toml(const std::string& text, mpfr_prec_t prec) {
    TomlDoc doc = TomlDoc::parse(text);
    RoofSpec spec;
    auto load_side = [&](const char* name, std::vector<RoofSing>& out) {
        auto it = doc.table_arrays.find(name);
        if (it == doc.table_arrays.end()) return;
        for (const TomlTable& t : it->second) {
            RoofSing s{Real(t.at("z").as_number(), prec), Real(t.at("C").as_number(), prec)};
            out.push_back(std::move(s));
        }
    };
    load_side("right", spec.right);
    load_side("left", spec.left);
    if (doc.has_table("smooth")) {
        const TomlTable& sm = doc.table("smooth");
        if (sm.has("cos")) spec.cos_coefs = sm.at("cos").as_number_array();
        if (sm.has("sin")) spec.sin_coefs = sm.at("sin").as_number_array();
    }
    return spec;
}

std::string RoofSpec::to_toml() const {
    std::ostringstream os;
    for (const RoofSing& s : right)
        os << "[[right]]\nz = " << s.z.to_decimal(20) << "\nC = " << s.C.to_decimal(20) << "\n";
    for (const RoofSing& s : left)
        os << "[[left]]\nz = " << s.z.to_decimal(20) << "\nC = " << s.C.to_decimal(20) << "\n";
    if (!cos_coefs.empty() || !sin_coefs.empty()) {
        os << "[smooth]\ncos = [";
        for (size_t i = 0; i < cos_coefs.size(); ++i)
            os << (i ? ", " : "") << cos_coefs[i];
        os << "]\nsin = [";
        for (size_t i = 0; i < sin_coefs.size(); ++i)
            os << (i ? ", " : "") << sin_coefs[i];
        os << "]\n";
    }
    return os.str();
}

RoofSpec RoofSpec::single_pair(double cplus, double cminus, mpfr_prec_t prec) {
    RoofSpec spec;
    spec.right.push_back(RoofSing{Real(0.0, prec), Real(cplus, prec)});
    spec.left.push_back(RoofSing{Real(1.0, prec), Real(cminus, prec)});
    return spec;
}

RoofSpec RoofSpec::hamiltonian_quadruples(int s, mpfr_prec_t prec) {
    if (s < 2 || s % 2 != 0)
        throw UsageError("hamiltonian-quadruples preset needs even s >= 2");
    RoofSpec spec;
    Real sr((double)s, prec);
    for (int i = 0; i < s; ++i) {
        double cq = (double)(i / 2 + 1);  // quadruple value q+1
        spec.right.push_back(RoofSing{Real((double)i, prec) / sr, Real(cq, prec)});
        spec.left.push_back(RoofSing{Real((double)(i + 1), prec) / sr, Real(cq, prec)});
    }
    return spec;
}

Roof::Roof(RoofSpec spec, mpfr_prec_t prec)
    : spec_(std::move(spec)), prec_(prec), norm_(prec), tau_(Real::pow2(-(long)(prec / 2), prec)) {
    if (prec < 53) throw UsageError("roof precision below 53 bits");
    if (spec_.right.empty() && spec_.left.empty())
        throw UsageError("roof needs at least one logarithmic singularity");
    Real zero(0.0, prec), one(1.0, prec);
    for (const RoofSing& s : spec_.right) {
        if (s.z < zero || !(s.z < one)) throw UsageError("right singularity outside [0,1)");
        if (!(s.C > zero)) throw UsageError("constants must be strictly positive");
    }
    for (const RoofSing& s : spec_.left) {
        if (!(s.z > zero) || s.z > one) throw UsageError("left singularity outside (0,1]");
        if (!(s.C > zero)) throw UsageError("constants must be strictly positive");
    }
    auto distinct = [](const std::vector<RoofSing>& v) {
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = i + 1; j < v.size(); ++j)
                if (v[i].z == v[j].z) return false;
        return true;
    };
    if (!distinct(spec_.right) || !distinct(spec_.left))
        throw UsageError("singularity positions must be pairwise distinct within each side");

    Real cp = sum_constants(spec_.right, prec_);
    Real cm = sum_constants(spec_.left, prec_);
    /* each |ln| term has unit integral over a period; trig g integrates to 0 */
    norm_ = Real(1.0, prec_) / (cp + cm);
    symmetric_ = ((cp - cm).abs() <= tau_);
}

namespace {

/* {x - z} rounded to evaluation precision; SingularHit below tau */
Real frac_dist(const Real& x, const Real& z, const Real& tau, mpfr_prec_t prec, bool z_minus_x) {
    Real t = z_minus_x ? (z - x).frac() : (x - z).frac();
    if (t < tau) throw SingularHit(-1, "orbit point within tolerance of a singularity");
    return t.round_to(prec + 16);
}

}  // namespace

Real Roof::smooth(const Real& x) const {
    if (spec_.cos_coefs.empty() && spec_.sin_coefs.empty()) return Real(0.0, prec_);
    Real xr = x.frac().round_to(prec_ + 16);
    Real twopi = Real(2.0, prec_ + 16) * Real::pi(prec_ + 16);
    Real acc(prec_);
    for (size_t m = 0; m < spec_.cos_coefs.size(); ++m)
        acc += Real(spec_.cos_coefs[m], prec_) * (twopi * Real((double)(m + 1), prec_) * xr).cos();
    for (size_t m = 0; m < spec_.sin_coefs.size(); ++m)
        acc += Real(spec_.sin_coefs[m], prec_) * (twopi * Real((double)(m + 1), prec_) * xr).sin();
    return acc;
}

Real Roof::smooth_derivative(const Real& x) const {
    if (spec_.cos_coefs.empty() && spec_.sin_coefs.empty()) return Real(0.0, prec_);
    Real xr = x.frac().round_to(prec_ + 16);
    Real twopi = Real(2.0, prec_ + 16) * Real::pi(prec_ + 16);
    Real acc(prec_);
    for (size_t m = 0; m < spec_.cos_coefs.size(); ++m) {
        Real w = twopi * Real((double)(m + 1), prec_);
        acc -= Real(spec_.cos_coefs[m], prec_) * w * (w * xr).sin();
    }
    for (size_t m = 0; m < spec_.sin_coefs.size(); ++m) {
        Real w = twopi * Real((double)(m + 1), prec_);
        acc += Real(spec_.sin_coefs[m], prec_) * w * (w * xr).cos();
    }
    return acc;
}

Real Roof::value(const Real& x) const {
    Real acc(prec_);
    /* t in (0,1) so |ln t| = -ln t */
    for (const RoofSing& s : spec_.right)
        acc -= s.C * frac_dist(x, s.z, tau_, prec_, false).log();
    for (const RoofSing& s : spec_.left)
        acc -= s.C * frac_dist(x, s.z, tau_, prec_, true).log();
    acc += smooth(x);
    return norm_ * acc;
}

Real Roof::derivative(const Real& x) const {
    Real acc(prec_);
    for (const RoofSing& s : spec_.left)
        acc += s.C / frac_dist(x, s.z, tau_, prec_, true);  // v(x - z-) = 1/{z- - x}
    for (const RoofSing& s : spec_.right)
        acc -= s.C / frac_dist(x, s.z, tau_, prec_, false);  // u(x - z+) = 1/{x - z+}
    acc += smooth_derivative(x);
    return norm_ * acc;
}

Real birkhoff_sum(const Iet& T, const Roof& roof, const Real& x, long r, bool derivative) {
    if (r < 0) throw UsageError("birkhoff_sum: negative r");
    Real s(roof.prec());
    Real cur = x;
    for (long i = 0; i < r; ++i) {
        try {
            s += derivative ? roof.derivative(cur) : roof.value(cur);
        } catch (const SingularHit& e) {
            throw SingularHit(i, e.what());
        }
        if (i + 1 < r) cur = T.evaluate(cur);
    }
    return s;
}

long return_count(const Iet& T, const Roof& roof, const Real& x, const Real& t, long cap) {
    if (!(t > Real(0.0, 64))) throw UsageError("return_count: t must be positive");
    Real s(roof.prec());
    Real cur = x;
    long r = 0;
    for (;;) {
        Real v;
        try {
            v = roof.value(cur);
        } catch (const SingularHit& e) {
            throw SingularHit(r, e.what());
        }
        if (!(s + v < t)) return r;  // S^{r+1} >= t, so max { r : S^r < t } is r
        s += v;
        cur = T.evaluate(cur);
        if (++r > cap) throw RunTooLong("return_count: cap exceeded");
    }
}

FlowPoint flow_map(const Iet& T, const Roof& roof, const FlowPoint& p, const Real& t, long cap) {
    Real fx;
    try {
        fx = roof.value(p.x);
    } catch (const SingularHit& e) {
        throw SingularHit(0, e.what());
    }
    if (p.y < Real(0.0, 64) || !(p.y < fx))
        throw UsageError("flow_map: point not under the roof");

    Real w = p.y + t;
    Real cx = p.x;
    long steps = 0;
    if (w.sign() >= 0) {
        for (;;) {
            Real v;
            try {
                v = roof.value(cx);
            } catch (const SingularHit& e) {
                throw SingularHit(steps, e.what());
            }
            if (w < v) break;
            w -= v;
            cx = T.evaluate(cx);
            if (++steps > cap) throw RunTooLong("flow_map: cap exceeded");
        }
    } else {
        while (w.sign() < 0) {
            cx = T.evaluate_inverse(cx);
            try {
                w += roof.value(cx);
            } catch (const SingularHit& e) {
                throw SingularHit(-steps - 1, e.what());
            }
            if (++steps > cap) throw RunTooLong("flow_map: cap exceeded");
        }
    }
    return FlowPoint{cx, w};
}

MinDistances min_distances(const Iet& T, const Roof& roof, const Real& z0, long r) {
    if (r < 1) throw UsageError("min_distances: r must be >= 1");
    MinDistances md;
    md.x_min.assign(roof.s1(), Real(2.0, roof.prec()));
    md.y_min.assign(roof.s2(), Real(2.0, roof.prec()));
    Real cur = z0;
    const Real& tau = roof.tolerance();
    for (long s = 0; s < r; ++s) {
        for (size_t i = 0; i < roof.s1(); ++i) {
            Real t = (cur - roof.spec().right[i].z).frac();
            if (t < tau) throw SingularHit(s, "orbit point within tolerance of a right singularity");
            if (t < md.x_min[i]) md.x_min[i] = t;
        }
        for (size_t i = 0; i < roof.s2(); ++i) {
            Real t = (roof.spec().left[i].z - cur).frac();
            if (t < tau) throw SingularHit(s, "orbit point within tolerance of a left singularity");
            if (t < md.y_min[i]) md.y_min[i] = t;
        }
        if (s + 1 < r) cur = T.evaluate(cur);
    }
    return md;
}

namespace {

BoundCheck bound_check_at(const InductionPath& path, const Roof& roof, const Real& z0, long r,
                          double M) {
    const Iet& T = path.base();
    Real lhs = birkhoff_sum(T, roof, z0, r, true).abs();
    MinDistances md = min_distances(T, roof, z0, r);

    mpfr_prec_t prec = roof.prec();
    Real rhs = Real(M, prec) * Real((double)r, prec);
    for (size_t i = 0; i < roof.s1(); ++i)
        rhs += roof.normalization() * roof.spec().right[i].C / md.x_min[i];
    for (size_t i = 0; i < roof.s2(); ++i)
        rhs += roof.normalization() * roof.spec().left[i].C / md.y_min[i];

    BoundCheck bc;
    bc.lhs = lhs.to_double();
    bc.rhs = rhs.to_double();
    bc.ok = (lhs <= rhs);
    bc.r = r;
    for (const Real& v : md.x_min) bc.x_min.push_back(v.to_double());
    for (const Real& v : md.y_min) bc.y_min.push_back(v.to_double());
    return bc;
}

long height_as_long(const mpz_class& h, const char* what) {
    if (!h.fits_slong_p()) throw RunTooLong(std::string(what) + ": tower height exceeds machine range");
    return h.get_si();
}

}  // namespace

BoundCheck tower_derivative_bound_check(const InductionPath& path, const Roof& roof, size_t n,
                                        int j, double M) {
    LevelChart ch = make_level_chart(path, n);
    if (j < 0 || j >= (int)ch.widths.size())
        throw UsageError("tower_derivative_bound_check: tower index out of range");
    Real half(0.5, ch.cumL[(size_t)j].prec());
    Real z0 = ch.cumL[(size_t)j] + ch.widths[(size_t)j] * half;
    long r = height_as_long(ch.heights[(size_t)j], "tower_derivative_bound_check");
    return bound_check_at(path, roof, z0, r, M);
}

BoundCheck general_sum_bound_check(const InductionPath& path, const Roof& roof, size_t n, int j,
                                   const Real& z0, long r, double Mprime) {
    LevelChart ch = make_level_chart(path, n);
    if (j < 0 || j >= (int)ch.widths.size())
        throw UsageError("general_sum_bound_check: tower index out of range");
    if (z0 < ch.cumL[(size_t)j] || !(z0 < ch.cumL[(size_t)j + 1]))
        throw UsageError("general_sum_bound_check: z0 not in I^(n)_j");
    long hj = height_as_long(ch.heights[(size_t)j], "general_sum_bound_check");
    if (r < 0 || r > hj) throw UsageError("general_sum_bound_check: r outside [0, h_j]");
    if (r == 0) {
        BoundCheck bc;
        bc.lhs = 0.0;
        bc.rhs = 0.0;
        bc.ok = true;
        bc.r = 0;
        return bc;
    }
    return bound_check_at(path, roof, z0, r, Mprime);
}

std::vector<TowerSegment> decompose_along_towers(const InductionPath& path, size_t n,
                                                 const Real& z0, long r) {
    if (r < 0) throw UsageError("decompose_along_towers: negative r");
    const Iet& T = path.base();
    LevelChart ch = make_level_chart(path, n);
    const int d = T.d();

    std::vector<long> h((size_t)d);
    long hmax = 0;
    for (int j = 0; j < d; ++j) {
        h[(size_t)j] = height_as_long(ch.heights[(size_t)j], "decompose_along_towers");
        if (h[(size_t)j] > hmax) hmax = h[(size_t)j];
    }
    if (z0 < Real(0.0, 64) || !(z0 < T.discontinuities().back()))
        throw UsageError("decompose_along_towers: z0 outside the domain");

    std::vector<TowerSegment> segs;
    if (r == 0) return segs;

    // locate z0's floor: walk backward to the inducing interval
    Real zb = z0;
    long lvl = 0;
    while (!(zb < ch.norm)) {
        zb = T.evaluate_inverse(zb);
        if (++lvl > hmax)
            throw Error(errc::internal, "decompose_along_towers: backward walk escaped the towers");
    }
    int j = ch.subinterval(zb);

    long remaining = r;
    long lead = h[(size_t)j] - lvl;  // steps to finish the current ride
    if (lead >= remaining) {
        segs.push_back(TowerSegment{z0, j, remaining, lvl == 0 && remaining == h[(size_t)j]});
        return segs;
    }
    segs.push_back(TowerSegment{z0, j, lead, lvl == 0});
    remaining -= lead;
    Real cur = ch.evaluate(zb);  // next visit to the inducing interval

    while (remaining > 0) {
        j = ch.subinterval(cur);
        long len = h[(size_t)j];
        if (len > remaining) len = remaining;
        segs.push_back(TowerSegment{cur, j, len, len == h[(size_t)j]});
        remaining -= len;
        if (remaining > 0) cur = ch.evaluate(cur);
    }
    return segs;
}

StretchReport stretch_over_rigidity_set(const InductionPath& path, const Roof& roof,
                                        const RigiditySet& rs, int samples, uint64_t seed) {
    return fast_stretch(path, roof, rs, samples, seed);
}

}  // namespace ietlab
