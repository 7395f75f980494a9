#include "fastflow.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace ietlab {

namespace {

double frac1(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;  // guard against rounding at integer arguments
    return f;
}

struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

}  // namespace

int FastIet::subinterval(double x) const {
    auto it = std::upper_bound(cum.begin(), cum.end(), x);
    long j = (it - cum.begin()) - 1;
    if (j < 0) j = 0;
    if (j >= d) j = d - 1;
    return (int)j;
}

FastIet make_fast_iet(const Iet& T) {
    FastIet f;
    f.d = T.d();
    for (const Real& c : T.discontinuities()) f.cum.push_back(c.to_double());
    for (int j = 0; j < f.d; ++j) f.off.push_back(T.offset(j).to_double());
    f.total = f.cum.back();
    return f;
}

FastRoof make_fast_roof(const Roof& roof) {
    FastRoof f;
    for (const RoofSing& s : roof.spec().right) {
        f.zp.push_back(s.z.to_double());
        f.cp.push_back(s.C.to_double());
    }
    for (const RoofSing& s : roof.spec().left) {
        f.zm.push_back(s.z.to_double());
        f.cm.push_back(s.C.to_double());
    }
    f.gcos = roof.spec().cos_coefs;
    f.gsin = roof.spec().sin_coefs;
    f.norm = roof.normalization().to_double();

    f.int_powers = true;
    auto classify = [&](const std::vector<double>& cs, std::vector<int>& out) {
        for (double c : cs) {
            double r = std::round(c);
            if (std::abs(c - r) > 1e-12 || r < 1.0 || r > 8.0) {
                f.int_powers = false;
                return;
            }
            out.push_back((int)r);
        }
    };
    classify(f.cp, f.pp);
    if (f.int_powers) classify(f.cm, f.pm);
    return f;
}

double FastRoof::smooth(double x) const {
    if (gcos.empty() && gsin.empty()) return 0.0;
    double g = 0.0;
    constexpr double twopi = 6.283185307179586476925286766559;
    for (size_t m = 0; m < gcos.size(); ++m) g += gcos[m] * std::cos(twopi * (double)(m + 1) * x);
    for (size_t m = 0; m < gsin.size(); ++m) g += gsin[m] * std::sin(twopi * (double)(m + 1) * x);
    return g;
}

double FastRoof::smooth_derivative(double x) const {
    if (gcos.empty() && gsin.empty()) return 0.0;
    double g = 0.0;
    constexpr double twopi = 6.283185307179586476925286766559;
    for (size_t m = 0; m < gcos.size(); ++m) {
        double w = twopi * (double)(m + 1);
        g -= gcos[m] * w * std::sin(w * x);
    }
    for (size_t m = 0; m < gsin.size(); ++m) {
        double w = twopi * (double)(m + 1);
        g += gsin[m] * w * std::cos(w * x);
    }
    return g;
}

double FastRoof::value(double x) const {
    double acc;
    if (int_powers) {
        double prod = 1.0;
        for (size_t i = 0; i < zp.size(); ++i) {
            double t = frac1(x - zp[i]);
            if (t < hit_eps) throw SingularHit(-1, "orbit point within eps of a singularity");
            for (int p = 0; p < pp[i]; ++p) prod *= t;
        }
        for (size_t i = 0; i < zm.size(); ++i) {
            double t = frac1(zm[i] - x);
            if (t < hit_eps) throw SingularHit(-1, "orbit point within eps of a singularity");
            for (int p = 0; p < pm[i]; ++p) prod *= t;
        }
        if (prod >= 1e-280) {
            acc = -std::log(prod);
        } else {
            // rebuild term by term to avoid underflow
            acc = 0.0;
            for (size_t i = 0; i < zp.size(); ++i) acc -= cp[i] * std::log(frac1(x - zp[i]));
            for (size_t i = 0; i < zm.size(); ++i) acc -= cm[i] * std::log(frac1(zm[i] - x));
        }
    } else {
        acc = 0.0;
        for (size_t i = 0; i < zp.size(); ++i) {
            double t = frac1(x - zp[i]);
            if (t < hit_eps) throw SingularHit(-1, "orbit point within eps of a singularity");
            acc -= cp[i] * std::log(t);
        }
        for (size_t i = 0; i < zm.size(); ++i) {
            double t = frac1(zm[i] - x);
            if (t < hit_eps) throw SingularHit(-1, "orbit point within eps of a singularity");
            acc -= cm[i] * std::log(t);
        }
    }
    return norm * (acc + smooth(x));
}

double FastRoof::derivative(double x) const {
    double acc = 0.0;
    for (size_t i = 0; i < zm.size(); ++i) {
        double t = frac1(zm[i] - x);
        if (t < hit_eps) throw SingularHit(-1, "orbit point within eps of a singularity");
        acc += cm[i] / t;
    }
    for (size_t i = 0; i < zp.size(); ++i) {
        double t = frac1(x - zp[i]);
        if (t < hit_eps) throw SingularHit(-1, "orbit point within eps of a singularity");
        acc -= cp[i] / t;
    }
    return norm * (acc + smooth_derivative(x));
}

double fast_birkhoff(const FastIet& T, const FastRoof& f, double x, long r, bool derivative) {
    if (r < 0) throw UsageError("fast_birkhoff: negative r");
    Kahan k;
    double cur = x;
    for (long i = 0; i < r; ++i) {
        try {
            k.add(derivative ? f.derivative(cur) : f.value(cur));
        } catch (const SingularHit& e) {
            throw SingularHit(i, e.what());
        }
        if (i + 1 < r) cur = T.evaluate(cur);
    }
    return k.s;
}

void fast_min_distances(const FastIet& T, const FastRoof& f, double z0, long r,
                        std::vector<double>& x_min, std::vector<double>& y_min) {
    x_min.assign(f.zp.size(), 2.0);
    y_min.assign(f.zm.size(), 2.0);
    double cur = z0;
    for (long s = 0; s < r; ++s) {
        for (size_t i = 0; i < f.zp.size(); ++i) {
            double t = frac1(cur - f.zp[i]);
            if (t < f.hit_eps) throw SingularHit(s, "orbit point within eps of a singularity");
            if (t < x_min[i]) x_min[i] = t;
        }
        for (size_t i = 0; i < f.zm.size(); ++i) {
            double t = frac1(f.zm[i] - cur);
            if (t < f.hit_eps) throw SingularHit(s, "orbit point within eps of a singularity");
            if (t < y_min[i]) y_min[i] = t;
        }
        if (s + 1 < r) cur = T.evaluate(cur);
    }
}

FastBound fast_bound_check(const FastIet& T, const FastRoof& f, double z0, long r, double M) {
    double lhs = std::abs(fast_birkhoff(T, f, z0, r, true));
    std::vector<double> xm, ym;
    fast_min_distances(T, f, z0, r, xm, ym);
    double rhs = M * (double)r;
    for (size_t i = 0; i < xm.size(); ++i) rhs += f.norm * f.cp[i] / xm[i];
    for (size_t i = 0; i < ym.size(); ++i) rhs += f.norm * f.cm[i] / ym[i];
    return FastBound{lhs, rhs, lhs <= rhs, r};
}

StretchReport fast_stretch(const InductionPath& path, const Roof& roof, const RigiditySet& rs,
                           int samples, uint64_t seed) {
    if (samples < 1) throw UsageError("stretch: samples must be >= 1");
    FastIet T = make_fast_iet(path.base());
    FastRoof f = make_fast_roof(roof);

    // floor offsets by iterating the parent base midpoint; certified rigid
    // by verify_rigidity, so double drift (~1e-11) is the only slack here
    std::vector<double> offs;
    offs.reserve((size_t)rs.height);
    {
        double mid = ((rs.parent_a + rs.parent_b) * Real(0.5, 64)).to_double();
        double m0 = mid;
        for (long i = 0; i < rs.height; ++i) {
            offs.push_back(mid - m0);
            if (i + 1 < rs.height) mid = T.evaluate(mid);
        }
    }

    double Ja = rs.Jk_a.to_double();
    double Jw = (rs.Jk_b - rs.Jk_a).to_double();

    StretchReport rep;
    rep.level = rs.level;
    rep.r_k = rs.r_k;
    rep.samples = samples;
    rep.singular_retries = 0;

    double mx = 0.0, mn = 0.0;
    Kahan mean;
    for (int s = 0; s < samples; ++s) {
        RngStream rng(seed, (uint64_t(1) << 32) + (uint64_t)s);
        double S = 0.0;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 10000) throw RunTooLong("stretch: singular retries exhausted");
            uint64_t lvl = rng.next_below((uint64_t)rs.height);
            double x = Ja + rng.next_double() * Jw + offs[(size_t)lvl];
            try {
                S = fast_birkhoff(T, f, x, rs.r_k, false);
                break;
            } catch (const SingularHit&) {
                ++rep.singular_retries;
            }
        }
        mean.add(S);
        if (s == 0) {
            mx = mn = S;
        } else {
            if (S > mx) mx = S;
            if (S < mn) mn = S;
        }
    }
    rep.max_sum = mx;
    rep.min_sum = mn;
    rep.mean_sum = mean.s / (double)samples;
    rep.spread = mx - mn;
    return rep;
}

namespace {

/* Gauss-Legendre nodes/weights on [-1,1] by Newton iteration; cached. */
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign((size_t)n, 0.0);
    w.assign((size_t)n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * ((double)i + 0.75) / ((double)n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - (double)j * p2) / (double)(j + 1);
            }
            pp = (double)n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[(size_t)i] = -z;
        x[(size_t)(n - 1 - i)] = z;
        w[(size_t)i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[(size_t)(n - 1 - i)] = w[(size_t)i];
    }
}

}  // namespace

double integrate_roof(const Roof& roof) {
    FastRoof f = make_fast_roof(roof);

    // breakpoints: all singular positions mod 1
    std::vector<double> bp;
    for (double z : f.zp) bp.push_back(frac1(z));
    for (double z : f.zm) bp.push_back(frac1(z));
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    static const auto GL = [] {
        std::pair<std::vector<double>, std::vector<double>> nw;
        gauss_legendre(64, nw.first, nw.second);
        return nw;
    }();
    const std::vector<double>& gx = GL.first;
    const std::vector<double>& gw = GL.second;

    double total = 0.0;
    for (size_t t = 0; t < bp.size(); ++t) {
        double a = bp[t];
        double b = (t + 1 < bp.size()) ? bp[t + 1] : bp[0] + 1.0;
        double wpc = b - a;
        if (!(wpc > 0.0)) continue;
        double bm = frac1(b);

        // analytic integrals of the log terms anchored at the endpoints:
        // int_0^w |ln t| dt = w - w ln w for 0 < w <= 1
        std::vector<size_t> at_a, at_b;
        for (size_t i = 0; i < f.zp.size(); ++i)
            if (frac1(f.zp[i]) == a) {
                total += f.cp[i] * (wpc - wpc * std::log(wpc));
                at_a.push_back(i);
            }
        for (size_t i = 0; i < f.zm.size(); ++i)
            if (frac1(f.zm[i]) == bm) {
                total += f.cm[i] * (wpc - wpc * std::log(wpc));
                at_b.push_back(i);
            }

        // Gauss-Legendre on the smooth remainder, splitting wide pieces
        int panels = wpc > 0.5 ? 2 : 1;
        for (int p = 0; p < panels; ++p) {
            double pa = a + wpc * (double)p / panels;
            double pw = wpc / panels;
            double acc = 0.0;
            for (size_t q = 0; q < gx.size(); ++q) {
                double xq = pa + 0.5 * pw * (gx[q] + 1.0);
                double v = 0.0;
                for (size_t i = 0; i < f.zp.size(); ++i) v -= f.cp[i] * std::log(frac1(xq - f.zp[i]));
                for (size_t i = 0; i < f.zm.size(); ++i) v -= f.cm[i] * std::log(frac1(f.zm[i] - xq));
                v += f.smooth(xq);
                for (size_t i : at_a) v += f.cp[i] * std::log(xq - a);
                for (size_t i : at_b) v += f.cm[i] * std::log(b - xq);
                acc += gw[q] * v;
            }
            total += 0.5 * pw * acc;
        }
    }
    return f.norm * total;
}

}  // namespace ietlab
