/*
 * Roofs and the special flow in multiprecision: exact normalization
 * constants, symmetry detection, the derivative against a central
 * difference, the Birkhoff cocycle law, the flow group law and inverse,
 * return counts against the definition, and singularity bookkeeping.
 */

#include <cmath>

#include "doctest.h"

#include "core/logflow.hpp"
#include "core/fastflow.hpp"
#include "core/rng.hpp"
#include "helpers.hpp"

using namespace ietlab;
using ietlab_test::golden_iet;

namespace {

Roof make_sym(mpfr_prec_t p) { return Roof(RoofSpec::single_pair(1.0, 1.0, p), p); }
Roof make_asym(mpfr_prec_t p) { return Roof(RoofSpec::single_pair(1.0, 0.5, p), p); }

}  // namespace

TEST_CASE("normalization constants are exact rationals") {
    mpfr_prec_t p = 128;
    Roof sym = make_sym(p);
    CHECK(sym.normalization() == Real(0.5, 64));  // 1/(1+1)
    CHECK(sym.symmetric());
    CHECK(sym.s1() == 1);
    CHECK(sym.s2() == 1);

    Roof asym = make_asym(p);
    // 1/(1 + 1/2) = 2/3, check via the defining identity
    CHECK(asym.normalization() * Real(1.5, 64) == Real(1.0, 64));
    CHECK(!asym.symmetric());

    Roof ham(RoofSpec::hamiltonian_quadruples(2, p), p);
    CHECK(ham.symmetric());
    CHECK(ham.s1() == ham.s2());
    CHECK(ham.s1() == 2);  // s = 2: one quadruple splits as 2 right + 2 left
}

TEST_CASE("normalized roofs integrate to one") {
    mpfr_prec_t p = 96;
    for (int which = 0; which < 3; ++which) {
        RoofSpec spec = which == 0   ? RoofSpec::single_pair(1.0, 1.0, p)
                        : which == 1 ? RoofSpec::single_pair(2.0, 0.75, p)
                                     : RoofSpec::hamiltonian_quadruples(2, p);
        if (which == 1) {
            spec.cos_coefs = {0.25, -0.1};
            spec.sin_coefs = {0.3};
        }
        Roof roof(spec, p);
        CHECK(integrate_roof(roof) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("derivative matches a central difference away from singularities") {
    mpfr_prec_t p = 256;
    RoofSpec spec = RoofSpec::single_pair(1.0, 0.5, p);
    spec.cos_coefs = {0.2};
    spec.sin_coefs = {-0.15, 0.05};
    Roof roof(spec, p);
    Real h = Real::pow2(-40, p);
    for (double xd : {0.13, 0.37, 0.52, 0.81}) {
        Real x(xd, p);
        Real num = (roof.value(x + h) - roof.value(x - h)) / (h * Real(2.0, 64));
        Real exact = roof.derivative(x);
        // second-order: error ~ f''' h^2 ~ 2^-80 at these distances
        CHECK((num - exact).abs() < Real::pow2(-60, 64));
    }
    // smooth part alone
    for (double xd : {0.1, 0.45}) {
        Real x(xd, p);
        Real num = (roof.smooth(x + h) - roof.smooth(x - h)) / (h * Real(2.0, 64));
        CHECK((num - roof.smooth_derivative(x)).abs() < Real::pow2(-60, 64));
    }
}

TEST_CASE("value throws SingularHit inside the protective tube") {
    mpfr_prec_t p = 128;
    Roof roof = make_sym(p);
    Real close = roof.tolerance() * Real(0.5, 64);
    CHECK_THROWS_AS(roof.value(close), SingularHit);
    CHECK_THROWS_AS(roof.derivative(Real(1.0, 64) - close), SingularHit);
    CHECK_NOTHROW(roof.value(roof.tolerance() * Real(4.0, 64)));
}

TEST_CASE("birkhoff sums satisfy the cocycle law") {
    mpfr_prec_t p = 192;
    Iet T = golden_iet(p);
    Roof roof = make_asym(p);
    RngStream rng(303, 7);
    for (int i = 0; i < 5; ++i) {
        Real x = rng.next_unit(p);
        long r1 = 7, r2 = 12;
        Real a = birkhoff_sum(T, roof, x, r1);
        Real b = birkhoff_sum(T, roof, T.iterate(x, r1), r2);
        Real c = birkhoff_sum(T, roof, x, r1 + r2);
        CHECK((c - (a + b)).abs() < Real::pow2(-(long)p + 40, 64));
        CHECK(birkhoff_sum(T, roof, x, 0) == Real(0.0, 64));
    }
    // derivative sums obey the same law
    Real x = Real(0.42, p);
    Real da = birkhoff_sum(T, roof, x, 5, true);
    Real db = birkhoff_sum(T, roof, T.iterate(x, 5), 6, true);
    Real dc = birkhoff_sum(T, roof, x, 11, true);
    CHECK((dc - (da + db)).abs() < Real::pow2(-(long)p + 48, 64));
}

TEST_CASE("return_count matches its definition") {
    mpfr_prec_t p = 160;
    Iet T = golden_iet(p);
    Roof roof = make_sym(p);
    Real x(0.3, p);
    for (double td : {0.7, 2.5, 9.0}) {
        Real t(td, p);
        long r = return_count(T, roof, x, t);
        // S^r < t <= S^{r+1}
        CHECK(birkhoff_sum(T, roof, x, r) < t);
        CHECK(birkhoff_sum(T, roof, x, r + 1) >= t);
    }
}

TEST_CASE("flow satisfies identity, group law, and inverse") {
    mpfr_prec_t p = 192;
    Iet T = golden_iet(p);
    Roof roof = make_asym(p);
    RngStream rng(11, 8);
    Real tol = Real::pow2(-(long)p + 60, 64);
    for (int i = 0; i < 6; ++i) {
        Real x = rng.next_unit(p);
        Real fx = roof.value(x);
        FlowPoint q{x, fx * rng.next_unit(53) * Real(0.999, 53)};

        FlowPoint id = flow_map(T, roof, q, Real(0.0, 64));
        CHECK(id.x == q.x);
        CHECK(id.y == q.y);

        Real s = rng.next_unit(53) * Real(4.0, 53) - Real(2.0, 53);
        Real t = rng.next_unit(53) * Real(4.0, 53) - Real(2.0, 53);
        FlowPoint one = flow_map(T, roof, q, s + t);
        FlowPoint two = flow_map(T, roof, flow_map(T, roof, q, s), t);
        CHECK((one.x - two.x).abs() < tol);
        CHECK((one.y - two.y).abs() < tol);

        FlowPoint back = flow_map(T, roof, flow_map(T, roof, q, s), Real(0.0, 64) - s);
        CHECK((back.x - q.x).abs() < tol);
        CHECK((back.y - q.y).abs() < tol);
    }
}

TEST_CASE("flow validates its base point") {
    mpfr_prec_t p = 128;
    Iet T = golden_iet(p);
    Roof roof = make_sym(p);
    Real x(0.3, p);
    FlowPoint above{x, roof.value(x) + Real(0.5, 64)};
    CHECK_THROWS_AS(flow_map(T, roof, above, Real(1.0, 64)), OutOfDomain);
    FlowPoint neg{x, Real(-0.25, p)};
    CHECK_THROWS_AS(flow_map(T, roof, neg, Real(1.0, 64)), OutOfDomain);
}

TEST_CASE("min_distances agree with the ordered-distance sweep") {
    mpfr_prec_t p = 128;
    Iet T = golden_iet(p);
    Roof roof = make_asym(p);
    Real z0(0.3, p);
    long r = 60;
    MinDistances md = min_distances(T, roof, z0, r);
    REQUIRE(md.x_min.size() == roof.s1());
    REQUIRE(md.y_min.size() == roof.s2());
    std::vector<Real> right_pos, left_pos;
    for (const RoofSing& s : roof.spec().right) right_pos.push_back(s.z);
    for (const RoofSing& s : roof.spec().left) left_pos.push_back(s.z);
    OrderedDistances od = ordered_singularity_distances(T, right_pos, left_pos, z0, r);
    for (size_t i = 0; i < md.x_min.size(); ++i) CHECK(md.x_min[i] == od.right[i].front());
    for (size_t i = 0; i < md.y_min.size(); ++i) CHECK(md.y_min[i] == od.left[i].front());
}

TEST_CASE("tower decomposition covers the orbit with full rides inside") {
    InductionPath path(golden_iet(128), 16);
    size_t n = 7;
    TowerSystem sys = make_towers(path, n);
    Real z0(0.55, 128);
    long r = 400;
    std::vector<TowerSegment> segs = decompose_along_towers(path, n, z0, r);
    REQUIRE(!segs.empty());
    long total = 0;
    for (const TowerSegment& s : segs) total += s.len;
    CHECK(total == r);
    // interior segments are complete rides; only the ends may be partial
    for (size_t i = 0; i + 1 < segs.size(); ++i) {
        if (i > 0) {
            CHECK(segs[i].full);
            CHECK(segs[i].len == (long)sys.heights[(size_t)segs[i].tower].get_si());
        }
    }
    // segment start points follow the orbit
    const Iet& T = path.base();
    long off = 0;
    for (const TowerSegment& s : segs) {
        CHECK(s.start == T.iterate(z0, off));
        off += s.len;
    }
    // full segments start at the inducing interval (below the level norm)
    for (size_t i = 1; i + 1 < segs.size(); ++i) CHECK(segs[i].start < sys.lambda_norm);
}

TEST_CASE("derivative bound checks hold on a balanced golden level") {
    InductionPath path(golden_iet(128), 18);
    Roof roof = make_sym(128);
    BoundCheck bc = tower_derivative_bound_check(path, roof, 12, 0, 1.0);
    CHECK(bc.ok);
    CHECK(bc.lhs <= bc.rhs);
    CHECK(bc.r > 0);
    REQUIRE(bc.x_min.size() == roof.s1());
    for (double d : bc.x_min) CHECK(d > 0.0);

    // rhs decomposition: M r + sum C/x_min + sum C/y_min (constants normalized)
    double nrm = roof.normalization().to_double();
    double rhs = 1.0 * (double)bc.r;
    for (size_t i = 0; i < bc.x_min.size(); ++i)
        rhs += nrm * roof.spec().right[i].C.to_double() / bc.x_min[i];
    for (size_t i = 0; i < bc.y_min.size(); ++i)
        rhs += nrm * roof.spec().left[i].C.to_double() / bc.y_min[i];
    CHECK(bc.rhs == doctest::Approx(rhs).epsilon(1e-9));

    Real z0(0.01, 128);
    BoundCheck gen = general_sum_bound_check(path, roof, 12, 0, z0, 50, 2.0);
    CHECK(gen.r == 50);
    CHECK(gen.lhs >= 0.0);
}

TEST_CASE("stretch sweep is deterministic in the seed") {
    InductionPath path(golden_iet(128), 18);
    Roof roof = make_sym(128);
    RigiditySet rs = build_rigidity_set(path, 10, 0.5);
    StretchReport a = stretch_over_rigidity_set(path, roof, rs, 64, 2024);
    StretchReport b = stretch_over_rigidity_set(path, roof, rs, 64, 2024);
    CHECK(a.samples == 64);
    CHECK(a.level == 10);
    CHECK(a.r_k == rs.r_k);
    CHECK(a.max_sum == b.max_sum);
    CHECK(a.min_sum == b.min_sum);
    CHECK(a.mean_sum == b.mean_sum);
    CHECK(a.spread == doctest::Approx(a.max_sum - a.min_sum));
    CHECK(a.min_sum <= a.mean_sum);
    CHECK(a.mean_sum <= a.max_sum);
}
