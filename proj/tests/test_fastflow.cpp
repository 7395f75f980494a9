/*
 * Double-precision engine pinned against the multiprecision reference on
 * moderate orbits: pointwise roof values and derivatives, Birkhoff sums,
 * minimum distances, bound checks, and the stretch sweep shared by both
 * entry points.  Also the quadrature oracle for the roof integral.
 */

#include <cmath>

#include "doctest.h"

#include "core/fastflow.hpp"
#include "core/rng.hpp"
#include "helpers.hpp"

using namespace ietlab;
using ietlab_test::golden_iet;

TEST_CASE("fast iet matches the exact iet step by step") {
    Iet T = sample_iet(Permutation::parse("4 2 3 1"), 55, 128);
    FastIet F = make_fast_iet(T);
    CHECK(F.d == 4);
    RngStream rng(606, 9);
    for (int i = 0; i < 50; ++i) {
        double x = rng.next_double();
        Real xr(x, 128);
        double drift = 0.0;
        for (int t = 0; t < 100; ++t) {
            CHECK(F.subinterval(x) == T.subinterval(xr));
            x = F.evaluate(x);
            xr = T.evaluate(xr);
        }
        drift = std::abs(x - xr.to_double());
        CHECK(drift < 1e-11);
    }
}

TEST_CASE("fast roof values and derivatives track the reference") {
    mpfr_prec_t p = 160;
    RoofSpec spec = RoofSpec::single_pair(1.0, 0.5, p);
    spec.cos_coefs = {0.2, -0.05};
    spec.sin_coefs = {0.1};
    Roof roof(spec, p);
    FastRoof fr = make_fast_roof(roof);
    CHECK(fr.norm == doctest::Approx(roof.normalization().to_double()).epsilon(1e-15));
    RngStream rng(7, 10);
    for (int i = 0; i < 40; ++i) {
        double x = 0.01 + 0.98 * rng.next_double();
        Real xr(x, p);
        CHECK(fr.value(x) == doctest::Approx(roof.value(xr).to_double()).epsilon(1e-11));
        CHECK(fr.derivative(x) ==
              doctest::Approx(roof.derivative(xr).to_double()).epsilon(1e-10));
    }
    CHECK_THROWS_AS(fr.value(1e-15), SingularHit);
}

TEST_CASE("integer-power fast path agrees with the generic one") {
    mpfr_prec_t p = 128;
    Roof ham(RoofSpec::hamiltonian_quadruples(2, p), p);
    FastRoof fr = make_fast_roof(ham);
    CHECK(fr.int_powers);  // quadruple constants are small integers
    RngStream rng(8, 11);
    for (int i = 0; i < 30; ++i) {
        double x = rng.next_double();
        Real xr(x, p);
        double ref;
        try {
            ref = ham.value(xr).to_double();
        } catch (const SingularHit&) {
            continue;
        }
        CHECK(fr.value(x) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("fast birkhoff sums stay within the drift budget") {
    mpfr_prec_t p = 192;
    Iet T = golden_iet(p);
    Roof roof(RoofSpec::single_pair(1.0, 1.0, p), p);
    FastIet ft = make_fast_iet(T);
    FastRoof fr = make_fast_roof(roof);
    RngStream rng(99, 12);
    for (int i = 0; i < 6; ++i) {
        Real x = rng.next_unit(53);
        double xd = x.to_double();
        for (long r : {10L, 100L, 1000L}) {
            double fast = fast_birkhoff(ft, fr, xd, r, false);
            double ref = birkhoff_sum(T, roof, x, r).to_double();
            CHECK(fast == doctest::Approx(ref).epsilon(1e-7));
            double dfast = fast_birkhoff(ft, fr, xd, r, true);
            double dref = birkhoff_sum(T, roof, x, r, true).to_double();
            // derivative sums cancel heavily; compare absolutely against scale
            CHECK(std::abs(dfast - dref) < 1e-6 * (1.0 + std::abs(dref)) * (double)r);
        }
    }
}

TEST_CASE("fast min distances match the reference componentwise") {
    mpfr_prec_t p = 128;
    Iet T = golden_iet(p);
    Roof roof(RoofSpec::single_pair(1.0, 0.5, p), p);
    FastIet ft = make_fast_iet(T);
    FastRoof fr = make_fast_roof(roof);
    Real z0(0.3, p);
    long r = 500;
    MinDistances md = min_distances(T, roof, z0, r);
    std::vector<double> xm, ym;
    fast_min_distances(ft, fr, 0.3, r, xm, ym);
    REQUIRE(xm.size() == md.x_min.size());
    REQUIRE(ym.size() == md.y_min.size());
    for (size_t i = 0; i < xm.size(); ++i)
        CHECK(xm[i] == doctest::Approx(md.x_min[i].to_double()).epsilon(1e-8));
    for (size_t i = 0; i < ym.size(); ++i)
        CHECK(ym[i] == doctest::Approx(md.y_min[i].to_double()).epsilon(1e-8));
}

TEST_CASE("fast bound check mirrors the reference inequality") {
    InductionPath path(golden_iet(128), 16);
    Roof roof(RoofSpec::single_pair(1.0, 1.0, 128), 128);
    FastIet ft = make_fast_iet(path.base());
    FastRoof fr = make_fast_roof(roof);
    TowerSystem sys = make_towers(path, 10);
    double z0 = (sys.base_left[0] + sys.base_lengths[0] * Real(0.5, 64)).to_double();
    long h0 = (long)sys.heights[0].get_si();
    FastBound fb = fast_bound_check(ft, fr, z0, h0, 1.0);
    BoundCheck bc = tower_derivative_bound_check(path, roof, 10, 0, 1.0);
    CHECK(fb.r == bc.r);
    CHECK(fb.lhs == doctest::Approx(bc.lhs).epsilon(1e-6));
    CHECK(fb.rhs == doctest::Approx(bc.rhs).epsilon(1e-6));
    CHECK(fb.ok == bc.ok);
}

TEST_CASE("fast_stretch is the engine behind the reference entry point") {
    InductionPath path(golden_iet(128), 16);
    Roof roof(RoofSpec::single_pair(1.0, 1.0, 128), 128);
    RigiditySet rs = build_rigidity_set(path, 9, 0.5);
    StretchReport a = fast_stretch(path, roof, rs, 48, 77);
    StretchReport b = stretch_over_rigidity_set(path, roof, rs, 48, 77);
    CHECK(a.max_sum == b.max_sum);
    CHECK(a.min_sum == b.min_sum);
    CHECK(a.mean_sum == b.mean_sum);
    CHECK(a.singular_retries == b.singular_retries);
}

TEST_CASE("roof integral quadrature hits known values") {
    mpfr_prec_t p = 96;
    // single |ln| with C=1 integrates to 1 before normalization; norm = 1/2
    Roof sym(RoofSpec::single_pair(1.0, 1.0, p), p);
    CHECK(integrate_roof(sym) == doctest::Approx(1.0).epsilon(1e-6));
    // pure trig g integrates to 0, so adding it must not move the integral
    RoofSpec spec = RoofSpec::single_pair(1.0, 1.0, p);
    spec.cos_coefs = {0.4};
    spec.sin_coefs = {-0.2, 0.1};
    Roof trig(spec, p);
    CHECK(integrate_roof(trig) == doctest::Approx(1.0).epsilon(1e-6));
}
