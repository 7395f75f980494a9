/*
 * IET core: permutation parsing and combinatorics, exact orbit
 * arithmetic, the rotation conjugacy oracle for d=2, sampled-length
 * stability, and minimality checking.
 *
 * The d=2 oracle: with lengths (1-alpha, alpha) and the swap
 * permutation, T(x) = {x + alpha} exactly, so every T^n can be checked
 * against independent mod-1 arithmetic.
 */

#include "doctest.h"

#include "core/iet.hpp"
#include "core/rng.hpp"
#include "helpers.hpp"

using namespace ietlab;
using ietlab_test::golden_iet;

TEST_CASE("permutation parsing accepts the three external forms") {
    Permutation a = Permutation::parse("2 1");
    CHECK(a.img == std::vector<int>{1, 0});
    Permutation b = Permutation::parse("(5 4 3 2 1)");
    CHECK(b.img == std::vector<int>{4, 3, 2, 1, 0});
    Permutation c = Permutation::parse("3,1,2");
    CHECK(c.img == std::vector<int>{2, 0, 1});
    CHECK(c.str() == "3 1 2");
    CHECK_THROWS_AS(Permutation::parse("1 1"), UsageError);
    CHECK_THROWS_AS(Permutation::parse("0 1"), UsageError);
}

TEST_CASE("inverse composes to the identity") {
    Permutation p = Permutation::parse("3 1 4 2");
    std::vector<int> inv = p.inverse();
    for (int j = 0; j < p.size(); ++j) CHECK(inv[(size_t)p[j]] == j);
}

TEST_CASE("irreducibility detects invariant prefixes") {
    CHECK(is_irreducible(Permutation::parse("2 1")));
    CHECK(is_irreducible(Permutation::parse("5 4 3 2 1")));
    CHECK(!is_irreducible(Permutation::parse("1 2")));
    CHECK(!is_irreducible(Permutation::parse("2 1 3")));   // prefix {1,2}
    CHECK(reducible_prefix(Permutation::parse("2 1 3")) == 2);
    CHECK(reducible_prefix(Permutation::parse("2 1")) == -1);
}

TEST_CASE("constructor validates lengths") {
    mpfr_prec_t pb = 64;
    Permutation swap = Permutation::parse("2 1");
    CHECK_THROWS_AS(Iet({Real(0.5, pb), Real(0.6, pb)}, swap, pb), UsageError);
    CHECK_THROWS_AS(Iet({Real(1.0, pb)}, swap, pb), UsageError);  // arity mismatch
    // a length below tau = 2^-32 exhausts the dyadic information budget
    Real tiny = Real::pow2(-40, pb);
    Real rest(pb);
    mpfr_ui_sub(rest.raw(), 1, tiny.raw(), MPFR_RNDN);
    CHECK_THROWS_AS(Iet({rest, tiny}, swap, pb), PrecisionExhausted);
}

TEST_CASE("d=2 exchange is the rotation by alpha, exactly") {
    mpfr_prec_t pb = 128;
    Iet T = golden_iet(pb);
    Real alpha = T.lengths()[1];  // rotation number
    RngStream rng(2024, 1);
    for (int i = 0; i < 10; ++i) {
        Real x = rng.next_unit(pb);
        Real y = T.evaluate(x);
        Real z = (x + alpha).frac();  // independent mod-1 route
        CHECK(y == z);
        // longer orbits against n*alpha mod 1
        Real w = T.iterate(x, 7);
        Real m = x;
        for (int k = 0; k < 7; ++k) m = (m + alpha).frac();
        CHECK(w == m);
    }
}

TEST_CASE("evaluate and inverse are exact inverses") {
    Permutation p = Permutation::parse("4 2 3 1");
    Iet T = sample_iet(p, 99, 128);
    RngStream rng(5, 2);
    for (int i = 0; i < 20; ++i) {
        Real x = rng.next_unit(128);
        CHECK(T.evaluate_inverse(T.evaluate(x)) == x);
        CHECK(T.iterate(T.iterate(x, 13), -13) == x);
    }
}

TEST_CASE("interval endpoints map onto the image partition") {
    Iet T = sample_iet(Permutation::parse("3 1 2"), 7, 96);
    const std::vector<Real>& L = T.discontinuities();
    for (int j = 0; j < T.d(); ++j) {
        // left endpoint of I_j lands at the left edge of image block pi(j)
        Real img = T.evaluate(L[(size_t)j]);
        Real expect(T.work_prec());
        for (int i = 0; i < T.d(); ++i)
            if (T.perm()[i] < T.perm()[j]) expect += T.lengths()[(size_t)i];
        CHECK(img == expect);
    }
}

TEST_CASE("orbit points stay on the dyadic grid") {
    Iet T = golden_iet(64);
    Real x = Real::from_string("0x1.5p-3", 64);
    Real y = T.iterate(x, 200);
    // multiples of 2^-96 at work precision: scaling by 2^96 gives an integer
    Real s(T.work_prec());
    mpfr_mul_2si(s.raw(), y.raw(), 96, MPFR_RNDN);
    CHECK(mpfr_integer_p(s.raw()));
}

TEST_CASE("sampled lengths are stable across precision") {
    Permutation p = Permutation::parse("4 3 2 1");
    Iet lo = sample_iet(p, 31, 64);
    Iet hi = sample_iet(p, 31, 512);
    for (int j = 0; j < 4; ++j) {
        Real d = (lo.lengths()[(size_t)j] - hi.lengths()[(size_t)j]).abs();
        CHECK(d < Real::pow2(-50, 64));  // same leading digits
    }
    Real sum(hi.work_prec());
    for (const Real& l : hi.lengths()) sum += l;
    CHECK(sum == Real(1.0, 64));  // exact normalization
}

TEST_CASE("keane check passes on golden and fails on a rational rotation") {
    CHECK(check_keane(golden_iet(128), 50).ok);

    // rotation by 1/4: the discontinuity orbit collides after few steps
    mpfr_prec_t pb = 64;
    Iet rat({Real(0.75, pb), Real(0.25, pb)}, Permutation::parse("2 1"), pb);
    KeaneReport rep = check_keane(rat, 10);
    CHECK(!rep.ok);
    CHECK(rep.iterate <= 4);
}
