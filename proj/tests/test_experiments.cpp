/*
 * Experiment drivers at smoke scale: the t=0 correlation oracle
 * (mu(A cap B) is exact for nested rectangles), seed determinism,
 * rigidity-set collection ordering, deviation decay on the golden path,
 * progression residuals, cancellation windows, and the bound sweep.
 */

#include <cmath>

#include "doctest.h"

#include "core/experiments.hpp"
#include "helpers.hpp"

using namespace ietlab;
using ietlab_test::golden_iet;

namespace {

Roof sym_roof(mpfr_prec_t p) { return Roof(RoofSpec::single_pair(1.0, 1.0, p), p); }
Roof asym_roof(mpfr_prec_t p) { return Roof(RoofSpec::single_pair(1.0, 0.5, p), p); }

}  // namespace

TEST_CASE("estimate_correlation at t=0 reproduces mu(A cap B)") {
    Iet T = golden_iet(128);
    Roof roof = sym_roof(128);
    Rect A{0.1, 0.4, 0.0, 0.2};
    SUBCASE("B = A gives mu(A)") {
        CorrEstimate e = estimate_correlation(T, roof, A, A, 0.0, 20000, 99);
        CHECK(e.estimate == doctest::Approx(A.measure()).epsilon(1e-12));
        CHECK(e.stderr_ == 0.0);  // every sample hits
        CHECK(e.samples == 20000);
    }
    SUBCASE("B strictly inside A gives mu(B) up to Monte-Carlo error") {
        Rect B{0.2, 0.3, 0.05, 0.15};
        CorrEstimate e = estimate_correlation(T, roof, A, B, 0.0, 40000, 99);
        CHECK(std::abs(e.estimate - B.measure()) < 5 * e.stderr_ + 1e-9);
        CHECK(e.stderr_ > 0.0);
    }
    SUBCASE("disjoint B gives zero") {
        Rect B{0.5, 0.6, 0.0, 0.2};
        CorrEstimate e = estimate_correlation(T, roof, A, B, 0.0, 5000, 99);
        CHECK(e.estimate == 0.0);
    }
}

TEST_CASE("estimate_correlation is deterministic in the seed") {
    Iet T = golden_iet(128);
    Roof roof = asym_roof(128);
    Rect A{0.05, 0.35, 0.0, 0.25};
    CorrEstimate a = estimate_correlation(T, roof, A, A, 1.7, 4000, 31);
    CorrEstimate b = estimate_correlation(T, roof, A, A, 1.7, 4000, 31);
    CHECK(a.estimate == b.estimate);
    CHECK(a.singular_retries == b.singular_retries);
}

TEST_CASE("collect_rigidity_sets returns verified sets in ascending r_k") {
    InductionPath path(golden_iet(128), 24);
    std::vector<RigiditySet> sets = collect_rigidity_sets(path, 16.0, 0.5, 10000, 3);
    REQUIRE(sets.size() == 3);
    // golden: the last feasible levels under r_k <= 10000 are 15, 16, 17
    CHECK(sets[0].r_k == 2584);
    CHECK(sets[1].r_k == 4181);
    CHECK(sets[2].r_k == 6765);
    for (const RigiditySet& rs : sets) {
        RigidityCheck chk = verify_rigidity(path, rs);
        CHECK(chk.ok());
    }
}

TEST_CASE("nonmixing experiment shape and determinism at smoke scale") {
    InductionPath path(golden_iet(128), 22);
    Roof roof = sym_roof(128);
    NonmixingResult r = nonmixing_experiment(path, roof, 16.0, 0.5, 3000, 2000, 4242, 0.1, 2);
    CHECK(r.tested_k == 2);
    REQUIRE(r.rows.size() == 4);  // rigidity + generic per level
    int rig = 0, gen = 0;
    for (const CorrelationRow& row : r.rows) {
        if (row.kind == "rigidity")
            ++rig;
        else if (row.kind == "generic")
            ++gen;
        CHECK(row.muA > 0.0);
        CHECK(row.muB > 0.0);
        CHECK(row.t > 0.0);
        CHECK(row.r_k > 0);
    }
    CHECK(rig == 2);
    CHECK(gen == 2);
    CHECK((r.verdict == "NON_MIXING_SIGNATURE" || r.verdict == "NO_SIGNATURE"));
    NonmixingResult r2 = nonmixing_experiment(path, roof, 16.0, 0.5, 3000, 2000, 4242, 0.1, 2);
    for (size_t i = 0; i < r.rows.size(); ++i)
        CHECK(r.rows[i].estimate == r2.rows[i].estimate);
}

TEST_CASE("deviation decay on the golden path fits a negative slope") {
    InductionPath path(golden_iet(128), 24);
    DeviationDecay dec = deviation_decay_experiment(path, 16.0, 200);
    REQUIRE(dec.rows.size() >= 10);
    CHECK(dec.rows.size() <= 200);
    CHECK(dec.slope < 0.0);
    CHECK(dec.r2 >= 0.8);
    for (const DeviationRow& row : dec.rows) {
        CHECK(row.gap == (long)(row.n - row.m));
        CHECK(row.gap >= 1);
        CHECK(row.max_eps >= 0.0);
    }
}

TEST_CASE("progression fit tracks 1/h with small residuals") {
    InductionPath path(golden_iet(128), 20);
    Roof roof = sym_roof(128);
    ProgressionFit fit = progression_experiment(path, roof, 0, true, 14);
    CHECK(fit.sing_index == 0);
    CHECK(fit.right_side);
    CHECK(fit.points > 100);
    CHECK(fit.target > 0.0);
    CHECK(fit.slope == doctest::Approx(fit.target).epsilon(0.05));
    CHECK(fit.median_rel_hi < 0.01);  // deep window locks onto the progression
    CHECK(fit.median_rel_lo < 0.5);
    CHECK(fit.max_rel_residual < 1.0);
}

TEST_CASE("cancellation series separates symmetric from asymmetric") {
    InductionPath path(golden_iet(128), 26);
    Roof sym = sym_roof(128);
    Roof asym = asym_roof(128);
    CancellationTable tab = cancellation_experiment(path, sym, asym, 16.0, 100000);
    REQUIRE(tab.symmetric.size() == tab.asymmetric.size());
    REQUIRE(tab.symmetric.size() >= 8);
    for (size_t i = 0; i < tab.symmetric.size(); ++i) {
        const CancellationRow& s = tab.symmetric[i];
        const CancellationRow& a = tab.asymmetric[i];
        CHECK(s.n == a.n);
        CHECK(s.h == a.h);
        CHECK(s.h >= 2);
        CHECK(s.h <= 100000);
        CHECK(s.per_h == doctest::Approx(s.sum_abs / (double)s.h).epsilon(1e-9));
        CHECK(s.per_hlogh ==
              doctest::Approx(s.per_h / std::log((double)s.h)).epsilon(1e-9));
        CHECK(s.sum_abs >= 0.0);
    }
    // symmetric roof: bounded per_h over the last four levels
    size_t m = tab.symmetric.size();
    double lo = 1e300, hi = 0.0;
    for (size_t i = m - 4; i < m; ++i) {
        lo = std::min(lo, tab.symmetric[i].per_h);
        hi = std::max(hi, tab.symmetric[i].per_h);
    }
    CHECK(hi / lo <= 5.0);
    // asymmetric roof: per_hlogh stays above a fixed fraction of its start
    double first = tab.asymmetric.front().per_hlogh;
    double floor_ratio = 1e300;
    for (const CancellationRow& row : tab.asymmetric)
        floor_ratio = std::min(floor_ratio, row.per_hlogh / first);
    CHECK(floor_ratio >= 0.1);
    CHECK_THROWS_AS(cancellation_experiment(path, sym, asym, 16.0, 1), VerificationFailed);
}

TEST_CASE("bound sweep fits on the prefix and holds after it") {
    InductionPath path(golden_iet(128), 26);
    Roof roof = sym_roof(128);
    BoundSweep sweep = bound_sweep(path, roof, 16.0, 100000);
    CHECK(sweep.fit_prefix == 4);
    REQUIRE(sweep.rows.size() > sweep.fit_prefix);
    CHECK(sweep.M >= 0.0);
    CHECK(sweep.all_ok_after_fit);
    for (size_t i = sweep.fit_prefix; i < sweep.rows.size(); ++i) {
        CHECK(sweep.rows[i].ok);
        CHECK(sweep.rows[i].lhs <= sweep.rows[i].rhs);
    }
    for (size_t i = 1; i < sweep.rows.size(); ++i)
        CHECK(sweep.rows[i].h > sweep.rows[i - 1].h);
}
