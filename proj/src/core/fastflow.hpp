#pragma once

/*
 * Double-precision engine for large Monte-Carlo sweeps (stretch spreads,
 * correlation estimates, bound-check series at big heights).
 *
 * Error budget: one IET step costs <= 1 ulp, so an orbit of length r drifts
 * by O(r * 2^-52) ~ 1e-11 at r = 1e5, far below both the J_k margins
 * (>= 1e-7 at the r_k caps used) and the distance scales 1/r that control
 * the roof terms; log/kernel values inherit a relative error of order
 * drift/distance ~ 1e-5 against O(1) tolerances.  Kahan summation keeps
 * the summation error itself negligible.  The multiprecision reference in
 * logflow is the correctness anchor; tests pin the two engines against
 * each other on moderate orbits.
 */

#include <cstdint>
#include <vector>

#include "logflow.hpp"

namespace ietlab {

struct FastIet {
    int d = 0;
    std::vector<double> cum;  // d+1 cut points
    std::vector<double> off;
    double total = 1.0;

    int subinterval(double x) const;
    double evaluate(double x) const { return x + off[(size_t)subinterval(x)]; }
};

FastIet make_fast_iet(const Iet& T);

struct FastRoof {
    std::vector<double> zp, cp;  // right singularities
    std::vector<double> zm, cm;  // left singularities
    std::vector<double> gcos, gsin;
    double norm = 1.0;
    double hit_eps = 1e-13;
    /* all constants small positive integers: evaluate one log of a product */
    bool int_powers = false;
    std::vector<int> pp, pm;

    double smooth(double x) const;
    double smooth_derivative(double x) const;
    double value(double x) const;       // throws SingularHit(-1)
    double derivative(double x) const;  // throws SingularHit(-1)
};

FastRoof make_fast_roof(const Roof& roof);

/* Kahan-compensated S_f^r or S_{f'}^r; SingularHit carries the iterate. */
double fast_birkhoff(const FastIet& T, const FastRoof& f, double x, long r, bool derivative);

/* minima of mod-1 distances to each singularity along the orbit */
void fast_min_distances(const FastIet& T, const FastRoof& f, double z0, long r,
                        std::vector<double>& x_min, std::vector<double>& y_min);

struct FastBound {
    double lhs, rhs;
    bool ok;
    long r;
};

/* |S_{f'}^r(z0)| vs M r + sum C+_i/x_i^min + sum C-_i/y_i^min (normalized) */
FastBound fast_bound_check(const FastIet& T, const FastRoof& f, double z0, long r, double M);

/* engine behind logflow::stretch_over_rigidity_set */
StretchReport fast_stretch(const InductionPath& path, const Roof& roof, const RigiditySet& rs,
                           int samples, uint64_t seed);

/* integral of the normalized roof over [0,1): pieces between singularities,
   log endpoints integrated analytically, Gauss-Legendre on the remainder */
double integrate_roof(const Roof& roof);

}  // namespace ietlab
