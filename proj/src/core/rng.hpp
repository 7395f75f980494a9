#pragma once

/*
 * Deterministic random streams.
 *
 * Every consumer keys its own stream as (seed, stream_id); draws from one
 * stream never move the position of another.  That is what makes sampled
 * IETs precision-stable: lambda_i is built from stream (seed, i+1), so the
 * first 64k bits of u_i are the same whether the caller asked for 64-bit
 * or 4096-bit lengths, and the leading digits of lambda agree.
 *
 * Generator: splitmix64 over a keyed state.  Not cryptographic; chosen for
 * reproducibility across platforms and trivial stream independence.
 */

#include <cstdint>

#include "real.hpp"

namespace ietlab {

uint64_t splitmix64(uint64_t& state);

class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_id);

    uint64_t next_u64();
    /* uniform in [0,1) with 53 random bits */
    double next_double();
    /* uniform in [lo, hi) */
    double next_double(double lo, double hi);
    /* uniform integer in [0, n) by rejection (exact) */
    uint64_t next_below(uint64_t n);

    /* Uniform dyadic in [0,1) with exactly `bits` random bits after the
       point, truncated from the stream's fixed bit expansion: results for
       smaller `bits` are prefixes of results for larger `bits`.
       Never returns exact zero (all-zero draw maps to 2^-bits). */
    Real next_unit(mpfr_prec_t bits);

  private:
    uint64_t state_;
};

}  // namespace ietlab
