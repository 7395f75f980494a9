#include "rng.hpp"

#include <gmpxx.h>

namespace ietlab {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RngStream::RngStream(uint64_t seed, uint64_t stream_id) {
    /* decorrelate (seed, stream) pairs before use */
    uint64_t a = seed, b = stream_id * 0xD2B74407B1CE6E93ull + 0xCA5A826395121157ull;
    state_ = splitmix64(a) ^ splitmix64(b);
}

uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

uint64_t RngStream::next_below(uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do { x = next_u64(); } while (x >= limit);
    return x % n;
}

Real RngStream::next_unit(mpfr_prec_t bits) {
    const size_t words = static_cast<size_t>((bits + 63) / 64);
    mpz_class z = 0;
    for (size_t w = 0; w < words; ++w) {
        z <<= 64;
        uint64_t x = next_u64();
        mpz_class hi = static_cast<unsigned long>(x >> 32);
        mpz_class lo = static_cast<unsigned long>(x & 0xFFFFFFFFull);
        z += (hi << 32) + lo;
    }
    const long drop = static_cast<long>(64 * words - static_cast<size_t>(bits));
    if (drop > 0) z >>= drop;  /* keep exactly `bits` bits: prefix-stable */
    if (z == 0) z = 1;
    Real r(bits);
    mpfr_set_z_2exp(r.raw(), z.get_mpz_t(), -static_cast<mpfr_exp_t>(bits), MPFR_RNDN);
    return r;
}

}  // namespace ietlab
