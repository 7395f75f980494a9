#pragma once

#include <stdexcept>
#include <string>

namespace ietlab {

/* Error taxonomy for the whole lab.  Codes double as CLI exit codes:
   0 ok, 2 usage, 3 precision, 4 verification; the rest are internal
   distinctions that the C layer also reports. */
enum class errc {
    ok = 0,
    usage = 2,
    precision = 3,
    verification = 4,
    singular = 5,
    io = 6,
    internal = 7,
};

struct Error : std::runtime_error {
    errc code;
    Error(errc c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

/* A comparison or length fell below the tolerance 2^-(precision_bits/2)
   without an exact hit: the input's information budget is spent. */
struct PrecisionExhausted : Error {
    explicit PrecisionExhausted(const std::string& msg) : Error(errc::precision, msg) {}
};

/* Exact tie in a Rauzy comparison: the IET is degenerate for induction. */
struct TieError : Error {
    explicit TieError(const std::string& msg) : Error(errc::precision, msg) {}
};

/* A bounded search (Rauzy run, first return, materialization) hit its cap. */
struct RunTooLong : Error {
    explicit RunTooLong(const std::string& msg) : Error(errc::precision, msg) {}
};

/* A certified check (rigidity, reassembly, region validity) failed. */
struct VerificationFailed : Error {
    explicit VerificationFailed(const std::string& msg) : Error(errc::verification, msg) {}
};

/* An orbit point landed within tolerance of a roof singularity. */
struct SingularHit : Error {
    long iterate;
    SingularHit(long it, const std::string& msg) : Error(errc::singular, msg), iterate(it) {}
};

struct OutOfDomain : Error {
    explicit OutOfDomain(const std::string& msg) : Error(errc::usage, msg) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(errc::usage, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(errc::io, msg) {}
};

}  // namespace ietlab
