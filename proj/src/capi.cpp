#include "ietlab/ietlab.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/errors.hpp"
#include "core/iet.hpp"
#include "core/lab.hpp"
#include "core/logflow.hpp"
#include "core/renorm.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = (char*)std::malloc(s.size() + 1);
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int status_of(const ietlab::Error& e) {
    using ietlab::errc;
    switch (e.code) {
        case errc::ok:
            return 0;
        case errc::usage:
        case errc::io:
            return 2;
        case errc::precision:
        case errc::singular:
            return 3;
        default:
            return 4;
    }
}

/* runs fn() under the exception-to-status contract */
template <typename F>
int guarded(F&& fn) {
    try {
        fn();
        return 0;
    } catch (const ietlab::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 4;
    }
}

template <typename F>
auto guarded_new(F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ietlab::Error& e) {
        g_last_error = e.what();
        return nullptr;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

}  // namespace

struct ietlab_iet {
    ietlab::Iet v;
};
struct ietlab_path {
    ietlab::InductionPath v;
};
struct ietlab_roof {
    ietlab::Roof v;
};

extern "C" {

const char* ietlab_version(void) { return ietlab::kLabVersion; }

const char* ietlab_last_error(void) { return g_last_error.c_str(); }

void ietlab_free_string(char* s) { std::free(s); }

/* ------------------------------------------------------------------ IET */

ietlab_iet* ietlab_iet_sample(const char* perm, uint64_t seed, long precision_bits) {
    if (!perm) {
        g_last_error = "perm is null";
        return nullptr;
    }
    return guarded_new([&]() -> ietlab_iet* {
        ietlab::Permutation p = ietlab::Permutation::parse(perm);
        return new ietlab_iet{ietlab::sample_iet(p, seed, (mpfr_prec_t)precision_bits)};
    });
}

ietlab_iet* ietlab_iet_from_json(const char* json) {
    if (!json) {
        g_last_error = "json is null";
        return nullptr;
    }
    return guarded_new([&]() -> ietlab_iet* { return new ietlab_iet{ietlab::Iet::from_json(json)}; });
}

char* ietlab_iet_to_json(const ietlab_iet* iet) {
    if (!iet) {
        g_last_error = "iet is null";
        return nullptr;
    }
    return guarded_new([&]() -> char* { return dup_string(iet->v.to_json()); });
}

int ietlab_iet_evaluate_hex(const ietlab_iet* iet, const char* x_hex, long iterations,
                            char** out_hex) {
    if (!iet || !x_hex || !out_hex) {
        g_last_error = "null argument";
        return 2;
    }
    return guarded([&] {
        ietlab::Real x = ietlab::Real::from_string(x_hex, iet->v.work_prec());
        ietlab::Real y = iet->v.iterate(x, iterations);
        *out_hex = dup_string(y.to_hex());
    });
}

void ietlab_iet_free(ietlab_iet* iet) { delete iet; }

/* ----------------------------------------------------------- renormalize */

ietlab_path* ietlab_path_new(const ietlab_iet* iet, long zorich_steps) {
    if (!iet) {
        g_last_error = "iet is null";
        return nullptr;
    }
    if (zorich_steps < 1) {
        g_last_error = "zorich_steps must be >= 1";
        return nullptr;
    }
    return guarded_new([&]() -> ietlab_path* {
        return new ietlab_path{ietlab::InductionPath(iet->v, (size_t)zorich_steps)};
    });
}

long ietlab_path_length(const ietlab_path* path) { return path ? (long)path->v.length() : 0; }

int ietlab_path_det(const ietlab_path* path, long m, long n) {
    if (!path) {
        g_last_error = "path is null";
        return 0;
    }
    int det = 0;
    int rc = guarded([&] {
        if (m < 0 || n < m || (size_t)n > path->v.length())
            throw ietlab::UsageError("det: need 0 <= m <= n <= length");
        det = (int)path->v.cocycle((size_t)m, (size_t)n).det().get_si();
    });
    return rc == 0 ? det : 0;
}

void ietlab_path_free(ietlab_path* path) { delete path; }

/* ------------------------------------------------------------------ roof */

ietlab_roof* ietlab_roof_single_pair(double cplus, double cminus, long precision_bits) {
    return guarded_new([&]() -> ietlab_roof* {
        ietlab::RoofSpec spec =
            ietlab::RoofSpec::single_pair(cplus, cminus, (mpfr_prec_t)precision_bits);
        return new ietlab_roof{ietlab::Roof(spec, (mpfr_prec_t)precision_bits)};
    });
}

ietlab_roof* ietlab_roof_from_toml(const char* text, long precision_bits) {
    if (!text) {
        g_last_error = "text is null";
        return nullptr;
    }
    return guarded_new([&]() -> ietlab_roof* {
        ietlab::RoofSpec spec = ietlab::RoofSpec::from_toml(text, (mpfr_prec_t)precision_bits);
        return new ietlab_roof{ietlab::Roof(spec, (mpfr_prec_t)precision_bits)};
    });
}

int ietlab_roof_value_hex(const ietlab_roof* roof, const char* x_hex, char** out_hex) {
    if (!roof || !x_hex || !out_hex) {
        g_last_error = "null argument";
        return 2;
    }
    return guarded([&] {
        ietlab::Real x = ietlab::Real::from_string(x_hex, roof->v.prec());
        *out_hex = dup_string(roof->v.value(x).to_hex());
    });
}

void ietlab_roof_free(ietlab_roof* roof) { delete roof; }

/* -------------------------------------------------------------- commands */

int ietlab_cmd_sample(const char* perm, uint64_t seed, long precision_bits, char** out_json) {
    if (!perm || !out_json) {
        g_last_error = "null argument";
        return 2;
    }
    return guarded([&] { *out_json = dup_string(ietlab::lab_sample(perm, seed, precision_bits)); });
}

namespace {

int outcome_to_c(const ietlab::LabOutcome& oc, char** out_message, char** out_files) {
    if (out_message) *out_message = dup_string(oc.message);
    if (out_files) {
        std::string joined;
        for (size_t i = 0; i < oc.files.size(); ++i) {
            if (i) joined += '\n';
            joined += oc.files[i];
        }
        *out_files = dup_string(joined);
    }
    if (oc.exit_code != 0) g_last_error = oc.message;
    return oc.exit_code;
}

}  // namespace

int ietlab_cmd_run(const char* command, const char* config_path, const char* outdir,
                   const char* format, int threads, char** out_message, char** out_files) {
    if (!command || !config_path) {
        g_last_error = "null argument";
        return 2;
    }
    ietlab::LabOutcome oc = ietlab::lab_run(command, config_path, outdir ? outdir : "",
                                            format ? format : "", threads);
    return outcome_to_c(oc, out_message, out_files);
}

int ietlab_cmd_run_text(const char* command, const char* config_text, const char* outdir,
                        const char* format, int threads, char** out_message, char** out_files) {
    if (!command || !config_text) {
        g_last_error = "null argument";
        return 2;
    }
    ietlab::LabOutcome oc = ietlab::lab_run_text(command, config_text, outdir ? outdir : "",
                                                 format ? format : "", threads);
    return outcome_to_c(oc, out_message, out_files);
}

int ietlab_cmd_replay(const char* manifest_path, char** out_message, char** out_files) {
    if (!manifest_path) {
        g_last_error = "null argument";
        return 2;
    }
    ietlab::LabOutcome oc = ietlab::lab_replay(manifest_path);
    return outcome_to_c(oc, out_message, out_files);
}

}  // extern "C"
