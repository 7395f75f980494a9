#pragma once

/*
 * Command drivers behind the CLI and the C API.
 *
 * Each config-driven command reads one TOML file, writes its outputs into
 * <outdir>/<command>/ (CSV or JSON tables, a config echo, a verdict), and
 * finishes with a run manifest listing every output file with its SHA-256.
 * The manifest hash is computed with the timestamp and the hash field
 * blanked, so a replay with the same config reproduces the same hash;
 * `lab_replay` re-runs the recorded command and compares byte-for-byte.
 *
 * Output directory resolution: --out flag, then IETLAB_OUT, then the
 * config's [output] dir, then "ietlab_out".  No command writes outside it.
 * Exceptions never escape: outcomes carry the exit code (0 ok, 2 usage,
 * 3 precision, 4 verification).
 */

#include <cstdint>
#include <string>
#include <vector>

namespace ietlab {

extern const char kLabVersion[];

/* sample command payload: IET JSON text */
std::string lab_sample(const std::string& perm, uint64_t seed, long precision_bits);

struct LabOutcome {
    int exit_code = 0;
    std::string message;             // result summary, or the error text
    std::vector<std::string> files;  // written files (absolute), manifest last
};

/* command is one of: induct, towers, rigidity, flow, correlate, report */
LabOutcome lab_run(const std::string& command, const std::string& config_path,
                   const std::string& outdir_flag = "", const std::string& format_flag = "",
                   int threads = 0);

/* same, with the config text given directly (tests, replay) */
LabOutcome lab_run_text(const std::string& command, const std::string& config_text,
                        const std::string& outdir_flag = "", const std::string& format_flag = "",
                        int threads = 0);

/* re-run the command recorded in a manifest, compare output hashes */
LabOutcome lab_replay(const std::string& manifest_path);

}  // namespace ietlab
