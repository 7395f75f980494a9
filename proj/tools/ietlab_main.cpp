/*
 * Command-line front end.  All work happens behind the C API; this file
 * only parses arguments, forwards them, and prints results.  Exit codes:
 * 0 ok, 2 usage, 3 precision/singular abort, 4 verification failure.
 */

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ietlab/ietlab.h"

namespace {

void print_outcome(int rc, const char* msg, const char* files) {
    if (rc != 0) {
        std::fprintf(stderr, "ietlab: %s\n", msg && *msg ? msg : ietlab_last_error());
        return;
    }
    if (msg && *msg) std::printf("%s\n", msg);
    if (files && *files) std::printf("%s\n", files);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"laboratory for interval exchange transformations and log-roof flows"};
    app.set_version_flag("--version", std::string(ietlab_version()));
    app.require_subcommand(1);

    std::string perm;
    uint64_t seed = 7;
    long precision = 128;
    CLI::App* sample = app.add_subcommand("sample", "sample an IET, print its JSON");
    sample->add_option("--perm", perm, "1-based permutation images, e.g. \"2 1\"")->required();
    sample->add_option("--seed", seed, "sampler seed");
    sample->add_option("--precision", precision, "length mantissa bits");

    std::string config, outdir, format;
    int threads = 0;
    std::vector<CLI::App*> cfg_cmds;
    auto add_cfg = [&](const char* name, const char* desc) {
        CLI::App* c = app.add_subcommand(name, desc);
        c->add_option("--config", config, "TOML config file")->required();
        c->add_option("--out", outdir, "output directory (IETLAB_OUT overrides the config)");
        c->add_option("--format", format, "table format")
            ->check(CLI::IsMember({"csv", "json"}));
        c->add_option("--threads", threads, "worker threads; outputs do not depend on it");
        cfg_cmds.push_back(c);
    };
    add_cfg("induct", "run Zorich induction, emit the step table");
    add_cfg("towers", "Rohlin towers at a balanced level, deviation decay table");
    add_cfg("rigidity", "build and verify rigidity sets along balanced times");
    add_cfg("flow", "flow kinematics residuals and stretch series");
    add_cfg("correlate", "non-mixing correlation experiment");
    add_cfg("report", "full pipeline with a combined verdict");

    std::string manifest;
    CLI::App* replay = app.add_subcommand("replay", "re-run a manifest, compare outputs");
    replay->add_option("--manifest", manifest, "run manifest path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sample->parsed()) {
        char* json = nullptr;
        int rc = ietlab_cmd_sample(perm.c_str(), seed, precision, &json);
        if (rc != 0) {
            std::fprintf(stderr, "ietlab: %s\n", ietlab_last_error());
            return rc;
        }
        std::printf("%s\n", json);
        ietlab_free_string(json);
        return 0;
    }

    if (replay->parsed()) {
        char* msg = nullptr;
        char* files = nullptr;
        int rc = ietlab_cmd_replay(manifest.c_str(), &msg, &files);
        print_outcome(rc, msg, files);
        ietlab_free_string(msg);
        ietlab_free_string(files);
        return rc;
    }

    for (CLI::App* c : cfg_cmds) {
        if (!c->parsed()) continue;
        char* msg = nullptr;
        char* files = nullptr;
        int rc = ietlab_cmd_run(c->get_name().c_str(), config.c_str(),
                                outdir.empty() ? nullptr : outdir.c_str(),
                                format.empty() ? nullptr : format.c_str(), threads, &msg, &files);
        print_outcome(rc, msg, files);
        ietlab_free_string(msg);
        ietlab_free_string(files);
        return rc;
    }

    std::fprintf(stderr, "ietlab: no subcommand\n");
    return 2;
}
