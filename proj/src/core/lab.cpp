#include "lab.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "experiments.hpp"
#include "fastflow.hpp"
#include "rigidity.hpp"
#include "rng.hpp"
#include "sha256.hpp"
#include "toml_lite.hpp"

namespace ietlab {

const char kLabVersion[] = "0.1.0";

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/* ------------------------------------------------------------------ text */

std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip
    (void)ec;
    return std::string(buf, p);
}

std::string fmt_ll(long long v) { return std::to_string(v); }

struct Table {
    std::vector<std::string> cols;
    std::vector<std::vector<std::string>> rows;

    explicit Table(std::vector<std::string> c) : cols(std::move(c)) {}

    void add(std::vector<std::string> r) {
        if (r.size() != cols.size()) throw Error(errc::internal, "table row arity mismatch");
        rows.push_back(std::move(r));
    }

    std::string to_csv() const {
        std::string out;
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) out += ',';
            out += cols[i];
        }
        out += '\n';
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += r[i];
            }
            out += '\n';
        }
        return out;
    }

    std::string to_json() const {
        json arr = json::array();
        for (const auto& r : rows) {
            json obj;
            for (size_t i = 0; i < cols.size(); ++i) obj[cols[i]] = r[i];
            arr.push_back(obj);
        }
        return arr.dump(2) + "\n";
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), (std::streamsize)content.size());
    if (!out) throw IoError("short write to " + path.string());
}

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tmv;
    gmtime_r(&t, &tmv);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tmv);
    return buf;
}

/* ---------------------------------------------------------------- config */

const TomlTable& table_or_empty(const TomlDoc& doc, const std::string& name) {
    static const TomlTable empty;
    return doc.has_table(name) ? doc.table(name) : empty;
}

/*
 * Strict key check: a misspelled key must fail loudly, not silently fall
 * back to a default (a typo in "lengths" would otherwise swap the
 * configured IET for a sampled one and invalidate the whole run).
 */
void validate_config(const TomlDoc& doc) {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"iet", {"perm", "precision", "lengths", "seed"}},
        {"path", {"steps", "substep_cap", "nu"}},
        {"roof", {"preset", "file", "cplus", "cminus", "s", "cos", "sin"}},
        {"towers", {"level"}},
        {"deviation", {"max_pairs"}},
        {"rigidity", {"beta", "count", "max_return"}},
        {"flow", {"triples", "seed", "stretch_samples", "stretch_rk_cap", "stretch_last"}},
        {"correlate",
         {"samples", "seed", "beta", "rk_cap", "margin", "want_k", "column_height"}},
        {"cancellation", {"hcap", "last", "cplus", "cminus"}},
        {"bound", {"hcap", "fit_prefix"}},
        {"progression", {"hcap", "sing", "side", "level"}},
        {"output", {"format", "dir"}},
        {"run", {"label"}},
    };
    if (!doc.root.kv.empty())
        throw UsageError("config: top-level key '" + doc.root.kv.begin()->first +
                         "' outside any section");
    if (!doc.table_arrays.empty())
        throw UsageError("config: [[" + doc.table_arrays.begin()->first +
                         "]] table arrays are not used here");
    for (const auto& [name, tab] : doc.tables) {
        auto it = allowed.find(name);
        if (it == allowed.end()) throw UsageError("config: unknown section [" + name + "]");
        for (const auto& [key, val] : tab.kv) {
            (void)val;
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw UsageError("config: unknown key '" + key + "' in [" + name + "]");
        }
    }
}

Iet iet_from_config(const TomlDoc& doc) {
    const TomlTable& t = table_or_empty(doc, "iet");
    if (!t.has("perm")) throw UsageError("config: [iet] perm is required");
    Permutation perm = Permutation::parse(t.at("perm").as_str());
    long long precision = t.int_or("precision", 128);
    if (precision < 16 || precision > (1 << 22)) throw UsageError("config: unreasonable [iet] precision");
    if (t.has("lengths")) {
        std::vector<Real> ls;
        for (const auto& v : t.at("lengths").arr)
            ls.push_back(Real::from_string(v.as_str(), (mpfr_prec_t)precision));
        return Iet(std::move(ls), perm, (mpfr_prec_t)precision);
    }
    long long seed = t.int_or("seed", 7);
    return sample_iet(perm, (uint64_t)seed, (mpfr_prec_t)precision);
}

/* roof from [roof]: preset single_pair / hamiltonian, or file = path */
RoofSpec roofspec_from_config(const TomlDoc& doc, mpfr_prec_t prec,
                              std::vector<std::pair<std::string, std::string>>* inputs) {
    const TomlTable& t = table_or_empty(doc, "roof");
    std::string preset = t.str_or("preset", "single_pair");
    RoofSpec spec;
    if (t.has("file")) {
        std::string text = read_file(t.at("file").as_str());
        if (inputs) inputs->emplace_back("roof_file", sha256_hex(text));
        spec = RoofSpec::from_toml(text, prec);
    } else if (preset == "single_pair") {
        spec = RoofSpec::single_pair(t.number_or("cplus", 1.0), t.number_or("cminus", 1.0), prec);
    } else if (preset == "hamiltonian") {
        spec = RoofSpec::hamiltonian_quadruples((int)t.int_or("s", 4), prec);
    } else {
        throw UsageError("config: unknown [roof] preset '" + preset + "'");
    }
    if (t.has("cos")) spec.cos_coefs = t.at("cos").as_number_array();
    if (t.has("sin")) spec.sin_coefs = t.at("sin").as_number_array();
    return spec;
}

InductionPath path_from_config(const TomlDoc& doc, Iet iet) {
    const TomlTable& t = table_or_empty(doc, "path");
    long long steps = t.int_or("steps", 40);
    if (steps < 1 || steps > 100000) throw UsageError("config: [path] steps out of range");
    InductionCaps caps;
    caps.substep_cap = t.int_or("substep_cap", 1000000);
    return InductionPath(std::move(iet), (size_t)steps, caps);
}

double nu_from_config(const TomlDoc& doc) {
    double nu = table_or_empty(doc, "path").number_or("nu", 16.0);
    if (!(nu >= 1.0)) throw UsageError("config: [path] nu must be >= 1");
    return nu;
}

/* --------------------------------------------------------------- outputs */

struct Sink {
    fs::path dir;
    std::string format;  // csv | json
    std::vector<std::pair<std::string, std::string>> outputs;  // name -> bytes

    void put(const std::string& name, const std::string& content) {
        outputs.emplace_back(name, content);
    }
    void put_table(const std::string& base, const Table& t) {
        if (format == "json")
            put(base + ".json", t.to_json());
        else
            put(base + ".csv", t.to_csv());
    }
};

/* writes outputs + manifest; returns absolute paths, manifest last */
std::vector<std::string> flush_run(Sink& sink, const std::string& command,
                                   const std::string& config_text,
                                   const std::vector<std::pair<std::string, std::string>>& inputs) {
    json man;
    man["tool"] = "ietlab";
    man["version"] = kLabVersion;
    man["command"] = command;
    man["format"] = sink.format;
    man["config_sha256"] = sha256_hex(config_text);
    man["config_file"] = command + ".config.toml";
    json jin = json::array();
    for (const auto& [role, hash] : inputs) jin.push_back({{"role", role}, {"sha256", hash}});
    man["inputs"] = jin;
    json jout = json::array();
    for (const auto& [name, content] : sink.outputs)
        jout.push_back(
            {{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    man["outputs"] = jout;
    /* the hash is taken with the volatile fields blanked, so it is stable
       across replays of the same config */
    man["created"] = "";
    man["manifest_sha256"] = "";
    man["manifest_sha256"] = sha256_hex(man.dump(2));
    man["created"] = iso_now();

    fs::create_directories(sink.dir);
    std::vector<std::string> files;
    for (const auto& [name, content] : sink.outputs) {
        fs::path p = sink.dir / name;
        write_file(p, content);
        files.push_back(fs::absolute(p).string());
    }
    fs::path mp = sink.dir / (command + ".manifest.json");
    write_file(mp, man.dump(2) + "\n");
    files.push_back(fs::absolute(mp).string());
    return files;
}

/* ------------------------------------------------------------- commands */

struct RunCtx {
    TomlDoc doc;
    std::string config_text;
    std::vector<std::pair<std::string, std::string>> inputs;
    Sink sink;
    std::string message;
    int fail_code = 0;  // nonzero: flush artifacts, then report this exit code
};

void do_induct(RunCtx& c) {
    Iet T = iet_from_config(c.doc);
    InductionPath path = path_from_config(c.doc, T);
    mpfr_prec_t pp = std::max<mpfr_prec_t>(96, T.precision_bits());

    Table tb({"n", "type", "substeps", "det", "perm", "norm"});
    long long total_sub = 0;
    for (size_t n = 0; n < path.length(); ++n) {
        const StepRecord& st = path.step(n);
        total_sub += st.substeps;
        tb.add({fmt_ll((long long)n + 1), std::string(1, (char)st.type), fmt_ll(st.substeps),
                st.Z.det().get_str(), st.perm_after.str(),
                path.lambda_norm(n + 1, pp).to_hex()});
    }
    c.sink.put_table("induct", tb);

    json sum;
    sum["base"] = json::parse(path.base().to_json());
    sum["steps"] = path.length();
    sum["scale_exp"] = path.scale_exp();
    sum["final_perm"] = path.perm_at(path.length()).str();
    sum["total_substeps"] = total_sub;
    sum["budget_exhausted"] = path.budget_exhausted();
    c.sink.put("induct.summary.json", sum.dump(2) + "\n");
    c.message = "induct: " + std::to_string(path.length()) + " zorich steps, " +
                std::to_string(total_sub) + " rauzy substeps";
}

void do_towers(RunCtx& c) {
    Iet T = iet_from_config(c.doc);
    InductionPath path = path_from_config(c.doc, T);
    double nu = nu_from_config(c.doc);
    std::vector<size_t> bal = find_balanced_times(path, nu);
    if (bal.empty()) throw VerificationFailed("towers: no balanced time under nu");

    long long level = table_or_empty(c.doc, "towers").int_or("level", -1);
    size_t n = level < 0 ? bal.back() : (size_t)level;
    if (n > path.length()) throw UsageError("towers: level beyond the path");
    TowerSystem ts = make_towers(path, n);

    Table tb({"level", "j", "height", "lambda", "density"});
    for (size_t j = 0; j < ts.heights.size(); ++j)
        tb.add({fmt_ll((long long)n), fmt_ll((long long)j), ts.heights[j].get_str(),
                ts.base_lengths[j].to_hex(), ts.densities[j].to_hex()});
    c.sink.put_table("towers", tb);

    long long max_pairs = table_or_empty(c.doc, "deviation").int_or("max_pairs", 400);
    DeviationDecay dev = deviation_decay_experiment(path, nu, (size_t)std::max(2LL, max_pairs));
    Table dt({"gap", "max_eps"});
    for (const auto& r : dev.rows) dt.add({fmt_ll(r.gap), fmt_double(r.max_eps)});
    c.sink.put_table("deviation", dt);

    json sum;
    sum["level"] = n;
    json jb = json::array();
    for (size_t b : bal) jb.push_back(b);
    sum["balanced_times"] = jb;
    sum["deviation_fit"] = {{"slope", dev.slope}, {"intercept", dev.intercept}, {"r2", dev.r2},
                            {"pairs", dev.rows.size()}};
    c.sink.put("towers.summary.json", sum.dump(2) + "\n");

    std::ostringstream msg;
    msg << "towers: level " << n << ", " << bal.size() << " balanced times, deviation slope "
        << fmt_double(dev.slope) << " (r2 " << fmt_double(dev.r2) << ")";
    c.message = msg.str();
}

void do_rigidity(RunCtx& c) {
    Iet T = iet_from_config(c.doc);
    InductionPath path = path_from_config(c.doc, T);
    double nu = nu_from_config(c.doc);
    const TomlTable& rt = table_or_empty(c.doc, "rigidity");
    double beta = rt.number_or("beta", 0.5);
    long long count = rt.int_or("count", 6);
    long long max_return = rt.int_or("max_return", 0);  // 0: machine range only

    std::vector<size_t> bal = find_balanced_times(path, nu);
    std::vector<size_t> picked;
    for (size_t n : bal) {
        if (n == 0) continue;
        picked.push_back(n);
        if ((long long)picked.size() >= count) break;
    }
    if (picked.empty()) throw VerificationFailed("rigidity: no usable balanced time");

    Table tb({"k", "level", "j0", "l0", "r_k", "height", "Jk_a", "Jk_b", "measure", "alpha",
              "measure_ok", "floors_ok", "disjoint_ok", "return_ok"});
    bool all_ok = true;
    for (size_t k = 0; k < picked.size(); ++k) {
        RigiditySet rs = build_rigidity_set(path, picked[k], beta, max_return);
        RigidityCheck chk = verify_rigidity(path, rs);
        all_ok = all_ok && chk.ok();
        tb.add({fmt_ll((long long)k), fmt_ll((long long)rs.level), fmt_ll(rs.j0), fmt_ll(rs.l0),
                fmt_ll(rs.r_k), fmt_ll(rs.height), rs.Jk_a.to_hex(), rs.Jk_b.to_hex(),
                rs.measure.to_hex(), fmt_double(chk.alpha), chk.measure_ok ? "1" : "0",
                chk.floors_ok ? "1" : "0", chk.disjoint_ok ? "1" : "0",
                chk.return_ok ? "1" : "0"});
    }
    c.sink.put_table("rigidity", tb);

    json verdict;
    verdict["beta"] = beta;
    verdict["count"] = picked.size();
    verdict["all_ok"] = all_ok;
    c.sink.put("rigidity.verdict.json", verdict.dump(2) + "\n");
    c.message = "rigidity: " + std::to_string(picked.size()) +
                (all_ok ? " levels, all checks passed" : " levels, CHECKS FAILED");
    if (!all_ok) c.fail_code = 4;
}

struct KinematicsResult {
    Table table{{"idx", "x", "y", "s", "t", "residual"}};
    double max_group = 0.0, max_identity = 0.0;
    int retries = 0;
};

KinematicsResult run_kinematics(const Iet& T, const Roof& roof, long triples, uint64_t seed) {
    KinematicsResult out;
    const mpfr_prec_t wp = T.work_prec();
    const Real total = T.discontinuities().back();
    for (long i = 0; i < triples; ++i) {
        RngStream rng(seed, (uint64_t(5) << 32) + (uint64_t)i);
        for (int att = 0;; ++att) {
            double sd = rng.next_double(-2.0, 2.0);
            double td = rng.next_double(-2.0, 2.0);
            double xd = rng.next_double();
            double ud = rng.next_double();
            try {
                Real x = Real(xd, wp) * total;
                Real y = roof.value(x) * Real(ud * 0.999, wp);
                FlowPoint p{x, y};
                Real s(sd, wp), t(td, wp);
                FlowPoint a = flow_map(T, roof, p, s + t);
                FlowPoint b = flow_map(T, roof, flow_map(T, roof, p, t), s);
                double rg = ((a.x - b.x).abs() + (a.y - b.y).abs()).to_double();
                FlowPoint z = flow_map(T, roof, p, Real(0.0, wp));
                double ri = ((z.x - p.x).abs() + (z.y - p.y).abs()).to_double();
                out.max_group = std::max(out.max_group, rg);
                out.max_identity = std::max(out.max_identity, ri);
                out.table.add({fmt_ll(i), x.to_hex(), y.to_hex(), fmt_double(sd), fmt_double(td),
                               fmt_double(rg)});
                break;
            } catch (const SingularHit&) {
                ++out.retries;
                if (att >= 100) throw RunTooLong("flow kinematics: singular retries exhausted");
            }
        }
    }
    return out;
}

void do_flow(RunCtx& c) {
    Iet T = iet_from_config(c.doc);
    InductionPath path = path_from_config(c.doc, T);
    double nu = nu_from_config(c.doc);
    Roof roof(roofspec_from_config(c.doc, T.precision_bits(), &c.inputs), T.precision_bits());

    const TomlTable& ft = table_or_empty(c.doc, "flow");
    long long triples = ft.int_or("triples", 1000);
    uint64_t seed = (uint64_t)ft.int_or("seed", 99);
    long long st_samples = ft.int_or("stretch_samples", 1000);
    long long st_cap = ft.int_or("stretch_rk_cap", 100000);
    long long st_last = ft.int_or("stretch_last", 4);
    double beta = table_or_empty(c.doc, "rigidity").number_or("beta", 0.5);

    KinematicsResult kin = run_kinematics(T, roof, triples, seed);
    c.sink.put_table("flow_kinematics", kin.table);

    std::vector<RigiditySet> sets = collect_rigidity_sets(path, nu, beta, st_cap, (int)st_last);
    Table st({"k", "level", "r_k", "samples", "min_sum", "max_sum", "mean_sum", "spread",
              "retries"});
    std::vector<double> spreads;
    for (size_t k = 0; k < sets.size(); ++k) {
        StretchReport rep = fast_stretch(path, roof, sets[k], (int)st_samples,
                                         seed + 31 * (uint64_t)(k + 1));
        spreads.push_back(rep.spread);
        st.add({fmt_ll((long long)k), fmt_ll((long long)sets[k].level), fmt_ll(sets[k].r_k),
                fmt_ll((long long)rep.samples), fmt_double(rep.min_sum), fmt_double(rep.max_sum),
                fmt_double(rep.mean_sum), fmt_double(rep.spread),
                fmt_ll(rep.singular_retries)});
    }
    c.sink.put_table("stretch", st);

    const double tol = std::ldexp(1.0, -48);
    json verdict;
    verdict["triples"] = triples;
    verdict["max_group_residual"] = kin.max_group;
    verdict["max_identity_residual"] = kin.max_identity;
    verdict["kinematics_ok"] = kin.max_group < tol && kin.max_identity < tol;
    verdict["singular_retries"] = kin.retries;
    if (!spreads.empty()) {
        double mx = *std::max_element(spreads.begin(), spreads.end());
        double mn = *std::min_element(spreads.begin(), spreads.end());
        bool mono = true;
        for (size_t i = 1; i < spreads.size(); ++i) mono = mono && spreads[i] > spreads[i - 1];
        verdict["stretch_levels"] = spreads.size();
        verdict["spread_max_over_min"] = mn > 0 ? mx / mn : 0.0;
        verdict["spread_strictly_increasing"] = mono;
        verdict["spread_last_over_first"] = spreads.front() > 0 ? spreads.back() / spreads.front() : 0.0;
    } else {
        verdict["stretch_levels"] = 0;
    }
    c.sink.put("flow.verdict.json", verdict.dump(2) + "\n");

    std::ostringstream msg;
    msg << "flow: max group residual " << fmt_double(kin.max_group) << ", " << spreads.size()
        << " stretch levels";
    c.message = msg.str();
}

void do_correlate(RunCtx& c) {
    Iet T = iet_from_config(c.doc);
    InductionPath path = path_from_config(c.doc, T);
    double nu = nu_from_config(c.doc);
    Roof roof(roofspec_from_config(c.doc, T.precision_bits(), &c.inputs), T.precision_bits());

    const TomlTable& ct = table_or_empty(c.doc, "correlate");
    long long samples = ct.int_or("samples", 100000);
    uint64_t seed = (uint64_t)ct.int_or("seed", 2026);
    double beta = ct.number_or("beta", 0.5);
    long long rk_cap = ct.int_or("rk_cap", 10000);
    double margin = ct.number_or("margin", 0.1);
    long long want_k = ct.int_or("want_k", 3);
    double col_height = ct.number_or("column_height", 0.35);

    NonmixingResult res = nonmixing_experiment(path, roof, nu, beta, rk_cap, samples, seed, margin,
                                               (int)want_k, col_height);

    Table tb({"t", "estimate", "stderr", "muA", "muB", "kind"});
    for (const auto& r : res.rows)
        tb.add({fmt_double(r.t), fmt_double(r.estimate), fmt_double(r.stderr_),
                fmt_double(r.muA), fmt_double(r.muB), r.kind});
    c.sink.put_table("correlation", tb);

    json verdict;
    verdict["verdict"] = res.verdict;
    verdict["signature"] = res.signature;
    verdict["margin"] = res.margin;
    verdict["tested_k"] = res.tested_k;
    verdict["column_height"] = col_height;
    verdict["symmetric_roof"] = roof.symmetric();
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"k", r.k},
                        {"level", r.level},
                        {"r_k", r.r_k},
                        {"t", r.t},
                        {"estimate", r.estimate},
                        {"stderr", r.stderr_},
                        {"muA", r.muA},
                        {"muB", r.muB},
                        {"kind", r.kind}});
    verdict["rows"] = rows;
    verdict["config_sha256"] = sha256_hex(c.config_text);
    verdict["config"] = c.config_text;
    c.sink.put("correlate.verdict.json", verdict.dump(2) + "\n");
    c.message = "correlate: " + res.verdict + " over " + std::to_string(res.tested_k) + " levels";
}

void do_report(RunCtx& c) {
    Iet T = iet_from_config(c.doc);
    InductionPath path = path_from_config(c.doc, T);
    double nu = nu_from_config(c.doc);
    Roof roof(roofspec_from_config(c.doc, T.precision_bits(), &c.inputs), T.precision_bits());
    json verdict;

    /* induction table */
    {
        mpfr_prec_t pp = std::max<mpfr_prec_t>(96, T.precision_bits());
        Table tb({"n", "type", "substeps", "det", "perm", "norm"});
        for (size_t n = 0; n < path.length(); ++n) {
            const StepRecord& st = path.step(n);
            tb.add({fmt_ll((long long)n + 1), std::string(1, (char)st.type), fmt_ll(st.substeps),
                    st.Z.det().get_str(), st.perm_after.str(),
                    path.lambda_norm(n + 1, pp).to_hex()});
        }
        c.sink.put_table("induct", tb);
        verdict["steps"] = path.length();
    }

    std::vector<size_t> bal = find_balanced_times(path, nu);
    if (bal.empty()) throw VerificationFailed("report: no balanced time under nu");
    {
        json jb = json::array();
        for (size_t b : bal) jb.push_back(b);
        verdict["balanced_times"] = jb;
    }

    /* towers at the last balanced level */
    {
        TowerSystem ts = make_towers(path, bal.back());
        Table tb({"level", "j", "height", "lambda", "density"});
        for (size_t j = 0; j < ts.heights.size(); ++j)
            tb.add({fmt_ll((long long)bal.back()), fmt_ll((long long)j), ts.heights[j].get_str(),
                    ts.base_lengths[j].to_hex(), ts.densities[j].to_hex()});
        c.sink.put_table("towers", tb);
    }

    /* deviation decay */
    {
        long long max_pairs = table_or_empty(c.doc, "deviation").int_or("max_pairs", 400);
        DeviationDecay dev =
            deviation_decay_experiment(path, nu, (size_t)std::max(2LL, max_pairs));
        Table dt({"gap", "max_eps"});
        for (const auto& r : dev.rows) dt.add({fmt_ll(r.gap), fmt_double(r.max_eps)});
        c.sink.put_table("deviation", dt);
        verdict["deviation_fit"] = {{"slope", dev.slope}, {"intercept", dev.intercept},
                                    {"r2", dev.r2}, {"pairs", dev.rows.size()}};
    }

    /* rigidity table over the first `count` balanced times */
    {
        const TomlTable& rt = table_or_empty(c.doc, "rigidity");
        double beta = rt.number_or("beta", 0.5);
        long long count = rt.int_or("count", 6);
        long long max_return = rt.int_or("max_return", 0);  /* 0: machine range only */
        std::vector<size_t> picked;
        for (size_t n : bal) {
            if (n == 0) continue;
            picked.push_back(n);
            if ((long long)picked.size() >= count) break;
        }
        Table tb({"k", "level", "j0", "l0", "r_k", "height", "Jk_a", "Jk_b", "measure", "alpha",
                  "measure_ok", "floors_ok", "disjoint_ok", "return_ok"});
        bool all_ok = true;
        for (size_t k = 0; k < picked.size(); ++k) {
            RigiditySet rs = build_rigidity_set(path, picked[k], beta, max_return);
            RigidityCheck chk = verify_rigidity(path, rs);
            all_ok = all_ok && chk.ok();
            tb.add({fmt_ll((long long)k), fmt_ll((long long)rs.level), fmt_ll(rs.j0),
                    fmt_ll(rs.l0), fmt_ll(rs.r_k), fmt_ll(rs.height), rs.Jk_a.to_hex(),
                    rs.Jk_b.to_hex(), rs.measure.to_hex(), fmt_double(chk.alpha),
                    chk.measure_ok ? "1" : "0", chk.floors_ok ? "1" : "0",
                    chk.disjoint_ok ? "1" : "0", chk.return_ok ? "1" : "0"});
        }
        c.sink.put_table("rigidity", tb);
        verdict["rigidity_all_ok"] = all_ok;
        verdict["rigidity_count"] = picked.size();
    }

    /* flow kinematics + stretch series */
    {
        const TomlTable& ft = table_or_empty(c.doc, "flow");
        long long triples = ft.int_or("triples", 200);
        uint64_t seed = (uint64_t)ft.int_or("seed", 99);
        long long st_samples = ft.int_or("stretch_samples", 1000);
        long long st_cap = ft.int_or("stretch_rk_cap", 100000);
        long long st_last = ft.int_or("stretch_last", 4);
        double beta = table_or_empty(c.doc, "rigidity").number_or("beta", 0.5);

        KinematicsResult kin = run_kinematics(T, roof, triples, seed);
        c.sink.put_table("flow_kinematics", kin.table);
        verdict["max_group_residual"] = kin.max_group;
        verdict["max_identity_residual"] = kin.max_identity;

        std::vector<RigiditySet> sets =
            collect_rigidity_sets(path, nu, beta, st_cap, (int)st_last);
        Table st({"k", "level", "r_k", "samples", "min_sum", "max_sum", "mean_sum", "spread",
                  "retries"});
        std::vector<double> spreads;
        for (size_t k = 0; k < sets.size(); ++k) {
            StretchReport rep = fast_stretch(path, roof, sets[k], (int)st_samples,
                                             seed + 31 * (uint64_t)(k + 1));
            spreads.push_back(rep.spread);
            st.add({fmt_ll((long long)k), fmt_ll((long long)sets[k].level), fmt_ll(sets[k].r_k),
                    fmt_ll((long long)rep.samples), fmt_double(rep.min_sum),
                    fmt_double(rep.max_sum), fmt_double(rep.mean_sum), fmt_double(rep.spread),
                    fmt_ll(rep.singular_retries)});
        }
        c.sink.put_table("stretch", st);
        if (!spreads.empty()) {
            double mx = *std::max_element(spreads.begin(), spreads.end());
            double mn = *std::min_element(spreads.begin(), spreads.end());
            verdict["spread_max_over_min"] = mn > 0 ? mx / mn : 0.0;
        }
    }

    /* correlation (nonmixing experiment) */
    {
        const TomlTable& ct = table_or_empty(c.doc, "correlate");
        long long samples = ct.int_or("samples", 20000);
        uint64_t seed = (uint64_t)ct.int_or("seed", 2026);
        double beta = ct.number_or("beta", 0.5);
        long long rk_cap = ct.int_or("rk_cap", 10000);
        double margin = ct.number_or("margin", 0.1);
        long long want_k = ct.int_or("want_k", 3);
        NonmixingResult res =
            nonmixing_experiment(path, roof, nu, beta, rk_cap, samples, seed, margin,
                                 (int)want_k);
        Table tb({"t", "estimate", "stderr", "muA", "muB", "kind"});
        for (const auto& r : res.rows)
            tb.add({fmt_double(r.t), fmt_double(r.estimate), fmt_double(r.stderr_),
                    fmt_double(r.muA), fmt_double(r.muB), r.kind});
        c.sink.put_table("correlation", tb);
        verdict["nonmixing_verdict"] = res.verdict;
        verdict["nonmixing_margin"] = res.margin;
        verdict["nonmixing_tested_k"] = res.tested_k;
        c.message = "report: " + res.verdict;
    }

    /* cancellation contrast: configured roof vs asymmetric contrast roof */
    {
        const TomlTable& kt = table_or_empty(c.doc, "cancellation");
        long long hcap = kt.int_or("hcap", 100000);
        long long last = kt.int_or("last", 4);
        RoofSpec aspec = RoofSpec::single_pair(kt.number_or("cplus", 2.0),
                                               kt.number_or("cminus", 1.0), T.precision_bits());
        Roof asym(aspec, T.precision_bits());
        CancellationTable cano = cancellation_experiment(path, roof, asym, nu, hcap);
        Table ts({"n", "h", "sum", "normalized"});
        for (const auto& r : cano.symmetric)
            ts.add({fmt_ll((long long)r.n), fmt_ll(r.h), fmt_double(r.sum_abs),
                    fmt_double(r.per_h)});
        c.sink.put_table("cancellation", ts);
        Table ta({"n", "h", "sum", "normalized"});
        for (const auto& r : cano.asymmetric)
            ta.add({fmt_ll((long long)r.n), fmt_ll(r.h), fmt_double(r.sum_abs),
                    fmt_double(r.per_hlogh)});
        c.sink.put_table("cancellation_asym", ta);
        size_t nrows = cano.symmetric.size();
        size_t lo = nrows > (size_t)last ? nrows - (size_t)last : 0;
        double mx = 0, mn = std::numeric_limits<double>::infinity();
        for (size_t i = lo; i < nrows; ++i) {
            mx = std::max(mx, cano.symmetric[i].per_h);
            mn = std::min(mn, cano.symmetric[i].per_h);
        }
        verdict["cancellation_per_h_max_over_min"] = mn > 0 ? mx / mn : 0.0;
        double floor_ratio = std::numeric_limits<double>::infinity();
        double init = cano.asymmetric.front().per_hlogh;
        for (const auto& r : cano.asymmetric)
            floor_ratio = std::min(floor_ratio, init > 0 ? r.per_hlogh / init : 0.0);
        verdict["cancellation_asym_floor_ratio"] = floor_ratio;
    }

    /* frozen-constant linear bound sweep */
    {
        const TomlTable& bt = table_or_empty(c.doc, "bound");
        long long hcap = bt.int_or("hcap", 100000);
        long long prefix = bt.int_or("fit_prefix", 4);
        BoundSweep bs = bound_sweep(path, roof, nu, hcap, (size_t)std::max(1LL, prefix));
        Table tb({"n", "h", "lhs", "rhs", "ok"});
        for (const auto& r : bs.rows)
            tb.add({fmt_ll((long long)r.n), fmt_ll(r.h), fmt_double(r.lhs), fmt_double(r.rhs),
                    r.ok ? "1" : "0"});
        c.sink.put_table("bound", tb);
        verdict["bound_M"] = bs.M;
        verdict["bound_all_ok_after_fit"] = bs.all_ok_after_fit;
    }

    /* ordered-distance progression at a feasible balanced level */
    {
        const TomlTable& pt = table_or_empty(c.doc, "progression");
        long long hcap = pt.int_or("hcap", 20000);
        long long sing = pt.int_or("sing", 0);
        bool right = pt.str_or("side", "right") != "left";
        long long level = pt.int_or("level", -1);
        size_t chosen = 0;
        bool found = false;
        if (level >= 0) {
            chosen = (size_t)level;
            found = true;
        } else {
            for (auto it = bal.rbegin(); it != bal.rend(); ++it) {
                if (*it == 0) continue;
                TowerSystem ts = make_towers(path, *it);
                int j0 = select_big_tower(ts);
                if (ts.heights[(size_t)j0].fits_slong_p() &&
                    ts.heights[(size_t)j0].get_si() <= hcap) {
                    chosen = *it;
                    found = true;
                    break;
                }
            }
        }
        if (found) {
            ProgressionFit fit =
                progression_experiment(path, roof, (size_t)sing, right, chosen);
            verdict["progression"] = {{"level", chosen},
                                      {"points", fit.points},
                                      {"slope", fit.slope},
                                      {"target", fit.target},
                                      {"max_rel_residual", fit.max_rel_residual},
                                      {"median_rel_lo", fit.median_rel_lo},
                                      {"median_rel_hi", fit.median_rel_hi}};
        }
    }

    verdict["config_sha256"] = sha256_hex(c.config_text);
    verdict["config"] = c.config_text;
    c.sink.put("report.verdict.json", verdict.dump(2) + "\n");
}

/* --------------------------------------------------------------- runner */

int exit_code_for(const Error& e) {
    switch (e.code) {
        case errc::ok:
            return 0;
        case errc::usage:
        case errc::io:
            return 2;
        case errc::precision:
        case errc::singular:
            return 3;
        case errc::verification:
            return 4;
        default:
            return 4;
    }
}

std::string resolve_format(const std::string& flag, const TomlDoc& doc) {
    std::string f = flag;
    if (f.empty()) f = table_or_empty(doc, "output").str_or("format", "csv");
    if (f != "csv" && f != "json") throw UsageError("format must be csv or json");
    return f;
}

fs::path resolve_outroot(const std::string& flag, const TomlDoc& doc) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("IETLAB_OUT"); env && *env) return env;
    return table_or_empty(doc, "output").str_or("dir", "ietlab_out");
}

LabOutcome run_core(const std::string& command, const std::string& config_text,
                    const fs::path& rundir, const std::string& format_flag, int threads) {
    LabOutcome out;
    try {
        if (threads < 0) throw UsageError("threads must be >= 0");
        RunCtx ctx;
        ctx.doc = TomlDoc::parse(config_text);
        validate_config(ctx.doc);
        ctx.config_text = config_text;
        ctx.inputs.emplace_back("config", sha256_hex(config_text));
        ctx.sink.dir = rundir;
        ctx.sink.format = resolve_format(format_flag, ctx.doc);
        ctx.sink.put(command + ".config.toml", config_text);

        if (command == "induct")
            do_induct(ctx);
        else if (command == "towers")
            do_towers(ctx);
        else if (command == "rigidity")
            do_rigidity(ctx);
        else if (command == "flow")
            do_flow(ctx);
        else if (command == "correlate")
            do_correlate(ctx);
        else if (command == "report")
            do_report(ctx);
        else
            throw UsageError("unknown command '" + command + "'");

        out.files = flush_run(ctx.sink, command, config_text, ctx.inputs);
        out.message = ctx.message;
        out.exit_code = ctx.fail_code;
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e);
        out.message = e.what();
    } catch (const std::exception& e) {
        out.exit_code = 4;
        out.message = std::string("internal error: ") + e.what();
    }
    return out;
}

}  // namespace

std::string lab_sample(const std::string& perm, uint64_t seed, long precision_bits) {
    Permutation p = Permutation::parse(perm);
    Iet iet = sample_iet(p, seed, (mpfr_prec_t)precision_bits);
    return iet.to_json();
}

LabOutcome lab_run_text(const std::string& command, const std::string& config_text,
                        const std::string& outdir_flag, const std::string& format_flag,
                        int threads) {
    try {
        TomlDoc doc = TomlDoc::parse(config_text);
        fs::path root = resolve_outroot(outdir_flag, doc);
        return run_core(command, config_text, root / command, format_flag, threads);
    } catch (const Error& e) {
        return {exit_code_for(e), e.what(), {}};
    } catch (const std::exception& e) {
        return {4, std::string("internal error: ") + e.what(), {}};
    }
}

LabOutcome lab_run(const std::string& command, const std::string& config_path,
                   const std::string& outdir_flag, const std::string& format_flag, int threads) {
    try {
        std::string text = read_file(config_path);
        return lab_run_text(command, text, outdir_flag, format_flag, threads);
    } catch (const Error& e) {
        return {exit_code_for(e), e.what(), {}};
    } catch (const std::exception& e) {
        return {4, std::string("internal error: ") + e.what(), {}};
    }
}

LabOutcome lab_replay(const std::string& manifest_path) {
    try {
        json man;
        try {
            man = json::parse(read_file(manifest_path));
        } catch (const json::exception& e) {
            throw UsageError(std::string("bad manifest: ") + e.what());
        }
        for (const char* key : {"command", "format", "config_file", "outputs",
                                "manifest_sha256", "config_sha256"})
            if (!man.contains(key)) throw UsageError(std::string("manifest lacks ") + key);

        std::string command = man["command"].get<std::string>();
        std::string format = man["format"].get<std::string>();
        fs::path mdir = fs::absolute(fs::path(manifest_path)).parent_path();
        std::string config_text = read_file((mdir / man["config_file"].get<std::string>()).string());
        if (sha256_hex(config_text) != man["config_sha256"].get<std::string>())
            throw VerificationFailed("replay: config echo does not match its recorded hash");

        fs::path replay_dir = mdir.parent_path() / (command + ".replay");
        LabOutcome ran = run_core(command, config_text, replay_dir, format, 0);
        if (ran.exit_code != 0) {
            ran.message = "replay run failed: " + ran.message;
            return ran;
        }

        json man2;
        try {
            man2 = json::parse(read_file(ran.files.back()));
        } catch (const json::exception& e) {
            throw Error(errc::internal, std::string("replay manifest unreadable: ") + e.what());
        }
        std::vector<std::string> mismatches;
        if (man2["manifest_sha256"] != man["manifest_sha256"])
            mismatches.push_back("manifest_sha256");
        if (man2["outputs"] != man["outputs"]) {
            for (const auto& o : man["outputs"]) {
                bool found = false;
                for (const auto& p : man2["outputs"])
                    if (p["file"] == o["file"] && p["sha256"] == o["sha256"]) found = true;
                if (!found) mismatches.push_back(o["file"].get<std::string>());
            }
            if (mismatches.empty()) mismatches.push_back("output list");
        }
        LabOutcome out;
        out.files = ran.files;
        if (mismatches.empty()) {
            out.exit_code = 0;
            out.message =
                "replay: outputs identical (" + std::to_string(ran.files.size()) + " files)";
        } else {
            out.exit_code = 4;
            out.message = "replay: MISMATCH in";
            for (const auto& m : mismatches) out.message += " " + m;
        }
        return out;
    } catch (const Error& e) {
        return {exit_code_for(e), e.what(), {}};
    } catch (const std::exception& e) {
        return {4, std::string("internal error: ") + e.what(), {}};
    }
}

}  // namespace ietlab
