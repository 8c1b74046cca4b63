#include "pss/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pss/catalog.hpp"
#include "pss/classify.hpp"
#include "pss/linear.hpp"
#include "pss/parse.hpp"

namespace pss::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Malformed command line or input file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A check ran to completion and failed; carries the report.
struct Outcome {
    json report;
    bool ok = true;
};

const std::set<std::string> kKnownFlags{"--catalog", "--file", "--out",  "--seed",  "--delta", "--fn",
                                        "--trials",  "--tol",  "--levels", "--loop", "--path",  "--form",
                                        "--n",       "--data", "--compare", "--free", "--help", "-h", "--version"};

// Flags taking no value.
const std::set<std::string> kSwitches{"--free", "--help", "-h", "--version"};

double parse_number(const std::string& flag, const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw InputError("value of " + flag + " is not a number: '" + s + "'");
}

std::uint64_t parse_seed(const std::string& s) {
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used, 0);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError("bad seed '" + s + "'");
}

std::vector<std::size_t> parse_levels(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double v = parse_number("--levels", item);
        if (v < 5 || v != std::floor(v)) throw InputError("levels must be integers >= 5");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.size() < 2) throw InputError("--levels needs at least two levels");
    for (std::size_t k = 1; k < out.size(); ++k)
        if (out[k] <= out[k - 1]) throw InputError("--levels must increase");
    return out;
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& flag) {
    auto c = s.find(',');
    if (c == std::string::npos) throw InputError(flag + " expects a,b");
    return {parse_number(flag, s.substr(0, c)), parse_number(flag, s.substr(c + 1))};
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("'" + path + "': " + e.what());
    }
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

struct Context {
    RunConfig cfg;
    std::vector<std::string> positional;
    std::vector<std::string> positional_fns;
    std::string loop = "0,0:1,1";
    std::string path;
    std::string form = "2x2";
    std::string compare;
    bool free = false;
    std::ostream* out = nullptr;

    Instantiation instantiation() const {
        Instantiation in;
        in.values = cfg.overrides;
        in.delta = cfg.delta;
        in.functions = cfg.functions;
        in.free_params = free;
        return in;
    }

    // Catalog instance or system+frame file.
    std::pair<Problem, std::string> problem() const {
        if (!cfg.catalog_key.empty() && !cfg.file.empty()) throw InputError("give either --catalog or --file");
        if (!cfg.catalog_key.empty()) return {get(cfg.catalog_key, instantiation()), cfg.catalog_key};
        if (cfg.file.empty()) throw InputError("an input is required: --catalog <key> or --file <json>");
        if (!cfg.overrides.empty() || !cfg.functions.empty())
            throw InputError("parameter overrides apply to catalog entries only");
        try {
            Problem p = problem_from_json(read_json(cfg.file));
            if (cfg.delta) p.system.delta = *cfg.delta;
            return {p, stem(cfg.file)};
        } catch (const json::exception& e) {
            throw InputError("'" + cfg.file + "': " + e.what());
        }
    }

    GoursatData data() const {
        if (!cfg.data_file.empty()) {
            try {
                return data_from_json(read_json(cfg.data_file));
            } catch (const json::exception& e) {
                throw InputError("'" + cfg.data_file + "': " + e.what());
            }
        }
        if (!cfg.catalog_key.empty()) return data_from_spec(entry(cfg.catalog_key).data);
        json j = read_json(cfg.file);
        if (!j.contains("data")) throw InputError("no characteristic data: pass --data <json>");
        try {
            return data_from_json(j.at("data"));
        } catch (const json::exception& e) {
            throw InputError("'" + cfg.file + "' data: " + e.what());
        }
    }

    std::size_t nodes(std::size_t fallback) const { return cfg.nodes ? cfg.nodes : fallback; }

    PairForm pair_form() const {
        if (form == "2x2") return PairForm::TwoByTwo;
        if (form == "3x3") return PairForm::ThreeByThree;
        throw InputError("--form must be 2x2 or 3x3");
    }

    json envelope(const json& result) const {
        json j;
        j["config"] = cfg.to_json();
        j["result"] = result;
        return j;
    }

    void write(const std::string& name, const std::string& text) const {
        fs::create_directories(cfg.out_dir);
        const fs::path p = fs::path(cfg.out_dir) / name;
        std::ofstream f(p);
        if (!f) throw InputError("cannot write '" + p.string() + "'");
        f << text;
    }

    void emit(const std::string& name, const json& report) const {
        const std::string text = report.dump(2) + "\n";
        write(name, text);
        *out << text;
    }
};

// Pulls --name value / --name=value pairs not known to the parser out as parameter overrides.
std::vector<std::string> split_overrides(const std::vector<std::string>& args, std::map<std::string, double>& overrides) {
    std::vector<std::string> rest;
    for (std::size_t k = 0; k < args.size(); ++k) {
        const std::string& a = args[k];
        if (a.rfind("--", 0) != 0 || a.size() == 2) {
            rest.push_back(a);
            // a known flag's value may start with '-'
            if (kKnownFlags.count(a) && !kSwitches.count(a) && k + 1 < args.size()) rest.push_back(args[++k]);
            continue;
        }
        const auto eq = a.find('=');
        const std::string flag = a.substr(0, eq);
        if (kKnownFlags.count(flag)) {
            rest.push_back(a);
            if (eq == std::string::npos && !kSwitches.count(flag) && k + 1 < args.size()) rest.push_back(args[++k]);
            continue;
        }
        std::string value;
        if (eq != std::string::npos)
            value = a.substr(eq + 1);
        else if (k + 1 < args.size())
            value = args[++k];
        else
            throw InputError("parameter " + flag + " needs a value");
        overrides[flag.substr(2)] = parse_number(flag, value);
    }
    return rest;
}

// ---- commands ----

Outcome cmd_verify(const Context& c) {
    auto [p, name] = c.problem();
    VerifyOptions vo;
    vo.zero = c.cfg.zero();
    auto rep = verify(p.system, p.frame, vo);
    json j = c.envelope(rep.to_json());
    c.emit("verify-" + name + ".json", j);
    return {j, rep.passed};
}

json fg_json(const Expr& F, const Expr& G) { return {{"F", to_string(F)}, {"G", to_string(G)}}; }

bool same_frame(const Frame& a, const Frame& b, const ZeroTestOptions& zo, const FunctionTable& fns) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
            if (!is_zero(a[i][j] - b[i][j], zo, fns)) return false;
    return true;
}

bool matches(const BuildResult& b, const Problem& cat, const ZeroTestOptions& zo) {
    FunctionTable fns = bind_functions(cat.system);
    fns.merge(b.problem.system.functions);
    return b.problem.system.delta == cat.system.delta &&
           is_zero(b.problem.system.F - bind_params(cat.system.F, cat.system), zo, fns) &&
           is_zero(b.problem.system.G - bind_params(cat.system.G, cat.system), zo, fns) &&
           same_frame(b.problem.frame, bind_params(cat.frame, cat.system), zo, fns);
}

Outcome cmd_generate(const Context& c) {
    const ZeroTestOptions zo = c.cfg.zero();
    BuildResult b;
    std::string name, compare = c.compare;
    json result;
    try {
        if (!c.cfg.catalog_key.empty()) {
            name = c.cfg.catalog_key;
            if (compare.empty()) compare = name;
            b = std::visit(
                [&](const auto& cp) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(cp)>, Case1Params>)
                        return build_case1(cp, zo);
                    else
                        return build_case2(cp, zo);
                },
                corollary_params(name, c.instantiation()));
        } else {
            if (c.cfg.file.empty()) throw InputError("an input is required: --catalog <key> or --file <params json>");
            name = stem(c.cfg.file);
            json j = read_json(c.cfg.file);
            try {
                b = build_from_json(j, zo);
            } catch (const json::exception& e) {
                throw InputError("'" + c.cfg.file + "': " + e.what());
            }
        }
    } catch (const ClassifyError& e) {
        result["error"] = e.what();
        json j = c.envelope(result);
        c.emit("generate-" + (name.empty() ? std::string("input") : name) + ".json", j);
        return {j, false};
    }

    const auto& sys = b.problem.system;
    result["problem"] = problem_to_json(b.problem);
    result["constants"] = b.constants;
    result["witness"] = point_to_json(b.witness);
    VerifyOptions vo;
    vo.zero = zo;
    const auto vr = verify(sys, b.problem.frame, vo);
    result["verify"] = {{"passed", vr.passed}};
    if (vr.error) result["verify"]["error"] = *vr.error;

    bool cross = false;
    try {
        auto d = derive_fg(b.problem.frame, sys.delta, zo, sys.functions);
        const bool f_ok = is_zero(d.F - sys.F, zo, sys.functions);
        const bool g_ok = is_zero(d.G - sys.G, zo, sys.functions);
        cross = f_ok && g_ok;
        result["derive_fg"] = fg_json(d.F, d.G);
        result["derive_fg"]["rows"] = d.rows;
        result["derive_fg"]["F_matches"] = f_ok;
        result["derive_fg"]["G_matches"] = g_ok;
    } catch (const ClassifyError& e) {
        result["derive_fg"] = {{"error", e.what()}};
    }

    bool cat_ok = true;
    if (!compare.empty()) {
        Instantiation in = c.instantiation();
        in.delta = sys.delta;
        cat_ok = matches(b, get(compare, in), zo);
        result["compare"] = compare;
        result["matches_catalog"] = cat_ok;
    } else {
        result["matches_catalog"] = nullptr;
    }
    json j = c.envelope(result);
    c.emit("generate-" + name + ".json", j);
    return {j, vr.passed && cross && cat_ok};
}

json grid_summary(const SolutionGrid& sol) {
    return {{"nx", sol.nx}, {"nt", sol.nt}, {"hx", sol.hx}, {"ht", sol.ht},
            {"pde_residual", pde_residual(sol)}, {"consistency_residual", consistency_residual(sol)}};
}

Outcome cmd_solve(const Context& c) {
    auto [p, name] = c.problem();
    const std::size_t n = c.nodes(65);
    const GoursatData d = c.data();
    json result;
    result["data"] = data_to_json(d);
    try {
        auto sol = solve(p.system, d, n, n, c.cfg.validate().solve);
        std::ostringstream csv;
        write_grid_csv(csv, sol);
        c.write(name + "-grid.csv", csv.str());
        result["grid"] = grid_summary(sol);
        result["csv"] = name + "-grid.csv";
    } catch (const GoursatError& e) {
        result["error"] = e.what();
        json j = c.envelope(result);
        c.emit(name + "-solve.json", j);
        return {j, false};
    }
    json j = c.envelope(result);
    c.emit(name + "-solve.json", j);
    return {j, true};
}

Outcome cmd_curvature(const Context& c) {
    auto [p, name] = c.problem();
    const GoursatData d = c.data();
    const ValidateOptions vo = c.cfg.validate();
    auto rep = validate(p.system, p.frame, d, vo);
    json result = rep.to_json();
    result["data"] = data_to_json(d);
    const std::size_t n = vo.levels.back();
    try {
        auto sol = solve(p.system, d, n, n, vo.solve);
        auto K = curvature(p.frame, sol, vo.degenerate);
        std::ostringstream csv;
        write_grid_csv(csv, sol, &K.K);
        c.write(name + "-grid.csv", csv.str());
        result["csv"] = name + "-grid.csv";
    } catch (const GoursatError&) {
        // the failure is already recorded per level
    }
    json j = c.envelope(result);
    c.emit(name + "-geometry.json", j);
    return {j, rep.passed};
}

LatticePath lattice_path(const Context& c, const SolutionGrid& sol) {
    if (!c.path.empty()) {
        auto colon = c.path.find(':');
        if (colon == std::string::npos) throw InputError("--path expects i0,j0:MOVES");
        auto [i0, j0] = parse_pair(c.path.substr(0, colon), "--path");
        if (i0 < 0 || j0 < 0 || i0 != std::floor(i0) || j0 != std::floor(j0))
            throw InputError("--path start must be a node index");
        return parse_path(static_cast<std::size_t>(i0), static_cast<std::size_t>(j0), c.path.substr(colon + 1));
    }
    auto colon = c.loop.find(':');
    if (colon == std::string::npos) throw InputError("--loop expects x0,t0:x1,t1");
    auto [x0, t0] = parse_pair(c.loop.substr(0, colon), "--loop");
    auto [x1, t1] = parse_pair(c.loop.substr(colon + 1), "--loop");
    return rectangle_path(sol, x0, t0, x1, t1);
}

Outcome cmd_transport(const Context& c) {
    auto [p, name] = c.problem();
    const std::size_t n = c.nodes(129);
    auto lp = linear_pair(p.frame, p.system.delta, c.pair_form());
    json result;
    try {
        auto sol = solve(p.system, c.data(), n, n, c.cfg.validate().solve);
        LatticePath path;
        try {
            path = lattice_path(c, sol);
        } catch (const TransportError& e) {
            throw InputError(e.what());
        }
        auto tr = transport(lp, sol, path, CVector::Ones(lp.n));
        std::ostringstream csv;
        tr.write_csv(csv);
        c.write(name + "-transport.csv", csv.str());
        result = tr.summary();
        result["n"] = n;
        result["closed"] = path.closed();
        result["csv"] = name + "-transport.csv";
    } catch (const GoursatError& e) {
        result["error"] = e.what();
        json j = c.envelope(result);
        c.emit(name + "-transport.json", j);
        return {j, false};
    }
    json j = c.envelope(result);
    c.emit(name + "-transport.json", j);
    return {j, true};
}

json linear_row(const std::string& key, const Problem& p, const ZeroTestOptions& zo, bool& consistent) {
    VerifyOptions vo;
    vo.zero = zo;
    const bool passed = verify(p.system, p.frame, vo).passed;
    json row{{"key", key}, {"delta", p.system.delta}, {"verify", passed}};
    bool ok = true;
    for (auto [form, label] : {std::pair{PairForm::TwoByTwo, "2x2"}, std::pair{PairForm::ThreeByThree, "3x3"}}) {
        auto lp = linear_pair(p.frame, p.system.delta, form);
        auto zc = zc_check(lp, p.system, zo);
        json z = zc.to_json();
        z["algebra"] = to_string(lp.algebra);
        row[label] = z;
        ok = ok && zc.zero == passed;
    }
    row["consistent"] = ok;
    consistent = consistent && ok;
    return row;
}

Outcome cmd_linear_check(const Context& c) {
    const ZeroTestOptions zo = c.cfg.zero();
    json rows = json::array();
    bool consistent = true;
    std::string name = "all";
    if (!c.cfg.catalog_key.empty() || !c.cfg.file.empty()) {
        auto [p, n] = c.problem();
        name = n;
        rows.push_back(linear_row(n, p, zo, consistent));
    } else {
        for (const auto& e : catalog())
            for (int d : e.deltas) {
                Instantiation in;
                in.delta = d;
                rows.push_back(linear_row(e.key, get(e.key, in), zo, consistent));
            }
    }
    json j = c.envelope({{"entries", rows}, {"consistent", consistent}});
    c.emit("linear-check-" + name + ".json", j);
    return {j, consistent};
}

Outcome cmd_catalog_list(const Context& c) {
    json list = json::array();
    for (const auto& e : catalog()) {
        json j = entry_to_json(e);
        list.push_back({{"key", e.key}, {"title", e.title}, {"kind", j["kind"]}, {"deltas", e.deltas}});
    }
    json j = c.envelope({{"entries", list}});
    c.emit("catalog.json", j);
    return {j, true};
}

Outcome cmd_catalog_show(const Context& c) {
    if (c.positional.size() != 1) throw InputError("catalog show takes one key");
    const std::string& key = c.positional[0];
    json result = entry_to_json(entry(key));
    result["problem"] = problem_to_json(get(key, c.instantiation()));
    json j = c.envelope(result);
    c.emit("catalog-" + key + ".json", j);
    return {j, true};
}

Outcome cmd_reduce(const Context& c) {
    if (c.positional.size() != 2) throw InputError("reduce takes <source> <target>");
    const std::string &src = c.positional[0], &tgt = c.positional[1];
    entry(src);
    entry(tgt);
    json certs = json::array();
    bool ok = true;
    for (const auto& r : reductions()) {
        if (r.source != src || r.target != tgt) continue;
        if (c.cfg.delta && r.delta != *c.cfg.delta) continue;
        auto cert = check_reduction(r, c.cfg.zero());
        certs.push_back(cert.to_json());
        ok = ok && cert.certified;
    }
    if (certs.empty()) throw InputError("no registered reduction " + src + " -> " + tgt);
    json j = c.envelope({{"certificates", certs}, {"certified", ok}});
    c.emit("reduce-" + src + "-" + tgt + ".json", j);
    return {j, ok};
}

void add_common(CLI::App* sub, Context& c, std::string& seed, std::string& levels) {
    sub->add_option("--catalog", c.cfg.catalog_key, "Catalog entry key");
    sub->add_option("--file", c.cfg.file, "Input JSON file");
    sub->add_option("--out", c.cfg.out_dir, "Output directory (env PSS_OUT_DIR)");
    sub->add_option("--seed", seed, "Sampling seed (decimal or 0x hex)");
    sub->add_option("--delta", c.cfg.delta, "Curvature sign: 1 (K = -1) or -1 (K = +1)");
    sub->add_option("--fn", c.positional_fns, "Function slot body, name=body (repeatable)")->allow_extra_args(false);
    sub->add_option("--trials", c.cfg.trials, "Zero-test samples")->check(CLI::PositiveNumber);
    sub->add_option("--tol", c.cfg.tol, "Zero-test relative tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--levels", levels, "Refinement levels, e.g. 33,65,129,257");
    sub->add_option("--n", c.cfg.nodes, "Grid nodes per axis")->check(CLI::Range(3, 100000));
    sub->add_option("--data", c.cfg.data_file, "Characteristic data JSON");
    sub->add_flag("--free", c.free, "Leave unspecified catalog parameters free");
    sub->footer("Any other --name value pair overrides the catalog parameter `name`.");
}

}  // namespace

ZeroTestOptions RunConfig::zero() const {
    ZeroTestOptions o;
    o.trials = trials;
    o.tol = tol;
    o.seed = seed;
    return o;
}

ValidateOptions RunConfig::validate() const {
    ValidateOptions o;
    o.levels = levels;
    return o;
}

json RunConfig::tolerances() const {
    const ZeroTestOptions z = zero();
    return {{"zero_test", {{"trials", z.trials}, {"tol", z.tol}, {"retry_factor", z.retry_factor}}},
            {"witness_threshold", kWitnessThreshold},
            {"validate", validate().to_json()}};
}

json RunConfig::to_json() const {
    json j;
    j["command"] = command;
    json in = json::object();
    if (!catalog_key.empty()) in["catalog"] = catalog_key;
    if (!file.empty()) in["file"] = file;
    if (!data_file.empty()) in["data"] = data_file;
    if (nodes) in["n"] = nodes;
    j["inputs"] = in;
    j["overrides"] = overrides;
    j["functions"] = functions;
    j["delta"] = delta ? json(*delta) : json(nullptr);
    std::ostringstream hex;
    hex << "0x" << std::uppercase << std::hex << seed;
    j["seed"] = hex.str();
    j["tolerances"] = tolerances();
    j["version"] = kVersion;
    return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context c;
    c.out = &out;
    if (const char* env = std::getenv("PSS_OUT_DIR"); env && *env) c.cfg.out_dir = env;
    std::string seed, levels;

    CLI::App app{"Pseudospherical and spherical surface systems: verification, generation and numerics", "pss"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::map<std::string, CLI::App*> subs;
    auto add = [&](CLI::App* parent, const std::string& name, const std::string& help) {
        CLI::App* s = parent->add_subcommand(name, help);
        add_common(s, c, seed, levels);
        return s;
    };
    subs["verify"] = add(&app, "verify", "Check the structure equations and genericity conditions");
    subs["generate"] = add(&app, "generate", "Build a system and frame from theorem parameters");
    subs["generate"]->add_option("--compare", c.compare, "Catalog key to compare the build against");
    subs["solve"] = add(&app, "solve", "Solve the characteristic initial value problem");
    subs["curvature"] = add(&app, "curvature", "Validate curvature and convergence over refinement levels");
    subs["transport"] = add(&app, "transport", "Transport the linear problem along a lattice path");
    CLI::App* linear = app.add_subcommand("linear", "Linear problem (zero-curvature) tools");
    linear->require_subcommand(1);
    subs["linear check"] = add(linear, "check", "Zero-curvature verdicts, 2x2 and 3x3");
    subs["linear transport"] = add(linear, "transport", "Same as transport");
    CLI::App* cat = app.add_subcommand("catalog", "Catalog listing");
    cat->require_subcommand(1);
    subs["catalog list"] = add(cat, "list", "List entries");
    subs["catalog show"] = add(cat, "show", "Show one entry with its bound system and frame");
    subs["catalog show"]->add_option("key", c.positional, "Entry key")->required();
    subs["reduce"] = add(&app, "reduce", "Certify a parameter reduction between entries");
    subs["reduce"]->add_option("entries", c.positional, "<source> <target>")->expected(2)->required();
    for (const char* cmd : {"transport", "linear transport"}) {
        subs[cmd]->add_option("--loop", c.loop, "Rectangle x0,t0:x1,t1 traversed counterclockwise");
        subs[cmd]->add_option("--path", c.path, "Lattice path i0,j0:MOVES with R L U D");
        subs[cmd]->add_option("--form", c.form, "2x2 or 3x3");
    }

    try {
        std::vector<std::string> rest = split_overrides(args, c.cfg.overrides);
        std::vector<std::string> reversed(rest.rbegin(), rest.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    }

    std::string command;
    for (const auto& [name, s] : subs)
        if (s->parsed()) command = name;
    c.cfg.command = command;

    try {
        if (!seed.empty()) c.cfg.seed = parse_seed(seed);
        if (!levels.empty()) c.cfg.levels = parse_levels(levels);
        for (const auto& f : c.positional_fns) {
            auto eq = f.find('=');
            if (eq == std::string::npos || eq == 0) throw InputError("--fn expects name=body");
            c.cfg.functions[f.substr(0, eq)] = f.substr(eq + 1);
        }
        if (c.cfg.delta && *c.cfg.delta != 1 && *c.cfg.delta != -1) throw InputError("--delta must be 1 or -1");
        Outcome o;
        if (command == "verify")
            o = cmd_verify(c);
        else if (command == "generate")
            o = cmd_generate(c);
        else if (command == "solve")
            o = cmd_solve(c);
        else if (command == "curvature")
            o = cmd_curvature(c);
        else if (command == "transport" || command == "linear transport")
            o = cmd_transport(c);
        else if (command == "linear check")
            o = cmd_linear_check(c);
        else if (command == "catalog list")
            o = cmd_catalog_list(c);
        else if (command == "catalog show")
            o = cmd_catalog_show(c);
        else
            o = cmd_reduce(c);
        if (!o.ok) {
            const json& r = o.report["result"];
            if (r.contains("error") && r["error"].is_string()) err << "error: " << r["error"].get<std::string>() << "\n";
            return kFailed;
        }
        return kOk;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const UnknownKey& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const ParamViolation& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const ExprError& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const TransportError& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
}

}  // namespace pss::cli
