// Acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "pss/catalog.hpp"
#include "pss/classify.hpp"
#include "pss/cli.hpp"
#include "pss/goursat.hpp"
#include "pss/linear.hpp"
#include "pss/parse.hpp"

using namespace pss;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << id << "  " << name << ": " << detail << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(3);
    s << x;
    return s.str();
}

// 1. every hyperbolic entry verifies; corollaries also at random admissible draws
void symbolic_suite() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(kDefaultSeed);
    int total = 0, passed = 0;
    std::string first_bad;
    auto run = [&](const std::string& key, const Instantiation& in) {
        Problem p = get(key, in);
        ++total;
        if (verify(p.system, p.frame).passed)
            ++passed;
        else if (first_bad.empty())
            first_bad = key + " delta=" + std::to_string(p.system.delta);
    };
    for (const auto& e : catalog()) {
        if (e.kind != EntryKind::Hyperbolic) continue;
        for (int d : e.deltas) {
            Instantiation in;
            in.delta = d;
            run(e.key, in);
        }
        if (e.key.rfind("cor5.", 0) != 0) continue;
        for (int k = 0; k < 5; ++k) {
            Instantiation in;
            in.values = draw(e, rng);
            in.delta = e.deltas[static_cast<std::size_t>(k) % e.deltas.size()];
            run(e.key, in);
        }
    }
    const double secs = seconds_since(t0);
    report(1, "symbolic verification suite", passed == total && secs < 30.0,
           std::to_string(passed) + "/" + std::to_string(total) + " instances verified in " + fmt(secs) +
               " s (limit 30 s)" + (first_bad.empty() ? "" : "; first failure " + first_bad));
}

// 2. NLS- metric against the printed display
void nls_metric() {
    Instantiation in;
    in.free_params = true;
    Metric m = metric(get("nls-minus", in).frame);
    ZeroTestOptions zo;
    zo.tol = 1e-12;
    const bool g11 = is_zero(m.g11 - parse("4*(u^2 + v^2)"), zo);
    // the printed g12 is the full dxdt coefficient, 2 g12
    const bool g12 = is_zero(Expr(2.0) * m.g12 - parse("-16*eta*(u^2 + v^2) - 8*(u*vx - v*ux)"), zo);
    const bool g22 = is_zero(m.g22 - parse("16*eta^2*(u^2 + v^2) + 4*(ux^2 + vx^2) + 16*eta*(u*vx - v*ux)"), zo);
    report(2, "NLS- metric", g11 && g12 && g22,
           std::string("g11 ") + (g11 ? "ok" : "differs") + ", 2*g12 " + (g12 ? "ok" : "differs") + ", g22 " +
               (g22 ? "ok" : "differs") + " (tol 1e-12)");
}

// 3. reduction certificates
void reductions_suite() {
    const std::vector<std::pair<std::string, std::string>> pairs{{"cor5.1", "plr"},   {"cor5.5", "konno-oono"},
                                                                 {"cor5.5", "ex3.9"},  {"cor5.3", "ex3.5"},
                                                                 {"cor5.3", "ex3.6"},  {"cor5.3", "ex3.7"}};
    int ok = 0;
    std::string bad;
    for (const auto& [s, t] : pairs) {
        try {
            reduce(s, t);
            ++ok;
        } catch (const std::exception& e) {
            if (bad.empty()) bad = s + "->" + t + ": " + e.what();
        }
    }
    report(3, "reduction certificates", ok == static_cast<int>(pairs.size()),
           std::to_string(ok) + "/" + std::to_string(pairs.size()) + " certified" + (bad.empty() ? "" : "; " + bad));
}

struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t s) : g(s) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(g() >> 11) * 0x1.0p-53; }
    double nonzero() { return (g() & 1 ? 1.0 : -1.0) * uniform(0.3, 1.5); }
    int pick(int n) { return static_cast<int>(g() % static_cast<std::uint64_t>(n)); }
};

FunctionDef fn(std::vector<std::string> args, const std::string& body) {
    ParseOptions o;
    o.params = std::set<std::string>(args.begin(), args.end());
    return FunctionDef{args, simplify(parse(body, o))};
}

std::string num(double x) {
    std::string s = format_double(x);
    return x < 0 ? "(" + s + ")" : s;
}

Case1Params random_case1(Rng& r, Which w) {
    Case1Params cp;
    cp.which = w;
    cp.delta = r.pick(2) ? 1 : -1;
    cp.a = r.nonzero();
    cp.b = r.nonzero();
    cp.lambda = r.nonzero();
    cp.mu = r.nonzero();
    cp.eta = r.uniform(-1.0, 1.0);
    const double eps = w == Which::T1 ? cp.delta : 1.0;
    const char* gs[] = {"ux + 0.3*vx^2", "sin(ux) + vx", "ux*vx + 2*ux", "exp(0.2*vx) + ux"};
    cp.g = simplify(parse(gs[r.pick(4)]));
    // h from the linear constraint mu g - lambda h = eps (a vx + b ux)
    cp.h = simplify((Expr(cp.mu) * cp.g - Expr(eps) * (Expr(cp.a) * Expr(kVx) + Expr(cp.b) * Expr(kUx))) /
                    Expr(cp.lambda));
    const char* phis[] = {"exp(0.4*s)", "s + s^3/10", "sinh(s) + 2*s", "-3*s"};
    cp.phi = fn({"s"}, phis[r.pick(4)]);
    return cp;
}

Case2Params random_case2(Rng& r, Which w) {
    Case2Params cp;
    cp.which = w;
    cp.delta = r.pick(2) ? 1 : -1;
    do {
        cp.a1 = r.nonzero();
        cp.b1 = r.nonzero();
        cp.a_other = r.nonzero();
        cp.b_other = r.nonzero();
    } while (std::abs(case2_constants(cp).gamma) < 0.2);
    cp.eta = r.uniform(-1.0, 1.0);
    const std::string c1 = num(r.nonzero()), c2 = num(r.nonzero());
    const std::string ps[] = {c1 + "*s^2 + " + c2 + "*r + s*r", "exp(" + c1 + "*s/2)*r + " + c2 + "*r^2",
                              "sin(" + c1 + "*s) + " + c2 + "*r^2 + s", "cosh(r/2)*" + c1 + " + s*r^2"};
    cp.p = fn({"s", "r"}, ps[r.pick(4)]);
    return cp;
}

// 4. generator round trip and the printed closed forms
void generator_roundtrip() {
    Rng r(kDefaultSeed);
    int builds = 0, good = 0, printed_t2 = 0, printed_t2_ok = 0, t1_reports = 0;
    bool t1_mismatch_seen = false, t1_corrected_ok = true;
    for (Which w : {Which::T1, Which::T2, Which::T3})
        for (int k = 0; k < 20; ++k) {
            for (int c = 1; c <= 2; ++c) {
                BuildResult b;
                Case2Params cp2;
                if (c == 1) {
                    b = build_case1(random_case1(r, w));
                } else {
                    cp2 = random_case2(r, w);
                    b = build_case2(cp2);
                }
                ++builds;
                if (verify(b.problem.system, b.problem.frame).passed && genericity(b.problem.system)) ++good;
                if (c != 2) continue;
                const auto& fns = b.problem.system.functions;
                const Expr &F = b.problem.system.F, &G = b.problem.system.G;
                if (w == Which::T2) {
                    auto [pf, pg] = printed_case2_fg(cp2);
                    ++printed_t2;
                    if (is_zero(pf - F, {}, fns) && is_zero(pg - G, {}, fns)) ++printed_t2_ok;
                } else if (w == Which::T1) {
                    // mismatch report: printed G against the derived one, and the corrected reading
                    auto printed = printed_case2_fg(cp2, false);
                    auto corrected = printed_case2_fg(cp2, true);
                    ++t1_reports;
                    t1_mismatch_seen = t1_mismatch_seen || !is_zero(printed.second - G, {}, fns);
                    t1_corrected_ok = t1_corrected_ok && is_zero(corrected.first - F, {}, fns) &&
                                      is_zero(corrected.second - G, {}, fns);
                }
            }
        }
    const bool ok = good == builds && printed_t2_ok == printed_t2 && t1_reports > 0;
    report(4, "generator round trip", ok,
           std::to_string(good) + "/" + std::to_string(builds) + " builds verify and are generic; T2 case (ii) printed F,G " +
               std::to_string(printed_t2_ok) + "/" + std::to_string(printed_t2) + "; T1 case (ii) report: printed G " +
               (t1_mismatch_seen ? "mismatches" : "matches") + ", 1/gamma reading " +
               (t1_corrected_ok ? "matches" : "differs") + " (" + std::to_string(t1_reports) + " cases)");
}

// 5. zero curvature iff verify, with sign mutations
void zero_curvature() {
    int checks = 0, agree = 0, mutations = 0, broken = 0;
    for (const auto& e : catalog())
        for (int d : e.deltas) {
            Instantiation in;
            in.delta = d;
            Problem p = get(e.key, in);
            const bool ok = verify(p.system, p.frame).passed;
            for (auto form : {PairForm::TwoByTwo, PairForm::ThreeByThree}) {
                ++checks;
                if (zc_check(linear_pair(p.frame, d, form), p.system).zero == ok) ++agree;
            }
            if (!ok) continue;
            const FunctionTable fns = bind_functions(p.system);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 2; ++j) {
                    if (is_zero(bind_params(p.frame[i][j], p.system), {}, fns)) continue;
                    Frame m = p.frame;
                    m[i][j] = -m[i][j];
                    ++mutations;
                    bool both = !verify(p.system, m).passed;
                    for (auto form : {PairForm::TwoByTwo, PairForm::ThreeByThree})
                        both = both && !zc_check(linear_pair(m, d, form), p.system).zero;
                    if (both) ++broken;
                }
        }
    report(5, "zero-curvature equivalence", agree == checks && broken == mutations,
           std::to_string(agree) + "/" + std::to_string(checks) + " verdicts agree with verify; " + std::to_string(broken) +
               "/" + std::to_string(mutations) + " sign mutations of nonzero f_ij break both");
}

// 6. numerical geometry over refinement levels
void numerical_geometry() {
    const auto t0 = Clock::now();
    struct Run {
        std::string label;
        Problem p;
        GoursatData d;
    };
    std::vector<Run> runs;
    runs.push_back({"plr", get("plr"), data_from_spec(entry("plr").data)});
    runs.push_back({"konno-oono", get("konno-oono"), data_from_spec(entry("konno-oono").data)});
    for (int d : {1, -1}) {
        Instantiation in;
        in.delta = d;
        runs.push_back({"ex3.8 delta=" + std::to_string(d), get("ex3.8", in), data_from_spec(entry("ex3.8").data)});
    }
    {
        // random parameters and data; the first pair whose coarse solution keeps |w1^w2| >= 0.1 is used
        std::mt19937_64 rng(kDefaultSeed);
        const CatalogEntry& e = entry("cor5.1");
        for (int attempt = 1; attempt <= 200; ++attempt) {
            Instantiation in;
            in.values = draw(e, rng);
            GoursatData d = pss::random_data(rng);
            Problem p = get("cor5.1", in);
            try {
                if (min_area(p.frame, solve(p.system, d, 33, 33)) < 0.1) continue;
            } catch (const GoursatError&) {
                continue;
            }
            std::string label = "cor5.1 random (draw " + std::to_string(attempt) + ")";
            for (const auto& [k, v] : in.values) label += " " + k + "=" + fmt(v);
            runs.push_back({label, p, d});
            break;
        }
        if (runs.size() < 5) throw std::runtime_error("no non-degenerate random cor5.1 instance in 200 draws");
    }
    bool all = true;
    std::string detail;
    for (const auto& r : runs) {
        auto rep = validate(r.p.system, r.p.frame, r.d);
        bool ok = rep.passed;
        for (double o : {rep.pde_order, rep.forms_order, rep.k_order}) ok = ok && o >= 1.8 && o <= 2.5;
        all = all && ok;
        const auto& fine = rep.levels.back();
        detail += "\n      " + std::string(ok ? "ok   " : "FAIL ") + r.label + ": orders pde " + fmt(rep.pde_order) +
                  ", forms " + fmt(rep.forms_order) + ", K " + fmt(rep.k_order) + "; finest |K+delta| " +
                  fmt(fine.k_error) + ", degenerate " + fmt(fine.degenerate_fraction);
        if (!rep.failures.empty()) detail += " (" + rep.failures.front() + ")";
    }
    const double secs = seconds_since(t0);
    report(6, "numerical geometry", all && secs < 300.0,
           std::to_string(runs.size()) + " runs on levels 33/65/129/257 in " + fmt(secs) + " s (limit 300 s)" + detail);
}

// 7. transport conservation and holonomy order
void transport_suite() {
    Problem plr = get("plr");
    auto lp = linear_pair(plr.frame, 1, PairForm::TwoByTwo);
    const GoursatData d = data_from_spec(entry("plr").data);
    std::vector<double> dev;
    double det_rate = 0.0;
    for (std::size_t n : {33, 65, 129, 257}) {
        auto sol = solve(plr.system, d, n, n);
        auto tr = transport(lp, sol, rectangle_path(sol, 0, 0, 1, 1), CVector::Ones(2));
        dev.push_back(tr.deviation());
        if (n == 257) det_rate = tr.det_drift() / tr.length();
    }
    double worst_order = INFINITY, best_order = 0.0;
    for (std::size_t k = 1; k < dev.size(); ++k) {
        const double o = std::log2(dev[k - 1] / dev[k]);
        worst_order = std::min(worst_order, o);
        best_order = std::max(best_order, o);
    }
    Problem ss = get("ex3.4");
    auto sol = solve(ss.system, data_from_spec(entry("ex3.4").data), 257, 257);
    CVector psi0(2);
    psi0 << std::complex<double>(0.6, 0.2), std::complex<double>(-0.3, 0.7);
    auto tr = transport(linear_pair(ss.frame, -1, PairForm::TwoByTwo), sol, rectangle_path(sol, 0, 0, 1, 1), psi0);
    const double norm_rate = tr.norm_drift() / tr.length();
    const bool ok = det_rate <= 1e-8 && worst_order >= 1.8 && best_order <= 2.5 && norm_rate <= 1e-8;
    report(7, "transport conservation", ok,
           "PLR sl2 det drift " + fmt(det_rate) + " per unit length at h=1/256 (limit 1e-8); holonomy deviation " +
               fmt(dev.front()) + " -> " + fmt(dev.back()) + ", orders " + fmt(worst_order) + ".." + fmt(best_order) +
               "; ex3.4 su2 norm drift " + fmt(norm_rate) + " per unit length");
}

// 8. byte-identical reports across repeated runs
void determinism() {
    const fs::path root = fs::temp_directory_path() / ("pss_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> commands{
        {"verify", "--catalog", "cor5.4"},
        {"generate", "--catalog", "cor5.2"},
        {"curvature", "--catalog", "plr", "--levels", "33,65,129"},
        {"transport", "--catalog", "plr", "--n", "65"},
        {"linear", "check"},
        {"reduce", "cor5.5", "konno-oono"},
    };
    int same = 0;
    for (const auto& cmd : commands) {
        std::string outs[2];
        for (int k = 0; k < 2; ++k) {
            auto args = cmd;
            args.push_back("--out");
            args.push_back((root / std::to_string(k)).string());
            std::ostringstream o, e;
            pss::cli::run(args, o, e);
            outs[k] = o.str();
        }
        if (outs[0] == outs[1] && !outs[0].empty()) ++same;
    }
    int files = 0, identical = 0;
    for (const auto& f : fs::directory_iterator(root / "0")) {
        ++files;
        std::ifstream a(f.path()), b(root / "1" / f.path().filename());
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (sa.str() == sb.str()) ++identical;
    }
    fs::remove_all(root);
    report(8, "determinism", same == static_cast<int>(commands.size()) && identical == files && files > 0,
           std::to_string(same) + "/" + std::to_string(commands.size()) + " commands with identical stdout; " +
               std::to_string(identical) + "/" + std::to_string(files) + " artifacts byte-identical");
}

}  // namespace

int main() {
    std::cout << "pss acceptance, version " << pss::cli::kVersion << ", seed 0xC0FFEE" << std::endl;
    for (auto step : {symbolic_suite, nls_metric, reductions_suite, generator_roundtrip, zero_curvature,
                      numerical_geometry, transport_suite, determinism}) {
        try {
            step();
        } catch (const std::exception& e) {
            std::cout << "FAIL  criterion aborted: " << e.what() << std::endl;
            ++failures;
        }
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
