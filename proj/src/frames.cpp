#include "pss/frames.hpp"

#include <cmath>

#include "pss/parse.hpp"

namespace pss {

using nlohmann::json;

namespace {

const char* kEntryNames[3][2] = {{"f11", "f12"}, {"f21", "f22"}, {"f31", "f32"}};

std::map<Sym, Expr> bound_values(const SystemSpec& sys) {
    std::map<Sym, Expr> m;
    for (const auto& [name, b] : sys.params)
        if (b.value) m.emplace(Sym::param(name), Expr(*b.value));
    return m;
}

std::vector<Interval> carve(std::vector<Interval> pieces, double x, double radius) {
    std::vector<Interval> out;
    for (const auto& iv : pieces) {
        if (x + radius <= iv.lo || x - radius >= iv.hi) {
            out.push_back(iv);
            continue;
        }
        if (x - radius > iv.lo) out.push_back({iv.lo, x - radius});
        if (x + radius < iv.hi) out.push_back({x + radius, iv.hi});
    }
    return out;
}

std::set<std::string> param_names(const Expr& e) {
    std::set<std::string> out;
    for (const auto& s : free_symbols(e))
        if (s.is_param()) out.insert(s.name());
    return out;
}

}  // namespace

Expr bind_params(const Expr& e, const SystemSpec& sys) { return substitute(e, bound_values(sys)); }

Frame map_frame(const Frame& fr, const std::function<Expr(const Expr&)>& f) {
    Frame out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = f(fr[i][j]);
    return out;
}

Frame bind_params(const Frame& fr, const SystemSpec& sys) {
    auto m = bound_values(sys);
    return map_frame(fr, [&](const Expr& e) { return substitute(e, m); });
}

FunctionTable bind_functions(const SystemSpec& sys) {
    auto m = bound_values(sys);
    return sys.functions.map_bodies([&](const Expr& e) { return substitute(e, m); });
}

Frame zero_frame() { return map_frame(Frame{}, [](const Expr&) { return Expr(0.0); }); }

void validate(const SystemSpec& sys, const Frame* fr) {
    if (sys.delta != 1 && sys.delta != -1) throw SpecError("delta must be +1 or -1");
    for (const auto& [name, b] : sys.params) {
        if (name.empty()) throw SpecError("parameter names must be nonempty");
        if (!b.value) continue;
        if (!std::isfinite(*b.value)) throw SpecError("parameter '" + name + "' is not finite");
        for (double x : b.exclusions)
            if (std::abs(*b.value - x) <= 1e-12)
                throw SpecError("parameter '" + name + "' = " + format_double(*b.value) + " is excluded");
    }
    std::vector<std::pair<std::string, Expr>> exprs{{"F", sys.F}, {"G", sys.G}};
    if (fr)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) exprs.emplace_back(kEntryNames[i][j], (*fr)[i][j]);
    for (const auto& [where, e] : exprs)
        for (const auto& p : param_names(e))
            if (!sys.params.count(p)) throw SpecError("undeclared parameter '" + p + "' in " + where);
}

SampleBox sample_box(const SystemSpec& sys, const SampleBox& base) {
    SampleBox box = base;
    for (const auto& [name, b] : sys.params) {
        if (b.value) continue;
        Sym s = Sym::param(name);
        std::vector<Interval> pieces = b.range.empty() ? box.pieces(s) : b.range;
        for (double x : b.exclusions) pieces = carve(pieces, x, 0.05);
        if (pieces.empty()) throw SpecError("no admissible sampling range for parameter '" + name + "'");
        box.set(s, pieces);
    }
    return box;
}

DependencyTable check_dependencies(const Frame& fr, const ZeroTestOptions& opts, const FunctionTable& fns) {
    DependencyTable t{};
    for (int i = 0; i < 3; ++i) {
        t[i][0] = is_zero(diff(fr[i][0], kU), opts, fns) && is_zero(diff(fr[i][0], kV), opts, fns);
        t[i][1] = is_zero(diff(fr[i][1], kUx), opts, fns) && is_zero(diff(fr[i][1], kVx), opts, fns);
    }
    return t;
}

Expr jacobian_minor_sum(const Frame& fr) {
    std::array<Expr, 3> a, b;
    for (int i = 0; i < 3; ++i) {
        a[i] = diff(fr[i][0], kUx);
        b[i] = diff(fr[i][0], kVx);
    }
    Expr m12 = a[0] * b[1] - a[1] * b[0];
    Expr m13 = a[0] * b[2] - a[2] * b[0];
    Expr m23 = a[1] * b[2] - a[2] * b[1];
    return simplify(m12 * m12 + m13 * m13 + m23 * m23);
}

Expr area_form(const Frame& fr) { return simplify(fr[0][0] * fr[1][1] - fr[0][1] * fr[1][0]); }

std::optional<std::pair<std::map<Sym, double>, std::vector<double>>> find_witness(
    const std::vector<Expr>& exprs, const ZeroTestOptions& opts, const FunctionTable& fns, double threshold) {
    std::vector<Expr> inl;
    std::set<Sym> syms;
    for (const auto& e : exprs) {
        inl.push_back(fns.inline_defs(e));
        auto fs = free_symbols(inl.back());
        syms.insert(fs.begin(), fs.end());
    }
    std::vector<Sym> slots(syms.begin(), syms.end());
    std::vector<Compiled> cs;
    for (const auto& e : inl) cs.emplace_back(e, slots, fns);
    PointSampler sampler(slots, opts.box, opts.seed);
    const int budget = opts.trials * std::max(1, opts.retry_factor);
    for (int n = 0; n < budget; ++n) {
        const auto& pt = sampler.next();
        std::vector<double> vals;
        bool ok = true;
        try {
            for (const auto& c : cs) {
                double v = c(pt.data());
                vals.push_back(v);
                if (std::abs(v) < threshold) ok = false;
            }
        } catch (const EvalError& e) {
            if (e.reason() != EvalError::Reason::Domain) throw;
            ok = false;
        }
        if (!ok) continue;
        std::map<Sym, double> p;
        for (std::size_t i = 0; i < slots.size(); ++i) p[slots[i]] = pt[i];
        return std::make_pair(p, vals);
    }
    return std::nullopt;
}

std::optional<Witness> regularity_witness(const Frame& fr, const ZeroTestOptions& opts, const FunctionTable& fns,
                                          double threshold) {
    auto w = find_witness({jacobian_minor_sum(fr), area_form(fr)}, opts, fns, threshold);
    if (!w) return std::nullopt;
    return Witness{w->first, w->second[0], w->second[1]};
}

std::array<Expr, 3> structure_residuals(const Expr& F, const Expr& G, int delta, const Frame& f) {
    auto row = [&](int i) {
        return -diff(f[i][0], kUx) * F - diff(f[i][0], kVx) * G + diff(f[i][1], kU) * Expr(kUx) +
               diff(f[i][1], kV) * Expr(kVx);
    };
    Expr d(static_cast<double>(delta));
    Expr r1 = row(0) - f[2][0] * f[1][1] + f[2][1] * f[1][0];
    Expr r2 = row(1) - f[0][0] * f[2][1] + f[0][1] * f[2][0];
    Expr r3 = row(2) - d * f[0][0] * f[1][1] + d * f[0][1] * f[1][0];
    return {simplify(r1), simplify(r2), simplify(r3)};
}

std::array<Expr, 3> structure_residuals(const SystemSpec& sys, const Frame& fr) {
    return structure_residuals(sys.F, sys.G, sys.delta, fr);
}

Metric metric(const Frame& f) {
    return {simplify(f[0][0] * f[0][0] + f[1][0] * f[1][0]), simplify(f[0][0] * f[0][1] + f[1][0] * f[1][1]),
            simplify(f[0][1] * f[0][1] + f[1][1] * f[1][1])};
}

bool genericity(const SystemSpec& sys, const ZeroTestOptions& opts) {
    ZeroTestOptions zo = opts;
    zo.box = sample_box(sys, opts.box);
    FunctionTable fns = bind_functions(sys);
    for (const Expr* e : {&sys.F, &sys.G}) {
        Expr x = fns.inline_defs(bind_params(*e, sys));
        for (const Sym& s : {kU, kV})
            if (!is_zero(diff(x, s), zo, fns)) return true;
    }
    return false;
}

json VerifyOptions::to_json() const {
    return json{{"trials", zero.trials},
                {"relative_tol", zero.tol},
                {"seed", zero.seed},
                {"retry_factor", zero.retry_factor},
                {"witness_threshold", witness_threshold}};
}

json point_to_json(const std::map<Sym, double>& p) {
    json j = json::object();
    for (const auto& [s, v] : p) j[s.to_string()] = v;
    return j;
}

const ConditionResult& VerificationReport::condition(const std::string& id) const {
    for (const auto& c : conditions)
        if (c.id == id) return c;
    throw std::out_of_range("no condition " + id);
}

json VerificationReport::to_json() const {
    json j;
    j["label"] = label;
    j["delta"] = delta;
    j["passed"] = passed;
    if (error) j["error"] = *error;
    json cs = json::array();
    for (const auto& c : conditions) {
        json jc{{"id", c.id},
                {"description", c.description},
                {"holds", c.holds},
                {"worst_abs", c.worst_abs},
                {"worst_rel", c.worst_rel}};
        if (!c.residuals.empty()) jc["residuals"] = c.residuals;
        if (!c.notes.empty()) jc["notes"] = c.notes;
        if (!c.point.empty()) jc["point"] = c.point;
        cs.push_back(jc);
    }
    j["conditions"] = cs;
    j["tolerances"] = tolerances;
    return j;
}

namespace {

std::map<std::string, double> named(const std::map<Sym, double>& p) {
    std::map<std::string, double> out;
    for (const auto& [s, v] : p) out[s.to_string()] = v;
    return out;
}

ConditionResult condition(std::string id, std::string description, bool holds) {
    ConditionResult c;
    c.id = std::move(id);
    c.description = std::move(description);
    c.holds = holds;
    return c;
}

void absorb(ConditionResult& c, const ZeroTestResult& r) {
    if (r.worst_rel >= c.worst_rel) {
        c.worst_rel = r.worst_rel;
        c.worst_abs = r.worst_abs;
        c.point = named(r.worst_point);
    }
    if (!r.zero) c.holds = false;
    if (r.inconclusive) c.notes.push_back("too many samples rejected by domain errors");
}

}  // namespace

VerificationReport verify(const SystemSpec& sys, const Frame& frame, const VerifyOptions& opts) {
    VerificationReport rep;
    rep.label = sys.label;
    rep.delta = sys.delta;
    rep.tolerances = opts.to_json();
    try {
        validate(sys, &frame);
        const FunctionTable fns = bind_functions(sys);
        ZeroTestOptions zo = opts.zero;
        zo.box = sample_box(sys, opts.zero.box);
        Frame f = bind_params(frame, sys);
        Expr F = bind_params(sys.F, sys), G = bind_params(sys.G, sys);

        ConditionResult c1 = condition("C1", "f_i1 independent of (u, v); f_i2 independent of (ux, vx)", true);
        for (int i = 0; i < 3; ++i) {
            const std::pair<int, Sym> checks[] = {{0, kU}, {0, kV}, {1, kUx}, {1, kVx}};
            for (const auto& [j, s] : checks) {
                Expr d = diff(f[i][j], s);
                auto r = probe_zero(d, zo, fns);
                absorb(c1, r);
                if (!r.zero) c1.notes.push_back(std::string(kEntryNames[i][j]) + " depends on " + s.to_string());
            }
        }

        ConditionResult c2 = condition("C2", "sum of squared 2x2 minors of d(f_i1)/d(ux, vx) nonzero at a witness", false);
        ConditionResult c6 = condition("C6", "f11 f22 - f12 f21 nonzero at a witness", false);
        Expr minors = jacobian_minor_sum(f), area = area_form(f);
        c2.residuals = {to_string(minors)};
        c6.residuals = {to_string(area)};
        if (auto w = find_witness({minors, area}, zo, fns, opts.witness_threshold)) {
            c2.holds = c6.holds = true;
            c2.point = c6.point = named(w->first);
            c2.worst_abs = std::abs(w->second[0]);
            c6.worst_abs = std::abs(w->second[1]);
        } else {
            for (auto* c : {&c2, &c6}) {
                auto w1 = find_witness({c == &c2 ? minors : area}, zo, fns, opts.witness_threshold);
                if (w1) {
                    c->point = named(w1->first);
                    c->worst_abs = std::abs(w1->second[0]);
                    c->notes.push_back("holds alone but not jointly with the other nondegeneracy condition");
                } else {
                    c->notes.push_back("no witness found");
                }
            }
        }

        auto R = structure_residuals(F, G, sys.delta, f);
        std::vector<ConditionResult> rc;
        for (int k = 0; k < 3; ++k) {
            ConditionResult c =
                condition("C" + std::to_string(k + 3), "structure residual R" + std::to_string(k + 1) + " = 0", true);
            c.residuals = {to_string(R[k])};
            absorb(c, probe_zero(R[k], zo, fns));
            rc.push_back(c);
        }
        rep.conditions = {c1, c2, rc[0], rc[1], rc[2], c6};
        rep.passed = true;
        for (const auto& c : rep.conditions) rep.passed = rep.passed && c.holds;
    } catch (const std::exception& e) {
        rep.error = e.what();
        rep.passed = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

double json_number(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        Expr e = simplify(parse(v.get<std::string>()));
        if (e.is_const()) return e.value();
    }
    throw SpecError(what + " must be a number or a constant expression");
}

}  // namespace

Problem problem_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("system+frame document must be a JSON object");
    Problem p;
    SystemSpec& s = p.system;
    s.label = j.value("label", std::string("unnamed"));
    if (!j.contains("delta")) throw SpecError("missing 'delta'");
    s.delta = j.at("delta").get<int>();
    if (j.contains("params")) {
        for (const auto& [name, v] : j.at("params").items()) {
            ParamBinding b;
            if (v.is_number() || v.is_string()) {
                b.value = json_number(v, "parameter '" + name + "'");
            } else if (v.is_object()) {
                if (v.contains("value") && !v.at("value").is_null())
                    b.value = json_number(v.at("value"), "parameter '" + name + "'");
                for (const auto& x : v.value("exclusions", json::array())) b.exclusions.push_back(x.get<double>());
                for (const auto& r : v.value("range", json::array())) {
                    if (!r.is_array() || r.size() != 2) throw SpecError("range of '" + name + "' must be [lo, hi] pairs");
                    b.range.push_back({r[0].get<double>(), r[1].get<double>()});
                }
            } else {
                throw SpecError("parameter '" + name + "' must be a number or an object");
            }
            s.params[name] = b;
        }
    }
    std::set<std::string> declared;
    for (const auto& [n, b] : s.params) declared.insert(n);

    if (j.contains("functions")) {
        for (const auto& [name, v] : j.at("functions").items()) {
            auto args = v.at("args").get<std::vector<std::string>>();
            ParseOptions o;
            o.params = declared;
            o.params->insert(args.begin(), args.end());
            s.functions.define(name, FunctionDef{args, simplify(parse(v.at("body").get<std::string>(), o))});
        }
    }

    ParseOptions o;
    o.params = declared;
    auto expr_at = [&](const json& v, const std::string& where) {
        if (!v.is_string()) throw SpecError(where + " must be an expression string");
        try {
            return simplify(parse(v.get<std::string>(), o));
        } catch (const ParseError& e) {
            throw SpecError(where + ": " + e.what());
        }
    };
    if (!j.contains("F") || !j.contains("G")) throw SpecError("missing 'F' or 'G'");
    s.F = expr_at(j.at("F"), "F");
    s.G = expr_at(j.at("G"), "G");
    if (!j.contains("frame")) throw SpecError("missing 'frame'");
    const json& fj = j.at("frame");
    if (!fj.is_array() || fj.size() != 3) throw SpecError("'frame' must have three rows");
    for (int i = 0; i < 3; ++i) {
        if (!fj[i].is_array() || fj[i].size() != 2) throw SpecError("each frame row must have two entries");
        for (int k = 0; k < 2; ++k) p.frame[i][k] = expr_at(fj[i][k], kEntryNames[i][k]);
    }
    validate(s, &p.frame);
    return p;
}

json problem_to_json(const Problem& p) {
    const SystemSpec& s = p.system;
    json j;
    j["label"] = s.label;
    j["delta"] = s.delta;
    json params = json::object();
    for (const auto& [name, b] : s.params) {
        json jb = json::object();
        if (b.value)
            jb["value"] = *b.value;
        else
            jb["free"] = true;
        if (!b.exclusions.empty()) jb["exclusions"] = b.exclusions;
        if (!b.range.empty()) {
            json r = json::array();
            for (const auto& iv : b.range) r.push_back({iv.lo, iv.hi});
            jb["range"] = r;
        }
        params[name] = jb;
    }
    j["params"] = params;
    j["F"] = to_string(s.F);
    j["G"] = to_string(s.G);
    json fr = json::array();
    for (int i = 0; i < 3; ++i) fr.push_back({to_string(p.frame[i][0]), to_string(p.frame[i][1])});
    j["frame"] = fr;
    json fns = json::object();
    for (const auto& [name, d] : s.functions.defs()) fns[name] = {{"args", d.args}, {"body", to_string(d.body)}};
    if (!fns.empty()) j["functions"] = fns;
    return j;
}

}  // namespace pss
