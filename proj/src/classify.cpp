#include "pss/classify.hpp"

#include <cmath>

#include "pss/parse.hpp"

namespace pss {

using nlohmann::json;

std::string to_string(Which w) {
    switch (w) {
    case Which::T1: return "T1";
    case Which::T2: return "T2";
    case Which::T3: return "T3";
    }
    return "?";
}

Which which_from_string(const std::string& s) {
    if (s == "T1" || s == "f31") return Which::T1;
    if (s == "T2" || s == "f21") return Which::T2;
    if (s == "T3" || s == "f11") return Which::T3;
    throw ClassifyError("unknown theorem selector '" + s + "' (expected T1, T2 or T3)");
}

std::string to_string(LemmaCase c) {
    switch (c) {
    case LemmaCase::I: return "I";
    case LemmaCase::II: return "II";
    case LemmaCase::III: return "III";
    case LemmaCase::NoMatch: return "NoMatch";
    }
    return "?";
}

namespace {

Expr num(double x) { return Expr(x); }
Expr ux() { return Expr(kUx); }
Expr vx() { return Expr(kVx); }
Expr uu() { return Expr(kU); }
Expr vv() { return Expr(kV); }

// True when e1, e2 pass the two-point determinant test for linear dependence.
bool two_point_dependent(const Expr& e1, const Expr& e2, const ZeroTestOptions& opts, const FunctionTable& fns) {
    Expr a = fns.inline_defs(e1), b = fns.inline_defs(e2);
    std::set<Sym> syms = free_symbols(a);
    auto fb = free_symbols(b);
    syms.insert(fb.begin(), fb.end());
    std::vector<Sym> slots(syms.begin(), syms.end());
    Compiled ca(a, slots, fns), cb(b, slots, fns);
    PointSampler sampler(slots, opts.box, opts.seed ^ 0x5A5A5A5AULL);
    const int pairs = std::max(5, opts.trials / 5);
    int done = 0;
    for (int n = 0; n < pairs * std::max(1, opts.retry_factor) && done < pairs; ++n) {
        try {
            std::vector<double> p = sampler.next();
            const auto& q = sampler.next();
            double det = ca(p.data()) * cb(q.data()) - cb(p.data()) * ca(q.data());
            ++done;
            if (std::abs(det) > 1e-8) return false;
        } catch (const EvalError& e) {
            if (e.reason() != EvalError::Reason::Domain) throw;
        }
    }
    return true;
}

void check_delta(int delta) {
    if (delta != 1 && delta != -1) throw ConstraintViolation("delta must be +1 or -1");
}

std::optional<std::string> phi_monotone(const FunctionTable& fns, double a, double b) {
    double r = 2.0 * (std::abs(a) + std::abs(b));
    return monotone_violation(fns, "phi", Interval{-r, r});
}

double value_at(const Expr& e, const std::map<Sym, double>& p, const FunctionTable& fns) {
    Expr x = fns.inline_defs(e);
    auto fs = free_symbols(x);
    std::vector<Sym> slots(fs.begin(), fs.end());
    std::vector<double> vals;
    for (const auto& s : slots) {
        auto it = p.find(s);
        vals.push_back(it == p.end() ? 0.0 : it->second);
    }
    return Compiled(x, slots, fns)(vals.data());
}

}  // namespace

Case2Constants case2_constants(const Case2Params& cp) {
    const double a1 = cp.a1, b1 = cp.b1, a = cp.a_other, b = cp.b_other;
    const double d = cp.delta;
    Case2Constants c{};
    c.gamma = a1 * b - b1 * a;
    if (cp.which == Which::T1) {
        c.alpha = a1 * a1 + a * a;
        c.beta = b1 * b1 + b * b;
        c.tau = a1 * b1 + a * b;
    } else {
        c.alpha = a * a - d * a1 * a1;
        c.beta = b * b - d * b1 * b1;
        c.tau = a * b - d * a1 * b1;
    }
    return c;
}

Frame t3_from_t2(const Frame& fr) {
    Frame out;
    out[0] = fr[1];
    out[1] = fr[0];
    out[2] = {simplify(-fr[2][0]), simplify(-fr[2][1])};
    return out;
}

DerivedFG derive_fg(const Frame& fr, int delta, const ZeroTestOptions& opts, const FunctionTable& fns) {
    auto rest = structure_residuals(Expr(0.0), Expr(0.0), delta, fr);
    std::array<Expr, 3> cF, cG;
    for (int k = 0; k < 3; ++k) {
        cF[k] = simplify(-diff(fr[k][0], kUx));
        cG[k] = simplify(-diff(fr[k][0], kVx));
    }
    const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (const auto& pr : pairs) {
        const int i = pr[0], j = pr[1];
        Expr W = simplify(cF[i] * cG[j] - cG[i] * cF[j]);
        if (is_zero(W, opts, fns)) continue;
        DerivedFG out;
        out.rows = pr;
        out.W = W;
        out.F = simplify((cG[i] * rest[j] - cG[j] * rest[i]) / W);
        out.G = simplify((cF[j] * rest[i] - cF[i] * rest[j]) / W);
        const int k = 3 - i - j;
        out.third = simplify(cF[k] * out.F + cG[k] * out.G + rest[k]);
        if (!is_zero(out.third, opts, fns))
            throw ThirdResidualNonzero("residual R" + std::to_string(k + 1) +
                                       " does not vanish after solving for (F, G): " + to_string(out.third));
        return out;
    }
    throw NonInvertible("no pair of structure equations is solvable for (F, G): every 2x2 determinant vanishes");
}

BuildResult build_case1(const Case1Params& cp, const ZeroTestOptions& opts) {
    check_delta(cp.delta);
    if (cp.a * cp.a + cp.b * cp.b == 0.0) throw ConstraintViolation("a^2 + b^2 must be nonzero");
    if (cp.lambda * cp.lambda + cp.mu * cp.mu == 0.0) throw ConstraintViolation("lambda^2 + mu^2 must be nonzero");
    FunctionTable fns = cp.functions;
    fns.define("phi", cp.phi);

    const Expr xi = simplify(num(cp.a) * vv() + num(cp.b) * uu());
    const Expr ph = Expr::user("phi", {xi});
    const Expr dph = Expr::user("phi", {1}, {xi});
    const Expr g = simplify(cp.g), h = simplify(cp.h);
    const Expr lam = num(cp.lambda), mu = num(cp.mu), eta = num(cp.eta);

    for (const auto& [e, name] : {std::pair{g, "g"}, std::pair{h, "h"}})
        if (!is_zero(diff(e, kU), opts, fns) || !is_zero(diff(e, kV), opts, fns))
            throw ConstraintViolation(std::string(name) + " must depend on (ux, vx) only");
    if (auto bad = phi_monotone(fns, cp.a, cp.b)) throw ConstraintViolation(*bad);

    const double eps = cp.which == Which::T1 ? cp.delta : 1.0;
    Expr constraint = simplify(mu * g - lam * h - num(eps) * (num(cp.a) * vx() + num(cp.b) * ux()));
    if (!is_zero(constraint, opts, fns)) {
        std::string rhs = cp.which == Which::T1 ? "delta*(a*vx + b*ux)" : "a*vx + b*ux";
        throw ConstraintViolation("mu*g - lambda*h != " + rhs + " (difference " + to_string(constraint) + ")");
    }
    Expr W = simplify(diff(g, kUx) * diff(h, kVx) - diff(g, kVx) * diff(h, kUx));
    auto w = find_witness({W}, opts, fns, kWitnessThreshold);
    if (!w) throw DegenerateW("W = g_ux h_vx - g_vx h_ux has no nonzero witness");
    if (cp.which != Which::T1 && is_zero(g * ph - lam * eta * dph, opts, fns))
        throw ConstraintViolation("g = lambda*eta*phi'/phi identically");

    Frame f;
    switch (cp.which) {
    case Which::T1: f = {{{g, lam * dph}, {h, mu * dph}, {eta, ph}}}; break;
    case Which::T2: f = {{{g, lam * dph}, {eta, ph}, {h, mu * dph}}}; break;
    case Which::T3: f = {{{eta, ph}, {g, lam * dph}, {-h, -mu * dph}}}; break;
    }
    f = map_frame(f, [](const Expr& e) { return simplify(e); });

    BuildResult out;
    auto fg = derive_fg(f, cp.delta, opts, fns);
    SystemSpec& s = out.problem.system;
    s.label = "case1-" + to_string(cp.which);
    s.F = fg.F;
    s.G = fg.G;
    s.delta = cp.delta;
    s.functions = fns;
    out.problem.frame = f;
    out.witness = w->first;
    return out;
}

BuildResult build_case2(const Case2Params& cp, const ZeroTestOptions& opts) {
    check_delta(cp.delta);
    const Case2Constants k = case2_constants(cp);
    if (std::abs(k.gamma) < 1e-12)
        throw ConstraintViolation(std::string("gamma=0: gamma = a1*") + (cp.which == Which::T1 ? "b2 - b1*a2" : "b3 - b1*a3") +
                                  " must be nonzero");
    FunctionTable fns = cp.functions;
    fns.define("p", cp.p);
    const Expr P = Expr::user("p", {uu(), vv()});
    const Expr Pu = Expr::user("p", {1, 0}, {uu(), vv()});
    const Expr Pv = Expr::user("p", {0, 1}, {uu(), vv()});
    if (two_point_dependent(Pu, Pv, opts, fns)) throw ProportionalGradients("p_u and p_v are proportional");

    const Expr a1 = num(cp.a1), b1 = num(cp.b1), a = num(cp.a_other), b = num(cp.b_other), eta = num(cp.eta);
    const Expr gi = num(1.0 / k.gamma);
    Frame f;
    if (cp.which == Which::T1) {
        const Expr c = num(cp.delta / k.gamma);
        f = {{{a1 * ux() + b1 * vx(), c * (b1 * Pu - a1 * Pv)}, {a * ux() + b * vx(), c * (b * Pu - a * Pv)}, {eta, P}}};
    } else {
        f = {{{a1 * ux() + b1 * vx(), gi * (b1 * Pu - a1 * Pv)}, {eta, P}, {a * ux() + b * vx(), gi * (b * Pu - a * Pv)}}};
    }
    f = map_frame(f, [](const Expr& e) { return simplify(e); });
    if (cp.which == Which::T3) f = t3_from_t2(f);

    BuildResult out;
    auto fg = derive_fg(f, cp.delta, opts, fns);
    SystemSpec& s = out.problem.system;
    s.label = "case2-" + to_string(cp.which);
    s.F = fg.F;
    s.G = fg.G;
    s.delta = cp.delta;
    s.functions = fns;
    out.problem.frame = f;
    out.constants = {{"gamma", k.gamma}, {"alpha", k.alpha}, {"beta", k.beta}, {"tau", k.tau}};
    if (auto w = find_witness({area_form(f)}, opts, fns, kWitnessThreshold)) out.witness = w->first;
    return out;
}

std::pair<Expr, Expr> printed_case1_fg(const Case1Params& cp) {
    const Expr a = num(cp.a), b = num(cp.b), lam = num(cp.lambda), mu = num(cp.mu), eta = num(cp.eta);
    const Expr d = num(cp.delta);
    const Expr xi = num(cp.a) * vv() + num(cp.b) * uu();
    const Expr ph = Expr::user("phi", {xi});
    const Expr d1 = Expr::user("phi", {1}, {xi});
    const Expr d2 = Expr::user("phi", {2}, {xi});
    const Expr &g = cp.g, &h = cp.h;
    auto gx = [&](const Expr& e, Sym s) { return diff(e, s); };
    const Expr W = gx(g, kUx) * gx(h, kVx) - gx(g, kVx) * gx(h, kUx);
    const Expr lin = b * ux() + a * vx();
    const Expr half(0.5);
    Expr F, G;
    if (cp.which == Which::T1) {
        Expr q = g * g + h * h;
        F = (-d * a * lin * d2 - eta * (mu * gx(h, kVx) + lam * gx(g, kVx)) * d1 + half * gx(q, kVx) * ph) / W;
        G = (d * b * lin * d2 + eta * (mu * gx(h, kUx) + lam * gx(g, kUx)) * d1 - half * gx(q, kUx) * ph) / W;
    } else {
        Expr q = h * h - d * g * g;
        F = (-a * lin * d2 + eta * (mu * gx(h, kVx) - d * lam * gx(g, kVx)) * d1 - half * gx(q, kVx) * ph) / W;
        G = (b * lin * d2 - eta * (mu * gx(h, kUx) - d * lam * gx(g, kUx)) * d1 + half * gx(q, kUx) * ph) / W;
    }
    return {simplify(F), simplify(G)};
}

std::pair<Expr, Expr> printed_case2_fg(const Case2Params& cp, bool corrected) {
    const Case2Constants k = case2_constants(cp);
    const Expr P = Expr::user("p", {uu(), vv()});
    const Expr Pu = Expr::user("p", {1, 0}, {uu(), vv()});
    const Expr Pv = Expr::user("p", {0, 1}, {uu(), vv()});
    const Expr Puu = Expr::user("p", {2, 0}, {uu(), vv()});
    const Expr Puv = Expr::user("p", {1, 1}, {uu(), vv()});
    const Expr Pvv = Expr::user("p", {0, 2}, {uu(), vv()});
    const Expr g1 = num(1.0 / k.gamma), g2 = num(1.0 / (k.gamma * k.gamma));
    const Expr al = num(k.alpha), be = num(k.beta), ta = num(k.tau), eta = num(cp.eta), d = num(cp.delta);
    Expr F, G;
    if (cp.which == Which::T1) {
        F = -ux() * g1 * (d * Puv - ta * P) + vx() * g1 * (-d * Pvv + be * P) + d * eta * g2 * (-be * Pu + ta * Pv);
        G = ux() * (corrected ? g1 : g2) * (d * Puu - al * P) + vx() * g1 * (d * Puv - ta * P) +
            d * eta * g2 * (ta * Pu - al * Pv);
    } else {
        F = -ux() * g1 * (Puv + ta * P) - vx() * g1 * (Pvv + be * P) + eta * g2 * (be * Pu - ta * Pv);
        G = ux() * g1 * (Puu + al * P) + vx() * g1 * (Puv + ta * P) - eta * g2 * (ta * Pu - al * Pv);
    }
    return {simplify(F), simplify(G)};
}

LemmaResidual lemma2_residual(const LemmaData& d) {
    const Expr e = num(d.epsilon);
    Expr r = diff(d.psi0, kU) * ux() + diff(d.psi0, kV) * vx() - e * d.rho1 * d.psi2 + e * d.rho2 * d.psi1;
    Expr det = diff(d.rho1, kUx) * diff(d.rho2, kVx) - diff(d.rho1, kVx) * diff(d.rho2, kUx);
    return {simplify(r), simplify(det)};
}

LemmaClassification lemma2_classify(const LemmaData& d, const ZeroTestOptions& opts, const FunctionTable& fns) {
    LemmaClassification out;
    auto lr = lemma2_residual(d);
    if (!is_zero(lr.residual, opts, fns)) {
        out.notes.push_back("residual is not identically zero");
        return out;
    }
    auto w = find_witness({lr.determinant}, opts, fns, kWitnessThreshold);
    if (!w) {
        out.notes.push_back("genericity determinant has no nonzero witness");
        return out;
    }
    const bool z1 = is_zero(d.psi1, opts, fns), z2 = is_zero(d.psi2, opts, fns);
    if (z1 && z2) {
        if (is_zero(diff(d.psi0, kU), opts, fns) && is_zero(diff(d.psi0, kV), opts, fns)) {
            out.kind = LemmaCase::I;
            out.constants["c"] = value_at(d.psi0, w->first, fns);
        } else {
            out.notes.push_back("psi1 = psi2 = 0 but psi0 is not constant");
        }
        return out;
    }
    if (two_point_dependent(d.psi1, d.psi2, opts, fns)) {
        out.kind = LemmaCase::II;
        // psi1 : psi2 = lambda : mu and grad psi0 is parallel to (b, a)
        if (auto p = find_witness({z1 ? d.psi2 : d.psi1}, opts, fns, kWitnessThreshold)) {
            double p1 = value_at(d.psi1, p->first, fns), p2 = value_at(d.psi2, p->first, fns);
            double n = std::hypot(p1, p2);
            out.constants["lambda"] = p1 / n;
            out.constants["mu"] = p2 / n;
        }
        Expr gu = diff(d.psi0, kU), gv = diff(d.psi0, kV);
        if (auto p = find_witness({gu * gu + gv * gv}, opts, fns, kWitnessThreshold)) {
            double b = value_at(gu, p->first, fns), a = value_at(gv, p->first, fns);
            double n = std::hypot(a, b);
            out.constants["a"] = a / n;
            out.constants["b"] = b / n;
        }
        return out;
    }
    // Case III: rho affine-linear with recovered constants
    std::array<double, 4> ab{};
    const Expr* rhos[2] = {&d.rho1, &d.rho2};
    for (int i = 0; i < 2; ++i) {
        Expr ai = simplify(diff(*rhos[i], kUx)), bi = simplify(diff(*rhos[i], kVx));
        for (const Expr& c : {ai, bi})
            if (!is_zero(diff(c, kUx), opts, fns) || !is_zero(diff(c, kVx), opts, fns)) {
                out.notes.push_back("psi1, psi2 independent but rho" + std::to_string(i + 1) + " is not affine");
                return out;
            }
        ab[2 * i] = value_at(ai, w->first, fns);
        ab[2 * i + 1] = value_at(bi, w->first, fns);
        Expr rest = *rhos[i] - num(ab[2 * i]) * ux() - num(ab[2 * i + 1]) * vx();
        if (!is_zero(rest, opts, fns)) {
            out.notes.push_back("rho" + std::to_string(i + 1) + " has a nonzero constant term");
            return out;
        }
    }
    const double gamma = ab[0] * ab[3] - ab[1] * ab[2];
    const Expr pu = diff(d.psi0, kU), pv = diff(d.psi0, kV);
    const Expr* psis[2] = {&d.psi1, &d.psi2};
    for (int i = 0; i < 2; ++i) {
        Expr expect = num(d.epsilon / gamma) * (num(ab[2 * i + 1]) * pu - num(ab[2 * i]) * pv);
        if (!is_zero(*psis[i] - expect, opts, fns)) {
            out.notes.push_back("psi" + std::to_string(i + 1) + " differs from eps*(b_i p_u - a_i p_v)/gamma");
            return out;
        }
    }
    out.kind = LemmaCase::III;
    out.constants = {{"a1", ab[0]}, {"b1", ab[1]}, {"a2", ab[2]}, {"b2", ab[3]}};
    return out;
}

LemmaData lemma_embedding(const Frame& f, Which w, int delta) {
    switch (w) {
    case Which::T1: return {f[2][1], f[0][1], f[1][1], f[0][0], f[1][0], delta};
    case Which::T2: return {f[1][1], f[0][1], f[2][1], f[0][0], f[2][0], 1};
    case Which::T3: return {f[0][1], f[2][1], f[1][1], f[2][0], f[1][0], 1};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Bindings of the family entries

namespace {

double need(const std::map<std::string, double>& v, const std::string& k) {
    auto it = v.find(k);
    if (it == v.end()) throw ParamViolation("parameter '" + k + "' must be bound");
    return it->second;
}

CaseParams bindings(const std::string& src, const std::map<std::string, double>& v, int delta,
                    const FunctionTable& fns) {
    const Expr s(Sym::param("s")), r(Sym::param("r"));
    if (src == "cor5.1" || src == "cor5.2") {
        const bool trig = src == "cor5.1";
        const double k0 = need(v, "k0"), a = need(v, "a"), b = need(v, "b"), th = need(v, "theta"),
                     eta = need(v, "eta");
        const double sn = trig ? std::sin(th / 2) : std::sinh(th / 2), cs = trig ? std::cos(th / 2) : std::cosh(th / 2);
        Case2Params cp;
        cp.which = Which::T2;
        cp.delta = trig ? 1 : -1;
        cp.eta = eta * eta;
        cp.a1 = eta * a * sn;
        cp.a_other = eta * a * cs;
        cp.b1 = -eta * b * cs;
        cp.b_other = trig ? eta * b * sn : -eta * b * sn;
        cp.functions = fns;
        cp.p = FunctionDef{{"s", "r"}, simplify(num(k0 / (eta * eta)) - num(a * b) * Expr::user("psi", {s, r}))};
        return cp;
    }
    if (src == "cor5.3") {
        const double k0 = need(v, "k0"), k1 = need(v, "k1"), k2 = need(v, "k2"), eta = need(v, "eta");
        Case1Params cp;
        cp.which = Which::T2;
        cp.delta = delta;
        cp.a = 0.0;
        cp.b = 1.0;
        cp.lambda = 0.0;
        cp.mu = k2 * cp.b;
        cp.eta = eta;
        cp.g = simplify(num(1.0 / k2) * ux());
        cp.h = simplify(num(eta * k0 * k2) + Expr::user("psi", {vx()}));
        cp.functions = fns;
        cp.phi = FunctionDef{{"s"}, simplify(num(-k1 / k2) * exp(num(k0 / cp.b) * s))};
        return cp;
    }
    if (src == "cor5.4") {
        const double k0 = need(v, "k0"), k1 = need(v, "k1"), k2 = need(v, "k2"), k3 = need(v, "k3"),
                     eta = need(v, "eta");
        Case1Params cp;
        cp.which = Which::T2;
        cp.delta = delta;
        cp.eta = eta * eta;
        cp.a = k0 * k1;
        cp.b = k0 * k2;
        cp.lambda = 0.0;
        cp.mu = k0 / eta;
        cp.phi = FunctionDef{{"s"}, simplify(s + num(k0 * k3))};
        cp.h = simplify(num(eta) * Expr::user("q", {ux(), vx()}));
        cp.g = simplify(num(eta) * (num(k1) * vx() + num(k2) * ux()));
        cp.functions = fns;
        return cp;
    }
    if (src == "cor5.5") {
        const double k0 = need(v, "k0"), k1 = need(v, "k1"), k2 = need(v, "k2"), k3 = need(v, "k3"),
                     nu = need(v, "nu");
        Case1Params cp;
        cp.which = Which::T1;
        cp.delta = delta;
        cp.eta = 0.0;
        cp.a = k1;
        cp.b = k2;
        cp.mu = nu / k0;
        cp.lambda = 0.0;
        cp.h = simplify(num(1.0 / nu) * Expr::user("q", {ux(), vx()}));
        cp.g = simplify(num(delta * k0 / nu) * (num(k1) * vx() + num(k2) * ux()));
        cp.phi = FunctionDef{{"s"}, simplify(num(k0) * (s + num(k3)))};
        cp.functions = fns;
        return cp;
    }
    throw UnknownKey("no theorem bindings for '" + src + "'");
}

std::map<std::string, double> bound_values(const SystemSpec& s) {
    std::map<std::string, double> v;
    for (const auto& [k, b] : s.params) {
        if (!b.value) throw ParamViolation("parameter '" + k + "' must be bound");
        v[k] = *b.value;
    }
    return v;
}

}  // namespace

CaseParams corollary_params(const std::string& key, const Instantiation& inst) {
    Problem p = get(key, inst);
    const SystemSpec& sys = p.system;
    if (key.rfind("cor5.", 0) == 0) return bindings(key, bound_values(sys), sys.delta, bind_functions(sys));

    for (const auto& r : reductions()) {
        if (r.target != key || r.delta != sys.delta) continue;
        std::map<std::string, double> tv = bound_values(sys);
        std::map<Sym, Expr> tsub;
        std::set<std::string> tvis;
        for (const auto& [k, x] : tv) {
            tsub[Sym::param(k)] = Expr(x);
            tvis.insert(k);
        }
        const CatalogEntry& src = entry(r.source);
        std::map<std::string, double> sv;
        for (const auto& ps : src.params) {
            auto it = r.params.find(ps.name);
            if (it != r.params.end()) {
                ParseOptions o;
                o.params = tvis;
                sv[ps.name] = eval(substitute(parse(it->second, o), tsub), {});
            } else {
                sv[ps.name] = need(tv, ps.name);
            }
        }
        FunctionTable fns = bind_functions(sys);
        std::map<Sym, Expr> ssub;
        for (const auto& [k, x] : sv) ssub[Sym::param(k)] = Expr(x);
        for (const auto& f : src.functions) {
            auto it = r.functions.find(f.name);
            ParseOptions o;
            o.params = it == r.functions.end() ? std::set<std::string>{} : tvis;
            if (it == r.functions.end())
                for (const auto& ps : src.params) o.params->insert(ps.name);
            o.params->insert(f.args.begin(), f.args.end());
            Expr b = parse(it == r.functions.end() ? f.fallback : it->second, o);
            b = substitute(b, it == r.functions.end() ? ssub : tsub);
            fns.define(f.name, FunctionDef{f.args, simplify(b)});
        }
        return bindings(r.source, sv, sys.delta, fns);
    }
    throw UnknownKey("entry '" + key + "' has no theorem bindings");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Expr parse_strict(const std::string& text, std::set<std::string> params) {
    ParseOptions o;
    o.params = std::move(params);
    return simplify(parse(text, o));
}

FunctionTable functions_from_json(const json& j) {
    FunctionTable fns;
    if (!j.contains("functions")) return fns;
    for (const auto& [name, v] : j.at("functions").items()) {
        auto args = v.at("args").get<std::vector<std::string>>();
        fns.define(name, FunctionDef{args, parse_strict(v.at("body").get<std::string>(), {args.begin(), args.end()})});
    }
    return fns;
}

template <class T>
T opt(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

Case1Params case1_from_json(const json& j) {
    Case1Params cp;
    cp.which = which_from_string(opt<std::string>(j, "which", "T2"));
    cp.a = opt(j, "a", cp.a);
    cp.b = opt(j, "b", cp.b);
    cp.lambda = opt(j, "lambda", cp.lambda);
    cp.mu = opt(j, "mu", cp.mu);
    cp.eta = opt(j, "eta", cp.eta);
    cp.delta = opt(j, "delta", cp.delta);
    cp.functions = functions_from_json(j);
    cp.g = parse_strict(j.at("g").get<std::string>(), {});
    cp.h = parse_strict(j.at("h").get<std::string>(), {});
    if (j.contains("phi")) {
        const json& p = j.at("phi");
        if (p.is_string())
            cp.phi = FunctionDef{{"s"}, parse_strict(p.get<std::string>(), {"s"})};
        else {
            auto args = p.at("args").get<std::vector<std::string>>();
            cp.phi = FunctionDef{args, parse_strict(p.at("body").get<std::string>(), {args.begin(), args.end()})};
        }
    }
    return cp;
}

Case2Params case2_from_json(const json& j) {
    Case2Params cp;
    cp.which = which_from_string(opt<std::string>(j, "which", "T2"));
    const bool t1 = cp.which == Which::T1;
    cp.a1 = opt(j, "a1", cp.a1);
    cp.b1 = opt(j, "b1", cp.b1);
    cp.a_other = opt(j, t1 ? "a2" : "a3", cp.a_other);
    cp.b_other = opt(j, t1 ? "b2" : "b3", cp.b_other);
    cp.eta = opt(j, "eta", cp.eta);
    cp.delta = opt(j, "delta", cp.delta);
    cp.functions = functions_from_json(j);
    const json& p = j.at("p");
    if (p.is_string()) {
        Expr e = parse_strict(p.get<std::string>(), {});
        cp.p = FunctionDef{{"s", "r"},
                           simplify(substitute(e, {{kU, Expr(Sym::param("s"))}, {kV, Expr(Sym::param("r"))}}))};
    } else {
        auto args = p.at("args").get<std::vector<std::string>>();
        cp.p = FunctionDef{args, parse_strict(p.at("body").get<std::string>(), {args.begin(), args.end()})};
    }
    return cp;
}

BuildResult build_from_json(const json& j, const ZeroTestOptions& opts) {
    const int c = j.at("case").get<int>();
    if (c == 1) return build_case1(case1_from_json(j), opts);
    if (c == 2) return build_case2(case2_from_json(j), opts);
    throw ClassifyError("\"case\" must be 1 or 2");
}

}  // namespace pss
