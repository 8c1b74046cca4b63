#include "pss/catalog.hpp"

#include <cmath>

#include "pss/parse.hpp"

namespace pss {

using nlohmann::json;

namespace {

ParamSpec P(std::string name, double fallback, std::vector<double> excl = {}) {
    ParamSpec p;
    p.name = std::move(name);
    p.fallback = fallback;
    p.exclusions = std::move(excl);
    return p;
}

FunctionSlot user_fn(std::string name, std::vector<std::string> args, std::string body,
                     std::optional<Interval> monotone = std::nullopt) {
    return FunctionSlot{std::move(name), std::move(args), std::move(body), true, monotone};
}

FunctionSlot fixed_fn(std::string name, std::vector<std::string> args, std::string body) {
    return FunctionSlot{std::move(name), std::move(args), std::move(body), false, std::nullopt};
}

double value_of(const Problem& p, const std::string& name) {
    auto it = p.system.params.find(name);
    if (it == p.system.params.end() || !it->second.value) return NAN;
    return *it->second.value;
}

// k1^2 + k2^2 != 0 and k2 q_vx - k1 q_ux not identically zero.
void check_q_family(const Problem& p) {
    double k1 = value_of(p, "k1"), k2 = value_of(p, "k2");
    if (std::isfinite(k1) && std::isfinite(k2) && k1 * k1 + k2 * k2 == 0.0)
        throw ParamViolation("k1^2 + k2^2 must be nonzero");
    Expr d = parse("k2*q'[2](ux, vx) - k1*q'[1](ux, vx)");
    SystemSpec s = p.system;
    FunctionTable fns = bind_functions(s);
    ZeroTestOptions o;
    o.box = sample_box(s);
    o.trials = 20;
    if (is_zero(bind_params(d, s), o, fns)) throw ParamViolation("k2*q_vx - k1*q_ux vanishes identically");
}

std::vector<CatalogEntry> make_catalog() {
    std::vector<CatalogEntry> c;
    const std::vector<Interval> box_default{{-2.0, -0.2}, {0.2, 2.0}};

    {
        CatalogEntry e;
        e.key = "nls-minus";
        e.title = "Nonlinear Schroedinger NLS- (evolution reference)";
        e.provenance = "NLS- frame; u_t + v_xx - 2(u^2+v^2)v = 0, -v_t + u_xx - 2(u^2+v^2)u = 0";
        e.kind = EntryKind::EvolutionReference;
        e.deltas = {1};
        e.params = {P("eta", 0.5)};
        e.F = "0";
        e.G = "0";
        e.frame = {{{"2*u", "-4*eta*u - 2*vx"}, {"-2*v", "4*eta*v - 2*ux"}, {"2*eta", "-4*eta^2 - 2*(u^2 + v^2)"}}};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "nls-plus";
        e.title = "Nonlinear Schroedinger NLS+ (evolution reference)";
        e.provenance = "NLS+ frame; u_t + v_xx + 2(u^2+v^2)u = 0, -v_t + u_xx + 2(u^2+v^2)v = 0";
        e.kind = EntryKind::EvolutionReference;
        e.deltas = {-1};
        e.params = {P("eta", 0.5)};
        e.F = "0";
        e.G = "0";
        e.frame = {{{"2*v", "-4*eta*v + 2*ux"}, {"2*eta", "-4*eta^2 + 2*(u^2 + v^2)"}, {"-2*u", "2*eta*u + 2*vx"}}};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "plr";
        e.title = "Pohlmeyer-Lund-Regge type system";
        e.provenance = "u_xt = 2uvu_x - u, v_xt = -2uvv_x - v";
        e.deltas = {1};
        e.params = {P("eta", 1.0, {0.0})};
        e.F = "2*u*v*ux - u";
        e.G = "-2*u*v*vx - v";
        e.frame = {{{"eta*(ux + vx)", "(v - u)/eta"}, {"eta^2", "-1/eta^2 - 2*u*v"}, {"eta*(ux - vx)", "-(u + v)/eta"}}};
        e.data = {"0.2 + 0.3*x + 0.1*sin(2*x)", "-0.3 + 0.8*x", "0.2 - 0.2*t", "-0.3 + 0.1*t + 0.1*sin(t)"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "konno-oono";
        e.title = "Konno-Oono coupled integrable dispersionless system";
        e.provenance = "u_xt = -2vv_x, v_xt = 2vu_x";
        e.deltas = {1};
        e.params = {P("nu", 1.0, {0.0})};
        e.F = "-2*v*vx";
        e.G = "2*v*ux";
        e.frame = {{{"2*vx/nu", "0"}, {"2*ux/nu", "nu"}, {"0", "2*v"}}};
        e.data = {"0.5*x", "0.2 + 0.5*x + 0.1*sin(x)", "0.1*t", "0.2 + 0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.3";
        e.title = "Cubic pss system with parameter c";
        e.provenance = "u_xt = (u^2-v^2+c)v_x + u, v_xt = (u^2-v^2+c)u_x + v";
        e.deltas = {1};
        e.params = {P("eta", 1.0, {0.0}), P("c", 0.0)};
        e.F = "(u^2 - v^2 + c)*vx + u";
        e.G = "(u^2 - v^2 + c)*ux + v";
        e.frame = {{{"-eta*sqrt(2)*ux", "sqrt(2)*v/eta"},
                    {"eta^2", "1/eta^2 + u^2 - v^2 + c"},
                    {"eta*sqrt(2)*vx", "-sqrt(2)*u/eta"}}};
        e.data = {"0.2 + 0.4*x", "0.1 + 0.2*x", "0.2 + 0.1*t", "0.1 + 0.2*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.4";
        e.title = "Cubic ss system with parameter c";
        e.provenance = "u_xt = (u^2+v^2+c)v_x + u, v_xt = -(u^2+v^2+c)u_x + v";
        e.deltas = {-1};
        e.params = {P("eta", 1.0, {0.0}), P("c", 0.0)};
        e.F = "(u^2 + v^2 + c)*vx + u";
        e.G = "-(u^2 + v^2 + c)*ux + v";
        e.frame = {{{"-eta*sqrt(2)*vx", "sqrt(2)*u/eta"},
                    {"eta^2", "-1/eta^2 + u^2 + v^2 + c"},
                    {"-eta*sqrt(2)*ux", "-sqrt(2)*v/eta"}}};
        e.data = {"0.4 + 0.1*x", "-0.3 - 0.4*x", "0.4 - 0.1*t", "-0.3 + 0.7*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.5";
        e.title = "Exponential system with linear psi";
        e.provenance = "u_xt = (a v_x + b)e^u, v_xt = -(2/a)e^u u_x";
        e.deltas = {-1};
        e.params = {P("a", 1.0, {0.0}), P("b", 0.0), P("eta", 1.0, {0.0})};
        e.F = "(a*vx + b)*exp(u)";
        e.G = "-(2/a)*exp(u)*ux";
        e.frame = {{{"ux", "0"}, {"eta", "-exp(u)"}, {"eta + a*vx + b", "-exp(u)"}}};
        e.data = {"0.05 + 0.4*x", "-0.25 + 0.8*x", "0.05 - 0.5*t", "-0.25 - 0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.6";
        e.title = "Exponential system with psi = exp(-v_x)";
        e.provenance = "u_xt = 2e^(u - v_x), v_xt = u_x e^(u + v_x)";
        e.deltas = {1};
        e.params = {P("eta", 1.0, {0.0})};
        e.F = "2*exp(u - vx)";
        e.G = "ux*exp(u + vx)";
        e.frame = {{{"-sqrt(2)/2*ux", "0"}, {"eta", "sqrt(2)*exp(u)"}, {"-eta*sqrt(2) + exp(-vx)", "-2*exp(u)"}}};
        e.data = {"-1.5 + 0.5*x", "-0.3*x", "-1.5 - 0.3*t", "0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.7";
        e.title = "Exponential system with psi = v_x";
        e.provenance = "u_xt = -2v_x e^u, v_xt = u_x e^u";
        e.deltas = {1};
        e.params = {P("eta", 1.0, {0.0})};
        e.F = "-2*vx*exp(u)";
        e.G = "ux*exp(u)";
        e.frame = {{{"-sqrt(2)/2*ux", "0"}, {"eta", "-sqrt(2)*exp(u)"}, {"-eta*sqrt(2) + vx", "2*exp(u)"}}};
        e.data = {"-0.5 + 0.5*x", "0.1 - 0.6*x", "-0.5 + 0.1*t", "0.1 + 0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.8";
        e.title = "Two-parameter system with a monotone function phi(v_x)";
        e.provenance = "u_xt = (au+b)phi(v_x) + 1, v_xt = delta a^2 u_x (au+b)/phi'(v_x)";
        e.deltas = {1, -1};
        e.params = {P("a", 1.0, {0.0}), P("b", 0.0), P("eta", 1.0, {0.0})};
        e.functions = {user_fn("phi", {"s"}, "exp(s)", Interval{-2.0, 2.0})};
        e.F = "(a*u + b)*phi(vx) + 1";
        e.G = "delta*a^2/phi'(vx)*ux*(a*u + b)";
        e.frame = {{{"eta*a*ux", "0"}, {"eta^2", "a^2*u + a*b"}, {"-eta*phi(vx)", "a/eta"}}};
        e.data = {"-0.9 + 0.5*x", "0.2*x", "-0.9 - 0.1*t", "0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "ex3.9";
        e.title = "Konno-Oono type system u_xt = u u_x v_x";
        e.provenance = "u_xt = u u_x v_x, v_xt = -u(v_x^2 + 1)";
        e.deltas = {1};
        ParamSpec sigma = P("sigma", 1.0);
        sigma.allowed = {1.0, -1.0};
        e.params = {sigma, P("nu", 1.0, {0.0})};
        e.F = "u*ux*vx";
        e.G = "-u*(vx^2 + 1)";
        e.frame = {{{"sigma*ux/nu", "0"}, {"ux*vx/nu", "nu"}, {"0", "sigma*u"}}};
        e.data = {"0.3 + 0.5*x", "0.2 + 0.3*x", "0.3 + 0.1*t", "0.2 - 0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "cor5.1";
        e.title = "Seven-parameter pss family";
        e.provenance = "trigonometric seven-parameter family generalizing the Pohlmeyer-Lund-Regge system";
        e.deltas = {1};
        e.params = {P("k0", -1.0, {0.0}), P("k1", 0.3),           P("k2", -0.2),
                    P("k3", 0.1),         P("a", 1.2, {0.0}),     P("b", -0.9, {0.0}),
                    P("theta", 0.8),      P("eta", 1.0, {0.0})};
        e.params[6].draw = {{0.1, 3.0}};
        e.functions = {
            fixed_fn("psi", {"s", "r"},
                     "k0*(cos(theta)/(2*a*b)*(a^2*s^2 - b^2*r^2) + s*r*sin(theta)) - a*b*(k1*s + k2*r + k3)")};
        e.F = "a*b*sin(theta)*(ux*psi(u, v) - k2) - b^2*cos(theta)*(vx*psi(u, v) + k1) + k0*u";
        e.G = "-a^2*cos(theta)*(ux*psi(u, v) - k2) - a*b*sin(theta)*(vx*psi(u, v) + k1) + k0*v";
        e.frame = {{{"eta*(a*sin(theta/2)*ux - b*cos(theta/2)*vx)",
                     "(b*cos(theta/2)*psi'[1](u, v) + a*sin(theta/2)*psi'[2](u, v))/eta"},
                    {"eta^2", "k0/eta^2 - a*b*psi(u, v)"},
                    {"eta*(a*cos(theta/2)*ux + b*sin(theta/2)*vx)",
                     "(-b*sin(theta/2)*psi'[1](u, v) + a*cos(theta/2)*psi'[2](u, v))/eta"}}};
        e.data = {"0.2 + 0.3*x", "0.1 + 0.2*x", "0.2 + 0.1*t", "0.1 + 0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "cor5.2";
        e.title = "Seven-parameter ss family";
        e.provenance = "hyperbolic seven-parameter family (signs rederived from the frame construction)";
        e.deltas = {-1};
        e.params = {P("k0", -1.0, {0.0}), P("k1", 0.3),           P("k2", -0.2),
                    P("k3", 0.1),         P("a", 1.2, {0.0}),     P("b", -0.9, {0.0}),
                    P("theta", 0.8),      P("eta", 1.0, {0.0})};
        e.functions = {
            fixed_fn("psi", {"s", "r"},
                     "k0*(cosh(theta)/(2*a*b)*(a^2*s^2 + b^2*r^2) - s*r*sinh(theta)) - a*b*(k1*s + k2*r + k3)")};
        e.F = "-a*b*sinh(theta)*(ux*psi(u, v) - k2) + b^2*cosh(theta)*(vx*psi(u, v) + k1) - k0*u";
        e.G = "-a^2*cosh(theta)*(ux*psi(u, v) - k2) + a*b*sinh(theta)*(vx*psi(u, v) + k1) - k0*v";
        e.frame = {{{"eta*(a*sinh(theta/2)*ux - b*cosh(theta/2)*vx)",
                     "(b*cosh(theta/2)*psi'[1](u, v) + a*sinh(theta/2)*psi'[2](u, v))/eta"},
                    {"eta^2", "k0/eta^2 - a*b*psi(u, v)"},
                    {"eta*(a*cosh(theta/2)*ux - b*sinh(theta/2)*vx)",
                     "(b*sinh(theta/2)*psi'[1](u, v) + a*cosh(theta/2)*psi'[2](u, v))/eta"}}};
        e.data = {"0.25 + 0.2*x", "0.1 - 0.4*x", "0.25", "0.1 + 0.7*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "cor5.3";
        e.title = "Exponential family with a monotone function psi(v_x)";
        e.provenance = "u_xt = k1 e^(k0 u) psi(v_x), v_xt = k1(delta/k2^2 - k0^2) e^(k0 u) u_x/psi'(v_x)";
        e.deltas = {1, -1};
        e.params = {P("k0", 1.0, {0.0}), P("k1", 1.0, {0.0}), P("k2", 1.0, {0.0}), P("eta", 1.0)};
        e.functions = {user_fn("psi", {"s"}, "exp(s)", Interval{-2.0, 2.0})};
        e.F = "k1*exp(k0*u)*psi(vx)";
        e.G = "k1*(delta/k2^2 - k0^2)*exp(k0*u)*ux/psi'(vx)";
        e.frame = {{{"ux/k2", "0"}, {"eta", "-k1/k2*exp(k0*u)"}, {"eta*k0*k2 + psi(vx)", "-k0*k1*exp(k0*u)"}}};
        e.data = {"-1.5 + 0.5*x", "0.2*x", "-1.5 - 0.2*t", "0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "cor5.4";
        e.title = "Family with an arbitrary function q(u_x, v_x), constant f21";
        e.provenance = "four constants k0..k3 and q(u_x, v_x) with k2 q_vx - k1 q_ux != 0";
        e.deltas = {1, -1};
        e.params = {P("k0", 1.0, {0.0}), P("k1", 1.0), P("k2", 0.5), P("k3", 0.2), P("eta", 1.0, {0.0})};
        e.functions = {user_fn("q", {"s", "r"}, "s + 2*r + s*r")};
        e.F = "k0/(k2*q'[2](ux, vx) - k1*q'[1](ux, vx))*(q'[2](ux, vx) + (k1*v + k2*u + k3)*(delta*k1*(k1*vx + k2*ux) "
              "- q(ux, vx)*q'[2](ux, vx)))";
        e.G = "-k0/(k2*q'[2](ux, vx) - k1*q'[1](ux, vx))*(q'[1](ux, vx) + (k1*v + k2*u + k3)*(delta*k2*(k1*vx + k2*ux) "
              "- q(ux, vx)*q'[1](ux, vx)))";
        e.frame = {{{"eta*(k1*vx + k2*ux)", "0"}, {"eta^2", "k0*(k1*v + k2*u) + k0*k3"}, {"eta*q(ux, vx)", "k0/eta"}}};
        e.check = check_q_family;
        e.data = {"0.2 + 0.8*x", "0.1 - 0.2*x", "0.2 + 0.1*t", "0.1 + 0.1*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "cor5.5";
        e.title = "Family with an arbitrary function q(u_x, v_x), constant f22";
        e.provenance = "three constants k0..k3 and q(u_x, v_x) generalizing the Konno-Oono system";
        e.deltas = {1, -1};
        e.params = {P("k0", 1.0, {0.0}), P("k1", 1.0), P("k2", 0.5), P("k3", 0.2), P("nu", 1.0, {0.0})};
        e.functions = {user_fn("q", {"s", "r"}, "s + 2*r + s*r")};
        e.F = "delta*(q(ux, vx)*q'[2](ux, vx) + k0^2*k1*(k1*vx + k2*ux))/(k2*q'[2](ux, vx) - k1*q'[1](ux, vx))*(k1*v + "
              "k2*u + k3)";
        e.G = "-delta*(q(ux, vx)*q'[1](ux, vx) + k0^2*k2*(k1*vx + k2*ux))/(k2*q'[2](ux, vx) - k1*q'[1](ux, vx))*(k1*v "
              "+ k2*u + k3)";
        e.frame = {{{"delta*k0*(k1*vx + k2*ux)/nu", "0"}, {"q(ux, vx)/nu", "nu"}, {"0", "k0*(k1*v + k2*u + k3)"}}};
        e.check = check_q_family;
        e.data = {"-0.25 - 0.4*x", "-0.25 + 0.4*x", "-0.25 + 0.8*t", "-0.25 - 0.4*t"};
        c.push_back(e);
    }
    {
        CatalogEntry e;
        e.key = "trivial-zero";
        e.title = "u_xt = v_xt = 0 with the flat orthonormal frame";
        e.provenance = "flat reference: omega1 = dx, omega2 = dt, omega3 = 0";
        e.kind = EntryKind::FlatReference;
        e.deltas = {1};
        e.F = "0";
        e.G = "0";
        e.frame = {{{"1", "0"}, {"0", "1"}, {"0", "0"}}};
        e.data = {"x", "0", "0", "t"};
        c.push_back(e);
    }
    for (auto& e : c)
        for (auto& p : e.params)
            if (p.draw.empty()) p.draw = box_default;
    return c;
}

std::set<std::string> names_of(const std::vector<ParamSpec>& ps) {
    std::set<std::string> out{"delta"};
    for (const auto& p : ps) out.insert(p.name);
    return out;
}

Expr parse_in(const std::string& text, const std::set<std::string>& params, const std::string& where) {
    ParseOptions o;
    o.params = params;
    try {
        return parse(text, o);
    } catch (const ParseError& e) {
        throw ParamViolation(where + ": " + e.what());
    }
}

// Builds the problem for `e` with symbolic replacements for its parameters.
Problem assemble(const CatalogEntry& e, int delta, const std::map<Sym, Expr>& subst,
                 std::map<std::string, ParamBinding> params, const FunctionTable& fns,
                 const std::set<std::string>& visible) {
    Problem p;
    SystemSpec& s = p.system;
    s.label = e.key;
    s.delta = delta;
    s.params = std::move(params);
    s.functions = fns;
    std::map<Sym, Expr> m = subst;
    m[Sym::param("delta")] = Expr(static_cast<double>(delta));
    auto make = [&](const std::string& text, const std::string& where) {
        return substitute(parse_in(text, visible, e.key + " " + where), m);
    };
    s.F = make(e.F, "F");
    s.G = make(e.G, "G");
    const char* names[3][2] = {{"f11", "f12"}, {"f21", "f22"}, {"f31", "f32"}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) p.frame[i][j] = make(e.frame[i][j], names[i][j]);
    return p;
}

}  // namespace

std::optional<std::string> monotone_violation(const FunctionTable& fns, const std::string& name, const Interval& iv) {
    Expr d = fns.inline_defs(Expr::user(name, {1}, {Expr(Sym::param("_s"))}));
    Compiled c(d, {Sym::param("_s")}, fns);
    int sign = 0;
    const int n = 64;
    for (int k = 0; k <= n; ++k) {
        double x = iv.lo + (iv.hi - iv.lo) * k / n;
        double v = 0.0;
        try {
            v = c(&x);
        } catch (const EvalError&) {
            return "function '" + name + "' cannot be evaluated on its monotonicity interval";
        }
        int sg = v > 1e-12 ? 1 : (v < -1e-12 ? -1 : 0);
        if (sg == 0 || (sign != 0 && sg != sign))
            return "function '" + name + "' is not strictly monotone on [" + format_double(iv.lo) + ", " +
                   format_double(iv.hi) + "]";
        sign = sg;
    }
    return std::nullopt;
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> c = make_catalog();
    return c;
}

const CatalogEntry& entry(const std::string& key) {
    for (const auto& e : catalog())
        if (e.key == key) return e;
    throw UnknownKey("unknown catalog key '" + key + "'");
}

Problem get(const std::string& key, const Instantiation& inst) {
    const CatalogEntry& e = entry(key);
    int delta = inst.delta.value_or(e.deltas.front());
    if (std::find(e.deltas.begin(), e.deltas.end(), delta) == e.deltas.end())
        throw ParamViolation("delta = " + std::to_string(delta) + " is not admissible for '" + key + "'");
    std::set<std::string> visible = names_of(e.params);
    for (const auto& [name, v] : inst.values)
        if (!visible.count(name) || name == "delta")
            throw ParamViolation("unknown parameter '" + name + "' for '" + key + "'");

    std::map<std::string, ParamBinding> params;
    for (const auto& ps : e.params) {
        ParamBinding b;
        b.exclusions = ps.exclusions;
        auto it = inst.values.find(ps.name);
        if (it != inst.values.end())
            b.value = it->second;
        else if (!inst.free_params || !ps.allowed.empty())
            b.value = ps.fallback;
        if (b.value) {
            if (!std::isfinite(*b.value)) throw ParamViolation("parameter '" + ps.name + "' is not finite");
            for (double x : ps.exclusions)
                if (std::abs(*b.value - x) <= 1e-12)
                    throw ParamViolation("parameter '" + ps.name + "' = " + format_double(*b.value) +
                                         " is excluded for '" + key + "'");
            if (!ps.allowed.empty() &&
                std::none_of(ps.allowed.begin(), ps.allowed.end(), [&](double a) { return a == *b.value; }))
                throw ParamViolation("parameter '" + ps.name + "' must be one of the admissible values");
        }
        params[ps.name] = b;
    }

    for (const auto& [name, body] : inst.functions) {
        auto it = std::find_if(e.functions.begin(), e.functions.end(), [&](const auto& f) { return f.name == name; });
        if (it == e.functions.end()) throw ParamViolation("entry '" + key + "' has no function '" + name + "'");
        if (!it->user_choice) throw ParamViolation("function '" + name + "' is fixed by entry '" + key + "'");
    }
    FunctionTable fns;
    for (const auto& f : e.functions) {
        auto it = inst.functions.find(f.name);
        std::string body = it == inst.functions.end() ? f.fallback : it->second;
        std::set<std::string> vis = visible;
        vis.insert(f.args.begin(), f.args.end());
        fns.define(f.name, FunctionDef{f.args, simplify(parse_in(body, vis, "function " + f.name))});
    }

    Problem p = assemble(e, delta, {}, params, fns, visible);
    bool all_bound = std::all_of(params.begin(), params.end(), [](const auto& kv) { return kv.second.value.has_value(); });
    if (all_bound) {
        FunctionTable bound = bind_functions(p.system);
        for (const auto& f : e.functions)
            if (f.monotone_on)
                if (auto bad = monotone_violation(bound, f.name, *f.monotone_on)) throw ParamViolation(*bad);
        if (e.check) e.check(p);
    }
    return p;
}

Problem get(const std::string& key, const std::map<std::string, double>& values) {
    Instantiation inst;
    inst.values = values;
    return get(key, inst);
}

std::map<std::string, double> draw(const CatalogEntry& e, std::mt19937_64& rng) {
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::map<std::string, double> v;
        for (const auto& p : e.params) {
            if (!p.allowed.empty()) {
                v[p.name] = p.allowed[rng() % p.allowed.size()];
                continue;
            }
            double total = 0.0;
            for (const auto& iv : p.draw) total += iv.hi - iv.lo;
            double r = uniform() * total;
            double x = p.draw.back().hi;
            for (const auto& iv : p.draw) {
                if (r < iv.hi - iv.lo) {
                    x = iv.lo + r;
                    break;
                }
                r -= iv.hi - iv.lo;
            }
            v[p.name] = x;
        }
        try {
            get(e.key, v);
            return v;
        } catch (const ParamViolation&) {
        }
    }
    throw ParamViolation("could not draw admissible parameters for '" + e.key + "'");
}

// ---------------------------------------------------------------------------
// Reductions

const std::vector<Reduction>& reductions() {
    static const std::vector<Reduction> r = {
        {"cor5.1", "plr", 1,
         {{"k0", "-1"}, {"k1", "0"}, {"k2", "0"}, {"k3", "0"}, {"a", "sqrt(2)"}, {"b", "-sqrt(2)"}, {"theta", "pi/2"}},
         {},
         true},
        {"cor5.1", "ex3.3", 1,
         {{"k0", "1"}, {"k1", "0"}, {"k2", "0"}, {"k3", "c/4"}, {"a", "-sqrt(2)"}, {"b", "sqrt(2)"}, {"theta", "pi"}},
         {},
         true},
        {"cor5.2", "ex3.4", -1,
         {{"k0", "-1"}, {"k1", "0"}, {"k2", "0"}, {"k3", "c/4"}, {"a", "-sqrt(2)"}, {"b", "sqrt(2)"}, {"theta", "0"}},
         {},
         true},
        {"cor5.3", "ex3.5", -1, {{"k0", "1"}, {"k1", "1"}, {"k2", "1"}}, {{"psi", "a*s + b"}}, true},
        {"cor5.3", "ex3.6", 1, {{"k0", "1"}, {"k1", "2"}, {"k2", "-sqrt(2)"}}, {{"psi", "exp(-s)"}}, true},
        {"cor5.3", "ex3.7", 1, {{"k0", "1"}, {"k1", "-2"}, {"k2", "-sqrt(2)"}}, {{"psi", "s"}}, true},
        {"cor5.4", "ex3.8", 1, {{"k0", "a"}, {"k1", "0"}, {"k2", "a"}, {"k3", "b"}}, {{"q", "-phi(r)"}}, true},
        {"cor5.4", "ex3.8", -1, {{"k0", "a"}, {"k1", "0"}, {"k2", "a"}, {"k3", "b"}}, {{"q", "-phi(r)"}}, true},
        {"cor5.5", "konno-oono", 1, {{"k0", "1"}, {"k1", "2"}, {"k2", "0"}, {"k3", "0"}}, {{"q", "2*s"}}, true},
        {"cor5.5", "ex3.9", 1, {{"k0", "1"}, {"k1", "0"}, {"k2", "1"}, {"k3", "0"}}, {{"q", "s*r"}}, true},
    };
    return r;
}

ReductionCertificate check_reduction(const Reduction& r, const ZeroTestOptions& opts) {
    const CatalogEntry& src = entry(r.source);
    ReductionCertificate cert;
    cert.reduction = r;
    Instantiation ti;
    ti.delta = r.delta;
    ti.free_params = true;
    cert.target = get(r.target, ti);
    const SystemSpec& tgt = cert.target.system;

    std::set<std::string> tvis{"pi"};
    for (const auto& [n, b] : tgt.params) tvis.insert(n);

    std::map<Sym, Expr> subst;
    for (const auto& ps : src.params) {
        auto it = r.params.find(ps.name);
        if (it != r.params.end())
            subst[Sym::param(ps.name)] = parse_in(it->second, tvis, "reduction value for " + ps.name);
        else if (!tgt.params.count(ps.name))
            throw CertificateFailure("reduction " + r.source + " -> " + r.target + " leaves '" + ps.name + "' unset");
    }

    FunctionTable fns = tgt.functions;
    std::set<std::string> svis = names_of(src.params);
    for (const auto& f : src.functions) {
        auto it = r.functions.find(f.name);
        std::set<std::string> vis = it == r.functions.end() ? svis : tvis;
        vis.insert(f.args.begin(), f.args.end());
        Expr body = parse_in(it == r.functions.end() ? f.fallback : it->second, vis, "function " + f.name);
        if (it == r.functions.end()) body = substitute(body, subst);
        fns.define(f.name, FunctionDef{f.args, body});
    }
    cert.reduced = assemble(src, r.delta, subst, tgt.params, fns, svis);
    cert.reduced.system.label = r.source + "->" + r.target;

    ZeroTestOptions zo = opts;
    zo.box = sample_box(tgt, opts.box);
    FunctionTable all = bind_functions(cert.reduced.system);
    auto gap = [&](const Expr& a, const Expr& b) { return probe_zero(bind_params(a - b, tgt), zo, all); };
    cert.F = gap(cert.reduced.system.F, tgt.F);
    cert.G = gap(cert.reduced.system.G, tgt.G);
    cert.certified = cert.F.zero && cert.G.zero;
    if (r.frame_equal)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) {
                cert.frame[i][j] = gap(cert.reduced.frame[i][j], cert.target.frame[i][j]);
                cert.certified = cert.certified && cert.frame[i][j].zero;
            }
    return cert;
}

ReductionCertificate reduce(const std::string& source, const std::string& target, const ZeroTestOptions& opts) {
    for (const auto& r : reductions())
        if (r.source == source && r.target == target) {
            auto cert = check_reduction(r, opts);
            if (!cert.certified)
                throw CertificateFailure("reduction " + source + " -> " + target + " does not reproduce the target");
            return cert;
        }
    throw UnknownKey("no registered reduction " + source + " -> " + target);
}

namespace {
json zero_json(const ZeroTestResult& r) {
    return json{{"zero", r.zero}, {"worst_abs", r.worst_abs}, {"worst_rel", r.worst_rel}, {"samples", r.samples}};
}
}  // namespace

json ReductionCertificate::to_json() const {
    json j;
    j["source"] = reduction.source;
    j["target"] = reduction.target;
    j["delta"] = reduction.delta;
    j["params"] = reduction.params;
    j["functions"] = reduction.functions;
    j["certified"] = certified;
    j["F"] = zero_json(F);
    j["G"] = zero_json(G);
    if (reduction.frame_equal) {
        json fr = json::array();
        for (int i = 0; i < 3; ++i) fr.push_back({zero_json(frame[i][0]), zero_json(frame[i][1])});
        j["frame"] = fr;
    }
    j["reduced"] = problem_to_json(reduced);
    return j;
}

json entry_to_json(const CatalogEntry& e) {
    json j;
    j["key"] = e.key;
    j["title"] = e.title;
    j["provenance"] = e.provenance;
    j["kind"] = e.kind == EntryKind::Hyperbolic           ? "hyperbolic"
                : e.kind == EntryKind::EvolutionReference ? "evolution-reference"
                                                          : "flat-reference";
    j["deltas"] = e.deltas;
    json ps = json::array();
    for (const auto& p : e.params) {
        json jp{{"name", p.name}, {"default", p.fallback}};
        if (!p.exclusions.empty()) jp["exclusions"] = p.exclusions;
        if (!p.allowed.empty()) jp["allowed"] = p.allowed;
        ps.push_back(jp);
    }
    j["params"] = ps;
    json fs = json::array();
    for (const auto& f : e.functions) {
        json jf{{"name", f.name}, {"args", f.args}, {"default", f.fallback}, {"user_choice", f.user_choice}};
        if (f.monotone_on) jf["monotone_on"] = {f.monotone_on->lo, f.monotone_on->hi};
        fs.push_back(jf);
    }
    j["functions"] = fs;
    j["F"] = e.F;
    j["G"] = e.G;
    json fr = json::array();
    for (const auto& row : e.frame) fr.push_back({row[0], row[1]});
    j["frame"] = fr;
    if (!e.data.u_x0.empty())
        j["data"] = {{"u(x,0)", e.data.u_x0}, {"v(x,0)", e.data.v_x0}, {"u(0,t)", e.data.u_0t}, {"v(0,t)", e.data.v_0t}};
    return j;
}

}  // namespace pss
