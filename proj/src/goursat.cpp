#include "pss/goursat.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>

#include "pss/parse.hpp"

namespace pss {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Expr parse_data(const std::string& text, const std::string& var) {
    ParseOptions o;
    o.params = std::set<std::string>{var};
    o.functions = std::set<std::string>{};
    for (const auto& s : free_symbols(parse(text, o)))
        if (s.is_var()) throw SpecError("data function '" + text + "' may only depend on " + var);
    return simplify(parse(text, o));
}

// One-variable data function with its derivative.
struct Curve {
    Compiled f, df;
    Curve(const Expr& e, const Sym& s) : f(e, {s}), df(simplify(derivative(e, s)), {s}) {}
};

struct Rhs {
    Compiled F, G;
    Rhs(const SystemSpec& sys, const FunctionTable& fns) : F(sys.F, state_slots(), fns), G(sys.G, state_slots(), fns) {}
    // Domain errors (overflow, log of a negative) come back as NaN so the solver reports a blowup.
    std::pair<double, double> operator()(const std::array<double, 4>& s) const {
        try {
            return {F(s.data()), G(s.data())};
        } catch (const EvalError& e) {
            if (e.reason() != EvalError::Reason::Domain) throw;
            return {std::nan(""), std::nan("")};
        }
    }
};

SystemSpec bound_system(const SystemSpec& sys) {
    SystemSpec b = sys;
    b.F = bind_params(sys.F, sys);
    b.G = bind_params(sys.G, sys);
    b.functions = bind_functions(sys);
    for (const Expr* e : {&b.F, &b.G})
        for (const auto& s : free_symbols(*e))
            if (s.is_param()) throw SpecError("parameter '" + s.name() + "' must be bound before solving");
    return b;
}

bool finite_within(double x, double cap) { return std::isfinite(x) && std::abs(x) <= cap; }

std::array<Compiled, 6> compile_frame(const Frame& fr, const SolutionGrid& sol) {
    std::array<Compiled, 6> c;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 2; ++l) {
            Expr e = bind_params(fr[k][l], sol.system);
            for (const auto& s : free_symbols(e))
                if (s.is_param()) throw SpecError("frame parameter '" + s.name() + "' is unbound");
            c[2 * k + l] = Compiled(e, state_slots(), sol.system.functions);
        }
    return c;
}

std::array<Field, 6> frame_fields(const Frame& fr, const SolutionGrid& sol) {
    auto c = compile_frame(fr, sol);
    std::array<Field, 6> f;
    for (auto& v : f) v.resize(sol.nx * sol.nt);
    for (std::size_t i = 0; i < sol.nx; ++i)
        for (std::size_t j = 0; j < sol.nt; ++j) {
            auto s = sol.state(i, j);
            for (int k = 0; k < 6; ++k) f[k][sol.idx(i, j)] = c[k](s.data());
        }
    return f;
}

double max_finite(const Field& f) {
    double m = 0.0;
    for (double x : f)
        if (!std::isnan(x)) m = std::max(m, std::abs(x));
    return m;
}

nlohmann::json num_json(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

const std::vector<Sym>& state_slots() {
    static const std::vector<Sym> s{kU, kUx, kV, kVx};
    return s;
}

GoursatData data_from_strings(const std::string& u_x0, const std::string& v_x0, const std::string& u_0t,
                              const std::string& v_0t, double X, double T) {
    return {parse_data(u_x0, "x"), parse_data(v_x0, "x"), parse_data(u_0t, "t"), parse_data(v_0t, "t"), X, T};
}

GoursatData data_from_spec(const DataSpec& d, double X, double T) {
    if (d.u_x0.empty()) throw SpecError("entry has no characteristic data");
    return data_from_strings(d.u_x0, d.v_x0, d.u_0t, d.v_0t, X, T);
}

GoursatData random_data(std::mt19937_64& rng, double X, double T) {
    std::uniform_real_distribution<double> amp(-0.5, 0.5);
    auto edge = [&](double c0, const char* var, double L) {
        const double a = amp(rng), c = amp(rng);
        return format_double(c0) + " + " + format_double(a) + "*" + var + " + " + format_double(c) + "*sin(pi*" +
               var + "/" + format_double(L) + ")";
    };
    const double u0 = amp(rng), v0 = amp(rng);
    return data_from_strings(edge(u0, "x", X), edge(v0, "x", X), edge(u0, "t", T), edge(v0, "t", T), X, T);
}

nlohmann::json data_to_json(const GoursatData& d) {
    return {{"u(x,0)", to_string(d.u_x0)}, {"v(x,0)", to_string(d.v_x0)}, {"u(0,t)", to_string(d.u_0t)},
            {"v(0,t)", to_string(d.v_0t)}, {"X", d.X},                    {"T", d.T}};
}

GoursatData data_from_json(const nlohmann::json& j) {
    return data_from_strings(j.at("u(x,0)").get<std::string>(), j.at("v(x,0)").get<std::string>(),
                             j.at("u(0,t)").get<std::string>(), j.at("v(0,t)").get<std::string>(), j.value("X", 1.0),
                             j.value("T", 1.0));
}

nlohmann::json SolveOptions::to_json() const {
    return {{"sweeps", sweeps}, {"cap", cap}, {"fixed_point_tol", fixed_point_tol}};
}

SolutionGrid solve(const SystemSpec& sys, const GoursatData& data, std::size_t nx, std::size_t nt,
                   const SolveOptions& opts) {
    if (nx < 2 || nt < 2) throw SpecError("grid needs at least 2 nodes per direction");
    SolutionGrid g;
    g.system = bound_system(sys);
    g.nx = nx;
    g.nt = nt;
    g.hx = data.X / static_cast<double>(nx - 1);
    g.ht = data.T / static_cast<double>(nt - 1);
    const std::size_t N = nx * nt;
    g.u.assign(N, 0.0);
    g.v.assign(N, 0.0);
    g.ux.assign(N, 0.0);
    g.vx.assign(N, 0.0);
    std::vector<double> Fv(N), Gv(N);

    Rhs rhs(g.system, g.system.functions);
    Curve ux0(data.u_x0, kX), vx0(data.v_x0, kX), u0t(data.u_0t, kT), v0t(data.v_0t, kT);
    const double zero = 0.0;
    if (std::abs(ux0.f(&zero) - u0t.f(&zero)) > 1e-12 || std::abs(vx0.f(&zero) - v0t.f(&zero)) > 1e-12)
        throw IncompatibleData("characteristic data disagree at the origin");

    auto store = [&](std::size_t i, std::size_t j, double u, double ux, double v, double vx) {
        for (double x : {u, ux, v, vx})
            if (!finite_within(x, opts.cap))
                throw Blowup("state magnitude exceeds " + format_double(opts.cap) + " at node (" + std::to_string(i) +
                                 ", " + std::to_string(j) + ")",
                             i, j);
        const auto k = g.idx(i, j);
        g.u[k] = u;
        g.ux[k] = ux;
        g.v[k] = v;
        g.vx[k] = vx;
        std::tie(Fv[k], Gv[k]) = rhs({u, ux, v, vx});
        if (!std::isfinite(Fv[k]) || !std::isfinite(Gv[k]))
            throw Blowup("right-hand side is not finite at node (" + std::to_string(i) + ", " + std::to_string(j) + ")",
                         i, j);
    };

    for (std::size_t i = 0; i < nx; ++i) {
        const double x = g.x(i);
        store(i, 0, ux0.f(&x), ux0.df(&x), vx0.f(&x), vx0.df(&x));
    }
    // x = 0: d/dt (ux, vx) = (F, G) with u, v prescribed, implicit trapezoid iterated to convergence.
    for (std::size_t j = 0; j + 1 < nt; ++j) {
        const auto k = g.idx(0, j);
        const double t = g.t(j + 1);
        const double u = u0t.f(&t), v = v0t.f(&t);
        double p = g.ux[k] + g.ht * Fv[k], q = g.vx[k] + g.ht * Gv[k];
        bool converged = false;
        for (int it = 0; it < 200 && !converged; ++it) {
            auto [f, gg] = rhs({u, p, v, q});
            const double pn = g.ux[k] + 0.5 * g.ht * (Fv[k] + f), qn = g.vx[k] + 0.5 * g.ht * (Gv[k] + gg);
            converged = std::abs(pn - p) <= 1e-14 * (1.0 + std::abs(pn)) && std::abs(qn - q) <= 1e-14 * (1.0 + std::abs(qn));
            p = pn;
            q = qn;
            if (!std::isfinite(p) || !std::isfinite(q)) break;
        }
        if (!converged && (std::isfinite(p) && std::isfinite(q)))
            throw NonConvergence("boundary fixed point did not converge at t = " + format_double(t));
        store(0, j + 1, u, p, v, q);
    }

    const double q4 = 0.25 * g.hx * g.ht;
    for (std::size_t i = 0; i + 1 < nx; ++i)
        for (std::size_t j = 0; j + 1 < nt; ++j) {
            const auto a = g.idx(i, j), b = g.idx(i + 1, j), c = g.idx(i, j + 1);
            double Fd = Fv[b] + Fv[c] - Fv[a], Gd = Gv[b] + Gv[c] - Gv[a];
            std::array<double, 4> s{}, prev{};
            double change = 0.0;
            for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
                s = {g.u[b] + g.u[c] - g.u[a] + q4 * (Fv[a] + Fv[b] + Fv[c] + Fd),
                     g.ux[b] + 0.5 * g.ht * (Fv[b] + Fd),
                     g.v[b] + g.v[c] - g.v[a] + q4 * (Gv[a] + Gv[b] + Gv[c] + Gd),
                     g.vx[b] + 0.5 * g.ht * (Gv[b] + Gd)};
                if (sweep > 0) {
                    change = 0.0;
                    for (int k = 0; k < 4; ++k) change = std::max(change, std::abs(s[k] - prev[k]) / (1.0 + std::abs(s[k])));
                }
                prev = s;
                bool ok = true;
                for (double x : s) ok = ok && finite_within(x, opts.cap);
                if (!ok) break;
                std::tie(Fd, Gd) = rhs(s);
            }
            if (change > opts.fixed_point_tol)
                throw NonConvergence("cell fixed point changed by " + format_double(change) + " in the last sweep at (" +
                                     std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
            store(i + 1, j + 1, s[0], s[1], s[2], s[3]);
        }
    return g;
}

double pde_residual(const SolutionGrid& sol) {
    Rhs rhs(sol.system, sol.system.functions);
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < sol.nx; ++i)
        for (std::size_t j = 1; j + 1 < sol.nt; ++j) {
            auto [F, G] = rhs(sol.state(i, j));
            const auto up = sol.idx(i, j + 1), dn = sol.idx(i, j - 1);
            m = std::max(m, std::abs((sol.ux[up] - sol.ux[dn]) / (2 * sol.ht) - F));
            m = std::max(m, std::abs((sol.vx[up] - sol.vx[dn]) / (2 * sol.ht) - G));
        }
    return m;
}

double consistency_residual(const SolutionGrid& sol) {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < sol.nx; ++i)
        for (std::size_t j = 1; j + 1 < sol.nt; ++j) {
            const auto k = sol.idx(i, j), r = sol.idx(i + 1, j), l = sol.idx(i - 1, j);
            m = std::max(m, std::abs((sol.u[r] - sol.u[l]) / (2 * sol.hx) - sol.ux[k]));
            m = std::max(m, std::abs((sol.v[r] - sol.v[l]) / (2 * sol.hx) - sol.vx[k]));
        }
    return m;
}

double FormsResidual::max_all() const { return std::max({max[0], max[1], max[2]}); }

FormsResidual forms_residual(const Frame& fr, const SolutionGrid& sol, int delta) {
    auto f = frame_fields(fr, sol);
    FormsResidual out;
    for (auto& r : out.R) r.assign(sol.nx * sol.nt, kNaN);
    for (std::size_t i = 1; i + 1 < sol.nx; ++i)
        for (std::size_t j = 1; j + 1 < sol.nt; ++j) {
            const auto k = sol.idx(i, j), r = sol.idx(i + 1, j), l = sol.idx(i - 1, j), up = sol.idx(i, j + 1),
                       dn = sol.idx(i, j - 1);
            auto dx = [&](const Field& a) { return (a[r] - a[l]) / (2 * sol.hx); };
            auto dt = [&](const Field& a) { return (a[up] - a[dn]) / (2 * sol.ht); };
            out.R[0][k] = dx(f[1]) - dt(f[0]) - (f[4][k] * f[3][k] - f[5][k] * f[2][k]);
            out.R[1][k] = dx(f[3]) - dt(f[2]) - (f[0][k] * f[5][k] - f[1][k] * f[4][k]);
            out.R[2][k] = dx(f[5]) - dt(f[4]) - delta * (f[0][k] * f[3][k] - f[1][k] * f[2][k]);
        }
    for (int k = 0; k < 3; ++k) out.max[k] = max_finite(out.R[k]);
    return out;
}

double CurvatureField::max_deviation(double target) const {
    double m = 0.0;
    for (double k : K)
        if (!std::isnan(k)) m = std::max(m, std::abs(k - target));
    return m;
}

double min_area(const Frame& fr, const SolutionGrid& sol) {
    auto f = frame_fields(fr, sol);
    double m = INFINITY;
    for (std::size_t k = 0; k < sol.nx * sol.nt; ++k) m = std::min(m, std::abs(f[0][k] * f[3][k] - f[1][k] * f[2][k]));
    return m;
}

CurvatureField curvature(const Frame& fr, const SolutionGrid& sol, double degenerate) {
    auto f = frame_fields(fr, sol);
    const std::size_t N = sol.nx * sol.nt;
    Field E(N), F(N), G(N);
    for (std::size_t k = 0; k < N; ++k) {
        E[k] = f[0][k] * f[0][k] + f[2][k] * f[2][k];
        F[k] = f[0][k] * f[1][k] + f[2][k] * f[3][k];
        G[k] = f[1][k] * f[1][k] + f[3][k] * f[3][k];
    }
    CurvatureField out;
    out.K.assign(N, kNaN);
    const double hx = sol.hx, ht = sol.ht;
    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    for (std::size_t i = 1; i + 1 < sol.nx; ++i)
        for (std::size_t j = 1; j + 1 < sol.nt; ++j) {
            ++out.evaluated;
            const auto k = sol.idx(i, j);
            const double e = E[k], ff = F[k], gg = G[k];
            const double det = e * gg - ff * ff;
            if (!(det >= degenerate)) {
                ++out.degenerate;
                continue;
            }
            const auto r = sol.idx(i + 1, j), l = sol.idx(i - 1, j), up = sol.idx(i, j + 1), dn = sol.idx(i, j - 1);
            auto dx = [&](const Field& a) { return (a[r] - a[l]) / (2 * hx); };
            auto dt = [&](const Field& a) { return (a[up] - a[dn]) / (2 * ht); };
            const double Ex = dx(E), Et = dt(E), Fx = dx(F), Ft = dt(F), Gx = dx(G), Gt = dt(G);
            const double Ett = (E[up] - 2 * e + E[dn]) / (ht * ht);
            const double Gxx = (G[r] - 2 * gg + G[l]) / (hx * hx);
            const double Fxt = (F[sol.idx(i + 1, j + 1)] - F[sol.idx(i + 1, j - 1)] - F[sol.idx(i - 1, j + 1)] +
                                F[sol.idx(i - 1, j - 1)]) /
                               (4 * hx * ht);
            const double m1[3][3] = {{-Ett / 2 + Fxt - Gxx / 2, Ex / 2, Fx - Et / 2}, {Ft - Gx / 2, e, ff}, {Gt / 2, ff, gg}};
            const double m2[3][3] = {{0, Et / 2, Gx / 2}, {Et / 2, e, ff}, {Gx / 2, ff, gg}};
            out.K[k] = (det3(m1) - det3(m2)) / (det * det);
        }
    return out;
}

nlohmann::json ValidateOptions::to_json() const {
    return {{"levels", levels},           {"solve", solve.to_json()},   {"min_order", min_order},
            {"max_k_error", max_k_error}, {"max_degenerate", max_degenerate}, {"degenerate_det", degenerate}};
}

nlohmann::json GeometryReport::to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels) {
        nlohmann::json j{{"n", l.n},
                         {"h", l.h},
                         {"pde_residual", num_json(l.pde)},
                         {"consistency_residual", num_json(l.consistency)},
                         {"forms_residual", num_json(l.forms)},
                         {"k_error", num_json(l.k_error)},
                         {"degenerate_fraction", l.degenerate_fraction}};
        if (l.error) j["error"] = *l.error;
        lv.push_back(j);
    }
    return {{"label", label},
            {"delta", delta},
            {"levels", lv},
            {"order", {{"pde_residual", num_json(pde_order)}, {"forms_residual", num_json(forms_order)}, {"k_error", num_json(k_order)}}},
            {"passed", passed},
            {"failures", failures},
            {"tolerances", tolerances}};
}

double convergence_order(double coarse, double fine, double h_coarse, double h_fine) {
    if (fine == 0.0) return coarse == 0.0 ? kNaN : std::numeric_limits<double>::infinity();
    return std::log(coarse / fine) / std::log(h_coarse / h_fine);
}

GeometryReport validate(const SystemSpec& sys, const Frame& fr, const GoursatData& data, const ValidateOptions& opts) {
    GeometryReport rep;
    rep.label = sys.label;
    rep.delta = sys.delta;
    rep.tolerances = opts.to_json();
    auto run = [&](std::size_t n) {
        LevelReport l;
        l.n = n;
        l.h = data.X / static_cast<double>(n - 1);
        try {
            SolutionGrid sol = solve(sys, data, n, n, opts.solve);
            l.pde = pde_residual(sol);
            l.consistency = consistency_residual(sol);
            l.forms = forms_residual(fr, sol, sys.delta).max_all();
            auto K = curvature(fr, sol, opts.degenerate);
            l.k_error = K.max_deviation(-sys.delta);
            l.degenerate_fraction = K.degenerate_fraction();
        } catch (const std::exception& e) {
            l.error = e.what();
        }
        return l;
    };
    if (opts.parallel) {
        std::vector<std::future<LevelReport>> futs;
        for (auto n : opts.levels) futs.push_back(std::async(std::launch::async, run, n));
        for (auto& f : futs) rep.levels.push_back(f.get());
    } else {
        for (auto n : opts.levels) rep.levels.push_back(run(n));
    }

    for (const auto& l : rep.levels)
        if (l.error) rep.failures.push_back("level " + std::to_string(l.n) + ": " + *l.error);
    if (rep.levels.size() < 2) rep.failures.push_back("at least two refinement levels are required");
    if (rep.failures.empty()) {
        const auto& c = rep.levels[rep.levels.size() - 2];
        const auto& f = rep.levels.back();
        rep.pde_order = convergence_order(c.pde, f.pde, c.h, f.h);
        rep.forms_order = convergence_order(c.forms, f.forms, c.h, f.h);
        rep.k_order = convergence_order(c.k_error, f.k_error, c.h, f.h);
        auto need = [&](const char* what, double order) {
            if (!(order >= opts.min_order))
                rep.failures.push_back(std::string(what) + " order " + format_double(order) + " below " +
                                       format_double(opts.min_order));
        };
        need("pde residual", rep.pde_order);
        need("forms residual", rep.forms_order);
        need("curvature error", rep.k_order);
        if (!(f.k_error <= opts.max_k_error))
            rep.failures.push_back("finest |K + delta| = " + format_double(f.k_error) + " exceeds " +
                                   format_double(opts.max_k_error));
        for (const auto& l : rep.levels)
            if (!(l.degenerate_fraction < opts.max_degenerate))
                rep.failures.push_back("degenerate metric at " + format_double(100 * l.degenerate_fraction) +
                                       "% of interior nodes (level " + std::to_string(l.n) + ")");
    }
    rep.passed = rep.failures.empty();
    return rep;
}

void write_grid_csv(std::ostream& os, const SolutionGrid& sol, const Field* K) {
    const auto old = os.precision(17);
    os << "x,t,u,v,ux,vx,K\n";
    for (std::size_t i = 0; i < sol.nx; ++i)
        for (std::size_t j = 0; j < sol.nt; ++j) {
            const auto k = sol.idx(i, j);
            os << sol.x(i) << ',' << sol.t(j) << ',' << sol.u[k] << ',' << sol.v[k] << ',' << sol.ux[k] << ','
               << sol.vx[k] << ',';
            if (K && !std::isnan((*K)[k])) os << (*K)[k];
            os << '\n';
        }
    os.precision(old);
}

}  // namespace pss
