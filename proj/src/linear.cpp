#include "pss/linear.hpp"

#include <cmath>
#include <iomanip>

namespace pss {

namespace {

CExpr real(const Expr& e) { return {simplify(e), Expr(0.0)}; }

CExpr cadd(const CExpr& a, const CExpr& b) { return {a.re + b.re, a.im + b.im}; }
CExpr csub(const CExpr& a, const CExpr& b) { return {a.re - b.re, a.im - b.im}; }
CExpr cmul(const CExpr& a, const CExpr& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
CExpr csimplify(const CExpr& a) { return {simplify(a.re), simplify(a.im)}; }

SymMatrix two_by_two(const Expr& f1, const Expr& f2, const Expr& f3, int delta) {
    const Expr h(0.5);
    if (delta == 1)
        return {{real(h * f2), real(h * (f1 - f3))}, {real(h * (f1 + f3)), real(-(h * f2))}};
    return {{{Expr(0.0), simplify(h * f2)}, {simplify(h * f1), simplify(h * f3)}},
            {{simplify(-(h * f1)), simplify(h * f3)}, {Expr(0.0), simplify(-(h * f2))}}};
}

SymMatrix three_by_three(const Expr& f1, const Expr& f2, const Expr& f3, int delta) {
    const Expr d(static_cast<double>(delta));
    return {{real(0.0), real(f1), real(f2)}, {real(d * f1), real(0.0), real(f3)}, {real(d * f2), real(-f3), real(0.0)}};
}

SymMatrix map_matrix(const SymMatrix& m, const std::function<Expr(const Expr&)>& f) {
    SymMatrix out = m;
    for (auto& row : out)
        for (auto& e : row) e = {f(e.re), f(e.im)};
    return out;
}

nlohmann::json matrix_json(const SymMatrix& m, bool complex) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : m) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& e : row) {
            if (complex)
                r.push_back({{"re", to_string(e.re)}, {"im", to_string(e.im)}});
            else
                r.push_back(to_string(e.re));
        }
        rows.push_back(r);
    }
    return rows;
}

struct CompiledMatrix {
    int n;
    std::vector<Compiled> re, im;
    CompiledMatrix(const SymMatrix& m, const SystemSpec& sys) : n(static_cast<int>(m.size())) {
        for (const auto& row : m)
            for (const auto& e : row)
                for (auto [src, dst] : {std::pair{&e.re, &re}, std::pair{&e.im, &im}}) {
                    Expr b = bind_params(*src, sys);
                    for (const auto& s : free_symbols(b))
                        if (s.is_param()) throw TransportError("parameter '" + s.name() + "' is unbound");
                    dst->emplace_back(b, state_slots(), sys.functions);
                }
    }
    CMatrix operator()(const std::array<double, 4>& s) const {
        CMatrix M(n, n);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) M(k, l) = {re[k * n + l](s.data()), im[k * n + l](s.data())};
        return M;
    }
};

}  // namespace

std::string to_string(Algebra a) {
    switch (a) {
        case Algebra::sl2: return "sl2";
        case Algebra::su2: return "su2";
        case Algebra::so21: return "so21";
        case Algebra::so3: return "so3";
    }
    return "?";
}

nlohmann::json LinearPair::to_json() const {
    const bool c = algebra == Algebra::su2;
    return {{"n", n}, {"algebra", pss::to_string(algebra)}, {"delta", delta}, {"A", matrix_json(A, c)}, {"B", matrix_json(B, c)}};
}

LinearPair linear_pair(const Frame& fr, int delta, PairForm form) {
    if (delta != 1 && delta != -1) throw SpecError("delta must be 1 or -1");
    LinearPair lp;
    lp.delta = delta;
    if (form == PairForm::TwoByTwo) {
        lp.n = 2;
        lp.algebra = delta == 1 ? Algebra::sl2 : Algebra::su2;
        lp.A = two_by_two(fr[0][0], fr[1][0], fr[2][0], delta);
        lp.B = two_by_two(fr[0][1], fr[1][1], fr[2][1], delta);
    } else {
        lp.n = 3;
        lp.algebra = delta == 1 ? Algebra::so21 : Algebra::so3;
        lp.A = three_by_three(fr[0][0], fr[1][0], fr[2][0], delta);
        lp.B = three_by_three(fr[0][1], fr[1][1], fr[2][1], delta);
    }
    return lp;
}

std::vector<Expr> algebra_conditions(const LinearPair& lp) {
    std::vector<Expr> out;
    for (const SymMatrix* M : {&lp.A, &lp.B}) {
        const auto& m = *M;
        switch (lp.algebra) {
            case Algebra::sl2: out.push_back(simplify(m[0][0].re + m[1][1].re)); break;
            case Algebra::su2:
                out.push_back(simplify(m[0][0].im + m[1][1].im));
                for (int k = 0; k < 2; ++k)
                    for (int l = k; l < 2; ++l) {
                        out.push_back(simplify(m[k][l].re + m[l][k].re));
                        out.push_back(simplify(m[k][l].im - m[l][k].im));
                    }
                break;
            case Algebra::so21:
            case Algebra::so3: {
                const double J[3] = {-static_cast<double>(lp.delta), 1.0, 1.0};
                for (int k = 0; k < 3; ++k)
                    for (int l = k; l < 3; ++l) out.push_back(simplify(Expr(J[k]) * m[k][l].re + Expr(J[l]) * m[l][k].re));
                break;
            }
        }
    }
    return out;
}

SymMatrix zc_residual(const LinearPair& lp, const SystemSpec& sys, const ZeroTestOptions& opts) {
    const FunctionTable fns = bind_functions(sys);
    auto bind = [&](const Expr& e) { return bind_params(e, sys); };
    const SymMatrix A = map_matrix(lp.A, bind), B = map_matrix(lp.B, bind);
    const Expr F = bind(sys.F), G = bind(sys.G);
    auto require_free = [&](const SymMatrix& m, const Sym& s, const std::string& why) {
        for (const auto& row : m)
            for (const auto& e : row)
                for (const Expr* x : {&e.re, &e.im})
                    if (depends_on(*x, s) && !is_zero(diff(*x, s), opts, fns)) throw FreeDerivative(why);
    };
    require_free(A, kU, "A depends on u, so A_t involves u_t");
    require_free(A, kV, "A depends on v, so A_t involves v_t");
    require_free(B, kUx, "B depends on u_x, so B_x involves u_xx");
    require_free(B, kVx, "B depends on v_x, so B_x involves v_xx");

    auto dt = [&](const Expr& e) { return diff(e, kUx) * F + diff(e, kVx) * G; };
    auto dx = [&](const Expr& e) { return diff(e, kU) * Expr(kUx) + diff(e, kV) * Expr(kVx); };
    const int n = lp.n;
    SymMatrix R(n, std::vector<CExpr>(n));
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            CExpr r{dt(A[k][l].re) - dx(B[k][l].re), dt(A[k][l].im) - dx(B[k][l].im)};
            for (int m = 0; m < n; ++m) r = cadd(r, csub(cmul(A[k][m], B[m][l]), cmul(B[k][m], A[m][l])));
            R[k][l] = csimplify(r);
        }
    return R;
}

nlohmann::json ZcReport::to_json() const {
    nlohmann::json j{{"zero", zero}, {"nonzero", nonzero}};
    if (error) j["error"] = *error;
    return j;
}

ZcReport zc_check(const LinearPair& lp, const SystemSpec& sys, const ZeroTestOptions& opts) {
    ZcReport rep;
    try {
        auto R = zc_residual(lp, sys, opts);
        const FunctionTable fns = bind_functions(sys);
        for (int k = 0; k < lp.n; ++k)
            for (int l = 0; l < lp.n; ++l)
                if (!is_zero(R[k][l].re, opts, fns) || !is_zero(R[k][l].im, opts, fns))
                    rep.nonzero.push_back("(" + std::to_string(k + 1) + "," + std::to_string(l + 1) + ")");
        rep.zero = rep.nonzero.empty();
    } catch (const FreeDerivative& e) {
        rep.error = e.what();
    }
    return rep;
}

bool LatticePath::closed() const {
    long di = 0, dj = 0;
    for (Move m : moves) {
        di += m == Move::XPlus ? 1 : m == Move::XMinus ? -1 : 0;
        dj += m == Move::TPlus ? 1 : m == Move::TMinus ? -1 : 0;
    }
    return di == 0 && dj == 0;
}

LatticePath parse_path(std::size_t i0, std::size_t j0, const std::string& moves) {
    LatticePath p{i0, j0, {}};
    for (char c : moves) {
        switch (c) {
            case 'R': p.moves.push_back(Move::XPlus); break;
            case 'L': p.moves.push_back(Move::XMinus); break;
            case 'U': p.moves.push_back(Move::TPlus); break;
            case 'D': p.moves.push_back(Move::TMinus); break;
            case ' ':
            case ',': break;
            default: throw TransportError(std::string("unknown move '") + c + "' (use R, L, U, D)");
        }
    }
    return p;
}

LatticePath rectangle_path(const SolutionGrid& sol, double x0, double t0, double x1, double t1) {
    auto node = [](double v, double h, std::size_t n, const char* what) {
        const double k = std::round(v / h);
        if (k < 0 || k > static_cast<double>(n - 1)) throw TransportError(std::string(what) + " outside the grid");
        return static_cast<std::size_t>(k);
    };
    const auto i0 = node(x0, sol.hx, sol.nx, "x0"), i1 = node(x1, sol.hx, sol.nx, "x1");
    const auto j0 = node(t0, sol.ht, sol.nt, "t0"), j1 = node(t1, sol.ht, sol.nt, "t1");
    if (i1 <= i0 || j1 <= j0) throw TransportError("loop rectangle must have x1 > x0 and t1 > t0");
    LatticePath p{i0, j0, {}};
    p.moves.insert(p.moves.end(), i1 - i0, Move::XPlus);
    p.moves.insert(p.moves.end(), j1 - j0, Move::TPlus);
    p.moves.insert(p.moves.end(), i1 - i0, Move::XMinus);
    p.moves.insert(p.moves.end(), j1 - j0, Move::TMinus);
    return p;
}

double TransportTrace::deviation() const {
    if (steps.empty()) return 0.0;
    return (steps.back().psi - steps.front().psi).norm() / steps.front().psi.norm();
}

double TransportTrace::det_drift() const {
    double m = 0.0;
    for (const auto& s : steps) m = std::max(m, std::abs(s.det - 1.0));
    return m;
}

double TransportTrace::norm_drift() const {
    double m = 0.0;
    for (const auto& s : steps) m = std::max(m, std::abs(s.norm - steps.front().norm));
    return m;
}

double TransportTrace::quadratic_drift() const {
    double m = 0.0;
    for (const auto& s : steps) m = std::max(m, std::abs(s.quadratic - steps.front().quadratic));
    return m;
}

void TransportTrace::write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    const auto n = steps.empty() ? 0 : steps.front().psi.size();
    os << "step,i,j,length";
    for (Eigen::Index k = 1; k <= n; ++k) os << ",psi" << k << "_re,psi" << k << "_im";
    os << ",norm,det_re,det_im,quadratic,deviation\n";
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const auto& st = steps[s];
        os << s << ',' << st.i << ',' << st.j << ',' << st.length;
        for (Eigen::Index k = 0; k < n; ++k) os << ',' << st.psi(k).real() << ',' << st.psi(k).imag();
        os << ',' << st.norm << ',' << st.det.real() << ',' << st.det.imag() << ',' << st.quadratic << ','
           << (st.psi - steps.front().psi).norm() / steps.front().psi.norm() << '\n';
    }
    os.precision(old);
}

nlohmann::json TransportTrace::summary() const {
    return {{"algebra", pss::to_string(algebra)},
            {"steps", steps.empty() ? 0 : steps.size() - 1},
            {"length", length()},
            {"deviation", deviation()},
            {"det_drift", det_drift()},
            {"norm_drift", norm_drift()},
            {"quadratic_drift", quadratic_drift()}};
}

TransportTrace transport(const LinearPair& lp, const SolutionGrid& sol, const LatticePath& path, const CVector& psi0) {
    if (psi0.size() != lp.n) throw TransportError("initial vector has the wrong size");
    if (psi0.norm() == 0.0) throw TransportError("initial vector is zero");
    if (path.i0 >= sol.nx || path.j0 >= sol.nt) throw TransportError("path starts outside the grid");
    const CompiledMatrix A(lp.A, sol.system), B(lp.B, sol.system);
    CMatrix J = CMatrix::Identity(lp.n, lp.n);
    if (lp.n == 3) J(0, 0) = -lp.delta;

    TransportTrace tr;
    tr.algebra = lp.algebra;
    CMatrix Phi = CMatrix::Identity(lp.n, lp.n);
    std::size_t i = path.i0, j = path.j0;
    double length = 0.0;
    auto record = [&] {
        TransportStep s;
        s.i = i;
        s.j = j;
        s.length = length;
        s.psi = Phi * psi0;
        s.det = Phi.determinant();
        s.norm = s.psi.norm();
        s.quadratic = (s.psi.adjoint() * J * s.psi)(0, 0).real();
        tr.steps.push_back(std::move(s));
    };
    record();
    for (std::size_t k = 0; k < path.moves.size(); ++k) {
        const Move m = path.moves[k];
        const bool along_x = m == Move::XPlus || m == Move::XMinus;
        const bool forward = m == Move::XPlus || m == Move::TPlus;
        std::size_t ni = i, nj = j;
        if (along_x) {
            if (!forward && i == 0) throw TransportError("path leaves the grid at move " + std::to_string(k));
            ni = forward ? i + 1 : i - 1;
        } else {
            if (!forward && j == 0) throw TransportError("path leaves the grid at move " + std::to_string(k));
            nj = forward ? j + 1 : j - 1;
        }
        if (ni >= sol.nx || nj >= sol.nt) throw TransportError("path leaves the grid at move " + std::to_string(k));
        const CompiledMatrix& M = along_x ? A : B;
        const double h = (along_x ? sol.hx : sol.ht) * (forward ? 1.0 : -1.0);
        const CMatrix M0 = M(sol.state(i, j)), M1 = M(sol.state(ni, nj)), Mh = 0.5 * (M0 + M1);
        const CMatrix k1 = M0 * Phi;
        const CMatrix k2 = Mh * (Phi + 0.5 * h * k1);
        const CMatrix k3 = Mh * (Phi + 0.5 * h * k2);
        const CMatrix k4 = M1 * (Phi + h * k3);
        Phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        i = ni;
        j = nj;
        length += std::abs(h);
        record();
    }
    tr.holonomy = Phi;
    return tr;
}

}  // namespace pss
