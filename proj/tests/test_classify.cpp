#include <cmath>
#include <random>

#include "doctest.h"
#include "pss/classify.hpp"
#include "pss/parse.hpp"

using namespace pss;

namespace {

Expr P(const std::string& s) { return simplify(parse(s)); }

FunctionDef fn(std::vector<std::string> args, const std::string& body) {
    ParseOptions o;
    o.params = std::set<std::string>(args.begin(), args.end());
    return FunctionDef{args, simplify(parse(body, o))};
}

bool same(const Expr& a, const Expr& b, const FunctionTable& fns = {}) { return is_zero(a - b, {}, fns); }

bool same_frame(const Frame& a, const Frame& b, const FunctionTable& fns) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
            if (!same(a[i][j], b[i][j], fns)) return false;
    return true;
}

// Catalog instance with everything bound, compared against a build.
void check_matches_catalog(const BuildResult& b, const Problem& cat) {
    FunctionTable fns = bind_functions(cat.system);
    fns.merge(b.problem.system.functions);
    CHECK(same(b.problem.system.F, bind_params(cat.system.F, cat.system), fns));
    CHECK(same(b.problem.system.G, bind_params(cat.system.G, cat.system), fns));
    CHECK(same_frame(b.problem.frame, bind_params(cat.frame, cat.system), fns));
}

struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t s) : g(s) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(g() >> 11) * 0x1.0p-53; }
    double nonzero() { return (g() & 1 ? 1.0 : -1.0) * uniform(0.3, 1.5); }
    int pick(int n) { return static_cast<int>(g() % static_cast<std::uint64_t>(n)); }
};

std::string num(double x) {
    std::string s = format_double(x);
    return x < 0 ? "(" + s + ")" : s;
}

// Random admissible case (i) data: h is solved from the linear constraint.
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
    cp.g = P(gs[r.pick(4)]);
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

}  // namespace

TEST_CASE("build_case1") {
    SUBCASE("f31 = 0 data reproduce Konno-Oono") {
        const double nu = 1.5;
        Case1Params cp;
        cp.which = Which::T1;
        cp.eta = 0.0;
        cp.a = 2.0;
        cp.b = 0.0;
        cp.lambda = 0.0;
        cp.mu = nu;
        cp.g = P("2/1.5*vx");
        cp.h = P("2/1.5*ux");
        cp.phi = fn({"s"}, "s");
        auto b = build_case1(cp);
        CHECK(same(b.problem.system.F, P("-2*v*vx"), b.problem.system.functions));
        CHECK(same(b.problem.system.G, P("2*v*ux"), b.problem.system.functions));
        check_matches_catalog(b, get("konno-oono", {{"nu", nu}}));
        CHECK(verify(b.problem.system, b.problem.frame).passed);
    }
    SUBCASE("f21 = eta data of the constant-f21 q family") {
        const double k0 = 1.2, k1 = 0.7, k2 = -0.4, k3 = 0.3, eta = 0.8;
        Case1Params cp;
        cp.which = Which::T2;
        cp.eta = eta * eta;
        cp.a = k0 * k1;
        cp.b = k0 * k2;
        cp.lambda = 0.0;
        cp.mu = k0 / eta;
        cp.phi = fn({"s"}, "s + " + num(k0 * k3));
        cp.functions.define("q", fn({"s", "r"}, "s + 2*r + s*r"));
        cp.h = simplify(Expr(eta) * parse("q(ux, vx)"));
        cp.g = P(num(eta) + "*(" + num(k1) + "*vx + " + num(k2) + "*ux)");
        auto b = build_case1(cp);
        check_matches_catalog(b, get("cor5.4", {{"k0", k0}, {"k1", k1}, {"k2", k2}, {"k3", k3}, {"eta", eta}}));
        CHECK(verify(b.problem.system, b.problem.frame).passed);
    }
    SUBCASE("violations") {
        Rng r(3);
        Case1Params cp = random_case1(r, Which::T2);
        Case1Params bad = cp;
        bad.lambda = bad.mu = 0.0;
        CHECK_THROWS_AS(build_case1(bad), ConstraintViolation);
        bad = cp;
        bad.a = bad.b = 0.0;
        CHECK_THROWS_AS(build_case1(bad), ConstraintViolation);
        bad = cp;
        bad.h = bad.h + Expr(kUx);
        CHECK_THROWS_AS(build_case1(bad), ConstraintViolation);
        bad = cp;
        bad.phi = fn({"s"}, "s^2");
        CHECK_THROWS_AS(build_case1(bad), ConstraintViolation);
        // mu g - lambda h = a vx + b ux with g, h both linear in a vx + b ux gives W = 0
        bad = cp;
        bad.g = simplify(Expr(1.0 / cp.mu) * (Expr(cp.a) * Expr(kVx) + Expr(cp.b) * Expr(kUx)));
        bad.h = Expr(0.0);
        CHECK_THROWS_AS(build_case1(bad), DegenerateW);
    }
}

TEST_CASE("build_case2") {
    SUBCASE("trigonometric seven-parameter family") {
        const double k0 = -0.8, k1 = 0.4, k2 = 0.9, k3 = -0.2, a = 1.1, b = 0.7, th = 1.3, eta = 0.9;
        Case2Params cp;
        cp.which = Which::T2;
        cp.delta = 1;
        cp.eta = eta * eta;
        cp.a1 = eta * a * std::sin(th / 2);
        cp.a_other = eta * a * std::cos(th / 2);
        cp.b1 = -eta * b * std::cos(th / 2);
        cp.b_other = eta * b * std::sin(th / 2);
        Problem cat =
            get("cor5.1", {{"k0", k0}, {"k1", k1}, {"k2", k2}, {"k3", k3}, {"a", a}, {"b", b}, {"theta", th}, {"eta", eta}});
        cp.functions = bind_functions(cat.system);
        cp.p = fn({"s", "r"}, num(k0 / (eta * eta)) + " - " + num(a * b) + "*psi(s, r)");
        auto built = build_case2(cp);
        check_matches_catalog(built, cat);
        CHECK(built.constants.at("gamma") == doctest::Approx(eta * eta * a * b));
    }
    SUBCASE("gamma = 0") {
        Case2Params cp;
        cp.a1 = cp.b1 = cp.a_other = cp.b_other = 1.0;
        cp.p = fn({"s", "r"}, "s*r");
        CHECK_THROWS_AS(build_case2(cp), ConstraintViolation);
    }
    SUBCASE("p = u has proportional gradients") {
        Case2Params cp;
        cp.eta = 0.0;
        cp.p = fn({"s", "r"}, "s");
        CHECK_THROWS_AS(build_case2(cp), ProportionalGradients);
    }
}

TEST_CASE("derive_fg") {
    ZeroTestOptions zo;
    SUBCASE("PLR and Konno-Oono frames") {
        Problem plr = get("plr");
        auto d = derive_fg(bind_params(plr.frame, plr.system), 1);
        CHECK(same(d.F, P("2*u*v*ux - u")));
        CHECK(same(d.G, P("-2*u*v*vx - v")));
        Problem ko = get("konno-oono");
        auto k = derive_fg(bind_params(ko.frame, ko.system), 1);
        CHECK(same(k.F, P("-2*v*vx")));
        CHECK(same(k.G, P("2*v*ux")));
    }
    SUBCASE("errors") {
        Frame flat{{{P("1"), P("u")}, {P("2"), P("v")}, {P("0"), P("u*v")}}};
        CHECK_THROWS_AS(derive_fg(flat, 1), NonInvertible);
        Problem plr = get("plr");
        Frame f = bind_params(plr.frame, plr.system);
        f[1][1] = f[1][1] + Expr(kU);
        CHECK_THROWS_AS(derive_fg(f, 1), ThirdResidualNonzero);
    }
    SUBCASE("closed forms of case (ii)") {
        Rng r(17);
        for (int k = 0; k < 6; ++k) {
            for (Which w : {Which::T2, Which::T3}) {
                Case2Params cp = random_case2(r, w);
                auto b = build_case2(cp);
                auto [F, G] = printed_case2_fg(cp);
                const auto& fns = b.problem.system.functions;
                CHECK(same(F, b.problem.system.F, fns));
                CHECK(same(G, b.problem.system.G, fns));
            }
            // f31 = eta: the ux term of G carries 1/gamma, not the printed 1/gamma^2
            Case2Params cp = random_case2(r, Which::T1);
            auto b = build_case2(cp);
            const auto& fns = b.problem.system.functions;
            auto [F, G] = printed_case2_fg(cp, true);
            CHECK(same(F, b.problem.system.F, fns));
            CHECK(same(G, b.problem.system.G, fns));
            auto printed = printed_case2_fg(cp, false);
            CHECK(same(printed.first, b.problem.system.F, fns));
            CHECK_FALSE(same(printed.second, b.problem.system.G, fns));
        }
    }
    SUBCASE("closed forms of case (i)") {
        Rng r(23);
        for (int k = 0; k < 6; ++k)
            for (Which w : {Which::T1, Which::T2, Which::T3}) {
                Case1Params cp = random_case1(r, w);
                auto b = build_case1(cp);
                auto [F, G] = printed_case1_fg(cp);
                const auto& fns = b.problem.system.functions;
                CAPTURE(to_string(w));
                CHECK(same(F, b.problem.system.F, fns));
                CHECK(same(G, b.problem.system.G, fns));
            }
    }
}

TEST_CASE("lemma2_residual") {
    ZeroTestOptions zo;
    SUBCASE("case I") {
        LemmaData d{P("2.5"), P("0"), P("0"), P("ux + vx^2"), P("sin(vx) - ux"), 1};
        auto r = lemma2_residual(d);
        CHECK(is_zero(r.residual, zo));
        CHECK_FALSE(is_zero(r.determinant, zo));
    }
    SUBCASE("case II instance") {
        Rng r(5);
        for (int k = 0; k < 10; ++k) {
            Case1Params cp = random_case1(r, Which::T2);
            FunctionTable fns;
            fns.define("phi", cp.phi);
            Expr xi = Expr(cp.a) * Expr(kV) + Expr(cp.b) * Expr(kU);
            Expr d1 = Expr::user("phi", {1}, {xi});
            LemmaData d{Expr::user("phi", {xi}), Expr(cp.lambda) * d1, Expr(cp.mu) * d1, cp.g, cp.h, 1};
            CHECK(is_zero(lemma2_residual(d).residual, zo, fns));
        }
    }
    SUBCASE("psi0 = u") {
        LemmaData d{P("u"), P("0"), P("0"), P("ux"), P("vx"), 1};
        CHECK(same(lemma2_residual(d).residual, P("ux")));
    }
}

TEST_CASE("lemma2_classify") {
    SUBCASE("Konno-Oono through the f31 row") {
        Problem ko = get("konno-oono");
        auto d = lemma_embedding(bind_params(ko.frame, ko.system), Which::T1, 1);
        auto c = lemma2_classify(d);
        CHECK(c.kind == LemmaCase::II);
        CHECK(std::abs(c.constants.at("mu")) == doctest::Approx(1.0));
    }
    SUBCASE("constant psi0") {
        LemmaData d{P("3"), P("0"), P("0"), P("ux"), P("vx"), 1};
        auto c = lemma2_classify(d);
        CHECK(c.kind == LemmaCase::I);
        CHECK(c.constants.at("c") == doctest::Approx(3.0));
    }
    SUBCASE("affine rho") {
        FunctionTable fns;
        fns.define("p", fn({"s", "r"}, "s^2*r + exp(r/3)"));
        Expr pu = Expr::user("p", {1, 0}, {Expr(kU), Expr(kV)}), pv = Expr::user("p", {0, 1}, {Expr(kU), Expr(kV)});
        for (int eps : {1, -1}) {
            LemmaData d{Expr::user("p", {Expr(kU), Expr(kV)}), Expr(-eps) * pv, Expr(eps) * pu, P("ux"), P("vx"), eps};
            auto c = lemma2_classify(d, {}, fns);
            CHECK(c.kind == LemmaCase::III);
            CHECK(c.constants.at("a1") == doctest::Approx(1.0));
            CHECK(c.constants.at("b2") == doctest::Approx(1.0));
        }
    }
    SUBCASE("nonzero residual is not classified") {
        LemmaData d{P("u"), P("0"), P("0"), P("ux"), P("vx"), 1};
        CHECK(lemma2_classify(d).kind == LemmaCase::NoMatch);
    }
}

TEST_CASE("t3_from_t2") {
    Problem plr = get("plr");
    Frame f = bind_params(plr.frame, plr.system);
    Frame t = t3_from_t2(f);
    CHECK(same_frame(t3_from_t2(t), f, {}));
    CHECK(same(t[0][0], P("1")));
    CHECK(same(t[1][0], P("ux + vx")));
    CHECK(same(t[2][0], P("-(ux - vx)")));
    CHECK(verify(plr.system, t).passed);
    Frame z = t3_from_t2(zero_frame());
    for (const auto& row : z)
        for (const auto& e : row) CHECK(to_string(e) == "0");
}

TEST_CASE("family bindings reproduce every hyperbolic entry") {
    for (const auto& e : catalog()) {
        if (e.kind != EntryKind::Hyperbolic) continue;
        for (int d : e.deltas) {
            CAPTURE(e.key);
            CAPTURE(d);
            Instantiation in;
            in.delta = d;
            auto cp = corollary_params(e.key, in);
            BuildResult b = std::visit(
                [](const auto& c) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(c)>, Case1Params>)
                        return build_case1(c);
                    else
                        return build_case2(c);
                },
                cp);
            check_matches_catalog(b, get(e.key, in));
        }
    }
}

TEST_CASE("property: builds verify and are generic") {
    Rng r(99);
    for (int k = 0; k < 24; ++k) {
        Which w = static_cast<Which>(k % 3);
        CAPTURE(k);
        auto b1 = build_case1(random_case1(r, w));
        CHECK(verify(b1.problem.system, b1.problem.frame).passed);
        CHECK(genericity(b1.problem.system));
        auto b2 = build_case2(random_case2(r, w));
        CHECK(verify(b2.problem.system, b2.problem.frame).passed);
        CHECK(genericity(b2.problem.system));
    }
}

TEST_CASE("property: t3_from_t2 preserves verification") {
    Rng r(41);
    for (int k = 0; k < 20; ++k) {
        BuildResult b = k % 2 ? build_case1(random_case1(r, Which::T2)) : build_case2(random_case2(r, Which::T2));
        Frame t = t3_from_t2(b.problem.frame);
        CHECK(verify(b.problem.system, t).passed);
        CHECK(is_zero(diff(t[0][0], kUx)));
        CHECK(is_zero(diff(t[0][0], kVx)));
    }
}

TEST_CASE("property: lemma constructions have zero residual and classify") {
    Rng r(77);
    for (int k = 0; k < 20; ++k) {
        const int eps = r.pick(2) ? 1 : -1;
        // I
        LemmaData d1{Expr(r.nonzero()), Expr(0.0), Expr(0.0), P("ux + vx^3"), P("vx - sin(ux)"), eps};
        CHECK(is_zero(lemma2_residual(d1).residual));
        CHECK(lemma2_classify(d1).kind == LemmaCase::I);
        // II
        Case1Params cp = random_case1(r, eps == 1 ? Which::T2 : Which::T1);
        cp.delta = eps;
        cp.h = simplify((Expr(cp.mu) * cp.g - Expr(eps) * (Expr(cp.a) * Expr(kVx) + Expr(cp.b) * Expr(kUx))) /
                        Expr(cp.lambda));
        FunctionTable fns;
        fns.define("phi", cp.phi);
        Expr xi = Expr(cp.a) * Expr(kV) + Expr(cp.b) * Expr(kU);
        Expr d1p = Expr::user("phi", {1}, {xi});
        LemmaData d2{Expr::user("phi", {xi}), Expr(cp.lambda) * d1p, Expr(cp.mu) * d1p, cp.g, cp.h, eps};
        CHECK(is_zero(lemma2_residual(d2).residual, {}, fns));
        auto c2 = lemma2_classify(d2, {}, fns);
        CHECK(c2.kind == LemmaCase::II);
        CHECK(c2.constants.at("lambda") / c2.constants.at("mu") == doctest::Approx(cp.lambda / cp.mu));
        // III
        Case2Params c3 = random_case2(r, Which::T2);
        FunctionTable f3;
        f3.define("p", c3.p);
        const double g = c3.a1 * c3.b_other - c3.b1 * c3.a_other;
        Expr U(kU), V(kV);
        Expr pu = Expr::user("p", {1, 0}, {U, V}), pv = Expr::user("p", {0, 1}, {U, V});
        auto psi = [&](double a, double b) { return Expr(eps / g) * (Expr(b) * pu - Expr(a) * pv); };
        LemmaData d3{Expr::user("p", {U, V}), psi(c3.a1, c3.b1), psi(c3.a_other, c3.b_other),
                     Expr(c3.a1) * Expr(kUx) + Expr(c3.b1) * Expr(kVx),
                     Expr(c3.a_other) * Expr(kUx) + Expr(c3.b_other) * Expr(kVx), eps};
        CHECK(is_zero(lemma2_residual(d3).residual, {}, f3));
        auto k3 = lemma2_classify(d3, {}, f3);
        CHECK(k3.kind == LemmaCase::III);
        CHECK(k3.constants.at("a2") == doctest::Approx(c3.a_other));
    }
}

TEST_CASE("case parameter JSON") {
    auto j = nlohmann::json::parse(R"({
        "case": 1, "which": "T1", "a": 2, "b": 0, "lambda": 0, "mu": 1, "eta": 0, "delta": 1,
        "g": "2*vx", "h": "2*ux", "phi": "s"})");
    auto b = build_from_json(j);
    CHECK(same(b.problem.system.F, P("-2*v*vx"), b.problem.system.functions));
    auto j2 = nlohmann::json::parse(R"({"case": 2, "which": "T2", "a1": 1, "b1": 0, "a3": 0, "b3": 1,
        "eta": 0.5, "delta": -1, "p": "u*v + u^2"})");
    auto b2 = build_from_json(j2);
    CHECK(verify(b2.problem.system, b2.problem.frame).passed);
    CHECK(b2.constants.at("gamma") == doctest::Approx(1.0));
    CHECK_THROWS_AS(build_from_json(nlohmann::json::parse(R"({"case": 3})")), ClassifyError);
    CHECK_THROWS(build_from_json(nlohmann::json::parse(R"({"case": 1, "g": "nu*vx", "h": "ux"})")));
}
