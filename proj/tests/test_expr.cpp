#include <cmath>
#include <random>

#include "doctest.h"
#include "pss/eval.hpp"
#include "pss/parse.hpp"
#include "pss/zero_test.hpp"

using namespace pss;

namespace {

const Sym kEta = Sym::param("eta");
const Sym kA = Sym::param("a");

// Small random trees over u, ux, v, vx and two parameters.
struct TreeGen {
    std::mt19937_64 rng;
    explicit TreeGen(std::uint64_t seed) : rng(seed) {}

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

    Expr leaf() {
        static const Sym syms[] = {kU, kUx, kV, kVx, kEta, kA};
        if (pick(4) == 0) return Expr(static_cast<double>(pick(7) - 3));
        return Expr(syms[pick(6)]);
    }

    Expr tree(int depth) {
        if (depth == 0) return leaf();
        switch (pick(8)) {
        case 0:
        case 1: return tree(depth - 1) + tree(depth - 1);
        case 2:
        case 3: return tree(depth - 1) * tree(depth - 1);
        case 4: return tree(depth - 1) - tree(depth - 1);
        case 5: return pow(tree(depth - 1), Rational{pick(3) + 2, 1});
        case 6: {
            static Expr (*fns[])(const Expr&) = {&pss::sin, &pss::cos, &pss::exp};
            return fns[pick(3)](Expr(0.3) * tree(depth - 1));
        }
        default: return tree(depth - 1) / Expr(Sym(leaf_sym()));
        }
    }

    Sym leaf_sym() {
        static const Sym syms[] = {kU, kUx, kV, kVx};
        return syms[pick(4)];
    }
};

std::map<Sym, double> random_env(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.2, 1.5);
    return {{kU, d(rng)}, {kUx, d(rng)}, {kV, d(rng)}, {kVx, d(rng)}, {kEta, d(rng)}, {kA, d(rng)}};
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
    Expr e = parse("2*u*v*ux - u");
    CHECK(free_symbols(e) == std::set<Sym>{kU, kUx, kV});
    CHECK(simplify(e) == simplify(Expr(2) * kU * kV * kUx - Expr(kU)));

    Expr plr = parse("eta*(ux+vx)");
    CHECK(plr.kind() == Kind::Product);
    CHECK(plr == Expr(kEta) * (Expr(kUx) + Expr(kVx)));
}

TEST_CASE("parse reports byte offsets") {
    try {
        parse("2*u*(");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
    }
    CHECK_THROWS_AS(parse("u +* v"), ParseError);
    CHECK_THROWS_AS(parse("u^ux"), ParseError);
    CHECK_THROWS_AS(parse("exp"), ParseError);
    CHECK_THROWS_AS(parse("u)"), ParseError);

    ParseOptions strict;
    strict.params = std::set<std::string>{"eta"};
    strict.functions = std::set<std::string>{"phi"};
    CHECK_NOTHROW(parse("eta*phi(u)", strict));
    try {
        parse("eta*nu", strict);
        FAIL("expected unknown identifier");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(std::string(e.what()).find("unknown identifier 'nu'") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("psi(u)", strict), ParseError);
}

TEST_CASE("parse handles numbers, powers and user derivatives") {
    CHECK(simplify(parse("1.5e1 + .5")) == Expr(15.5));
    CHECK(simplify(parse("u^-1")) == pow(Expr(kU), Rational{-1, 1}));
    CHECK(simplify(parse("2^3^2")) == Expr(512.0));
    CHECK(simplify(parse("-u^2")) == simplify(-(pow(Expr(kU), Rational{2, 1}))));
    CHECK(simplify(parse("sqrt(u)")) == pow(Expr(kU), Rational{1, 2}));
    Expr d = parse("phi''(a*v)");
    CHECK(d.kind() == Kind::Apply);
    CHECK(d.deriv() == std::vector<int>{2});
    Expr p = parse("p'[1,2](u, v)");
    CHECK(p.deriv() == std::vector<int>{1, 1});
    CHECK_THROWS_AS(parse("phi'''(u)"), ParseError);
}

TEST_CASE("diff examples") {
    CHECK(diff(parse("2*u*v"), kU) == Expr(2) * Expr(kV));
    CHECK(diff(parse("eta*(ux+vx)"), kUx) == Expr(kEta));
    CHECK(diff(parse("phi(a*v+b*u)"), kVx) == Expr(0));
    CHECK(diff(parse("phi(a*v+b*u)"), kV) == simplify(parse("a*phi'(a*v+b*u)")));
    CHECK(diff(parse("p'[1](u,v)"), kV) == simplify(parse("p'[1,2](u,v)")));
    CHECK_THROWS_AS(diff(parse("eta*u"), kEta), ExprError);
    CHECK_THROWS_AS(diff(parse("phi''(u)"), kU), ExprError);
    CHECK(diff(parse("log(u)"), kU) == simplify(parse("1/u")));
    CHECK(diff(parse("sinh(2*u)"), kU) == simplify(parse("2*cosh(2*u)")));
}

TEST_CASE("eval examples") {
    CHECK(eval(parse("2*u*v*ux - u"), {{kU, 1}, {kV, 2}, {kUx, 3}, {kVx, 0}}) == 11.0);
    CHECK(eval(parse("-1/eta^2 - 2*u*v"), {{kEta, 1}, {kU, 1}, {kV, 1}}) == -3.0);

    FunctionTable fns;
    fns.define_unary("phi", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
                     [](double x) { return std::exp(x); });
    CHECK(eval(parse("phi'(a*v+b*u)"), {{kU, 0}, {kV, 0}, {kA, 1}, {Sym::param("b"), 1}}, fns) == 1.0);

    FunctionTable defs;
    defs.define("q", {"s", "r"}, "s^2*r");
    CHECK(eval(parse("q'[1,1](u, v)"), {{kU, 3}, {kV, 5}}, defs) == doctest::Approx(10.0));

    CHECK_THROWS_AS(eval(parse("u+v"), {{kU, 1}}), EvalError);
    CHECK_THROWS_AS(eval(parse("phi(u)"), {{kU, 1}}), EvalError);
    try {
        eval(parse("1 + log(u - 1)"), {{kU, 0.5}});
        FAIL("expected domain error");
    } catch (const EvalError& e) {
        CHECK(e.reason() == EvalError::Reason::Domain);
        CHECK(std::string(e.what()).find("log(u - 1)") != std::string::npos);
    }
}

TEST_CASE("is_zero examples") {
    CHECK(is_zero(diff(parse("u*v"), kU) - Expr(kV)));
    CHECK(is_zero(parse("u*v - v*u")));
    CHECK(is_zero(parse("sin(u)^2 + cos(u)^2 - 1")));
    CHECK(is_zero(parse("cosh(eta)^2 - sinh(eta)^2 - 1")));
    CHECK_FALSE(is_zero(parse("u*v - v")));
    CHECK_FALSE(is_zero(parse("1e-6*u")));

    // Samples hitting the log domain are skipped, not fatal.
    auto r = probe_zero(parse("log(u) + log(v) - log(u*v)"));
    CHECK(r.rejected > 0);
    CHECK(r.zero);
}

TEST_CASE("printer output is stable") {
    CHECK(to_string(simplify(parse("u - 2*v"))) == "u - 2*v");
    CHECK(to_string(simplify(parse("-1/eta^2 - 2*u*v"))) == "-2*u*v - 1/eta^2");
    CHECK(to_string(simplify(parse("(u+v)^2"))) == "u^2 + v^2 + 2*u*v");
    CHECK(to_string(simplify(parse("p'[1,2](u, v)*3"))) == "3*p'[1,2](u, v)");
}

TEST_CASE("property: diff agrees with central finite differences to O(h^2)") {
    TreeGen gen(11);
    std::mt19937_64 rng(12);
    const Sym vars[] = {kU, kUx, kV, kVx};
    int checked = 0;
    for (int n = 0; n < 300; ++n) {
        Expr e = gen.tree(1 + n % 4);
        auto env = random_env(rng);
        for (const Sym& s : vars) {
            Expr d = diff(e, s);
            double exact = 0.0, f1 = 0.0, f2 = 0.0, g1 = 0.0, g2 = 0.0;
            const double h = 1e-3;
            try {
                exact = eval(d, env);
                auto at = [&](double dx) {
                    auto env2 = env;
                    env2[s] += dx;
                    return eval(e, env2);
                };
                f1 = at(h);
                f2 = at(-h);
                g1 = at(h / 2);
                g2 = at(-h / 2);
            } catch (const EvalError&) {
                continue;
            }
            double fd_h = (f1 - f2) / (2 * h);
            double fd_h2 = (g1 - g2) / h;
            double err_h = std::abs(fd_h - exact);
            double err_h2 = std::abs(fd_h2 - exact);
            double scale = 1.0 + std::abs(exact) + std::abs(f1);
            // Error must be small and shrink by about 4 when h halves.
            CHECK(err_h <= 1e-3 * scale);
            if (err_h > 1e-8 * scale) CHECK(err_h2 <= 0.3 * err_h);
            ++checked;
        }
    }
    CHECK(checked > 800);
}

TEST_CASE("property: parse(print(s)) == s on simplified trees") {
    TreeGen gen(21);
    for (int n = 0; n < 400; ++n) {
        Expr s = simplify(gen.tree(1 + n % 5));
        std::string text = to_string(s);
        Expr back = simplify(parse(text));
        INFO(text);
        CHECK(back == s);
    }
}

TEST_CASE("property: diff is linear and obeys the product rule") {
    TreeGen gen(31);
    const Sym vars[] = {kU, kUx, kV, kVx};
    for (int n = 0; n < 100; ++n) {
        Expr f = gen.tree(2), g = gen.tree(2);
        const Sym& s = vars[n % 4];
        ZeroTestOptions o;
        o.trials = 20;
        o.seed = static_cast<std::uint64_t>(n);
        CHECK(is_zero(diff(Expr(3) * f + g, s) - (Expr(3) * diff(f, s) + diff(g, s)), o));
        CHECK(is_zero(diff(f * g, s) - (diff(f, s) * g + f * diff(g, s)), o));
    }
}

TEST_CASE("property: simplify preserves value") {
    TreeGen gen(41);
    std::mt19937_64 rng(42);
    for (int n = 0; n < 300; ++n) {
        Expr e = gen.tree(1 + n % 5);
        auto env = random_env(rng);
        double a = 0, b = 0;
        try {
            a = eval(e, env);
            b = eval(simplify(e), env);
        } catch (const EvalError&) {
            continue;
        }
        CHECK(b == doctest::Approx(a).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("property: is_zero is deterministic and sign-sensitive") {
    std::mt19937_64 rng(51);
    std::uniform_int_distribution<int> coef(1, 9);
    const Sym vars[] = {kU, kUx, kV, kVx};
    for (int n = 0; n < 50; ++n) {
        // Random polynomial with nonzero coefficients, minus itself with one coefficient flipped.
        int terms = 2 + n % 4;
        std::vector<double> c;
        std::vector<Expr> mono;
        for (int k = 0; k < terms; ++k) {
            c.push_back(coef(rng) * ((rng() & 1) ? 1.0 : -1.0));
            Expr m(1.0);
            for (int j = 0; j < 1 + k; ++j) m = m * Expr(vars[rng() % 4]);
            mono.push_back(m);
        }
        Expr p(0.0), q(0.0);
        std::size_t flip = rng() % static_cast<std::uint64_t>(terms);
        for (int k = 0; k < terms; ++k) {
            p = p + Expr(c[static_cast<std::size_t>(k)]) * mono[static_cast<std::size_t>(k)];
            double ck = static_cast<std::size_t>(k) == flip ? -c[static_cast<std::size_t>(k)] : c[static_cast<std::size_t>(k)];
            q = q + Expr(ck) * mono[static_cast<std::size_t>(k)];
        }
        Expr same = Expr::sum({p, Expr::neg(p)});
        Expr flipped = Expr::sum({p, Expr::neg(q)});
        CHECK(is_zero(same));
        CHECK_FALSE(is_zero(flipped));
        auto r1 = probe_zero(flipped), r2 = probe_zero(flipped);
        CHECK(r1.worst_abs == r2.worst_abs);
        CHECK(r1.worst_point == r2.worst_point);
    }
}
