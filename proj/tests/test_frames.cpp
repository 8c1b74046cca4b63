#include <cmath>
#include <random>

#include "doctest.h"
#include "pss/catalog.hpp"
#include "pss/frames.hpp"
#include "pss/parse.hpp"

using namespace pss;

namespace {

Frame frame_of(const std::array<std::array<const char*, 2>, 3>& s) {
    Frame f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) f[i][j] = parse(s[i][j]);
    return f;
}

SystemSpec system_of(const char* F, const char* G, int delta, std::map<std::string, double> values = {}) {
    SystemSpec s;
    s.F = parse(F);
    s.G = parse(G);
    s.delta = delta;
    for (const auto& [k, v] : values) s.params[k].value = v;
    return s;
}

const std::array<std::array<const char*, 2>, 3> kNlsMinus{
    {{"2*u", "-4*eta*u - 2*vx"}, {"-2*v", "4*eta*v - 2*ux"}, {"2*eta", "-4*eta^2 - 2*(u^2 + v^2)"}}};
const std::array<std::array<const char*, 2>, 3> kPlr{
    {{"eta*(ux + vx)", "(v - u)/eta"}, {"eta^2", "-1/eta^2 - 2*u*v"}, {"eta*(ux - vx)", "-(u + v)/eta"}}};
const std::array<std::array<const char*, 2>, 3> kKonnoOono{
    {{"2*vx/nu", "0"}, {"2*ux/nu", "nu"}, {"0", "2*v"}}};
const std::array<std::array<const char*, 2>, 3> kEx33{{{"-eta*sqrt(2)*ux", "sqrt(2)*v/eta"},
                                                       {"eta^2", "1/eta^2 + u^2 - v^2 + c"},
                                                       {"eta*sqrt(2)*vx", "-sqrt(2)*u/eta"}}};
const std::array<std::array<const char*, 2>, 3> kEx34{{{"-eta*sqrt(2)*vx", "sqrt(2)*u/eta"},
                                                       {"eta^2", "-1/eta^2 + u^2 + v^2 + c"},
                                                       {"-eta*sqrt(2)*ux", "-sqrt(2)*v/eta"}}};

bool all_true(const DependencyTable& t) {
    for (const auto& row : t)
        for (bool b : row)
            if (!b) return false;
    return true;
}

std::map<Sym, double> at(double u, double ux, double v, double vx) {
    return {{kU, u}, {kUx, ux}, {kV, v}, {kVx, vx}};
}

std::vector<const CatalogEntry*> hyperbolic_entries() {
    std::vector<const CatalogEntry*> out;
    for (const auto& e : catalog())
        if (e.kind == EntryKind::Hyperbolic) out.push_back(&e);
    return out;
}

}  // namespace

TEST_CASE("check_dependencies") {
    SUBCASE("NLS- frame depends on u in f11") {
        auto t = check_dependencies(frame_of(kNlsMinus));
        CHECK_FALSE(t[0][0]);
        CHECK_FALSE(t[0][1]);
        CHECK(t[2][0]);
    }
    SUBCASE("PLR frame") { CHECK(all_true(check_dependencies(frame_of(kPlr)))); }
    SUBCASE("f32 = ux") {
        Frame f = frame_of(kPlr);
        f[2][1] = Expr(kUx);
        auto t = check_dependencies(f);
        CHECK_FALSE(t[2][1]);
        CHECK(t[0][0]);
        CHECK(t[1][1]);
    }
}

TEST_CASE("regularity_witness") {
    SUBCASE("Konno-Oono, nu = 2") {
        SystemSpec s = system_of("-2*v*vx", "2*v*ux", 1, {{"nu", 2.0}});
        Frame f = bind_params(frame_of(kKonnoOono), s);
        // f11 f22 - f12 f21 = (2 vx / nu) nu - 0 at the sample point
        double area = eval(area_form(f), at(0.0, 1.0, 1.0, 1.0));
        CHECK(area == doctest::Approx(2.0 * 1.0 / 2.0 * 2.0));
        auto w = regularity_witness(f);
        REQUIRE(w);
        CHECK(std::abs(w->area) >= kWitnessThreshold);
        CHECK(std::abs(w->minor_sum) >= kWitnessThreshold);
    }
    SUBCASE("constant first column has no witness") {
        Frame f = frame_of({{{"1", "u"}, {"2", "v"}, {"3", "u*v"}}});
        CHECK_FALSE(regularity_witness(f));
    }
    SUBCASE("PLR, eta = 1") {
        SystemSpec s = system_of("0", "0", 1, {{"eta", 1.0}});
        Frame f = bind_params(frame_of(kPlr), s);
        // Jacobian of (f11, f21, f31) in (ux, vx) by central differences
        const double h = 1e-5;
        std::array<std::array<double, 2>, 3> J{};
        for (int i = 0; i < 3; ++i) {
            J[i][0] = (eval(f[i][0], at(0, 1 + h, 0, 0)) - eval(f[i][0], at(0, 1 - h, 0, 0))) / (2 * h);
            J[i][1] = (eval(f[i][0], at(0, 1, 0, h)) - eval(f[i][0], at(0, 1, 0, -h))) / (2 * h);
        }
        double sum = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) {
                double m = J[a][0] * J[b][1] - J[a][1] * J[b][0];
                sum += m * m;
            }
        CHECK(eval(jacobian_minor_sum(f), at(0, 1, 0, 0)) == doctest::Approx(sum).epsilon(1e-8));
        CHECK(regularity_witness(f));
    }
}

TEST_CASE("structure_residuals") {
    ZeroTestOptions zo;
    SUBCASE("PLR") {
        SystemSpec s = system_of("2*u*v*ux - u", "-2*u*v*vx - v", 1);
        for (const auto& r : structure_residuals(s, frame_of(kPlr))) CHECK(is_zero(r, zo));
    }
    SUBCASE("Konno-Oono delta = +1 and -1") {
        SystemSpec s = system_of("-2*v*vx", "2*v*ux", 1);
        auto R = structure_residuals(s, frame_of(kKonnoOono));
        for (const auto& r : R) CHECK(is_zero(r, zo));
        s.delta = -1;
        auto Rm = structure_residuals(s, frame_of(kKonnoOono));
        CHECK(is_zero(Rm[0], zo));
        CHECK(is_zero(Rm[1], zo));
        CHECK_FALSE(is_zero(Rm[2], zo));
        // R3 changes by 2 (f11 f22 - f12 f21) = 4 vx at nu = 1
        std::map<Sym, double> p = at(0.3, 0.7, -0.4, 1.1);
        p[Sym::param("nu")] = 1.0;
        CHECK(eval(Rm[2], p) == doctest::Approx(4.0 * 1.1));
    }
}

TEST_CASE("verify") {
    SUBCASE("ex3.3 at eta = 1, c = 0") {
        SystemSpec s = system_of("(u^2 - v^2 + c)*vx + u", "(u^2 - v^2 + c)*ux + v", 1, {{"eta", 1.0}, {"c", 0.0}});
        auto rep = verify(s, frame_of(kEx33));
        CHECK(rep.passed);
        CHECK(rep.conditions.size() == 6);
    }
    SUBCASE("ex3.4, delta = -1") {
        SystemSpec s = system_of("(u^2 + v^2 + c)*vx + u", "-(u^2 + v^2 + c)*ux + v", -1, {{"eta", 1.0}, {"c", 0.0}});
        CHECK(verify(s, frame_of(kEx34)).passed);
    }
    SUBCASE("ex3.3 with f31 negated") {
        SystemSpec s = system_of("(u^2 - v^2 + c)*vx + u", "(u^2 - v^2 + c)*ux + v", 1, {{"eta", 1.0}, {"c", 0.0}});
        Frame f = frame_of(kEx33);
        f[2][0] = -f[2][0];
        auto rep = verify(s, f);
        CHECK_FALSE(rep.passed);
        bool some = false;
        for (const char* id : {"C3", "C4", "C5"}) {
            const auto& c = rep.condition(id);
            if (!c.holds) {
                some = true;
                CHECK(c.worst_abs > 1e-9 * 10);
            }
        }
        CHECK(some);
    }
    SUBCASE("errors are reported, not thrown") {
        SystemSpec s = system_of("u", "v", 2);
        auto rep = verify(s, frame_of(kPlr));
        CHECK_FALSE(rep.passed);
        CHECK(rep.error);
    }
}

TEST_CASE("metric") {
    ZeroTestOptions zo;
    SUBCASE("NLS-") {
        Metric m = metric(frame_of(kNlsMinus));
        CHECK(is_zero(m.g11 - parse("4*(u^2 + v^2)"), zo));
        // the printed value is the dxdt coefficient 2 g12
        CHECK(is_zero(Expr(2.0) * m.g12 - parse("-16*eta*(u^2 + v^2) - 8*(u*vx - v*ux)"), zo));
        CHECK(is_zero(m.g22 - parse("16*eta^2*(u^2 + v^2) + 4*(ux^2 + vx^2) + 16*eta*(u*vx - v*ux)"), zo));
    }
    SUBCASE("zero frame") {
        Metric m = metric(zero_frame());
        for (const auto& g : {m.g11, m.g12, m.g22}) CHECK(to_string(g) == "0");
    }
    SUBCASE("Konno-Oono, nu = 1") {
        SystemSpec s = system_of("0", "0", 1, {{"nu", 1.0}});
        Metric m = metric(bind_params(frame_of(kKonnoOono), s));
        CHECK(is_zero(m.g11 - parse("4*(ux^2 + vx^2)"), zo));
        CHECK(is_zero(m.g12 - parse("2*ux"), zo));
        CHECK(is_zero(m.g22 - parse("1"), zo));
    }
}

TEST_CASE("genericity") {
    CHECK(genericity(system_of("2*u*v*ux - u", "-2*u*v*vx - v", 1)));
    CHECK_FALSE(genericity(system_of("ux*vx", "0", 1)));
    CHECK(genericity(system_of("-2*v*vx", "2*v*ux", 1)));
}

TEST_CASE("property: every hyperbolic catalog entry verifies") {
    std::mt19937_64 rng(7);
    for (const auto* e : hyperbolic_entries())
        for (int d : e->deltas) {
            CAPTURE(e->key);
            CAPTURE(d);
            Instantiation in;
            in.delta = d;
            Problem p = get(e->key, in);
            CHECK(verify(p.system, p.frame).passed);
            in.free_params = true;
            Problem q = get(e->key, in);
            CHECK(verify(q.system, q.frame).passed);
            for (int k = 0; k < 3; ++k) {
                Instantiation r;
                r.delta = d;
                r.values = draw(*e, rng);
                Problem x = get(e->key, r);
                CHECK(verify(x.system, x.frame).passed);
            }
        }
}

TEST_CASE("property: negating any nonzero frame entry breaks verification") {
    for (const auto* e : hyperbolic_entries()) {
        Problem p = get(e->key);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) {
                if (to_string(p.frame[i][j]) == "0") continue;
                CAPTURE(e->key);
                CAPTURE(i);
                CAPTURE(j);
                Frame f = p.frame;
                f[i][j] = -f[i][j];
                CHECK_FALSE(verify(p.system, f).passed);
            }
    }
}

TEST_CASE("property: metric diagonal is nonnegative") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (const auto* e : hyperbolic_entries()) {
        Problem p = get(e->key);
        Frame f = bind_params(p.frame, p.system);
        FunctionTable fns = bind_functions(p.system);
        Metric m = metric(f);
        Compiled g11(fns.inline_defs(m.g11), {kU, kUx, kV, kVx}, fns);
        Compiled g22(fns.inline_defs(m.g22), {kU, kUx, kV, kVx}, fns);
        for (int k = 0; k < 50; ++k) {
            double x[4] = {U(rng), U(rng), U(rng), U(rng)};
            CHECK(g11(x) >= 0.0);
            CHECK(g22(x) >= 0.0);
        }
    }
}

TEST_CASE("property: residuals are affine in (F, G)") {
    std::mt19937_64 rng(5);
    ZeroTestOptions zo;
    const char* deltas[] = {"u*vx", "exp(u)", "ux^2 - v", "sin(v)*ux"};
    for (const auto* e : hyperbolic_entries()) {
        Problem p = get(e->key);
        Frame f = bind_params(p.frame, p.system);
        Expr F = bind_params(p.system.F, p.system), G = bind_params(p.system.G, p.system);
        Expr dF = parse(deltas[rng() % 4]), dG = parse(deltas[rng() % 4]);
        auto R0 = structure_residuals(F, G, p.system.delta, f);
        auto R1 = structure_residuals(F + dF, G + dG, p.system.delta, f);
        FunctionTable fns = bind_functions(p.system);
        for (int i = 0; i < 3; ++i) {
            Expr expected = -(diff(f[i][0], kUx) * dF + diff(f[i][0], kVx) * dG);
            CAPTURE(e->key);
            CHECK(is_zero(R1[i] - R0[i] - expected, zo, fns));
        }
    }
}

TEST_CASE("system+frame JSON round trip") {
    Problem p = get("ex3.8", Instantiation{{{"a", 1.5}}, -1, {{"phi", "s + s^3"}}, false});
    auto j = problem_to_json(p);
    Problem q = problem_from_json(j);
    CHECK(q.system.delta == -1);
    CHECK(q.system.label == "ex3.8");
    CHECK(verify(q.system, q.frame).passed);
    CHECK(problem_to_json(q) == j);
    CHECK_THROWS_AS(problem_from_json(nlohmann::json::parse(R"({"F":"u","G":"v","delta":1,"frame":[["1","2"]]})")),
                    SpecError);
}
