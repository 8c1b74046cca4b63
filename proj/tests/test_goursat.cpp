#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pss/catalog.hpp"
#include "pss/goursat.hpp"
#include "pss/parse.hpp"

using namespace pss;

namespace {

SystemSpec zero_system() {
    SystemSpec s;
    s.label = "zero";
    return s;
}

Frame flat_frame() {
    Frame f = zero_frame();
    f[0][0] = Expr(1.0);
    f[1][1] = Expr(1.0);
    return f;
}

GoursatData entry_data(const std::string& key) { return data_from_spec(entry(key).data); }

std::vector<double> pde_by_level(const SystemSpec& s, const GoursatData& d, std::vector<std::size_t> ns) {
    std::vector<double> r;
    for (auto n : ns) r.push_back(pde_residual(solve(s, d, n, n)));
    return r;
}

}  // namespace

TEST_CASE("solve: separable data of u_xt = 0 are reproduced exactly") {
    Problem p = get("trivial-zero");
    auto sol = solve(p.system, entry_data("trivial-zero"), 17, 33);
    for (std::size_t i = 0; i < sol.nx; ++i)
        for (std::size_t j = 0; j < sol.nt; ++j) {
            auto k = sol.idx(i, j);
            CHECK(sol.u[k] == doctest::Approx(sol.x(i)).epsilon(1e-15));
            CHECK(sol.v[k] == doctest::Approx(sol.t(j)).epsilon(1e-15));
            CHECK(sol.ux[k] == 1.0);
            CHECK(sol.vx[k] == 0.0);
        }
    CHECK(pde_residual(sol) == 0.0);
}

TEST_CASE("property: separable data are exact for u_xt = 0") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        const double a = c(rng), b = c(rng), e = c(rng), u0 = c(rng);
        auto f = [&](const std::string& s) {
            return format_double(u0) + " + " + format_double(a) + "*" + s + " + " + format_double(b) + "*sin(" +
                   format_double(e) + "*" + s + ")";
        };
        auto d = data_from_strings(f("x"), "0.3*x", f("t"), "t^2");
        auto sol = solve(zero_system(), d, 21, 21);
        double worst = 0.0;
        for (std::size_t i = 0; i < sol.nx; ++i)
            for (std::size_t j = 0; j < sol.nt; ++j) {
                const double x = sol.x(i), t = sol.t(j);
                const double exact = u0 + a * (x + t) + b * (std::sin(e * x) + std::sin(e * t));
                worst = std::max(worst, std::abs(sol.u[sol.idx(i, j)] - exact));
                worst = std::max(worst, std::abs(sol.v[sol.idx(i, j)] - (0.3 * x + t * t)));
                worst = std::max(worst, std::abs(sol.ux[sol.idx(i, j)] - (a + b * e * std::cos(e * x))));
            }
        CHECK(worst < 1e-13);
    }
}

TEST_CASE("solve: Konno-Oono residual converges at second order") {
    Problem p = get("konno-oono");
    auto d = data_from_strings("x", "0.2*sin(x)", "0*t", "0");
    auto r = pde_by_level(p.system, d, {33, 65, 129});
    CHECK(r[1] < r[0]);
    const double order = convergence_order(r[1], r[2], 1.0 / 64, 1.0 / 128);
    CHECK(order == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("solve: PLR completes at 129 nodes") {
    Problem p = get("plr");
    auto sol = solve(p.system, entry_data("plr"), 129, 129);
    CHECK(sol.u.size() == 129 * 129);
    CHECK(consistency_residual(sol) < 1e-3);
}

TEST_CASE("solve: errors") {
    SystemSpec s;
    s.F = parse("ux^2");
    SolveOptions o;
    o.cap = 10.0;
    auto d = data_from_strings("5*x", "0", "0", "0");
    try {
        solve(s, d, 33, 33, o);
        FAIL("expected blowup");
    } catch (const Blowup& b) {
        CHECK(b.j > 0);
        CHECK(std::string(b.what()).find("exceeds") != std::string::npos);
    }
    CHECK_THROWS_AS(solve(s, data_from_strings("1 + x", "0", "t", "0"), 9, 9), IncompatibleData);
    SystemSpec free = get("cor5.1", Instantiation{{}, 1, {}, true}).system;
    CHECK_THROWS_AS(solve(free, entry_data("cor5.1"), 9, 9), SpecError);
    CHECK_THROWS_AS(data_from_strings("u + x", "0", "0", "0"), std::exception);
}

TEST_CASE("forms_residual") {
    SUBCASE("zero frame on the zero system") {
        auto sol = solve(zero_system(), entry_data("trivial-zero"), 9, 9);
        auto r = forms_residual(zero_frame(), sol, 1);
        CHECK(r.max_all() == 0.0);
    }
    SUBCASE("verified frame refines, flipped f32 stalls") {
        Problem p = get("plr");
        Frame bad = p.frame;
        bad[2][1] = -bad[2][1];
        std::vector<double> good, broken;
        for (std::size_t n : {33, 65, 129}) {
            auto sol = solve(p.system, entry_data("plr"), n, n);
            good.push_back(forms_residual(p.frame, sol, 1).max_all());
            broken.push_back(forms_residual(bad, sol, 1).max_all());
        }
        CHECK(convergence_order(good[1], good[2], 1.0 / 64, 1.0 / 128) > 1.8);
        CHECK(broken[2] > 0.1);
        CHECK(broken[2] > 0.5 * broken[0]);
    }
}

TEST_CASE("curvature") {
    SUBCASE("flat frame") {
        auto sol = solve(get("plr").system, entry_data("plr"), 33, 33);
        CHECK(min_area(flat_frame(), sol) == 1.0);
        CHECK(min_area(zero_frame(), sol) == 0.0);
        auto K = curvature(flat_frame(), sol);
        CHECK(K.degenerate == 0);
        CHECK(K.max_deviation(0.0) <= 1e-10);
    }
    SUBCASE("pss and ss targets") {
        for (const char* key : {"plr", "ex3.4"}) {
            Problem p = get(key);
            auto sol = solve(p.system, entry_data(key), 129, 129);
            auto K = curvature(p.frame, sol);
            CAPTURE(key);
            CHECK(K.max_deviation(-p.system.delta) < 1e-2);
            CHECK(K.degenerate_fraction() == 0.0);
        }
    }
    SUBCASE("Konno-Oono with v = 0 is degenerate everywhere") {
        Problem p = get("konno-oono");
        auto d = data_from_strings("x", "0", "0", "0");
        auto K = curvature(p.frame, solve(p.system, d, 33, 33));
        CHECK(K.degenerate_fraction() == 1.0);
        auto rep = validate(p.system, p.frame, d);
        CHECK_FALSE(rep.passed);
        REQUIRE_FALSE(rep.failures.empty());
        CHECK(rep.failures.back().find("degenerate") != std::string::npos);
    }
}

TEST_CASE("validate: flagship runs") {
    Problem plr = get("plr");
    auto rep = validate(plr.system, plr.frame, entry_data("plr"));
    CHECK(rep.passed);
    CHECK(rep.levels.size() == 4);
    for (int d : {1, -1}) {
        Instantiation in;
        in.delta = d;
        Problem p = get("ex3.8", in);
        CHECK(validate(p.system, p.frame, entry_data("ex3.8")).passed);
    }
    auto j = rep.to_json();
    CHECK(j["tolerances"]["min_order"] == 1.8);
    CHECK(j["levels"][3]["n"] == 257);
}

TEST_CASE("property: second-order geometry on every verified entry") {
    ValidateOptions o;
    for (const auto& e : catalog()) {
        if (e.kind != EntryKind::Hyperbolic) continue;
        for (int d : e.deltas) {
            Instantiation in;
            in.delta = d;
            Problem p = get(e.key, in);
            auto rep = validate(p.system, p.frame, data_from_spec(e.data), o);
            CAPTURE(e.key);
            CAPTURE(d);
            CHECK(rep.passed);
            for (double ord : {rep.pde_order, rep.forms_order, rep.k_order}) {
                CHECK(ord >= 1.8);
                CHECK(ord <= 2.5);
            }
            for (std::size_t k = 1; k < rep.levels.size(); ++k) {
                CHECK(rep.levels[k].forms < rep.levels[k - 1].forms);
                CHECK(rep.levels[k].k_error < rep.levels[k - 1].k_error);
            }
        }
    }
}

TEST_CASE("grid CSV and data JSON") {
    auto sol = solve(zero_system(), entry_data("trivial-zero"), 3, 2);
    std::ostringstream os;
    write_grid_csv(os, sol);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x,t,u,v,ux,vx,K");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 6);
    auto d = entry_data("plr");
    auto d2 = data_from_json(data_to_json(d));
    CHECK(data_to_json(d2) == data_to_json(d));
}

TEST_CASE("property: validate is deterministic") {
    Problem p = get("cor5.1");
    ValidateOptions o;
    o.levels = {17, 33};
    auto a = validate(p.system, p.frame, entry_data("cor5.1"), o).to_json().dump();
    o.parallel = false;
    CHECK(validate(p.system, p.frame, entry_data("cor5.1"), o).to_json().dump() == a);
}
