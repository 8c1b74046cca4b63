#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "json.hpp"
#include "pss/catalog.hpp"
#include "pss/frames.hpp"

namespace pss {

class ClassifyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class ConstraintViolation : public ClassifyError {
public:
    using ClassifyError::ClassifyError;
};
class DegenerateW : public ClassifyError {
public:
    using ClassifyError::ClassifyError;
};
class ProportionalGradients : public ClassifyError {
public:
    using ClassifyError::ClassifyError;
};
class NonInvertible : public ClassifyError {
public:
    using ClassifyError::ClassifyError;
};
class ThirdResidualNonzero : public ClassifyError {
public:
    using ClassifyError::ClassifyError;
};

// Which row of the first column is constant: T1 f31 = eta, T2 f21 = eta, T3 f11 = eta.
enum class Which { T1, T2, T3 };
std::string to_string(Which w);
Which which_from_string(const std::string& s);

// Case (i): phi(xi), xi = a v + b u, with functions g, h of (ux, vx).
struct Case1Params {
    double a = 0.0, b = 1.0, lambda = 0.0, mu = 1.0, eta = 1.0;
    int delta = 1;
    Expr g, h;
    FunctionDef phi{{"s"}, Expr(Sym::param("s"))};
    FunctionTable functions;  // further user functions referenced by g, h
    Which which = Which::T2;
};

// Case (ii): first-column rows a_i ux + b_i vx and a function p(u, v).
// For T1 the second linear row is (a2, b2); for T2/T3 it is (a3, b3).
struct Case2Params {
    double a1 = 1.0, b1 = 0.0, a_other = 0.0, b_other = 1.0, eta = 1.0;
    int delta = 1;
    FunctionDef p{{"s", "r"}, Expr(Sym::param("s"))};
    FunctionTable functions;
    Which which = Which::T2;
};

struct Case2Constants {
    double gamma, alpha, beta, tau;
};
Case2Constants case2_constants(const Case2Params& cp);

struct BuildResult {
    Problem problem;
    std::map<std::string, double> constants;  // gamma, alpha, beta, tau for case (ii)
    std::map<Sym, double> witness;            // point where W (case i) or the area form is nonzero
};

BuildResult build_case1(const Case1Params& cp, const ZeroTestOptions& opts = {});
BuildResult build_case2(const Case2Params& cp, const ZeroTestOptions& opts = {});

struct DerivedFG {
    Expr F, G;
    Expr W;              // determinant of the two rows used
    std::array<int, 2> rows;
    Expr third;          // remaining residual after substitution (must vanish)
};

// Solves the two residual equations with invertible coefficient matrix for (F, G).
DerivedFG derive_fg(const Frame& fr, int delta, const ZeroTestOptions& opts = {}, const FunctionTable& fns = {});

// Reference closed forms. For T1 case (ii) `corrected` replaces the
// 1/gamma^2 in front of the ux term of G by 1/gamma.
std::pair<Expr, Expr> printed_case1_fg(const Case1Params& cp);
std::pair<Expr, Expr> printed_case2_fg(const Case2Params& cp, bool corrected = false);

struct LemmaData {
    Expr psi0, psi1, psi2;  // functions of (u, v)
    Expr rho1, rho2;        // functions of (ux, vx)
    int epsilon = 1;
};

struct LemmaResidual {
    Expr residual;
    Expr determinant;  // rho1_ux rho2_vx - rho1_vx rho2_ux
};
LemmaResidual lemma2_residual(const LemmaData& d);

enum class LemmaCase { I, II, III, NoMatch };
std::string to_string(LemmaCase c);

struct LemmaClassification {
    LemmaCase kind = LemmaCase::NoMatch;
    std::map<std::string, double> constants;  // II: lambda/mu ratio; III: a1, b1, a2, b2
    std::vector<std::string> notes;
};
LemmaClassification lemma2_classify(const LemmaData& d, const ZeroTestOptions& opts = {},
                                    const FunctionTable& fns = {});

// Lemma data carried by the constant row of a frame.
LemmaData lemma_embedding(const Frame& fr, Which w, int delta);

// f1j <-> f2j, f3j -> -f3j.
Frame t3_from_t2(const Frame& fr);

// Construction parameters reproducing a catalog instantiation.
using CaseParams = std::variant<Case1Params, Case2Params>;
CaseParams corollary_params(const std::string& key, const Instantiation& inst = {});

Case1Params case1_from_json(const nlohmann::json& j);
Case2Params case2_from_json(const nlohmann::json& j);
// Builds from {"case": 1 | 2, ...}.
BuildResult build_from_json(const nlohmann::json& j, const ZeroTestOptions& opts = {});

}  // namespace pss
