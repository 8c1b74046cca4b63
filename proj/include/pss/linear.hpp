#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pss/frames.hpp"
#include "pss/goursat.hpp"

namespace pss {

class FreeDerivative : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algebra { sl2, su2, so21, so3 };
std::string to_string(Algebra a);

enum class PairForm { TwoByTwo, ThreeByThree };

// Symbolic complex entry; im is zero except for su2.
struct CExpr {
    Expr re, im;
};
using SymMatrix = std::vector<std::vector<CExpr>>;

struct LinearPair {
    int n = 2;
    Algebra algebra = Algebra::sl2;
    int delta = 1;
    SymMatrix A, B;  // Psi_x = A Psi, Psi_t = B Psi
    nlohmann::json to_json() const;
};

// sl2 / su2 for 2x2 and so(2,1) / so(3) for 3x3, chosen by delta.
LinearPair linear_pair(const Frame& fr, int delta, PairForm form);

// Entries that vanish identically when A, B lie in the algebra.
std::vector<Expr> algebra_conditions(const LinearPair& lp);

// A_t - B_x + AB - BA with u_xt -> F, v_xt -> G. Parameters are bound from sys.
// Throws FreeDerivative when A depends on u, v (needs u_t, v_t) or B on u_x, v_x (needs u_xx, v_xx).
SymMatrix zc_residual(const LinearPair& lp, const SystemSpec& sys, const ZeroTestOptions& opts = {});

struct ZcReport {
    bool zero = false;
    std::optional<std::string> error;
    std::vector<std::string> nonzero;  // entries (i,j) failing is_zero
    nlohmann::json to_json() const;
};
ZcReport zc_check(const LinearPair& lp, const SystemSpec& sys, const ZeroTestOptions& opts = {});

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Move { XPlus, XMinus, TPlus, TMinus };

struct LatticePath {
    std::size_t i0 = 0, j0 = 0;
    std::vector<Move> moves;
    bool closed() const;
};

// Moves as letters: R = +x, L = -x, U = +t, D = -t.
LatticePath parse_path(std::size_t i0, std::size_t j0, const std::string& moves);
// Counterclockwise boundary of the node rectangle nearest to [x0, x1] x [t0, t1].
LatticePath rectangle_path(const SolutionGrid& sol, double x0, double t0, double x1, double t1);

struct TransportStep {
    std::size_t i = 0, j = 0;
    double length = 0.0;  // path length travelled
    CVector psi;
    std::complex<double> det;  // det of the fundamental matrix
    double norm = 0.0;
    double quadratic = 0.0;  // psi^H J psi with J = diag(-delta, 1, 1) for 3x3, |psi|^2 otherwise
};

struct TransportTrace {
    Algebra algebra = Algebra::sl2;
    std::vector<TransportStep> steps;
    CMatrix holonomy;  // fundamental matrix at the end of the path

    double length() const { return steps.empty() ? 0.0 : steps.back().length; }
    double deviation() const;  // |psi_end - psi_start| / |psi_start|
    double det_drift() const;  // max |det - 1|
    double norm_drift() const;  // max ||psi| - |psi_0||
    double quadratic_drift() const;
    void write_csv(std::ostream& os) const;
    nlohmann::json summary() const;
};

TransportTrace transport(const LinearPair& lp, const SolutionGrid& sol, const LatticePath& path, const CVector& psi0);

}  // namespace pss
