#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pss/catalog.hpp"
#include "pss/frames.hpp"

namespace pss {

class GoursatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class Blowup : public GoursatError {
public:
    Blowup(const std::string& what, std::size_t i, std::size_t j) : GoursatError(what), i(i), j(j) {}
    std::size_t i, j;
};
class NonConvergence : public GoursatError {
public:
    using GoursatError::GoursatError;
};
class IncompatibleData : public GoursatError {
public:
    using GoursatError::GoursatError;
};

// Characteristic data: u(x,0), v(x,0) in the parameter x and u(0,t), v(0,t) in the parameter t.
struct GoursatData {
    Expr u_x0, v_x0, u_0t, v_0t;
    double X = 1.0, T = 1.0;
};

inline const Sym kX = Sym::param("x");
inline const Sym kT = Sym::param("t");

GoursatData data_from_strings(const std::string& u_x0, const std::string& v_x0, const std::string& u_0t,
                              const std::string& v_0t, double X = 1.0, double T = 1.0);
GoursatData data_from_spec(const DataSpec& d, double X = 1.0, double T = 1.0);
// u = a x + b t + c sin(pi x) sin-bump in t, amplitudes at most 0.5, compatible at the corner by construction.
GoursatData random_data(std::mt19937_64& rng, double X = 1.0, double T = 1.0);
nlohmann::json data_to_json(const GoursatData& d);
GoursatData data_from_json(const nlohmann::json& j);

struct SolveOptions {
    int sweeps = 2;
    double cap = 1e6;
    double fixed_point_tol = 1e-2;  // last-sweep relative change allowed per cell
    nlohmann::json to_json() const;
};

// Node (i, j) sits at x = i hx, t = j ht. Arrays are indexed i * nt + j.
struct SolutionGrid {
    std::size_t nx = 0, nt = 0;
    double hx = 0.0, ht = 0.0;
    std::vector<double> u, v, ux, vx;
    SystemSpec system;  // parameters bound

    std::size_t idx(std::size_t i, std::size_t j) const { return i * nt + j; }
    double x(std::size_t i) const { return static_cast<double>(i) * hx; }
    double t(std::size_t j) const { return static_cast<double>(j) * ht; }
    std::array<double, 4> state(std::size_t i, std::size_t j) const {  // u, ux, v, vx
        const auto k = idx(i, j);
        return {u[k], ux[k], v[k], vx[k]};
    }
};

// Slots of every compiled field expression, matching SolutionGrid::state.
const std::vector<Sym>& state_slots();

SolutionGrid solve(const SystemSpec& sys, const GoursatData& data, std::size_t nx, std::size_t nt,
                   const SolveOptions& opts = {});

// Max over interior nodes of |centered d/dt (ux) - F| and the same for v.
double pde_residual(const SolutionGrid& sol);
// Max over interior nodes of |centered d/dx u - ux| and the same for v.
double consistency_residual(const SolutionGrid& sol);

// A scalar field on the grid; NaN marks excluded nodes.
using Field = std::vector<double>;

struct FormsResidual {
    std::array<Field, 3> R;
    std::array<double, 3> max{};
    double max_all() const;
};
FormsResidual forms_residual(const Frame& fr, const SolutionGrid& sol, int delta);

inline constexpr double kDegenerateMetric = 1e-8;

struct CurvatureField {
    Field K;
    std::size_t evaluated = 0;   // interior nodes
    std::size_t degenerate = 0;  // interior nodes with det g below threshold
    double degenerate_fraction() const { return evaluated ? double(degenerate) / double(evaluated) : 1.0; }
    double max_deviation(double target) const;  // max |K - target| over included nodes
};
CurvatureField curvature(const Frame& fr, const SolutionGrid& sol, double degenerate = kDegenerateMetric);

// min over all nodes of |f11 f22 - f12 f21|; small values put K on the degenerate set.
double min_area(const Frame& fr, const SolutionGrid& sol);

struct LevelReport {
    std::size_t n = 0;
    double h = 0.0;
    double pde = 0.0;
    double consistency = 0.0;
    double forms = 0.0;
    double k_error = 0.0;  // max |K + delta|
    double degenerate_fraction = 0.0;
    std::optional<std::string> error;
};

struct ValidateOptions {
    std::vector<std::size_t> levels{33, 65, 129, 257};
    SolveOptions solve;
    double min_order = 1.8;
    double max_k_error = 1e-2;
    double max_degenerate = 0.1;
    double degenerate = kDegenerateMetric;
    bool parallel = true;
    nlohmann::json to_json() const;
};

struct GeometryReport {
    std::string label;
    int delta = 1;
    std::vector<LevelReport> levels;
    // Orders estimated from the last two levels.
    double pde_order = 0.0, forms_order = 0.0, k_order = 0.0;
    bool passed = false;
    std::vector<std::string> failures;
    nlohmann::json tolerances;
    nlohmann::json to_json() const;
};

double convergence_order(double coarse, double fine, double h_coarse, double h_fine);

GeometryReport validate(const SystemSpec& sys, const Frame& fr, const GoursatData& data,
                        const ValidateOptions& opts = {});

// CSV with header x,t,u,v,ux,vx,K (K empty when not supplied or excluded).
void write_grid_csv(std::ostream& os, const SolutionGrid& sol, const Field* K = nullptr);

}  // namespace pss
