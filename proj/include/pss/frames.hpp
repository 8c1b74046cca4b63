#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pss/eval.hpp"
#include "pss/expr.hpp"
#include "pss/zero_test.hpp"

namespace pss {

class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParamBinding {
    std::optional<double> value;    // unset: free, sampled during verification
    std::vector<double> exclusions;  // forbidden values
    std::vector<Interval> range;     // sampling domain when free; default box if empty
};

// u_xt = F, v_xt = G with delta = +1 (K = -1) or delta = -1 (K = +1).
struct SystemSpec {
    std::string label;
    Expr F;
    Expr G;
    int delta = 1;
    std::map<std::string, ParamBinding> params;
    FunctionTable functions;
};

// f[i][0] = f_{i1} (dx coefficient), f[i][1] = f_{i2} (dt coefficient).
using Frame = std::array<std::array<Expr, 2>, 3>;

struct Problem {
    SystemSpec system;
    Frame frame;
};

// Binding, validation and sampling support.
Expr bind_params(const Expr& e, const SystemSpec& sys);
Frame bind_params(const Frame& fr, const SystemSpec& sys);
FunctionTable bind_functions(const SystemSpec& sys);
void validate(const SystemSpec& sys, const Frame* fr = nullptr);
SampleBox sample_box(const SystemSpec& sys, const SampleBox& base = {});
Frame map_frame(const Frame& fr, const std::function<Expr(const Expr&)>& f);
Frame zero_frame();

// Entry (i, j) is true when f_{i1} is free of u, v (j = 0) or f_{i2} is free of ux, vx (j = 1).
using DependencyTable = std::array<std::array<bool, 2>, 3>;
DependencyTable check_dependencies(const Frame& fr, const ZeroTestOptions& opts = {}, const FunctionTable& fns = {});

// Sum of squared 2x2 minors of d(f_11, f_21, f_31)/d(ux, vx), and f11 f22 - f12 f21.
Expr jacobian_minor_sum(const Frame& fr);
Expr area_form(const Frame& fr);

struct Witness {
    std::map<Sym, double> point;
    double minor_sum = 0.0;
    double area = 0.0;
};

inline constexpr double kWitnessThreshold = 1e-6;

// First sampled point at which every expression is at least `threshold` in magnitude.
std::optional<std::pair<std::map<Sym, double>, std::vector<double>>> find_witness(const std::vector<Expr>& exprs,
                                                                                 const ZeroTestOptions& opts,
                                                                                 const FunctionTable& fns,
                                                                                 double threshold);

std::optional<Witness> regularity_witness(const Frame& fr, const ZeroTestOptions& opts = {},
                                          const FunctionTable& fns = {}, double threshold = kWitnessThreshold);

std::array<Expr, 3> structure_residuals(const Expr& F, const Expr& G, int delta, const Frame& fr);
std::array<Expr, 3> structure_residuals(const SystemSpec& sys, const Frame& fr);

struct Metric {
    Expr g11, g12, g22;
};
Metric metric(const Frame& fr);

bool genericity(const SystemSpec& sys, const ZeroTestOptions& opts = {});

struct VerifyOptions {
    ZeroTestOptions zero;
    double witness_threshold = kWitnessThreshold;
    nlohmann::json to_json() const;
};

struct ConditionResult {
    std::string id;
    std::string description;
    bool holds = false;
    double worst_abs = 0.0;
    double worst_rel = 0.0;
    std::vector<std::string> residuals;
    std::vector<std::string> notes;
    std::map<std::string, double> point;
};

struct VerificationReport {
    std::string label;
    int delta = 1;
    bool passed = false;
    std::vector<ConditionResult> conditions;  // C1..C6
    std::optional<std::string> error;
    nlohmann::json tolerances;

    const ConditionResult& condition(const std::string& id) const;
    nlohmann::json to_json() const;
};

VerificationReport verify(const SystemSpec& sys, const Frame& fr, const VerifyOptions& opts = {});

// JSON "system+frame" schema.
Problem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const Problem& p);
nlohmann::json point_to_json(const std::map<Sym, double>& p);

}  // namespace pss
