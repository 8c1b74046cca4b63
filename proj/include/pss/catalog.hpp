#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pss/frames.hpp"

namespace pss {

class UnknownKey : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParamViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CertificateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EntryKind {
    Hyperbolic,          // u_xt = F, v_xt = G describing pss/ss
    EvolutionReference,  // frame of an evolution system; F, G are placeholders
    FlatReference,       // flat test geometry
};

struct ParamSpec {
    std::string name;
    double fallback = 1.0;                // default value
    std::vector<double> exclusions;       // forbidden values
    std::vector<double> allowed;          // if nonempty, the only admissible values
    std::vector<Interval> draw{{-2.0, -0.2}, {0.2, 2.0}};  // random-draw domain
};

// A function supplied by the user at instantiation time (or fixed by the entry).
struct FunctionSlot {
    std::string name;
    std::vector<std::string> args;
    std::string fallback;  // default body
    bool user_choice = true;
    // Strict monotonicity is checked on this interval for one-argument slots.
    std::optional<Interval> monotone_on;
};

// Characteristic data on x = 0 and t = 0: u(x,0), v(x,0) in x and u(0,t), v(0,t) in t.
struct DataSpec {
    std::string u_x0, v_x0, u_0t, v_0t;
};

struct CatalogEntry {
    std::string key;
    std::string title;
    std::string provenance;
    EntryKind kind = EntryKind::Hyperbolic;
    std::vector<int> deltas;  // admissible delta values; the first is the default
    std::vector<ParamSpec> params;
    std::vector<FunctionSlot> functions;
    std::string F, G;
    std::array<std::array<std::string, 2>, 3> frame;
    DataSpec data;
    // Extra admissibility checks over bound parameter values (throws ParamViolation).
    std::function<void(const Problem&)> check;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& entry(const std::string& key);

struct Instantiation {
    std::map<std::string, double> values;         // overrides of defaults
    std::optional<int> delta;                     // default: first admissible value
    std::map<std::string, std::string> functions;  // body overrides for function slots
    bool free_params = false;                     // leave unspecified parameters free
};

Problem get(const std::string& key, const Instantiation& inst = {});
Problem get(const std::string& key, const std::map<std::string, double>& values);

// Random admissible parameter values for an entry.
std::map<std::string, double> draw(const CatalogEntry& e, std::mt19937_64& rng);

struct Reduction {
    std::string source;
    std::string target;
    int delta = 1;
    std::map<std::string, std::string> params;     // source parameter -> expression in target parameters
    std::map<std::string, std::string> functions;  // source function slot -> body
    bool frame_equal = true;
};

const std::vector<Reduction>& reductions();

struct ReductionCertificate {
    Reduction reduction;
    Problem reduced;  // source instantiated at the reduction values
    Problem target;
    ZeroTestResult F, G;
    std::array<std::array<ZeroTestResult, 2>, 3> frame{};
    bool certified = false;
    nlohmann::json to_json() const;
};

// Throws CertificateFailure when the reduction does not reproduce the target.
ReductionCertificate reduce(const std::string& source, const std::string& target, const ZeroTestOptions& opts = {});
// Same, but returns the failed certificate instead of throwing.
ReductionCertificate check_reduction(const Reduction& r, const ZeroTestOptions& opts = {});

nlohmann::json entry_to_json(const CatalogEntry& e);

// Sign change or vanishing of name' on a 65-point grid of the interval; nullopt if strictly monotone.
std::optional<std::string> monotone_violation(const FunctionTable& fns, const std::string& name, const Interval& iv);

}  // namespace pss
