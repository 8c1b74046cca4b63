#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pss/expr.hpp"

namespace pss {

class EvalError : public ExprError {
public:
    enum class Reason { UnboundSymbol, UnboundFunction, Domain };
    EvalError(Reason r, const std::string& what) : ExprError(what), reason_(r) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

// Numerical user function: receives argument values and the derivative multi-index.
using UserFn = std::function<double(std::span<const double> args, std::span<const int> deriv)>;

// A user function given by a formula in its formal arguments (parameters named `args`).
struct FunctionDef {
    std::vector<std::string> args;
    Expr body;
};

class FunctionTable {
public:
    void define(const std::string& name, FunctionDef def);
    void define(const std::string& name, std::vector<std::string> args, const std::string& body);
    void define_callable(const std::string& name, std::size_t arity, UserFn fn);
    // One-argument function with its first and second derivatives.
    void define_unary(const std::string& name, std::function<double(double)> f, std::function<double(double)> f1,
                      std::function<double(double)> f2);

    bool has(const std::string& name) const { return defs_.count(name) || callables_.count(name); }
    const FunctionDef* def(const std::string& name) const;
    const UserFn* callable(const std::string& name) const;
    const std::map<std::string, FunctionDef>& defs() const { return defs_; }
    void merge(const FunctionTable& other);
    // Copy with every formula body transformed by f.
    FunctionTable map_bodies(const std::function<Expr(const Expr&)>& f) const;

    // Replaces every node of a formula-defined function by its (differentiated) body.
    Expr inline_defs(const Expr& e) const;

private:
    std::map<std::string, FunctionDef> defs_;
    std::map<std::string, std::pair<std::size_t, UserFn>> callables_;
};

// Flat stack program over a fixed list of input slots.
class Compiled {
public:
    Compiled() = default;
    Compiled(const Expr& e, const std::vector<Sym>& slots, const FunctionTable& fns = {});

    // Evaluates with slot values in the order given at construction.
    // When max_abs is given it receives the largest magnitude of any intermediate value.
    double operator()(const double* x, double* max_abs = nullptr) const;
    double operator()(std::span<const double> x) const { return (*this)(x.data()); }

private:
    enum class Op : std::uint8_t { Const, Slot, Add, Mul, Neg, PowInt, PowRat, Exp, Sin, Cos, Sinh, Cosh, Log, Call };
    struct Instr {
        Op op;
        std::uint32_t n = 0;  // slot index, operand count, or callable index
        double c = 0.0;       // constant or exponent
        long k = 0;           // integer exponent
        std::int32_t src = -1;  // index into sources_ for domain diagnostics
    };
    std::vector<Instr> code_;
    std::vector<Expr> sources_;
    std::vector<std::pair<UserFn, std::vector<int>>> calls_;
    std::size_t max_stack_ = 0;

    void emit(const Expr& e, const std::map<Sym, std::size_t>& slot_of, const FunctionTable& fns, std::size_t depth);
    [[noreturn]] void domain_error(const Instr& in, const std::string& why) const;
};

double eval(const Expr& e, const std::map<Sym, double>& env, const FunctionTable& fns = {});

}  // namespace pss
