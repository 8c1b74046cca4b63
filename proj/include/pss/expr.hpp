#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pss {

// The four jet coordinates of the hyperbolic class: u, u_x, v, v_x.
enum class Var : std::uint8_t { U, Ux, V, Vx };

/// A symbol is either one of the four jet coordinates or a named real parameter.
class Sym {
public:
    static Sym var(Var v) { return Sym(v, {}); }
    static Sym param(std::string name);

    bool is_var() const { return name_.empty(); }
    bool is_param() const { return !name_.empty(); }
    Var var() const { return var_; }
    const std::string& name() const { return name_; }

    std::string to_string() const;

    auto operator<=>(const Sym& o) const {
        if (is_var() != o.is_var()) return is_var() ? std::strong_ordering::less : std::strong_ordering::greater;
        if (is_var()) return var_ <=> o.var_;
        return name_ <=> o.name_;
    }
    bool operator==(const Sym& o) const = default;

private:
    Sym(Var v, std::string name) : var_(v), name_(std::move(name)) {}
    Var var_ = Var::U;
    std::string name_;
};

inline const Sym kU = Sym::var(Var::U);
inline const Sym kUx = Sym::var(Var::Ux);
inline const Sym kV = Sym::var(Var::V);
inline const Sym kVx = Sym::var(Var::Vx);

struct Rational {
    long num = 0;
    long den = 1;

    static Rational from_double(double x);  // throws if x is not a small-denominator rational
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool is_integer() const { return den == 1; }
    Rational operator+(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    auto operator<=>(const Rational& o) const { return (num * o.den) <=> (o.num * den); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

enum class Kind : std::uint8_t { Const, Symbol, Power, Product, Sum, Neg, Apply };

enum class Builtin : std::uint8_t { Exp, Sin, Cos, Sinh, Cosh, Log, User };

const char* builtin_name(Builtin fn);

class ExprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Node;

/// Immutable expression tree. Copies share structure.
class Expr {
public:
    Expr();  // zero
    Expr(double value);  // NOLINT(google-explicit-constructor)
    Expr(int value) : Expr(static_cast<double>(value)) {}  // NOLINT
    Expr(const Sym& s);  // NOLINT

    static Expr sum(std::vector<Expr> terms);
    static Expr product(std::vector<Expr> factors);
    static Expr power(Expr base, Rational exponent);
    static Expr neg(Expr e);
    static Expr apply(Builtin fn, Expr arg);
    // User function node; `deriv[k]` counts derivatives with respect to argument k.
    static Expr user(std::string name, std::vector<int> deriv, std::vector<Expr> args);
    static Expr user(std::string name, std::vector<Expr> args);

    Kind kind() const;
    double value() const;                    // Const
    const Sym& sym() const;                  // Symbol
    const std::vector<Expr>& args() const;   // Sum, Product, Neg, Power(base), Apply
    Rational exponent() const;               // Power
    Builtin fn() const;                      // Apply
    const std::string& fn_name() const;      // Apply (User)
    const std::vector<int>& deriv() const;   // Apply (User)
    std::size_t hash() const;

    bool is_const() const { return kind() == Kind::Const; }
    bool is_const(double v) const { return is_const() && value() == v; }

    const Node* node() const { return node_.get(); }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

int compare(const Expr& a, const Expr& b);
inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
inline bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, Rational exponent);
Expr exp(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr sinh(const Expr& e);
Expr cosh(const Expr& e);
Expr log(const Expr& e);
Expr sqrt(const Expr& e);

/// Canonical form: flattened sums of products, constants folded, like terms and
/// like factors collected, products distributed over sums, deterministic order.
Expr simplify(const Expr& e);

/// Partial derivative with respect to one of the jet coordinates. The four
/// coordinates are independent symbols. Differentiating by a parameter is an error.
Expr diff(const Expr& e, const Sym& s);

/// Same as diff() but also accepts parameters (internal use: data functions of x, t).
Expr derivative(const Expr& e, const Sym& s);

/// Highest total derivative order carried by a formal user-function node.
inline constexpr int kMaxUserDerivative = 2;

Expr substitute(const Expr& e, const std::map<Sym, Expr>& bindings);

std::set<Sym> free_symbols(const Expr& e);
std::set<std::string> user_functions(const Expr& e);
bool depends_on(const Expr& e, const Sym& s);
std::size_t node_count(const Expr& e);

std::string to_string(const Expr& e);
std::string format_double(double v);

}  // namespace pss
