#include "pss/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>

namespace pss {

struct Node {
    Kind kind = Kind::Const;
    double value = 0.0;
    Sym sym = Sym::var(Var::U);
    std::vector<Expr> args;
    Rational exponent{1, 1};
    Builtin fn = Builtin::Exp;
    std::string fn_name;
    std::vector<int> deriv;
    std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::shared_ptr<const Node> finish(Node n) {
    std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
    switch (n.kind) {
    case Kind::Const: h = mix(h, std::hash<double>{}(n.value)); break;
    case Kind::Symbol:
        h = mix(h, n.sym.is_var() ? static_cast<std::size_t>(n.sym.var()) : std::hash<std::string>{}(n.sym.name()));
        break;
    case Kind::Power:
        h = mix(h, static_cast<std::size_t>(n.exponent.num * 31 + n.exponent.den));
        break;
    case Kind::Apply:
        h = mix(h, static_cast<std::size_t>(n.fn));
        h = mix(h, std::hash<std::string>{}(n.fn_name));
        for (int d : n.deriv) h = mix(h, static_cast<std::size_t>(d));
        break;
    default: break;
    }
    for (const auto& a : n.args) h = mix(h, a.hash());
    n.hash = h;
    return std::make_shared<const Node>(std::move(n));
}

}  // namespace

// ---------------------------------------------------------------------------
// Sym / Rational

Sym Sym::param(std::string name) {
    if (name.empty()) throw ExprError("parameter name must be nonempty");
    return Sym(Var::U, std::move(name));
}

std::string Sym::to_string() const {
    if (is_param()) return name_;
    switch (var_) {
    case Var::U: return "u";
    case Var::Ux: return "ux";
    case Var::V: return "v";
    case Var::Vx: return "vx";
    }
    return "?";
}

namespace {
Rational normalized(long num, long den) {
    if (den == 0) throw ExprError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational{num, den};
}
}  // namespace

Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) throw ExprError("exponent is not finite");
    for (long den = 1; den <= 1000; ++den) {
        double scaled = x * static_cast<double>(den);
        double r = std::round(scaled);
        if (std::abs(scaled - r) <= 1e-12 * std::max(1.0, std::abs(scaled)) && std::abs(r) < 1e9)
            return normalized(static_cast<long>(r), den);
    }
    throw ExprError("exponent " + format_double(x) + " is not a rational number; write exp(...) instead");
}

Rational Rational::operator+(const Rational& o) const { return normalized(num * o.den + o.num * den, den * o.den); }
Rational Rational::operator*(const Rational& o) const { return normalized(num * o.num, den * o.den); }

const char* builtin_name(Builtin fn) {
    switch (fn) {
    case Builtin::Exp: return "exp";
    case Builtin::Sin: return "sin";
    case Builtin::Cos: return "cos";
    case Builtin::Sinh: return "sinh";
    case Builtin::Cosh: return "cosh";
    case Builtin::Log: return "log";
    case Builtin::User: return "<user>";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Construction

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
    Node n;
    n.kind = Kind::Const;
    n.value = value == 0.0 ? 0.0 : value;  // no negative zero
    node_ = finish(std::move(n));
}

Expr::Expr(const Sym& s) {
    Node n;
    n.kind = Kind::Symbol;
    n.sym = s;
    node_ = finish(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
    if (terms.empty()) return Expr(0.0);
    if (terms.size() == 1) return terms.front();
    Node n;
    n.kind = Kind::Sum;
    n.args = std::move(terms);
    return Expr(finish(std::move(n)));
}

Expr Expr::product(std::vector<Expr> factors) {
    if (factors.empty()) return Expr(1.0);
    if (factors.size() == 1) return factors.front();
    Node n;
    n.kind = Kind::Product;
    n.args = std::move(factors);
    return Expr(finish(std::move(n)));
}

Expr Expr::power(Expr base, Rational exponent) {
    if (exponent.num == exponent.den) return base;
    Node n;
    n.kind = Kind::Power;
    n.args = {std::move(base)};
    n.exponent = normalized(exponent.num, exponent.den);
    return Expr(finish(std::move(n)));
}

Expr Expr::neg(Expr e) {
    Node n;
    n.kind = Kind::Neg;
    n.args = {std::move(e)};
    return Expr(finish(std::move(n)));
}

Expr Expr::apply(Builtin fn, Expr arg) {
    if (fn == Builtin::User) throw ExprError("use Expr::user for user functions");
    Node n;
    n.kind = Kind::Apply;
    n.fn = fn;
    n.args = {std::move(arg)};
    return Expr(finish(std::move(n)));
}

Expr Expr::user(std::string name, std::vector<int> deriv, std::vector<Expr> args) {
    if (name.empty()) throw ExprError("user function needs a name");
    if (args.empty()) throw ExprError("user function '" + name + "' needs at least one argument");
    if (deriv.empty()) deriv.assign(args.size(), 0);
    if (deriv.size() != args.size())
        throw ExprError("derivative index of '" + name + "' does not match its arity");
    int order = 0;
    for (int d : deriv) {
        if (d < 0) throw ExprError("negative derivative order");
        order += d;
    }
    if (order > kMaxUserDerivative)
        throw ExprError("derivative of order " + std::to_string(order) + " of user function '" + name +
                        "' is not supported (at most " + std::to_string(kMaxUserDerivative) + ")");
    Node n;
    n.kind = Kind::Apply;
    n.fn = Builtin::User;
    n.fn_name = std::move(name);
    n.deriv = std::move(deriv);
    n.args = std::move(args);
    return Expr(finish(std::move(n)));
}

Expr Expr::user(std::string name, std::vector<Expr> args) { return user(std::move(name), {}, std::move(args)); }

Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const Sym& Expr::sym() const { return node_->sym; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
Rational Expr::exponent() const { return node_->exponent; }
Builtin Expr::fn() const { return node_->fn; }
const std::string& Expr::fn_name() const { return node_->fn_name; }
const std::vector<int>& Expr::deriv() const { return node_->deriv; }
std::size_t Expr::hash() const { return node_->hash; }

// ---------------------------------------------------------------------------
// Ordering

namespace {

int kind_rank(Kind k) {
    switch (k) {
    case Kind::Const: return 0;
    case Kind::Symbol: return 1;
    case Kind::Apply: return 2;
    case Kind::Product: return 3;
    case Kind::Sum: return 4;
    case Kind::Neg: return 5;
    case Kind::Power: return 6;
    }
    return 7;
}

template <class T>
int cmp3(const T& a, const T& b) {
    return a < b ? -1 : (b < a ? 1 : 0);
}

int compare_args(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = compare(a[i], b[i]); c != 0) return c;
    return cmp3(a.size(), b.size());
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return 0;
    // Powers are ordered by (base, exponent) so that u < u^2 < v.
    if (a.kind() == Kind::Power || b.kind() == Kind::Power) {
        const Expr& ba = a.kind() == Kind::Power ? a.args()[0] : a;
        const Expr& bb = b.kind() == Kind::Power ? b.args()[0] : b;
        if (int c = compare(ba, bb); c != 0) return c;
        Rational ea = a.kind() == Kind::Power ? a.exponent() : Rational{1, 1};
        Rational eb = b.kind() == Kind::Power ? b.exponent() : Rational{1, 1};
        if (ea == eb) return 0;
        return ea < eb ? -1 : 1;
    }
    if (int c = cmp3(kind_rank(a.kind()), kind_rank(b.kind())); c != 0) return c;
    switch (a.kind()) {
    case Kind::Const: return cmp3(a.value(), b.value());
    case Kind::Symbol: {
        auto o = a.sym() <=> b.sym();
        return o < 0 ? -1 : (o > 0 ? 1 : 0);
    }
    case Kind::Apply: {
        if (int c = cmp3(static_cast<int>(a.fn()), static_cast<int>(b.fn())); c != 0) return c;
        if (int c = cmp3(a.fn_name(), b.fn_name()); c != 0) return c;
        if (int c = cmp3(a.deriv(), b.deriv()); c != 0) return c;
        return compare_args(a.args(), b.args());
    }
    default: return compare_args(a.args(), b.args());
    }
}

// ---------------------------------------------------------------------------
// Light-weight arithmetic (flattening and constant folding only)

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_const(0.0)) return b;
    if (b.is_const(0.0)) return a;
    if (a.is_const() && b.is_const()) return Expr(a.value() + b.value());
    std::vector<Expr> terms;
    for (const Expr* e : {&a, &b}) {
        if (e->kind() == Kind::Sum)
            terms.insert(terms.end(), e->args().begin(), e->args().end());
        else
            terms.push_back(*e);
    }
    return Expr::sum(std::move(terms));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_const(0.0) || b.is_const(0.0)) return Expr(0.0);
    if (a.is_const(1.0)) return b;
    if (b.is_const(1.0)) return a;
    if (a.is_const() && b.is_const()) return Expr(a.value() * b.value());
    std::vector<Expr> factors;
    for (const Expr* e : {&a, &b}) {
        if (e->kind() == Kind::Product)
            factors.insert(factors.end(), e->args().begin(), e->args().end());
        else
            factors.push_back(*e);
    }
    return Expr::product(std::move(factors));
}

Expr operator-(const Expr& a) {
    if (a.is_const()) return Expr(-a.value());
    return Expr(-1.0) * a;
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr pow(const Expr& base, Rational exponent) {
    if (exponent.num == 0) return Expr(1.0);
    if (exponent.num == exponent.den) return base;
    if (base.is_const()) {
        double v = std::pow(base.value(), exponent.value());
        if (std::isfinite(v)) return Expr(v);
    }
    return Expr::power(base, exponent);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_const(1.0)) return a;
    return a * pow(b, Rational{-1, 1});
}

namespace {
Expr apply_folded(Builtin fn, const Expr& e) {
    if (e.is_const()) {
        double x = e.value();
        double r = NAN;
        switch (fn) {
        case Builtin::Exp: r = std::exp(x); break;
        case Builtin::Sin: r = std::sin(x); break;
        case Builtin::Cos: r = std::cos(x); break;
        case Builtin::Sinh: r = std::sinh(x); break;
        case Builtin::Cosh: r = std::cosh(x); break;
        case Builtin::Log: r = x > 0 ? std::log(x) : NAN; break;
        case Builtin::User: break;
        }
        if (std::isfinite(r)) return Expr(r);
    }
    return Expr::apply(fn, e);
}
}  // namespace

Expr exp(const Expr& e) { return apply_folded(Builtin::Exp, e); }
Expr sin(const Expr& e) { return apply_folded(Builtin::Sin, e); }
Expr cos(const Expr& e) { return apply_folded(Builtin::Cos, e); }
Expr sinh(const Expr& e) { return apply_folded(Builtin::Sinh, e); }
Expr cosh(const Expr& e) { return apply_folded(Builtin::Cosh, e); }
Expr log(const Expr& e) { return apply_folded(Builtin::Log, e); }
Expr sqrt(const Expr& e) { return pow(e, Rational{1, 2}); }

// ---------------------------------------------------------------------------
// Canonical simplification

namespace {

constexpr long kExpandPowerLimit = 6;

Expr simplify_sum(const std::vector<Expr>& terms);
Expr simplify_product(const std::vector<Expr>& factors);
Expr simplify_power(const Expr& base, Rational r);

// Splits a canonical term into numeric coefficient and monomial.
std::pair<double, Expr> split_coefficient(const Expr& t) {
    if (t.is_const()) return {t.value(), Expr(1.0)};
    if (t.kind() == Kind::Product && t.args().front().is_const()) {
        std::vector<Expr> rest(t.args().begin() + 1, t.args().end());
        return {t.args().front().value(), Expr::product(std::move(rest))};
    }
    return {1.0, t};
}

Expr with_coefficient(double c, const Expr& mono) {
    if (mono.is_const()) return Expr(c * mono.value());
    if (c == 1.0) return mono;
    std::vector<Expr> f{Expr(c)};
    if (mono.kind() == Kind::Product)
        f.insert(f.end(), mono.args().begin(), mono.args().end());
    else
        f.push_back(mono);
    return Expr::product(std::move(f));
}

void collect_terms(const Expr& t, double& constant, std::map<Expr, double, ExprLess>& acc) {
    if (t.kind() == Kind::Sum) {
        for (const auto& a : t.args()) collect_terms(a, constant, acc);
        return;
    }
    if (t.is_const()) {
        constant += t.value();
        return;
    }
    auto [c, mono] = split_coefficient(t);
    acc[mono] += c;
}

Expr simplify_sum(const std::vector<Expr>& terms) {
    double constant = 0.0;
    std::map<Expr, double, ExprLess> acc;
    for (const auto& t : terms) collect_terms(t, constant, acc);
    std::vector<Expr> out;
    if (constant != 0.0) out.emplace_back(constant);
    for (const auto& [mono, c] : acc) {
        if (c == 0.0) continue;
        out.push_back(with_coefficient(c, mono));
    }
    if (out.empty()) return Expr(0.0);
    if (out.size() == 1) return out.front();
    std::sort(out.begin(), out.end(), ExprLess{});
    return Expr::sum(std::move(out));
}

void collect_factors(const Expr& f, double& coef, std::map<Expr, Rational, ExprLess>& powers) {
    switch (f.kind()) {
    case Kind::Const: coef *= f.value(); return;
    case Kind::Product:
        for (const auto& a : f.args()) collect_factors(a, coef, powers);
        return;
    case Kind::Power: {
        auto it = powers.find(f.args()[0]);
        if (it == powers.end())
            powers.emplace(f.args()[0], f.exponent());
        else
            it->second = it->second + f.exponent();
        return;
    }
    default: {
        auto it = powers.find(f);
        if (it == powers.end())
            powers.emplace(f, Rational{1, 1});
        else
            it->second = it->second + Rational{1, 1};
    }
    }
}

bool is_expandable(const Expr& f) {
    if (f.kind() == Kind::Sum) return true;
    return f.kind() == Kind::Power && f.args()[0].kind() == Kind::Sum && f.exponent().is_integer() &&
           f.exponent().num > 0 && f.exponent().num <= kExpandPowerLimit;
}

Expr simplify_product(const std::vector<Expr>& factors) {
    double coef = 1.0;
    std::map<Expr, Rational, ExprLess> powers;
    for (const auto& f : factors) collect_factors(f, coef, powers);
    if (coef == 0.0) return Expr(0.0);

    std::vector<Expr> out;
    for (const auto& [base, r] : powers) {
        if (r.num == 0) continue;
        Expr p = (r.num == r.den) ? base
                 : base.kind() == Kind::Sum ? Expr::power(base, r)
                                            : simplify_power(base, r);
        if (p.is_const()) {
            coef *= p.value();
        } else if (p.kind() == Kind::Product && p.args().front().is_const()) {
            // A power of a product that distributed into a coefficient.
            coef *= p.args().front().value();
            out.insert(out.end(), p.args().begin() + 1, p.args().end());
        } else {
            out.push_back(p);
        }
    }
    if (coef == 0.0) return Expr(0.0);

    bool expand = std::any_of(out.begin(), out.end(), is_expandable);
    if (expand) {
        std::vector<Expr> terms{Expr(coef)};
        for (const auto& f : out) {
            std::vector<const Expr*> pieces;
            Expr sum_base;
            long reps = 0;
            if (f.kind() == Kind::Sum) {
                sum_base = f;
                reps = 1;
            } else if (is_expandable(f)) {
                sum_base = f.args()[0];
                reps = f.exponent().num;
            }
            if (reps == 0) {
                for (auto& t : terms) t = t * f;
                continue;
            }
            for (long k = 0; k < reps; ++k) {
                std::vector<Expr> next;
                next.reserve(terms.size() * sum_base.args().size());
                for (const auto& t : terms)
                    for (const auto& s : sum_base.args()) next.push_back(t * s);
                terms = std::move(next);
            }
        }
        for (auto& t : terms) t = simplify_product({t});
        return simplify_sum(terms);
    }

    if (out.empty()) return Expr(coef);
    std::sort(out.begin(), out.end(), ExprLess{});
    if (coef != 1.0) out.insert(out.begin(), Expr(coef));
    if (out.size() == 1) return out.front();
    // Re-run factor collection if distribution produced duplicate bases.
    for (std::size_t i = 1; i < out.size(); ++i) {
        const Expr& a = out[i - 1];
        const Expr& b = out[i];
        const Expr& ba = a.kind() == Kind::Power ? a.args()[0] : a;
        const Expr& bb = b.kind() == Kind::Power ? b.args()[0] : b;
        if (!a.is_const() && ba == bb) return simplify_product(out);
    }
    return Expr::product(std::move(out));
}

Expr simplify_power(const Expr& base, Rational r) {
    if (r.num == 0) return Expr(1.0);
    if (r.num == r.den) return base;
    switch (base.kind()) {
    case Kind::Const: {
        double v = std::pow(base.value(), r.value());
        if (std::isfinite(v)) return Expr(v);
        return Expr::power(base, r);
    }
    case Kind::Power:
        if (r.is_integer()) return simplify_power(base.args()[0], base.exponent() * r);
        return Expr::power(base, r);
    case Kind::Product:
        if (r.is_integer()) {
            std::vector<Expr> f;
            for (const auto& a : base.args()) f.push_back(simplify_power(a, r));
            return simplify_product(f);
        }
        if (base.args().front().is_const() && base.args().front().value() > 0) {
            // (c*x)^r = c^r * x^r for c > 0
            std::vector<Expr> rest(base.args().begin() + 1, base.args().end());
            double c = std::pow(base.args().front().value(), r.value());
            return simplify_product({Expr(c), Expr::power(Expr::product(std::move(rest)), r)});
        }
        return Expr::power(base, r);
    case Kind::Sum:
        if (r.is_integer() && r.num > 0 && r.num <= kExpandPowerLimit) {
            return simplify_product({Expr::power(base, r)});
        }
        return Expr::power(base, r);
    default: return Expr::power(base, r);
    }
}

}  // namespace

Expr simplify(const Expr& e) {
    switch (e.kind()) {
    case Kind::Const:
    case Kind::Symbol: return e;
    case Kind::Neg: return simplify_product({Expr(-1.0), simplify(e.args()[0])});
    case Kind::Sum: {
        std::vector<Expr> t;
        t.reserve(e.args().size());
        for (const auto& a : e.args()) t.push_back(simplify(a));
        return simplify_sum(t);
    }
    case Kind::Product: {
        std::vector<Expr> f;
        f.reserve(e.args().size());
        for (const auto& a : e.args()) f.push_back(simplify(a));
        return simplify_product(f);
    }
    case Kind::Power: return simplify_power(simplify(e.args()[0]), e.exponent());
    case Kind::Apply: {
        std::vector<Expr> a;
        for (const auto& x : e.args()) a.push_back(simplify(x));
        if (e.fn() == Builtin::User) return Expr::user(e.fn_name(), e.deriv(), std::move(a));
        return apply_folded(e.fn(), a[0]);
    }
    }
    return e;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr d_raw(const Expr& e, const Sym& s);

Expr d_raw(const Expr& e, const Sym& s) {
    switch (e.kind()) {
    case Kind::Const: return Expr(0.0);
    case Kind::Symbol: return e.sym() == s ? Expr(1.0) : Expr(0.0);
    case Kind::Neg: return -d_raw(e.args()[0], s);
    case Kind::Sum: {
        Expr acc(0.0);
        for (const auto& a : e.args()) acc = acc + d_raw(a, s);
        return acc;
    }
    case Kind::Product: {
        const auto& f = e.args();
        Expr acc(0.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            Expr di = d_raw(f[i], s);
            if (di.is_const(0.0)) continue;
            Expr term = di;
            for (std::size_t j = 0; j < f.size(); ++j)
                if (j != i) term = term * f[j];
            acc = acc + term;
        }
        return acc;
    }
    case Kind::Power: {
        const Expr& b = e.args()[0];
        Expr db = d_raw(b, s);
        if (db.is_const(0.0)) return Expr(0.0);
        Rational r = e.exponent();
        return Expr(r.value()) * pow(b, r + Rational{-1, 1}) * db;
    }
    case Kind::Apply: {
        if (e.fn() != Builtin::User) {
            const Expr& a = e.args()[0];
            Expr da = d_raw(a, s);
            if (da.is_const(0.0)) return Expr(0.0);
            switch (e.fn()) {
            case Builtin::Exp: return e * da;
            case Builtin::Sin: return cos(a) * da;
            case Builtin::Cos: return -(sin(a) * da);
            case Builtin::Sinh: return cosh(a) * da;
            case Builtin::Cosh: return sinh(a) * da;
            case Builtin::Log: return da / a;
            case Builtin::User: break;
            }
            return Expr(0.0);
        }
        Expr acc(0.0);
        for (std::size_t k = 0; k < e.args().size(); ++k) {
            Expr da = simplify(d_raw(e.args()[k], s));
            if (da.is_const(0.0)) continue;
            std::vector<int> deriv = e.deriv();
            deriv[k] += 1;
            acc = acc + Expr::user(e.fn_name(), std::move(deriv), e.args()) * da;
        }
        return acc;
    }
    }
    return Expr(0.0);
}

}  // namespace

Expr derivative(const Expr& e, const Sym& s) { return simplify(d_raw(e, s)); }

Expr diff(const Expr& e, const Sym& s) {
    if (s.is_param()) throw ExprError("cannot differentiate with respect to parameter '" + s.name() + "'");
    return derivative(e, s);
}

// ---------------------------------------------------------------------------
// Traversals

Expr substitute(const Expr& e, const std::map<Sym, Expr>& bindings) {
    std::function<Expr(const Expr&)> rec = [&](const Expr& x) -> Expr {
        switch (x.kind()) {
        case Kind::Const: return x;
        case Kind::Symbol: {
            auto it = bindings.find(x.sym());
            return it == bindings.end() ? x : it->second;
        }
        case Kind::Neg: return Expr::neg(rec(x.args()[0]));
        case Kind::Sum: {
            std::vector<Expr> t;
            for (const auto& a : x.args()) t.push_back(rec(a));
            return Expr::sum(std::move(t));
        }
        case Kind::Product: {
            std::vector<Expr> t;
            for (const auto& a : x.args()) t.push_back(rec(a));
            return Expr::product(std::move(t));
        }
        case Kind::Power: return Expr::power(rec(x.args()[0]), x.exponent());
        case Kind::Apply: {
            std::vector<Expr> t;
            for (const auto& a : x.args()) t.push_back(rec(a));
            if (x.fn() == Builtin::User) return Expr::user(x.fn_name(), x.deriv(), std::move(t));
            return Expr::apply(x.fn(), t[0]);
        }
        }
        return x;
    };
    return simplify(rec(e));
}

namespace {
template <class F>
void walk(const Expr& e, F&& f) {
    f(e);
    for (const auto& a : e.args()) walk(a, f);
}
}  // namespace

std::set<Sym> free_symbols(const Expr& e) {
    std::set<Sym> out;
    walk(e, [&](const Expr& x) {
        if (x.kind() == Kind::Symbol) out.insert(x.sym());
    });
    return out;
}

std::set<std::string> user_functions(const Expr& e) {
    std::set<std::string> out;
    walk(e, [&](const Expr& x) {
        if (x.kind() == Kind::Apply && x.fn() == Builtin::User) out.insert(x.fn_name());
    });
    return out;
}

bool depends_on(const Expr& e, const Sym& s) { return free_symbols(e).count(s) > 0; }

std::size_t node_count(const Expr& e) {
    std::size_t n = 0;
    walk(e, [&](const Expr&) { ++n; });
    return n;
}

// ---------------------------------------------------------------------------
// Printing

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr int kPrecSum = 1;
constexpr int kPrecProduct = 2;
constexpr int kPrecPower = 3;

bool is_negative_term(const Expr& t) {
    if (t.is_const()) return t.value() < 0;
    if (t.kind() == Kind::Neg) return true;
    return t.kind() == Kind::Product && t.args().front().is_const() && t.args().front().value() < 0;
}

Expr negate_term(const Expr& t) {
    if (t.is_const()) return Expr(-t.value());
    if (t.kind() == Kind::Neg) return t.args()[0];
    std::vector<Expr> f = t.args();
    double c = -f.front().value();
    if (c == 1.0)
        f.erase(f.begin());
    else
        f.front() = Expr(c);
    return Expr::product(std::move(f));
}

std::string print(const Expr& e, int parent);

std::string print_rational_exponent(Rational r) {
    if (r.is_integer() && r.num > 0) return std::to_string(r.num);
    if (r.is_integer()) return "(" + std::to_string(r.num) + ")";
    return "(" + std::to_string(r.num) + "/" + std::to_string(r.den) + ")";
}

std::string print_apply(const Expr& e) {
    std::string s;
    if (e.fn() != Builtin::User) {
        s = builtin_name(e.fn());
    } else {
        s = e.fn_name();
        const auto& d = e.deriv();
        int order = std::accumulate(d.begin(), d.end(), 0);
        if (order > 0) {
            if (d.size() == 1) {
                s += std::string(static_cast<std::size_t>(order), '\'');
            } else {
                s += "'[";
                bool first = true;
                for (std::size_t k = 0; k < d.size(); ++k)
                    for (int m = 0; m < d[k]; ++m) {
                        if (!first) s += ",";
                        s += std::to_string(k + 1);
                        first = false;
                    }
                s += "]";
            }
        }
    }
    s += "(";
    for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) s += ", ";
        s += print(e.args()[i], 0);
    }
    return s + ")";
}

std::string print_product(std::vector<Expr> f, int parent) {
    bool negative = false;
    if (!f.empty() && f.front().is_const() && f.front().value() < 0) {
        negative = true;
        double c = -f.front().value();
        if (c == 1.0)
            f.erase(f.begin());
        else
            f.front() = Expr(c);
    }
    std::vector<std::string> num;
    std::vector<Expr> den;
    for (const auto& x : f) {
        if (x.kind() == Kind::Power && x.exponent().num < 0) {
            Rational r = x.exponent();
            r.num = -r.num;
            den.push_back(Expr::power(x.args()[0], r));
        } else {
            num.push_back(print(x, kPrecProduct));
        }
    }
    std::string s = negative ? "-" : "";
    if (num.empty()) {
        s += "1";
    } else {
        for (std::size_t i = 0; i < num.size(); ++i) s += (i ? "*" : "") + num[i];
    }
    if (den.size() == 1) {
        s += "/" + print(den.front(), kPrecPower);
    } else if (!den.empty()) {
        s += "/(";
        for (std::size_t i = 0; i < den.size(); ++i) s += (i ? "*" : "") + print(den[i], kPrecProduct);
        s += ")";
    }
    bool wrap = parent > kPrecProduct || (negative && parent >= kPrecProduct);
    return wrap ? "(" + s + ")" : s;
}

std::string print(const Expr& e, int parent) {
    switch (e.kind()) {
    case Kind::Const: {
        std::string s = format_double(e.value());
        return (e.value() < 0 && parent >= kPrecProduct) ? "(" + s + ")" : s;
    }
    case Kind::Symbol: return e.sym().to_string();
    case Kind::Sum: {
        std::string s;
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            const Expr& t = e.args()[i];
            if (i == 0)
                s += print(t, kPrecSum);
            else if (is_negative_term(t))
                s += " - " + print(negate_term(t), kPrecProduct);
            else
                s += " + " + print(t, kPrecSum);
        }
        return parent > kPrecSum ? "(" + s + ")" : s;
    }
    case Kind::Product: return print_product(e.args(), parent);
    case Kind::Neg: {
        std::string s = "-" + print(e.args()[0], kPrecPower);
        return parent >= kPrecProduct ? "(" + s + ")" : s;
    }
    case Kind::Power:
        if (e.exponent().num < 0) return print_product({e}, parent);
        return print(e.args()[0], kPrecPower + 1) + "^" + print_rational_exponent(e.exponent());
    case Kind::Apply: return print_apply(e);
    }
    return "?";
}

}  // namespace

std::string to_string(const Expr& e) { return print(e, 0); }

}  // namespace pss
