#include "pss/eval.hpp"

#include <array>
#include <cmath>

#include "pss/parse.hpp"

namespace pss {

void FunctionTable::define(const std::string& name, FunctionDef def) {
    if (def.args.empty()) throw ExprError("function '" + name + "' needs at least one argument");
    callables_.erase(name);
    defs_[name] = std::move(def);
}

void FunctionTable::define(const std::string& name, std::vector<std::string> args, const std::string& body) {
    define(name, FunctionDef{std::move(args), parse(body)});
}

void FunctionTable::define_callable(const std::string& name, std::size_t arity, UserFn fn) {
    defs_.erase(name);
    callables_[name] = {arity, std::move(fn)};
}

void FunctionTable::define_unary(const std::string& name, std::function<double(double)> f,
                                 std::function<double(double)> f1, std::function<double(double)> f2) {
    define_callable(name, 1, [f, f1, f2](std::span<const double> x, std::span<const int> d) {
        switch (d[0]) {
        case 0: return f(x[0]);
        case 1: return f1(x[0]);
        default: return f2(x[0]);
        }
    });
}

const FunctionDef* FunctionTable::def(const std::string& name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : &it->second;
}

const UserFn* FunctionTable::callable(const std::string& name) const {
    auto it = callables_.find(name);
    return it == callables_.end() ? nullptr : &it->second.second;
}

void FunctionTable::merge(const FunctionTable& other) {
    for (const auto& [n, d] : other.defs_) define(n, d);
    for (const auto& [n, c] : other.callables_) define_callable(n, c.first, c.second);
}

FunctionTable FunctionTable::map_bodies(const std::function<Expr(const Expr&)>& f) const {
    FunctionTable out = *this;
    for (auto& [name, d] : out.defs_) d.body = f(d.body);
    return out;
}

Expr FunctionTable::inline_defs(const Expr& e) const {
    if (defs_.empty()) return e;
    std::function<Expr(const Expr&)> rec = [&](const Expr& x) -> Expr {
        if (x.args().empty()) return x;
        std::vector<Expr> args;
        args.reserve(x.args().size());
        for (const auto& a : x.args()) args.push_back(rec(a));
        switch (x.kind()) {
        case Kind::Sum: return Expr::sum(std::move(args));
        case Kind::Product: return Expr::product(std::move(args));
        case Kind::Neg: return Expr::neg(args[0]);
        case Kind::Power: return Expr::power(args[0], x.exponent());
        case Kind::Apply: {
            if (x.fn() != Builtin::User) return Expr::apply(x.fn(), args[0]);
            const FunctionDef* d = def(x.fn_name());
            if (!d) return Expr::user(x.fn_name(), x.deriv(), std::move(args));
            if (d->args.size() != args.size())
                throw ExprError("function '" + x.fn_name() + "' expects " + std::to_string(d->args.size()) +
                                " arguments");
            Expr body = d->body;
            std::map<Sym, Expr> bind;
            for (std::size_t k = 0; k < args.size(); ++k) {
                Sym s = Sym::param(d->args[k]);
                for (int m = 0; m < x.deriv()[k]; ++m) body = derivative(body, s);
                bind.emplace(s, args[k]);
            }
            return rec(substitute(body, bind));
        }
        default: return x;
        }
    };
    return simplify(rec(e));
}

// ---------------------------------------------------------------------------

Compiled::Compiled(const Expr& e, const std::vector<Sym>& slots, const FunctionTable& fns) {
    std::map<Sym, std::size_t> slot_of;
    for (std::size_t i = 0; i < slots.size(); ++i) slot_of.emplace(slots[i], i);
    emit(fns.inline_defs(e), slot_of, fns, 0);
}

void Compiled::emit(const Expr& e, const std::map<Sym, std::size_t>& slot_of, const FunctionTable& fns,
                    std::size_t depth) {
    auto push = [&](Instr in) {
        in.src = static_cast<std::int32_t>(sources_.size());
        sources_.push_back(e);
        code_.push_back(in);
    };
    max_stack_ = std::max(max_stack_, depth + 1);
    switch (e.kind()) {
    case Kind::Const: push({Op::Const, 0, e.value()}); return;
    case Kind::Symbol: {
        auto it = slot_of.find(e.sym());
        if (it == slot_of.end())
            throw EvalError(EvalError::Reason::UnboundSymbol, "unbound symbol '" + e.sym().to_string() + "'");
        push({Op::Slot, static_cast<std::uint32_t>(it->second)});
        return;
    }
    case Kind::Sum:
    case Kind::Product: {
        for (std::size_t i = 0; i < e.args().size(); ++i) emit(e.args()[i], slot_of, fns, depth + i);
        push({e.kind() == Kind::Sum ? Op::Add : Op::Mul, static_cast<std::uint32_t>(e.args().size())});
        return;
    }
    case Kind::Neg:
        emit(e.args()[0], slot_of, fns, depth);
        push({Op::Neg});
        return;
    case Kind::Power: {
        emit(e.args()[0], slot_of, fns, depth);
        Rational r = e.exponent();
        if (r.is_integer())
            push({Op::PowInt, 0, 0.0, r.num});
        else
            push({Op::PowRat, 0, r.value()});
        return;
    }
    case Kind::Apply: {
        if (e.fn() != Builtin::User) {
            emit(e.args()[0], slot_of, fns, depth);
            static const Op ops[] = {Op::Exp, Op::Sin, Op::Cos, Op::Sinh, Op::Cosh, Op::Log};
            push({ops[static_cast<int>(e.fn())]});
            return;
        }
        const UserFn* f = fns.callable(e.fn_name());
        if (!f)
            throw EvalError(EvalError::Reason::UnboundFunction, "unbound function '" + e.fn_name() + "'");
        for (std::size_t i = 0; i < e.args().size(); ++i) emit(e.args()[i], slot_of, fns, depth + i);
        calls_.emplace_back(*f, e.deriv());
        push({Op::Call, static_cast<std::uint32_t>(calls_.size() - 1), 0.0,
              static_cast<long>(e.args().size())});
        return;
    }
    }
}

void Compiled::domain_error(const Instr& in, const std::string& why) const {
    std::string where = in.src >= 0 ? to_string(sources_[static_cast<std::size_t>(in.src)]) : "?";
    throw EvalError(EvalError::Reason::Domain, why + " in '" + where + "'");
}

namespace {
double ipow(double b, long k) {
    bool inv = k < 0;
    unsigned long n = static_cast<unsigned long>(inv ? -k : k);
    double r = 1.0;
    while (n) {
        if (n & 1UL) r *= b;
        b *= b;
        n >>= 1;
    }
    return inv ? 1.0 / r : r;
}
}  // namespace

double Compiled::operator()(const double* x, double* max_abs) const {
    std::array<double, 64> small;
    std::vector<double> large;
    double* s = small.data();
    if (max_stack_ + 1 > small.size()) {
        large.resize(max_stack_ + 1);
        s = large.data();
    }
    std::size_t sp = 0;
    double big = 0.0;
    for (const Instr& in : code_) {
        double r = 0.0;
        switch (in.op) {
        case Op::Const: r = in.c; break;
        case Op::Slot: r = x[in.n]; break;
        case Op::Add: {
            sp -= in.n;
            r = 0.0;
            for (std::uint32_t i = 0; i < in.n; ++i) r += s[sp + i];
            break;
        }
        case Op::Mul: {
            sp -= in.n;
            r = 1.0;
            for (std::uint32_t i = 0; i < in.n; ++i) r *= s[sp + i];
            break;
        }
        case Op::Neg: r = -s[--sp]; break;
        case Op::PowInt: {
            double b = s[--sp];
            if (b == 0.0 && in.k < 0) domain_error(in, "division by zero");
            r = ipow(b, in.k);
            break;
        }
        case Op::PowRat: {
            double b = s[--sp];
            if (b < 0.0) domain_error(in, "fractional power of a negative number");
            if (b == 0.0 && in.c < 0) domain_error(in, "division by zero");
            r = std::pow(b, in.c);
            break;
        }
        case Op::Exp: r = std::exp(s[--sp]); break;
        case Op::Sin: r = std::sin(s[--sp]); break;
        case Op::Cos: r = std::cos(s[--sp]); break;
        case Op::Sinh: r = std::sinh(s[--sp]); break;
        case Op::Cosh: r = std::cosh(s[--sp]); break;
        case Op::Log: {
            double a = s[--sp];
            if (a <= 0.0) domain_error(in, "log of a nonpositive number");
            r = std::log(a);
            break;
        }
        case Op::Call: {
            sp -= static_cast<std::size_t>(in.k);
            const auto& [fn, deriv] = calls_[in.n];
            r = fn(std::span<const double>(s + sp, static_cast<std::size_t>(in.k)), std::span<const int>(deriv));
            break;
        }
        }
        if (!std::isfinite(r)) domain_error(in, "non-finite value");
        if (max_abs) big = std::max(big, std::abs(r));
        s[sp++] = r;
    }
    if (max_abs) *max_abs = big;
    return sp ? s[sp - 1] : 0.0;
}

double eval(const Expr& e, const std::map<Sym, double>& env, const FunctionTable& fns) {
    std::vector<Sym> slots;
    std::vector<double> vals;
    for (const auto& [s, v] : env) {
        slots.push_back(s);
        vals.push_back(v);
    }
    Compiled c(e, slots, fns);
    return c(vals.data());
}

}  // namespace pss
