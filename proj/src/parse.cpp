#include "pss/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace pss {

namespace {

class Parser {
public:
    Parser(std::string_view s, const ParseOptions& o) : src_(s), opts_(o) {}

    Expr run() {
        skip_ws();
        if (pos_ == src_.size()) fail("empty expression");
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
        return e;
    }

private:
    std::string_view src_;
    const ParseOptions& opts_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but input ended");
        if (src_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    Expr expr() {
        Expr acc = term();
        for (;;) {
            if (accept('+'))
                acc = acc + term();
            else if (accept('-'))
                acc = acc + Expr::neg(term());
            else
                return acc;
        }
    }

    Expr term() {
        Expr acc = unary();
        for (;;) {
            if (accept('*'))
                acc = acc * unary();
            else if (accept('/'))
                acc = acc / unary();
            else
                return acc;
        }
    }

    Expr unary() {
        if (accept('-')) {
            Expr e = unary();
            return e.is_const() ? Expr(-e.value()) : Expr::neg(e);
        }
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (!accept('^')) return base;
        skip_ws();
        std::size_t at = pos_;
        Expr ex = simplify(unary());
        if (!ex.is_const()) fail_at("exponent must be a rational constant", at);
        Rational r;
        try {
            r = Rational::from_double(ex.value());
        } catch (const ExprError& err) {
            fail_at(err.what(), at);
        }
        return pow(base, r);
    }

    Expr number() {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                digits();
            else
                pos_ = save;
        }
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_) fail_at("malformed number", start);
        return Expr(v);
    }

    std::vector<int> primes(std::size_t& count) {
        std::vector<int> idx;
        count = 0;
        if (pos_ < src_.size() && src_[pos_] == '\'' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '[') {
            pos_ += 2;
            do {
                skip_ws();
                std::size_t start = pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                if (start == pos_) fail("expected argument index");
                idx.push_back(std::stoi(std::string(src_.substr(start, pos_ - start))));
            } while (accept(','));
            expect(']');
            return idx;
        }
        while (pos_ < src_.size() && src_[pos_] == '\'') {
            ++pos_;
            ++count;
        }
        return idx;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    std::vector<Expr> call_args() {
        std::vector<Expr> args;
        expect('(');
        args.push_back(expr());
        while (accept(',')) args.push_back(expr());
        expect(')');
        return args;
    }

    Expr identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        std::size_t nprimes = 0;
        std::vector<int> index = primes(nprimes);
        bool primed = nprimes > 0 || !index.empty();
        skip_ws();
        bool call = pos_ < src_.size() && src_[pos_] == '(';

        static const std::map<std::string, Builtin> builtins = {
            {"exp", Builtin::Exp},   {"sin", Builtin::Sin},   {"cos", Builtin::Cos},
            {"sinh", Builtin::Sinh}, {"cosh", Builtin::Cosh}, {"log", Builtin::Log},
        };
        if (auto it = builtins.find(name); it != builtins.end() || name == "sqrt") {
            if (primed) fail_at("builtin '" + name + "' cannot carry derivative marks", start);
            if (!call) fail_at("builtin '" + name + "' must be applied to an argument", start);
            std::size_t at = pos_;
            auto args = call_args();
            if (args.size() != 1) fail_at("'" + name + "' takes one argument", at);
            if (name == "sqrt") return sqrt(args[0]);
            return Expr::apply(it->second, args[0]);
        }
        if (call) {
            if (opts_.functions && !opts_.functions->count(name))
                fail_at("unknown function '" + name + "'", start);
            auto args = call_args();
            std::vector<int> deriv(args.size(), 0);
            if (!index.empty()) {
                for (int k : index) {
                    if (k < 1 || static_cast<std::size_t>(k) > args.size())
                        fail_at("derivative index out of range for '" + name + "'", start);
                    deriv[static_cast<std::size_t>(k - 1)] += 1;
                }
            } else if (nprimes > 0) {
                if (args.size() != 1) fail_at("use '[i,j] to mark partial derivatives of '" + name + "'", start);
                deriv[0] = static_cast<int>(nprimes);
            }
            try {
                return Expr::user(name, deriv, std::move(args));
            } catch (const ExprError& e) {
                fail_at(e.what(), start);
            }
        }
        if (primed) fail_at("derivative marks on '" + name + "' require a call", start);
        if (name == "u") return Expr(kU);
        if (name == "ux") return Expr(kUx);
        if (name == "v") return Expr(kV);
        if (name == "vx") return Expr(kVx);
        if (name == "pi") return Expr(std::numbers::pi);
        if (opts_.params && !opts_.params->count(name)) fail_at("unknown identifier '" + name + "'", start);
        return Expr(Sym::param(name));
    }
};

}  // namespace

Expr parse(std::string_view text, const ParseOptions& opts) { return Parser(text, opts).run(); }

}  // namespace pss
