#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "pss/expr.hpp"

namespace pss {

class ParseError : public ExprError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : ExprError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct ParseOptions {
    // When set, identifiers other than u, ux, v, vx and these names are rejected.
    std::optional<std::set<std::string>> params;
    // When set, calls to user functions not listed here are rejected.
    std::optional<std::set<std::string>> functions;
};

// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | '(' expr ')' | ident | ident primes? '(' expr (',' expr)* ')'
//   primes  := "'"+ | "'[" int (',' int)* "]"
// Exponents must reduce to rational constants. Builtins: exp sin cos sinh cosh log sqrt, constant pi.
Expr parse(std::string_view text, const ParseOptions& opts = {});

}  // namespace pss
