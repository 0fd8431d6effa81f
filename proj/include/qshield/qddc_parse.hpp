#pragma once

#include <map>
#include <string>
#include <vector>

#include "qshield/qddc.hpp"

namespace qshield {

namespace detail {

enum class TokKind {
    Ident, Number,
    LParen, RParen, Comma, Dot,
    Lt, Le, Eq, Ge, Gt,      // Lt/Gt double as point-formula delimiters
    Iff, Implies,
    LBrkt, RBrkt, LLBrkt, RRBrkt, Box, Diamond,
    Chop, Not, AndAnd, OrOr,
    End,
};

struct Token {
    TokKind kind;
    std::string text;
    std::uint64_t number = 0;
    int line = 1;
    int col = 1;
};

std::vector<Token> tokenize(const std::string& text);

} // namespace detail

// Named, purely syntactic formula templates. Expansion happens at parse time,
// before desugaring: a macro body is a token sequence with parameter slots;
// call-site arguments are spliced in as parenthesized token runs.
class MacroTable {
public:
    MacroTable() = default;

    // Table preloaded with Until(p,q,n), SinceLast(p,D), phi_until(n) and
    // NoSpuriousDeviation.
    static MacroTable with_builtins();

    void define(const std::string& name, std::vector<std::string> params,
                const std::string& body);
    bool contains(const std::string& name) const;

    struct Def {
        std::vector<std::string> params;
        std::vector<detail::Token> body;
    };
    const Def* find(const std::string& name) const;

private:
    std::map<std::string, Def> defs_;
};

// Parses the concrete QDDC syntax over a declared variable universe.
// Grammar sketch (loosest to tightest): `ex p. D` / `all p. D` with maximal
// body, `<=>`, `=>` (right assoc.), `||`, `&&`, `^`, then unary `!` `[]` `<>`
// `pref(...)` and atoms `<phi>` `[phi]` `[[phi]]` `pt` `ext` `true` `false`
// `slen CMP n` `scount phi CMP n` `sdur phi CMP n` `EP(p)` and macro calls.
// Propositional formulas use `0 1 ident ! && || => <=>`.
// `//` starts a line comment. Free variables must be declared; quantifiers
// may bind fresh names and shadow outer ones.
QddcFormula parse_qddc(const std::string& text, const VarSet& declared,
                       const MacroTable& macros = MacroTable::with_builtins());

} // namespace qshield
