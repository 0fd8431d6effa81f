#include "qshield/qddc_parse.hpp"

#include <cctype>

#include "qshield/errors.hpp"

namespace qshield {

namespace detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

} // namespace

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto push = [&](TokKind k, std::string t) {
        out.push_back(Token{k, std::move(t), 0, line, col});
    };
    auto advance = [&](std::size_t n) {
        col += static_cast<int>(n);
        i += n;
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        auto rest = [&](std::size_t k) -> char {
            return i + k < text.size() ? text[i + k] : '\0';
        };
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            push(TokKind::Ident, text.substr(i, j - i));
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            Token t{TokKind::Number, text.substr(i, j - i), 0, line, col};
            try {
                t.number = std::stoull(t.text);
            } catch (const std::out_of_range&) {
                throw parse_error("number literal too large: " + t.text, line, col);
            }
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        switch (c) {
            case '<':
                if (rest(1) == '=' && rest(2) == '>') { push(TokKind::Iff, "<=>"); advance(3); }
                else if (rest(1) == '=') { push(TokKind::Le, "<="); advance(2); }
                else if (rest(1) == '>') { push(TokKind::Diamond, "<>"); advance(2); }
                else { push(TokKind::Lt, "<"); advance(1); }
                continue;
            case '=':
                if (rest(1) == '>') { push(TokKind::Implies, "=>"); advance(2); }
                else { push(TokKind::Eq, "="); advance(1); }
                continue;
            case '>':
                if (rest(1) == '=') { push(TokKind::Ge, ">="); advance(2); }
                else { push(TokKind::Gt, ">"); advance(1); }
                continue;
            case '[':
                if (rest(1) == '[') { push(TokKind::LLBrkt, "[["); advance(2); }
                else if (rest(1) == ']') { push(TokKind::Box, "[]"); advance(2); }
                else { push(TokKind::LBrkt, "["); advance(1); }
                continue;
            case ']':
                if (rest(1) == ']') { push(TokKind::RRBrkt, "]]"); advance(2); }
                else { push(TokKind::RBrkt, "]"); advance(1); }
                continue;
            case '&':
                if (rest(1) == '&') { push(TokKind::AndAnd, "&&"); advance(2); continue; }
                throw parse_error("stray '&' (use '&&')", line, col);
            case '|':
                if (rest(1) == '|') { push(TokKind::OrOr, "||"); advance(2); continue; }
                throw parse_error("stray '|' (use '||')", line, col);
            case '^': push(TokKind::Chop, "^"); advance(1); continue;
            case '!': push(TokKind::Not, "!"); advance(1); continue;
            case '(': push(TokKind::LParen, "("); advance(1); continue;
            case ')': push(TokKind::RParen, ")"); advance(1); continue;
            case ',': push(TokKind::Comma, ","); advance(1); continue;
            case '.': push(TokKind::Dot, "."); advance(1); continue;
            default:
                throw parse_error(std::string("unexpected character '") + c + "'", line, col);
        }
    }
    out.push_back(Token{TokKind::End, "", 0, line, col});
    return out;
}

} // namespace detail

using detail::Token;
using detail::TokKind;

MacroTable MacroTable::with_builtins() {
    MacroTable t;
    t.define("Until", {"p", "q", "n"},
             "((slen<(n)) && [[p]]) || (((([p] || pt)^<q>) && slen<=(n))^true)");
    t.define("SinceLast", {"p", "D"},
             "!(true^(<p>^((slen=1^[[!p]])||pt) && !(D)))");
    t.define("phi_until", {"n"}, "SinceLast(r,(Until(p,q,n)))");
    t.define("NoSpuriousDeviation", {},
             "[]((<!Deviation>^[[SSEOK]]) => [[!Deviation]])");
    return t;
}

void MacroTable::define(const std::string& name, std::vector<std::string> params,
                        const std::string& body) {
    if (defs_.count(name)) throw declaration_error("macro defined twice: " + name);
    Def d;
    d.params = std::move(params);
    d.body = detail::tokenize(body);
    if (!d.body.empty() && d.body.back().kind == TokKind::End) d.body.pop_back();
    defs_[name] = std::move(d);
}

bool MacroTable::contains(const std::string& name) const { return defs_.count(name) > 0; }

const MacroTable::Def* MacroTable::find(const std::string& name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : &it->second;
}

namespace {

constexpr int k_max_macro_depth = 64;

class Parser {
public:
    Parser(std::vector<Token> toks, const VarSet& declared, const MacroTable& macros,
           std::vector<std::string>* bound, int depth)
        : toks_(std::move(toks)), declared_(declared), macros_(macros), depth_(depth) {
        if (bound) bound_ = *bound;
    }

    QddcFormula parse_formula_all() {
        QddcFormula f = formula();
        expect(TokKind::End, "end of input");
        return f;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const VarSet& declared_;
    const MacroTable& macros_;
    std::vector<std::string> bound_;
    int depth_;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (t.kind != TokKind::End) ++pos_;
        return t;
    }
    bool accept(TokKind k) {
        if (peek().kind == k) {
            ++pos_;
            return true;
        }
        return false;
    }
    const Token& expect(TokKind k, const char* what) {
        if (peek().kind != k)
            throw parse_error(std::string("expected ") + what + ", got '" +
                                  (peek().kind == TokKind::End ? "<end>" : peek().text) + "'",
                              peek().line, peek().col);
        return next();
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw parse_error(msg, peek().line, peek().col);
    }

    void check_declared(const Token& t) const {
        for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
            if (*it == t.text) return;
        if (!declared_.contains(t.text))
            throw parse_error("variable not declared: " + t.text, t.line, t.col);
    }

    // ---- QDDC level ----

    QddcFormula formula() {
        if (peek().kind == TokKind::Ident && (peek().text == "ex" || peek().text == "all")) {
            bool is_ex = peek().text == "ex";
            next();
            const Token& v = expect(TokKind::Ident, "quantified variable name");
            std::string name = v.text;
            expect(TokKind::Dot, "'.' after quantified variable");
            bound_.push_back(name);
            QddcFormula body = formula(); // body extends maximally
            bound_.pop_back();
            return is_ex ? QddcFormula::exists(name, body)
                         : QddcFormula::forall(name, body);
        }
        return iff();
    }

    QddcFormula iff() {
        QddcFormula f = implies();
        while (accept(TokKind::Iff)) f = QddcFormula::iff(f, implies());
        return f;
    }

    QddcFormula implies() {
        QddcFormula f = disj();
        if (accept(TokKind::Implies)) return QddcFormula::implies(f, implies());
        return f;
    }

    QddcFormula disj() {
        QddcFormula f = conj();
        while (accept(TokKind::OrOr)) f = QddcFormula::disj(f, conj());
        return f;
    }

    QddcFormula conj() {
        QddcFormula f = chop();
        while (accept(TokKind::AndAnd)) f = QddcFormula::conj(f, chop());
        return f;
    }

    QddcFormula chop() {
        QddcFormula f = unary();
        if (accept(TokKind::Chop)) return QddcFormula::chop(f, chop());
        return f;
    }

    QddcFormula unary() {
        if (accept(TokKind::Not)) return QddcFormula::negate(unary());
        if (accept(TokKind::Box)) return QddcFormula::box(unary());
        if (accept(TokKind::Diamond)) return QddcFormula::diamond(unary());
        return atom();
    }

    QddcFormula atom() {
        const Token& t = peek();
        switch (t.kind) {
            case TokKind::LParen: {
                next();
                QddcFormula f = formula();
                expect(TokKind::RParen, "')'");
                return f;
            }
            case TokKind::Lt: {
                next();
                PropFormula phi = prop();
                expect(TokKind::Gt, "'>' closing point formula");
                return QddcFormula::point(phi);
            }
            case TokKind::LBrkt: {
                next();
                PropFormula phi = prop();
                expect(TokKind::RBrkt, "']'");
                return QddcFormula::all_but_last(phi);
            }
            case TokKind::LLBrkt: {
                next();
                PropFormula phi = prop();
                expect(TokKind::RRBrkt, "']]'");
                return QddcFormula::all(phi);
            }
            case TokKind::Ident: break; // handled below
            default: fail("expected a formula, got '" + t.text + "'");
        }
        // keyword atoms, terms, macro calls
        std::string word = t.text;
        if (word == "pt") { next(); return QddcFormula::pt(); }
        if (word == "ext") { next(); return QddcFormula::ext(); }
        if (word == "true") { next(); return QddcFormula::truth(); }
        if (word == "false") { next(); return QddcFormula::falsity(); }
        if (word == "slen") {
            next();
            auto [op, n] = cmp_tail();
            return QddcFormula::slen_cmp(op, n);
        }
        if (word == "scount") {
            next();
            PropFormula phi = prop_unary();
            auto [op, n] = cmp_tail();
            return QddcFormula::scount_cmp(phi, op, n);
        }
        if (word == "sdur") {
            next();
            PropFormula phi = prop_unary();
            auto [op, n] = cmp_tail();
            return QddcFormula::sdur_cmp(phi, op, n);
        }
        if (word == "pref") {
            next();
            expect(TokKind::LParen, "'(' after pref");
            QddcFormula f = formula();
            expect(TokKind::RParen, "')'");
            return QddcFormula::pref(f);
        }
        if (word == "EP") {
            next();
            expect(TokKind::LParen, "'(' after EP");
            const Token& v = expect(TokKind::Ident, "variable name");
            check_declared(v);
            std::string name = v.text;
            expect(TokKind::RParen, "')'");
            return QddcFormula::ep(name);
        }
        if (macros_.contains(word)) return macro_call();
        fail("'" + word + "' is not a formula keyword or a known macro "
             "(bare variables are only valid inside <...>, [...], [[...]])");
    }

    std::pair<Cmp, std::uint64_t> cmp_tail() {
        Cmp op;
        switch (peek().kind) {
            case TokKind::Lt: op = Cmp::Lt; break;
            case TokKind::Le: op = Cmp::Le; break;
            case TokKind::Eq: op = Cmp::Eq; break;
            case TokKind::Ge: op = Cmp::Ge; break;
            case TokKind::Gt: op = Cmp::Gt; break;
            default: fail("expected a comparison operator");
        }
        next();
        if (accept(TokKind::LParen)) {
            const Token& n = expect(TokKind::Number, "number");
            std::uint64_t v = n.number;
            expect(TokKind::RParen, "')'");
            return {op, v};
        }
        const Token& n = expect(TokKind::Number, "number");
        return {op, n.number};
    }

    QddcFormula macro_call() {
        const Token& name_tok = next();
        std::string name = name_tok.text;
        const MacroTable::Def* def = macros_.find(name);
        std::vector<std::vector<Token>> args;
        if (!def->params.empty() || peek().kind == TokKind::LParen) {
            expect(TokKind::LParen, "'(' opening macro arguments");
            if (peek().kind != TokKind::RParen) {
                args.push_back(macro_arg());
                while (accept(TokKind::Comma)) args.push_back(macro_arg());
            }
            expect(TokKind::RParen, "')'");
        }
        if (args.size() != def->params.size())
            throw parse_error("macro " + name + " expects " +
                                  std::to_string(def->params.size()) + " argument(s), got " +
                                  std::to_string(args.size()),
                              name_tok.line, name_tok.col);
        if (depth_ >= k_max_macro_depth)
            throw parse_error("macro expansion too deep (recursive macro?): " + name,
                              name_tok.line, name_tok.col);
        // splice arguments into the body; multi-token arguments go in parens
        std::vector<Token> expanded;
        for (const Token& bt : def->body) {
            int param = -1;
            if (bt.kind == TokKind::Ident)
                for (std::size_t i = 0; i < def->params.size(); ++i)
                    if (def->params[i] == bt.text) { param = static_cast<int>(i); break; }
            if (param < 0) {
                expanded.push_back(bt);
                continue;
            }
            const auto& arg = args[static_cast<std::size_t>(param)];
            if (arg.size() == 1) {
                expanded.push_back(arg[0]);
            } else {
                expanded.push_back(Token{TokKind::LParen, "(", 0, bt.line, bt.col});
                expanded.insert(expanded.end(), arg.begin(), arg.end());
                expanded.push_back(Token{TokKind::RParen, ")", 0, bt.line, bt.col});
            }
        }
        expanded.push_back(Token{TokKind::End, "", 0, name_tok.line, name_tok.col});
        Parser sub(std::move(expanded), declared_, macros_, &bound_, depth_ + 1);
        return sub.parse_formula_all();
    }

    std::vector<Token> macro_arg() {
        std::vector<Token> out;
        int depth = 0;
        while (true) {
            const Token& t = peek();
            if (t.kind == TokKind::End) fail("unterminated macro argument");
            if (depth == 0 && (t.kind == TokKind::Comma || t.kind == TokKind::RParen))
                break;
            if (t.kind == TokKind::LParen) ++depth;
            if (t.kind == TokKind::RParen) --depth;
            out.push_back(t);
            next();
        }
        if (out.empty()) fail("empty macro argument");
        return out;
    }

    // ---- propositional level ----

    PropFormula prop() { return prop_iff(); }

    PropFormula prop_iff() {
        PropFormula f = prop_implies();
        while (accept(TokKind::Iff)) f = PropFormula::iff(f, prop_implies());
        return f;
    }

    PropFormula prop_implies() {
        PropFormula f = prop_or();
        if (accept(TokKind::Implies)) return PropFormula::implies(f, prop_implies());
        return f;
    }

    PropFormula prop_or() {
        PropFormula f = prop_and();
        while (accept(TokKind::OrOr)) f = PropFormula::disj(f, prop_and());
        return f;
    }

    PropFormula prop_and() {
        PropFormula f = prop_unary();
        while (accept(TokKind::AndAnd)) f = PropFormula::conj(f, prop_unary());
        return f;
    }

    PropFormula prop_unary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokKind::Not: next(); return PropFormula::negate(prop_unary());
            case TokKind::LParen: {
                next();
                PropFormula f = prop();
                expect(TokKind::RParen, "')'");
                return f;
            }
            case TokKind::Number:
                if (t.number == 0) { next(); return PropFormula::ff(); }
                if (t.number == 1) { next(); return PropFormula::tt(); }
                fail("propositional constants are 0 and 1");
            case TokKind::Ident: {
                if (t.text == "true") { next(); return PropFormula::tt(); }
                if (t.text == "false") { next(); return PropFormula::ff(); }
                check_declared(t);
                std::string name = t.text;
                next();
                return PropFormula::var(name);
            }
            default: fail("expected a propositional formula, got '" + t.text + "'");
        }
        throw internal_error("unreachable");
    }
};

} // namespace

QddcFormula parse_qddc(const std::string& text, const VarSet& declared,
                       const MacroTable& macros) {
    Parser p(detail::tokenize(text), declared, macros, nullptr, 0);
    return p.parse_formula_all();
}

} // namespace qshield
