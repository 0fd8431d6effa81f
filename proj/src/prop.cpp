#include "qshield/prop.hpp"

#include <algorithm>
#include <unordered_set>

namespace qshield {

VarSet::VarSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() > k_max_vars)
        throw capacity_error("variable set exceeds the supported maximum of " +
                             std::to_string(k_max_vars) + " variables");
    std::unordered_set<std::string_view> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw declaration_error("empty variable name");
        if (!seen.insert(n).second)
            throw declaration_error("duplicate variable name: " + n);
    }
}

std::optional<std::size_t> VarSet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

VarSet VarSet::with(const std::string& name) const {
    std::vector<std::string> out = names_;
    out.push_back(name);
    return VarSet(std::move(out));
}

VarSet VarSet::united(const VarSet& other) const {
    std::vector<std::string> out = names_;
    for (const auto& n : other.names_)
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    return VarSet(std::move(out));
}

bool VarSet::subset_of(const VarSet& other) const {
    for (const auto& n : names_)
        if (!other.contains(n)) return false;
    return true;
}

std::string VarSet::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (i) out += ' ';
        out += names_[i];
    }
    return out;
}

bool Letter::value(std::string_view name) const {
    auto idx = vars_->index_of(name);
    if (!idx) throw declaration_error("variable not declared: " + std::string(name));
    return value(*idx);
}

std::vector<Letter> enumerate_letters(const VarSet& vars) {
    std::vector<Letter> out;
    out.reserve(vars.letter_count());
    for (LetterIndex b = 0; b < vars.letter_count(); ++b) out.emplace_back(vars, b);
    return out;
}

LetterIndex make_letter(const VarSet& vars,
                        const std::vector<std::pair<std::string, bool>>& assignment) {
    if (assignment.size() != vars.size())
        throw declaration_error("letter assignment must cover every variable exactly once");
    LetterIndex bits = 0;
    std::vector<bool> seen(vars.size(), false);
    for (const auto& [name, val] : assignment) {
        auto idx = vars.index_of(name);
        if (!idx) throw declaration_error("variable not declared: " + name);
        if (seen[*idx]) throw declaration_error("variable assigned twice: " + name);
        seen[*idx] = true;
        if (val) bits |= LetterIndex{1} << (vars.size() - 1 - *idx);
    }
    return bits;
}

PropFormula PropFormula::ff() { return PropFormula(std::make_shared<Node>(Node{Kind::False, {}, nullptr, nullptr})); }
PropFormula PropFormula::tt() { return PropFormula(std::make_shared<Node>(Node{Kind::True, {}, nullptr, nullptr})); }

PropFormula PropFormula::var(std::string name) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Var, std::move(name), nullptr, nullptr}));
}

PropFormula PropFormula::negate(PropFormula a) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Not, {}, a.node_, nullptr}));
}

PropFormula PropFormula::conj(PropFormula a, PropFormula b) {
    return PropFormula(std::make_shared<Node>(Node{Kind::And, {}, a.node_, b.node_}));
}

PropFormula PropFormula::disj(PropFormula a, PropFormula b) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Or, {}, a.node_, b.node_}));
}

PropFormula PropFormula::implies(PropFormula a, PropFormula b) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Implies, {}, a.node_, b.node_}));
}

PropFormula PropFormula::iff(PropFormula a, PropFormula b) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Iff, {}, a.node_, b.node_}));
}

void PropFormula::collect_vars(std::set<std::string>& out) const {
    switch (kind()) {
        case Kind::False:
        case Kind::True: return;
        case Kind::Var: out.insert(node_->name); return;
        case Kind::Not: child().collect_vars(out); return;
        default:
            lhs().collect_vars(out);
            rhs().collect_vars(out);
    }
}

std::set<std::string> PropFormula::vars() const {
    std::set<std::string> out;
    collect_vars(out);
    return out;
}

PropFormula PropFormula::rename(const std::vector<std::pair<std::string, std::string>>& map) const {
    switch (kind()) {
        case Kind::False:
        case Kind::True: return *this;
        case Kind::Var: {
            for (const auto& [from, to] : map)
                if (node_->name == from) return var(to);
            return *this;
        }
        case Kind::Not: return negate(child().rename(map));
        case Kind::And: return conj(lhs().rename(map), rhs().rename(map));
        case Kind::Or: return disj(lhs().rename(map), rhs().rename(map));
        case Kind::Implies: return implies(lhs().rename(map), rhs().rename(map));
        case Kind::Iff: return iff(lhs().rename(map), rhs().rename(map));
    }
    throw internal_error("unreachable prop kind");
}

namespace {

int prop_precedence(PropFormula::Kind k) {
    switch (k) {
        case PropFormula::Kind::Iff: return 0;
        case PropFormula::Kind::Implies: return 1;
        case PropFormula::Kind::Or: return 2;
        case PropFormula::Kind::And: return 3;
        default: return 4; // atoms and negation
    }
}

void print_prop(const PropFormula& f, int parent_prec, std::string& out) {
    int prec = prop_precedence(f.kind());
    bool paren = prec < parent_prec;
    if (paren) out += '(';
    switch (f.kind()) {
        case PropFormula::Kind::False: out += '0'; break;
        case PropFormula::Kind::True: out += '1'; break;
        case PropFormula::Kind::Var: out += f.var_name(); break;
        case PropFormula::Kind::Not:
            out += '!';
            print_prop(f.child(), 5, out);
            break;
        case PropFormula::Kind::And:
            print_prop(f.lhs(), prec, out);
            out += " && ";
            print_prop(f.rhs(), prec + 1, out);
            break;
        case PropFormula::Kind::Or:
            print_prop(f.lhs(), prec, out);
            out += " || ";
            print_prop(f.rhs(), prec + 1, out);
            break;
        case PropFormula::Kind::Implies:
            print_prop(f.lhs(), prec + 1, out); // right associative
            out += " => ";
            print_prop(f.rhs(), prec, out);
            break;
        case PropFormula::Kind::Iff:
            print_prop(f.lhs(), prec, out);
            out += " <=> ";
            print_prop(f.rhs(), prec + 1, out);
            break;
    }
    if (paren) out += ')';
}

} // namespace

std::string PropFormula::to_string() const {
    std::string out;
    print_prop(*this, 0, out);
    return out;
}

bool PropFormula::equals(const PropFormula& other) const {
    if (node_ == other.node_) return true;
    if (kind() != other.kind()) return false;
    switch (kind()) {
        case Kind::False:
        case Kind::True: return true;
        case Kind::Var: return node_->name == other.node_->name;
        case Kind::Not: return child().equals(other.child());
        default: return lhs().equals(other.lhs()) && rhs().equals(other.rhs());
    }
}

bool eval_prop(const PropFormula& phi, const Letter& letter) {
    using K = PropFormula::Kind;
    switch (phi.kind()) {
        case K::False: return false;
        case K::True: return true;
        case K::Var: return letter.value(phi.var_name());
        case K::Not: return !eval_prop(phi.child(), letter);
        case K::And: return eval_prop(phi.lhs(), letter) && eval_prop(phi.rhs(), letter);
        case K::Or: return eval_prop(phi.lhs(), letter) || eval_prop(phi.rhs(), letter);
        case K::Implies: return !eval_prop(phi.lhs(), letter) || eval_prop(phi.rhs(), letter);
        case K::Iff: return eval_prop(phi.lhs(), letter) == eval_prop(phi.rhs(), letter);
    }
    throw internal_error("unreachable prop kind");
}

PropTruthTable::PropTruthTable(const PropFormula& phi, const VarSet& vars)
    : table_(vars.letter_count()) {
    for (const auto& v : phi.vars())
        if (!vars.contains(v)) throw declaration_error("variable not declared: " + v);
    for (LetterIndex b = 0; b < vars.letter_count(); ++b)
        table_[b] = eval_prop(phi, Letter(vars, b));
}

} // namespace qshield
