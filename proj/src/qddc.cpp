#include "qshield/qddc.hpp"

#include <algorithm>

#include "qshield/errors.hpp"

namespace qshield {

bool cmp_holds(std::uint64_t lhs, Cmp op, std::uint64_t rhs) {
    switch (op) {
        case Cmp::Lt: return lhs < rhs;
        case Cmp::Le: return lhs <= rhs;
        case Cmp::Eq: return lhs == rhs;
        case Cmp::Ge: return lhs >= rhs;
        case Cmp::Gt: return lhs > rhs;
    }
    throw internal_error("unreachable cmp");
}

std::string cmp_to_string(Cmp op) {
    switch (op) {
        case Cmp::Lt: return "<";
        case Cmp::Le: return "<=";
        case Cmp::Eq: return "=";
        case Cmp::Ge: return ">=";
        case Cmp::Gt: return ">";
    }
    throw internal_error("unreachable cmp");
}

QddcFormula QddcFormula::make(Node n) {
    return QddcFormula(std::make_shared<Node>(std::move(n)));
}

QddcFormula QddcFormula::point(PropFormula phi) {
    Node n{Kind::Point, std::make_shared<PropFormula>(std::move(phi))};
    return make(std::move(n));
}

QddcFormula QddcFormula::all_but_last(PropFormula phi) {
    Node n{Kind::AllButLast, std::make_shared<PropFormula>(std::move(phi))};
    return make(std::move(n));
}

QddcFormula QddcFormula::all(PropFormula phi) {
    Node n{Kind::All, std::make_shared<PropFormula>(std::move(phi))};
    return make(std::move(n));
}

QddcFormula QddcFormula::chop(QddcFormula a, QddcFormula b) {
    Node n{Kind::Chop};
    n.a = a.node_;
    n.b = b.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::negate(QddcFormula a) {
    Node n{Kind::Not};
    n.a = a.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::conj(QddcFormula a, QddcFormula b) {
    Node n{Kind::And};
    n.a = a.node_;
    n.b = b.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::disj(QddcFormula a, QddcFormula b) {
    Node n{Kind::Or};
    n.a = a.node_;
    n.b = b.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::exists(std::string var, QddcFormula body) {
    Node n{Kind::Exists};
    n.name = std::move(var);
    n.a = body.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::forall(std::string var, QddcFormula body) {
    Node n{Kind::Forall};
    n.name = std::move(var);
    n.a = body.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::slen_cmp(Cmp op, std::uint64_t bound) {
    Node n{Kind::SlenCmp};
    n.cmp = op;
    n.bound = bound;
    return make(std::move(n));
}

QddcFormula QddcFormula::scount_cmp(PropFormula phi, Cmp op, std::uint64_t bound) {
    Node n{Kind::ScountCmp, std::make_shared<PropFormula>(std::move(phi))};
    n.cmp = op;
    n.bound = bound;
    return make(std::move(n));
}

QddcFormula QddcFormula::sdur_cmp(PropFormula phi, Cmp op, std::uint64_t bound) {
    Node n{Kind::SdurCmp, std::make_shared<PropFormula>(std::move(phi))};
    n.cmp = op;
    n.bound = bound;
    return make(std::move(n));
}

QddcFormula QddcFormula::pt() { return make(Node{Kind::Pt}); }
QddcFormula QddcFormula::ext() { return make(Node{Kind::Ext}); }

QddcFormula QddcFormula::diamond(QddcFormula a) {
    Node n{Kind::Diamond};
    n.a = a.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::box(QddcFormula a) {
    Node n{Kind::Box};
    n.a = a.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::pref(QddcFormula a) {
    Node n{Kind::Pref};
    n.a = a.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::ep(std::string var) {
    Node n{Kind::EP};
    n.name = std::move(var);
    return make(std::move(n));
}

QddcFormula QddcFormula::implies(QddcFormula a, QddcFormula b) {
    Node n{Kind::Implies};
    n.a = a.node_;
    n.b = b.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::iff(QddcFormula a, QddcFormula b) {
    Node n{Kind::Iff};
    n.a = a.node_;
    n.b = b.node_;
    return make(std::move(n));
}

QddcFormula QddcFormula::truth() { return all(PropFormula::tt()); }
QddcFormula QddcFormula::falsity() { return negate(truth()); }

bool QddcFormula::is_core() const {
    switch (kind()) {
        case Kind::Point:
        case Kind::AllButLast:
        case Kind::All:
        case Kind::SlenCmp:
        case Kind::ScountCmp:
        case Kind::SdurCmp: return true;
        case Kind::Not:
        case Kind::Exists: return child().is_core();
        case Kind::Chop:
        case Kind::And:
        case Kind::Or: return lhs().is_core() && rhs().is_core();
        default: return false; // Forall and all sugar
    }
}

bool QddcFormula::equals(const QddcFormula& other) const {
    if (node_ == other.node_) return true;
    if (kind() != other.kind()) return false;
    switch (kind()) {
        case Kind::Pt:
        case Kind::Ext: return true;
        case Kind::Point:
        case Kind::AllButLast:
        case Kind::All: return prop().equals(other.prop());
        case Kind::SlenCmp: return cmp() == other.cmp() && bound() == other.bound();
        case Kind::ScountCmp:
        case Kind::SdurCmp:
            return cmp() == other.cmp() && bound() == other.bound() &&
                   prop().equals(other.prop());
        case Kind::EP: return var() == other.var();
        case Kind::Not:
        case Kind::Diamond:
        case Kind::Box:
        case Kind::Pref: return child().equals(other.child());
        case Kind::Exists:
        case Kind::Forall:
            return var() == other.var() && child().equals(other.child());
        case Kind::Chop:
        case Kind::And:
        case Kind::Or:
        case Kind::Implies:
        case Kind::Iff:
            return lhs().equals(other.lhs()) && rhs().equals(other.rhs());
    }
    throw internal_error("unreachable qddc kind");
}

namespace {

void collect_free(const QddcFormula& d, std::set<std::string>& bound,
                  std::set<std::string>& out) {
    using K = QddcFormula::Kind;
    switch (d.kind()) {
        case K::Pt:
        case K::Ext:
        case K::SlenCmp: return;
        case K::Point:
        case K::AllButLast:
        case K::All:
        case K::ScountCmp:
        case K::SdurCmp:
            for (const auto& v : d.prop().vars())
                if (!bound.count(v)) out.insert(v);
            return;
        case K::EP:
            if (!bound.count(d.var())) out.insert(d.var());
            return;
        case K::Not:
        case K::Diamond:
        case K::Box:
        case K::Pref: collect_free(d.child(), bound, out); return;
        case K::Exists:
        case K::Forall: {
            bool was_bound = bound.count(d.var()) > 0;
            bound.insert(d.var());
            collect_free(d.child(), bound, out);
            if (!was_bound) bound.erase(d.var());
            return;
        }
        case K::Chop:
        case K::And:
        case K::Or:
        case K::Implies:
        case K::Iff:
            collect_free(d.lhs(), bound, out);
            collect_free(d.rhs(), bound, out);
            return;
    }
    throw internal_error("unreachable qddc kind");
}

} // namespace

std::set<std::string> QddcFormula::free_vars() const {
    std::set<std::string> bound, out;
    collect_free(*this, bound, out);
    return out;
}

namespace {

using RenameMap = std::vector<std::pair<std::string, std::string>>;

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    for (int i = 0;; ++i) {
        std::string cand = base + "_" + std::to_string(i);
        if (!taken.count(cand)) return cand;
    }
}

QddcFormula rename_rec(const QddcFormula& d, const RenameMap& map) {
    using K = QddcFormula::Kind;
    auto rename_prop = [&](const PropFormula& p) { return p.rename(map); };
    switch (d.kind()) {
        case K::Pt:
        case K::Ext:
        case K::SlenCmp: return d;
        case K::Point: return QddcFormula::point(rename_prop(d.prop()));
        case K::AllButLast: return QddcFormula::all_but_last(rename_prop(d.prop()));
        case K::All: return QddcFormula::all(rename_prop(d.prop()));
        case K::ScountCmp:
            return QddcFormula::scount_cmp(rename_prop(d.prop()), d.cmp(), d.bound());
        case K::SdurCmp:
            return QddcFormula::sdur_cmp(rename_prop(d.prop()), d.cmp(), d.bound());
        case K::EP: {
            for (const auto& [from, to] : map)
                if (d.var() == from) return QddcFormula::ep(to);
            return d;
        }
        case K::Not: return QddcFormula::negate(rename_rec(d.child(), map));
        case K::Diamond: return QddcFormula::diamond(rename_rec(d.child(), map));
        case K::Box: return QddcFormula::box(rename_rec(d.child(), map));
        case K::Pref: return QddcFormula::pref(rename_rec(d.child(), map));
        case K::Exists:
        case K::Forall: {
            // Drop renamings shadowed by the binder; freshen the binder if it
            // collides with any target name still in play.
            RenameMap inner;
            bool capture = false;
            for (const auto& [from, to] : map) {
                if (from == d.var()) continue;
                inner.push_back({from, to});
                if (to == d.var()) capture = true;
            }
            std::string binder = d.var();
            QddcFormula body = d.child();
            if (capture && !inner.empty()) {
                std::set<std::string> taken = body.free_vars();
                for (const auto& [from, to] : inner) {
                    taken.insert(from);
                    taken.insert(to);
                }
                std::string fresh = fresh_name(binder, taken);
                body = rename_rec(body, {{binder, fresh}});
                binder = fresh;
            }
            body = inner.empty() ? body : rename_rec(body, inner);
            return d.kind() == K::Exists ? QddcFormula::exists(binder, body)
                                         : QddcFormula::forall(binder, body);
        }
        case K::Chop:
            return QddcFormula::chop(rename_rec(d.lhs(), map), rename_rec(d.rhs(), map));
        case K::And:
            return QddcFormula::conj(rename_rec(d.lhs(), map), rename_rec(d.rhs(), map));
        case K::Or:
            return QddcFormula::disj(rename_rec(d.lhs(), map), rename_rec(d.rhs(), map));
        case K::Implies:
            return QddcFormula::implies(rename_rec(d.lhs(), map), rename_rec(d.rhs(), map));
        case K::Iff:
            return QddcFormula::iff(rename_rec(d.lhs(), map), rename_rec(d.rhs(), map));
    }
    throw internal_error("unreachable qddc kind");
}

} // namespace

QddcFormula QddcFormula::rename_free(const RenameMap& map) const {
    return rename_rec(*this, map);
}

QddcFormula desugar(const QddcFormula& d) {
    using K = QddcFormula::Kind;
    switch (d.kind()) {
        case K::Point:
        case K::AllButLast:
        case K::All:
        case K::SlenCmp:
        case K::ScountCmp:
        case K::SdurCmp: return d;
        case K::Not: return QddcFormula::negate(desugar(d.child()));
        case K::Chop: return QddcFormula::chop(desugar(d.lhs()), desugar(d.rhs()));
        case K::And: return QddcFormula::conj(desugar(d.lhs()), desugar(d.rhs()));
        case K::Or: return QddcFormula::disj(desugar(d.lhs()), desugar(d.rhs()));
        case K::Exists: return QddcFormula::exists(d.var(), desugar(d.child()));
        case K::Forall:
            // all p. D = !(ex p. !D)
            return QddcFormula::negate(QddcFormula::exists(
                d.var(), QddcFormula::negate(desugar(d.child()))));
        case K::Pt: return QddcFormula::point(PropFormula::tt());
        case K::Ext: return QddcFormula::negate(QddcFormula::point(PropFormula::tt()));
        case K::Diamond: {
            QddcFormula t = QddcFormula::truth();
            return QddcFormula::chop(t, QddcFormula::chop(desugar(d.child()), t));
        }
        case K::Box:
            // []D = !<>!D, with the diamond expanded in the same pass
            return QddcFormula::negate(
                desugar(QddcFormula::diamond(QddcFormula::negate(d.child()))));
        case K::Pref:
            return QddcFormula::negate(QddcFormula::chop(
                QddcFormula::negate(desugar(d.child())), QddcFormula::truth()));
        case K::EP:
            return QddcFormula::chop(QddcFormula::truth(),
                                     QddcFormula::point(PropFormula::var(d.var())));
        case K::Implies:
            return QddcFormula::disj(QddcFormula::negate(desugar(d.lhs())),
                                     desugar(d.rhs()));
        case K::Iff: {
            QddcFormula a = desugar(d.lhs());
            QddcFormula b = desugar(d.rhs());
            return QddcFormula::conj(
                QddcFormula::disj(QddcFormula::negate(a), b),
                QddcFormula::disj(QddcFormula::negate(b), a));
        }
    }
    throw internal_error("unreachable qddc kind");
}

namespace {

bool eval_at(const PropFormula& phi, const Trace& t, std::size_t i) {
    return eval_prop(phi, t.at(i));
}

} // namespace

bool evaluate(const QddcFormula& d, const Trace& t, Interval iv) {
    using K = QddcFormula::Kind;
    if (t.letters.empty()) throw declaration_error("trace must be non-empty");
    if (iv.b > iv.e || iv.e >= t.size())
        throw declaration_error("interval out of range");
    switch (d.kind()) {
        case K::Point: return iv.b == iv.e && eval_at(d.prop(), t, iv.b);
        case K::AllButLast: {
            if (iv.b >= iv.e) return false;
            for (std::size_t i = iv.b; i < iv.e; ++i)
                if (!eval_at(d.prop(), t, i)) return false;
            return true;
        }
        case K::All: {
            for (std::size_t i = iv.b; i <= iv.e; ++i)
                if (!eval_at(d.prop(), t, i)) return false;
            return true;
        }
        case K::Chop: {
            for (std::size_t i = iv.b; i <= iv.e; ++i)
                if (evaluate(d.lhs(), t, {iv.b, i}) && evaluate(d.rhs(), t, {i, iv.e}))
                    return true;
            return false;
        }
        case K::Not: return !evaluate(d.child(), t, iv);
        case K::And: return evaluate(d.lhs(), t, iv) && evaluate(d.rhs(), t, iv);
        case K::Or: return evaluate(d.lhs(), t, iv) || evaluate(d.rhs(), t, iv);
        case K::Exists:
        case K::Forall: {
            // Enumerate variants of the bound variable over the positions of
            // the interval; positions outside cannot influence the body.
            VarSet vars = t.vars.contains(d.var()) ? t.vars : t.vars.with(d.var());
            std::size_t vi = *vars.index_of(d.var());
            LetterIndex mask = LetterIndex{1} << (vars.size() - 1 - vi);
            Trace variant{vars, {}};
            variant.letters.reserve(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) {
                LetterIndex bits = 0;
                for (std::size_t j = 0; j < t.vars.size(); ++j)
                    if (t.at(i).value(j))
                        bits |= LetterIndex{1} << (vars.size() - 1 - *vars.index_of(t.vars.name(j)));
                variant.letters.push_back(bits & ~mask);
            }
            std::size_t span = iv.e - iv.b + 1;
            bool is_exists = d.kind() == K::Exists;
            for (std::uint64_t choice = 0; choice < (std::uint64_t{1} << span); ++choice) {
                for (std::size_t i = 0; i < span; ++i) {
                    if ((choice >> i) & 1)
                        variant.letters[iv.b + i] |= mask;
                    else
                        variant.letters[iv.b + i] &= ~mask;
                }
                bool holds = evaluate(d.child(), variant, iv);
                if (is_exists && holds) return true;
                if (!is_exists && !holds) return false;
            }
            return !is_exists;
        }
        case K::SlenCmp: return cmp_holds(iv.e - iv.b, d.cmp(), d.bound());
        case K::ScountCmp: {
            std::uint64_t count = 0;
            for (std::size_t i = iv.b; i <= iv.e; ++i) count += eval_at(d.prop(), t, i);
            return cmp_holds(count, d.cmp(), d.bound());
        }
        case K::SdurCmp: {
            // duration counts positions b..e-1; zero on point intervals
            std::uint64_t count = 0;
            for (std::size_t i = iv.b; i < iv.e; ++i) count += eval_at(d.prop(), t, i);
            return cmp_holds(count, d.cmp(), d.bound());
        }
        // sugar, evaluated by its defining clause
        case K::Pt: return iv.b == iv.e;
        case K::Ext: return iv.b != iv.e;
        case K::Diamond: {
            for (std::size_t b2 = iv.b; b2 <= iv.e; ++b2)
                for (std::size_t e2 = b2; e2 <= iv.e; ++e2)
                    if (evaluate(d.child(), t, {b2, e2})) return true;
            return false;
        }
        case K::Box: {
            for (std::size_t b2 = iv.b; b2 <= iv.e; ++b2)
                for (std::size_t e2 = b2; e2 <= iv.e; ++e2)
                    if (!evaluate(d.child(), t, {b2, e2})) return false;
            return true;
        }
        case K::Pref: {
            for (std::size_t e2 = iv.b; e2 <= iv.e; ++e2)
                if (!evaluate(d.child(), t, {iv.b, e2})) return false;
            return true;
        }
        case K::EP: {
            auto idx = t.vars.index_of(d.var());
            if (!idx) throw declaration_error("variable not declared: " + d.var());
            return t.at(iv.e).value(*idx);
        }
        case K::Implies: return !evaluate(d.lhs(), t, iv) || evaluate(d.rhs(), t, iv);
        case K::Iff: return evaluate(d.lhs(), t, iv) == evaluate(d.rhs(), t, iv);
    }
    throw internal_error("unreachable qddc kind");
}

bool sat(const QddcFormula& d, const Trace& t) {
    return evaluate(d, t, {0, t.size() - 1});
}

QddcFormula cascade(const QddcFormula& d, const std::vector<IndicatorDef>& inds) {
    std::set<std::string> witnesses;
    for (const auto& ind : inds) {
        if (!witnesses.insert(ind.witness).second)
            throw declaration_error("indicator witness used twice: " + ind.witness);
        if (ind.formula.free_vars().count(ind.witness))
            throw declaration_error("indicator witness occurs in its own formula: " +
                                    ind.witness);
    }
    QddcFormula out = d;
    for (const auto& ind : inds) {
        QddcFormula conjunct = QddcFormula::pref(
            QddcFormula::iff(QddcFormula::ep(ind.witness), ind.formula));
        out = QddcFormula::conj(out, conjunct);
    }
    return out;
}

namespace {

// loosest..tightest: iff, implies, or, and, chop, unary/atom
int qddc_precedence(QddcFormula::Kind k) {
    using K = QddcFormula::Kind;
    switch (k) {
        case K::Iff: return 0;
        case K::Implies: return 1;
        case K::Or: return 2;
        case K::And: return 3;
        case K::Chop: return 4;
        default: return 5;
    }
}

void print_qddc(const QddcFormula& d, int parent_prec, std::string& out) {
    using K = QddcFormula::Kind;
    int prec = qddc_precedence(d.kind());
    bool paren = prec < parent_prec;
    if (paren) out += '(';
    switch (d.kind()) {
        case K::Point: out += '<' + d.prop().to_string() + '>'; break;
        case K::AllButLast: out += '[' + d.prop().to_string() + ']'; break;
        case K::All: out += "[[" + d.prop().to_string() + "]]"; break;
        case K::SlenCmp:
            out += "slen " + cmp_to_string(d.cmp()) + ' ' + std::to_string(d.bound());
            break;
        case K::ScountCmp:
            out += "scount " + d.prop().to_string() + ' ' + cmp_to_string(d.cmp()) +
                   ' ' + std::to_string(d.bound());
            break;
        case K::SdurCmp:
            out += "sdur " + d.prop().to_string() + ' ' + cmp_to_string(d.cmp()) + ' ' +
                   std::to_string(d.bound());
            break;
        case K::Pt: out += "pt"; break;
        case K::Ext: out += "ext"; break;
        case K::EP: out += "EP(" + d.var() + ')'; break;
        case K::Not:
            out += '!';
            print_qddc(d.child(), 6, out);
            break;
        case K::Diamond:
            out += "<>";
            print_qddc(d.child(), 6, out);
            break;
        case K::Box:
            out += "[]";
            print_qddc(d.child(), 6, out);
            break;
        case K::Pref:
            out += "pref(";
            print_qddc(d.child(), 0, out);
            out += ')';
            break;
        case K::Exists:
        case K::Forall:
            out += d.kind() == K::Exists ? "ex " : "all ";
            out += d.var() + ". ";
            print_qddc(d.child(), 0, out);
            break;
        case K::Chop:
            print_qddc(d.lhs(), prec + 1, out);
            out += " ^ ";
            print_qddc(d.rhs(), prec, out); // right associative
            break;
        case K::And:
            print_qddc(d.lhs(), prec, out);
            out += " && ";
            print_qddc(d.rhs(), prec + 1, out);
            break;
        case K::Or:
            print_qddc(d.lhs(), prec, out);
            out += " || ";
            print_qddc(d.rhs(), prec + 1, out);
            break;
        case K::Implies:
            print_qddc(d.lhs(), prec + 1, out); // right associative
            out += " => ";
            print_qddc(d.rhs(), prec, out);
            break;
        case K::Iff:
            print_qddc(d.lhs(), prec, out);
            out += " <=> ";
            print_qddc(d.rhs(), prec + 1, out);
            break;
    }
    if (paren) out += ')';
}

} // namespace

std::string QddcFormula::to_string() const {
    std::string out;
    print_qddc(*this, 0, out);
    return out;
}

} // namespace qshield
