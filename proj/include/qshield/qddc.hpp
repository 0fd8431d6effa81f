#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "qshield/prop.hpp"

namespace qshield {

enum class Cmp { Lt, Le, Eq, Ge, Gt };

bool cmp_holds(std::uint64_t lhs, Cmp op, std::uint64_t rhs);
std::string cmp_to_string(Cmp op);

// Interval-logic formula tree. Core connectives plus derived (sugar)
// connectives; `desugar` rewrites a tree into core-only form.
class QddcFormula {
public:
    enum class Kind {
        // core
        Point,      // <phi>   point interval satisfying phi
        AllButLast, // [phi]   non-point, phi at every position but the last
        All,        // [[phi]] phi at every position
        Chop,       // D1 ^ D2 with a shared split position
        Not,
        And,
        Or,
        Exists, // ex p. D
        Forall, // all p. D
        SlenCmp,
        ScountCmp,
        SdurCmp,
        // sugar
        Pt,      // <true>
        Ext,     // !pt
        Diamond, // <> D  = true ^ D ^ true
        Box,     // [] D  = ! <> ! D
        Pref,    // pref(D) = !((!D) ^ true)
        EP,      // EP(w) = true ^ <w>
        Implies,
        Iff,
    };

    // core constructors
    static QddcFormula point(PropFormula phi);
    static QddcFormula all_but_last(PropFormula phi);
    static QddcFormula all(PropFormula phi);
    static QddcFormula chop(QddcFormula a, QddcFormula b);
    static QddcFormula negate(QddcFormula a);
    static QddcFormula conj(QddcFormula a, QddcFormula b);
    static QddcFormula disj(QddcFormula a, QddcFormula b);
    static QddcFormula exists(std::string var, QddcFormula body);
    static QddcFormula forall(std::string var, QddcFormula body);
    static QddcFormula slen_cmp(Cmp op, std::uint64_t bound);
    static QddcFormula scount_cmp(PropFormula phi, Cmp op, std::uint64_t bound);
    static QddcFormula sdur_cmp(PropFormula phi, Cmp op, std::uint64_t bound);
    // sugar constructors
    static QddcFormula pt();
    static QddcFormula ext();
    static QddcFormula diamond(QddcFormula a);
    static QddcFormula box(QddcFormula a);
    static QddcFormula pref(QddcFormula a);
    static QddcFormula ep(std::string var);
    static QddcFormula implies(QddcFormula a, QddcFormula b);
    static QddcFormula iff(QddcFormula a, QddcFormula b);
    // the formula satisfied by every interval ([[1]]) and by none (![[1]])
    static QddcFormula truth();
    static QddcFormula falsity();

    Kind kind() const { return node_->kind; }
    const PropFormula& prop() const { return *node_->prop; }
    Cmp cmp() const { return node_->cmp; }
    std::uint64_t bound() const { return node_->bound; }
    const std::string& var() const { return node_->name; }
    QddcFormula lhs() const { return QddcFormula(node_->a); }
    QddcFormula rhs() const { return QddcFormula(node_->b); }
    QddcFormula child() const { return QddcFormula(node_->a); }

    bool is_core() const;       // this node and all descendants core-only
    bool equals(const QddcFormula& other) const; // structural

    // Free propositional variables (quantifiers bind).
    std::set<std::string> free_vars() const;

    // Capture-free renaming of free variable occurrences. Bound variables that
    // would capture a target name are freshened first.
    QddcFormula rename_free(const std::vector<std::pair<std::string, std::string>>& map) const;

    std::string to_string() const;

private:
    struct Node {
        Kind kind;
        std::shared_ptr<const PropFormula> prop{}; // Point/AllButLast/All/ScountCmp/SdurCmp
        Cmp cmp = Cmp::Lt;
        std::uint64_t bound = 0;
        std::string name{}; // Exists/Forall/EP
        std::shared_ptr<const Node> a{}, b{};
    };
    explicit QddcFormula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static QddcFormula make(Node n);
    std::shared_ptr<const Node> node_;
};

// Rewrites every sugar node into core connectives:
//   pt = <true>, ext = !pt, <>D = true^D^true, []D = !<>!D,
//   pref(D) = !((!D)^true), EP(w) = true^<w>,
//   all p. D = !(ex p. !D), D1 => D2 = !D1 || D2, iff expanded.
QddcFormula desugar(const QddcFormula& d);

// Non-empty finite word over 2^vars.
struct Trace {
    VarSet vars;
    std::vector<LetterIndex> letters;

    std::size_t size() const { return letters.size(); }
    Letter at(std::size_t i) const { return Letter(vars, letters[i]); }
};

struct Interval {
    std::size_t b = 0;
    std::size_t e = 0;
};

// Reference interval semantics, implemented by literal recursion. Sugar nodes
// are evaluated by their own defining clauses (not via desugar), so the
// desugaring identities are independently checkable. Quantifiers enumerate
// all variants of the bound variable over the interval; this is the test
// oracle, exponential on purpose.
bool evaluate(const QddcFormula& d, const Trace& t, Interval iv);

// evaluate over the full word [0, |t|-1].
bool sat(const QddcFormula& d, const Trace& t);

// An auxiliary variable witnessing the prefix-truth of a formula.
struct IndicatorDef {
    QddcFormula formula;
    std::string witness;
};

// Cascade composition: D && AND_i pref(EP(w_i) <=> D_i). Witnesses must be
// pairwise distinct and must not occur free in D or in any indicator formula.
QddcFormula cascade(const QddcFormula& d, const std::vector<IndicatorDef>& inds);

} // namespace qshield
