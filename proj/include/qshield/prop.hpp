#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qshield/errors.hpp"

namespace qshield {

// Hard cap on variables per alphabet. Letters are indices into 2^|vars|, so
// everything downstream is exponential in this; 16 keeps letter tables
// comfortably small while leaving headroom over typical shield interfaces.
inline constexpr std::size_t k_max_vars = 16;

using LetterIndex = std::uint32_t;

// Ordered set of distinct propositional variable names. The declaration order
// is canonical: the index of a letter is its binary encoding with the first
// variable as the most significant bit.
class VarSet {
public:
    VarSet() = default;
    explicit VarSet(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    std::size_t letter_count() const { return std::size_t{1} << names_.size(); }

    const std::string& name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<std::size_t> index_of(std::string_view name) const;
    bool contains(std::string_view name) const { return index_of(name).has_value(); }

    // This set extended by `name` (appended last). Throws on duplicates.
    VarSet with(const std::string& name) const;
    // Union preserving this set's order, new names appended in their order.
    VarSet united(const VarSet& other) const;
    bool subset_of(const VarSet& other) const;

    bool operator==(const VarSet& other) const { return names_ == other.names_; }
    bool operator!=(const VarSet& other) const { return !(*this == other); }

    std::string to_string() const; // space separated

private:
    std::vector<std::string> names_;
};

// One position of a behaviour: a total assignment to a VarSet, viewed through
// its canonical index. Non-owning; the VarSet must outlive the Letter.
class Letter {
public:
    Letter(const VarSet& vars, LetterIndex bits) : vars_(&vars), bits_(bits) {}

    const VarSet& vars() const { return *vars_; }
    LetterIndex bits() const { return bits_; }

    bool value(std::size_t var_index) const {
        return (bits_ >> (vars_->size() - 1 - var_index)) & 1u;
    }
    bool value(std::string_view name) const;

private:
    const VarSet* vars_;
    LetterIndex bits_;
};

// All 2^|vars| letters in canonical binary order.
std::vector<Letter> enumerate_letters(const VarSet& vars);

// Builds a letter index from (name, value) pairs; every variable of `vars`
// must be assigned exactly once.
LetterIndex make_letter(const VarSet& vars,
                        const std::vector<std::pair<std::string, bool>>& assignment);

// Immutable propositional formula tree.
class PropFormula {
public:
    enum class Kind { False, True, Var, Not, And, Or, Implies, Iff };

    static PropFormula ff();
    static PropFormula tt();
    static PropFormula var(std::string name);
    static PropFormula negate(PropFormula a);
    static PropFormula conj(PropFormula a, PropFormula b);
    static PropFormula disj(PropFormula a, PropFormula b);
    static PropFormula implies(PropFormula a, PropFormula b);
    static PropFormula iff(PropFormula a, PropFormula b);

    Kind kind() const { return node_->kind; }
    const std::string& var_name() const { return node_->name; }
    PropFormula child() const { return PropFormula(node_->a); }
    PropFormula lhs() const { return PropFormula(node_->a); }
    PropFormula rhs() const { return PropFormula(node_->b); }

    void collect_vars(std::set<std::string>& out) const;
    std::set<std::string> vars() const;

    // Substitute variable occurrences per the map (used for the O -> O'
    // renaming of requirements).
    PropFormula rename(const std::vector<std::pair<std::string, std::string>>& map) const;

    std::string to_string() const;
    bool equals(const PropFormula& other) const; // structural

private:
    struct Node {
        Kind kind;
        std::string name;                 // Var
        std::shared_ptr<const Node> a, b; // children
    };
    explicit PropFormula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;

    friend bool eval_prop(const PropFormula&, const Letter&);
    friend class PropTruthTable;
};

// Standard truth-table semantics at one position. Throws declaration_error if
// the formula names a variable outside the letter's VarSet.
bool eval_prop(const PropFormula& phi, const Letter& letter);

// Truth value of a formula for every letter of an alphabet, precomputed once.
// The compiler evaluates the same formula against every letter repeatedly;
// this keeps that cheap.
class PropTruthTable {
public:
    PropTruthTable(const PropFormula& phi, const VarSet& vars);
    bool operator[](LetterIndex letter) const { return table_[letter]; }

private:
    std::vector<bool> table_;
};

} // namespace qshield
