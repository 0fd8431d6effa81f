#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qshield/prop.hpp"
#include "qshield/qddc.hpp"

namespace qshield {

using State = std::uint32_t;

// Total deterministic finite automaton over the powerset alphabet of a
// variable set. Letters are canonical indices (first variable = MSB).
//
// Language convention: all operations in this library are about non-empty
// words. Whether a Dfa "accepts" the empty word is simply whether its initial
// state is accepting; compiled formula automata always keep that bit false,
// supervisors keep it true (their languages are prefix-closed). Minimization
// and products are exact, so the bit is preserved and never guessed at.
class Dfa {
public:
    Dfa(VarSet vars, std::size_t num_states, State init);

    const VarSet& vars() const { return vars_; }
    std::size_t num_states() const { return accepting_.size(); }
    std::size_t letter_count() const { return num_letters_; }
    State init() const { return init_; }

    State next(State s, LetterIndex a) const { return delta_[s * num_letters_ + a]; }
    bool accepting(State s) const { return accepting_[s]; }

    void set_transition(State s, LetterIndex a, State to) { delta_[s * num_letters_ + a] = to; }
    void set_accepting(State s, bool acc) { accepting_[s] = acc; }

    // Throws internal_error if some transition was never set.
    void check_total() const;

    State run(State from, const std::vector<LetterIndex>& word) const;
    bool accepts(const Trace& t) const; // alphabet must match exactly
    // Acceptance after each prefix t[0..i].
    std::vector<bool> prefix_accepts(const Trace& t) const;

    std::vector<State> reachable_states() const; // BFS order from init
    std::size_t num_accepting() const;

private:
    VarSet vars_;
    std::size_t num_letters_;
    State init_;
    std::vector<State> delta_;
    std::vector<bool> accepting_;
};

// Nondeterministic counterpart, used only as an intermediate for the chop
// fusion and for letter projection before the subset construction.
struct Nfa {
    VarSet vars;
    std::size_t num_states = 0;
    std::vector<State> initial;
    std::vector<bool> accepting;
    // moves[s * letter_count + a] = sorted target list
    std::vector<std::vector<State>> moves;

    std::size_t letter_count() const { return vars.letter_count(); }
};

// Subset construction; `max_states` bounds the result (capacity_error beyond).
Dfa determinize(const Nfa& n, std::size_t max_states);

// Unreachable-state removal followed by Moore partition refinement. Exact:
// preserves the language including the empty-word bit, which makes it
// canonical and idempotent. Result is the unique minimal total DFA for the
// language (with our convention that compiled monitors reject the empty word).
Dfa minimize(const Dfa& a);

// Synchronous product with per-state boolean combination of acceptance,
// restricted to reachable pairs.
Dfa product(const Dfa& a, const Dfa& b, const std::function<bool(bool, bool)>& combine);

// Complement over non-empty words: a fresh initial state keeps the empty word
// rejected even when the original initial state lies on a cycle.
Dfa complement(const Dfa& a);

// Language equality / inclusion over non-empty words (the initial pair's
// acceptance is not compared unless re-reached by a non-empty path).
bool equivalent(const Dfa& a, const Dfa& b);
bool subset_language(const Dfa& a, const Dfa& b); // L(a) ⊆ L(b)
bool language_empty(const Dfa& a);                // no non-empty word accepted

// True iff every non-empty prefix of every accepted word is accepted.
bool is_prefix_closed(const Dfa& a);

// Language of `a` viewed over a wider alphabet (extra variables free).
Dfa extend_alphabet(const Dfa& a, const VarSet& wider);

// Maps each letter of `wide` to the letter of `narrow` obtained by dropping
// the extra variables. Every name of `narrow` must occur in `wide`.
std::vector<LetterIndex> letter_restriction(const VarSet& wide, const VarSet& narrow);

struct CompileOptions {
    std::size_t max_states = 1'000'000;
};

// Minimal formula automaton: accepts exactly the non-empty words over `vars`
// whose full interval satisfies `d`. Structural construction with
// minimization after every step; sugar is desugared on entry.
Dfa compile(const QddcFormula& d, const VarSet& vars, const CompileOptions& opts = {});

// --- text formats ---

// Line format: `vars:`, `states:`, `init:`, `accepting:` header lines, then
// one `from letter_index to` triple per transition.
std::string export_dfa_text(const Dfa& a);
Dfa import_dfa_text(std::istream& in);
Dfa import_dfa_text(const std::string& text);

// Graphviz export; edges are labeled by propositional cubes.
std::string export_dot(const Dfa& a, const std::string& name = "dfa");

} // namespace qshield
