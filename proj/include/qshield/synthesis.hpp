#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qshield/dfa.hpp"
#include "qshield/rational.hpp"

namespace qshield {

// Input/output split of an ambient alphabet. The ambient letter order is the
// one source of truth; the split just projects and recombines.
struct IoPartition {
    VarSet inputs;
    VarSet outputs;
};

// Precomputed letter maps between the ambient alphabet and its two factors.
class LetterSplit {
public:
    LetterSplit(const VarSet& ambient, const IoPartition& io);

    std::size_t num_inputs() const { return num_inputs_; }
    std::size_t num_outputs() const { return num_outputs_; }
    LetterIndex joint(LetterIndex in, LetterIndex out) const {
        return joint_[in * num_outputs_ + out];
    }
    LetterIndex input_part(LetterIndex joint_letter) const { return in_of_[joint_letter]; }
    LetterIndex output_part(LetterIndex joint_letter) const { return out_of_[joint_letter]; }

private:
    std::size_t num_inputs_;
    std::size_t num_outputs_;
    std::vector<LetterIndex> in_of_, out_of_, joint_;
};

// Output-nondeterministic Mealy machine as a total DFA with an absorbing
// reject sink; every other state is accepting. Supervisors additionally
// satisfy non-blocking (checked by is_non_blocking / enforced by mps).
struct Supervisor {
    Dfa dfa;
    IoPartition io;
    State reject;

    bool allows(State s, LetterIndex joint_letter) const {
        return dfa.next(s, joint_letter) != reject;
    }
    LetterSplit split() const { return LetterSplit(dfa.vars(), io); }
    // states counted the way the rest of the toolkit reports them
    std::size_t num_states() const { return dfa.num_states(); }
};

// Deterministic supervisor: exactly one allowed output per (state, input).
struct Controller {
    Supervisor sup;
};

struct SoftReq {
    QddcFormula formula;
    std::uint64_t weight = 1;
};
using SoftSpec = std::vector<SoftReq>;

// Lexicographic output preference, e.g. (!q' > !p') lists literals by
// decreasing priority. Output variables not mentioned default to preferring
// false and are ranked after the listed literals in declaration order.
struct OutputOrder {
    std::vector<std::pair<std::string, bool>> literals; // (variable, preferred value)

    static OutputOrder parse(const std::string& text, const VarSet& outputs);
    std::string to_string() const;
};

struct Unrealizable {
    // accepting states of the hard automaton excluded by the safety fixpoint
    std::vector<State> losing_region;
};

struct ValueTable {
    std::vector<Rational> value; // per arena state
    unsigned horizon = 0;
};

struct SynthOptions {
    CompileOptions compile;
    bool exact = true; // exact rationals in value iteration (double otherwise)
};

// Maximally permissive supervisor realizing invariance of `hard` under the
// split `io`: greatest fixpoint over accepting states, transitions leaving
// the fixpoint redirected to a fresh reject sink, then minimized.
std::variant<Supervisor, Unrealizable> mps(const Dfa& hard, const IoPartition& io);

// Maximally permissive H-optimal sub-supervisor: prunes each (state, input)
// to the outputs maximizing the current transition weight plus the H-step
// value of the successor (uniform iid inputs, Bellman value iteration).
// Soft formulas whose truth is a function of the current letter alone are
// weighted directly from the letter; the rest contribute monitor automata to
// the arena product.
Supervisor mphos(const Supervisor& sup, const SoftSpec& soft, unsigned horizon,
                 const SynthOptions& opts = {});

// Values of the optimization arena of `sup` after `horizon` Bellman sweeps:
// entry 0 is the initial state, the rest follow the arena's discovery order.
// The horizon-0 table is identically zero.
ValueTable value_table(const Supervisor& sup, const SoftSpec& soft, unsigned horizon,
                       const SynthOptions& opts = {});

// H-step optimal expected cumulative soft weight from the initial state of
// the arena of `sup` (the quantity mphos maximizes; deterministic supervisors
// have nothing to choose, making this their plain expected value).
Rational h_optimal_value(const Supervisor& sup, const SoftSpec& soft, unsigned horizon,
                         const SynthOptions& opts = {});

// Keeps, for every (state, input), the single allowed output ranked highest
// by `ord`.
Controller determinize(const Supervisor& sup, const OutputOrder& ord);

// Determinism order: true iff s2 is more deterministic than s1,
// i.e. L(s2) ⊆ L(s1). Interfaces must coincide.
bool leq_det(const Supervisor& s1, const Supervisor& s2);

bool is_non_blocking(const Supervisor& sup);
bool is_deterministic(const Supervisor& sup);

// Exact-language minimization that re-identifies (or re-creates) the reject
// sink afterwards.
Supervisor minimize_supervisor(const Supervisor& sup);

// --- controller table text format ---

// Header lines `controller`, `inputs:`, `outputs:`, `states:`, `init:`, then
// one `state input_letter_index -> output_letter_index next_state` line per
// accepting state and input letter. The reject sink is implicit.
std::string export_controller_table(const Controller& c);

} // namespace qshield
