#include <algorithm>

#include "qshield/dfa.hpp"
#include "qshield/errors.hpp"

namespace qshield {

namespace {

Dfa point_automaton(const PropTruthTable& phi, const VarSet& vars) {
    // init -> acc on phi-letters, everything else dead
    Dfa a(vars, 3, 0);
    for (LetterIndex l = 0; l < vars.letter_count(); ++l) {
        a.set_transition(0, l, phi[l] ? 1 : 2);
        a.set_transition(1, l, 2);
        a.set_transition(2, l, 2);
    }
    a.set_accepting(1, true);
    return a;
}

Dfa all_automaton(const PropTruthTable& phi, const VarSet& vars) {
    Dfa a(vars, 3, 0);
    for (LetterIndex l = 0; l < vars.letter_count(); ++l) {
        State good = phi[l] ? 1 : 2;
        a.set_transition(0, l, good);
        a.set_transition(1, l, good);
        a.set_transition(2, l, 2);
    }
    a.set_accepting(1, true);
    return a;
}

Dfa all_but_last_automaton(const PropTruthTable& phi, const VarSet& vars) {
    // [phi] wants length >= 2 and phi everywhere except (possibly) the last
    // position. States track whether all previous positions satisfied phi and
    // whether the current last one does.
    enum : State { init = 0, one_ok = 1, one_bad = 2, ok_ok = 3, ok_bad = 4, dead = 5 };
    Dfa a(vars, 6, init);
    for (LetterIndex l = 0; l < vars.letter_count(); ++l) {
        bool p = phi[l];
        a.set_transition(init, l, p ? one_ok : one_bad);
        a.set_transition(one_ok, l, p ? ok_ok : ok_bad);
        a.set_transition(one_bad, l, dead);
        a.set_transition(ok_ok, l, p ? ok_ok : ok_bad);
        a.set_transition(ok_bad, l, dead);
        a.set_transition(dead, l, dead);
    }
    a.set_accepting(ok_ok, true);
    a.set_accepting(ok_bad, true);
    return a;
}

Dfa slen_automaton(Cmp op, std::uint64_t c, const VarSet& vars) {
    // state m = number of letters consumed, saturating at c + 2;
    // slen of a word of m letters is m - 1
    const std::uint64_t cap = c + 2;
    Dfa a(vars, static_cast<std::size_t>(cap) + 1, 0);
    for (std::uint64_t m = 0; m <= cap; ++m) {
        std::uint64_t succ = std::min(m + 1, cap);
        for (LetterIndex l = 0; l < vars.letter_count(); ++l)
            a.set_transition(static_cast<State>(m), l, static_cast<State>(succ));
        a.set_accepting(static_cast<State>(m), m >= 1 && cmp_holds(m - 1, op, c));
    }
    return a;
}

Dfa scount_automaton(const PropTruthTable& phi, Cmp op, std::uint64_t c, const VarSet& vars) {
    // state 0 = nothing consumed; state 1 + k = count k, saturating at c + 1
    const std::uint64_t sat = c + 1;
    const std::size_t n = static_cast<std::size_t>(sat) + 2;
    Dfa a(vars, n, 0);
    auto state_of = [&](std::uint64_t count) {
        return static_cast<State>(1 + std::min(count, sat));
    };
    for (LetterIndex l = 0; l < vars.letter_count(); ++l) {
        std::uint64_t inc = phi[l] ? 1 : 0;
        a.set_transition(0, l, state_of(inc));
        for (std::uint64_t k = 0; k <= sat; ++k)
            a.set_transition(state_of(k), l, state_of(k + inc));
    }
    for (std::uint64_t k = 0; k <= sat; ++k)
        a.set_accepting(state_of(k), cmp_holds(k, op, c));
    return a;
}

Dfa sdur_automaton(const PropTruthTable& phi, Cmp op, std::uint64_t c, const VarSet& vars) {
    // duration ignores the last position: track (count excluding last letter,
    // does the last letter satisfy phi), both saturating the count at c + 1
    const std::uint64_t sat = c + 1;
    const std::size_t counts = static_cast<std::size_t>(sat) + 1;
    Dfa a(vars, 1 + 2 * counts, 0);
    auto state_of = [&](std::uint64_t count, bool last) {
        return static_cast<State>(1 + 2 * std::min(count, sat) + (last ? 1 : 0));
    };
    for (LetterIndex l = 0; l < vars.letter_count(); ++l) {
        bool p = phi[l];
        a.set_transition(0, l, state_of(0, p));
        for (std::uint64_t k = 0; k <= sat; ++k)
            for (int last = 0; last < 2; ++last)
                a.set_transition(state_of(k, last != 0), l, state_of(k + (last ? 1 : 0), p));
    }
    for (std::uint64_t k = 0; k <= sat; ++k)
        for (int last = 0; last < 2; ++last)
            a.set_accepting(state_of(k, last != 0), cmp_holds(k, op, c));
    return a;
}

// Fusion product for chop: the split letter is read by both operands. From a
// state of A the run may, on a letter that would take A into an accepting
// state, also branch into B as if B had just started on that same letter.
Dfa fuse(const Dfa& a, const Dfa& b, std::size_t max_states) {
    if (a.vars() != b.vars()) throw internal_error("fuse: operand alphabets differ");
    const std::size_t nl = a.letter_count();
    const State nb_offset = static_cast<State>(a.num_states());
    Nfa n;
    n.vars = a.vars();
    n.num_states = a.num_states() + b.num_states();
    n.initial = {a.init()};
    n.accepting.assign(n.num_states, false);
    for (State s = 0; s < b.num_states(); ++s)
        if (b.accepting(s)) n.accepting[nb_offset + s] = true;
    n.moves.assign(n.num_states * nl, {});
    for (State s = 0; s < a.num_states(); ++s) {
        for (LetterIndex l = 0; l < nl; ++l) {
            auto& targets = n.moves[s * nl + l];
            State t = a.next(s, l);
            targets.push_back(t);
            if (a.accepting(t)) targets.push_back(nb_offset + b.next(b.init(), l));
            std::sort(targets.begin(), targets.end());
        }
    }
    for (State s = 0; s < b.num_states(); ++s)
        for (LetterIndex l = 0; l < nl; ++l)
            n.moves[(nb_offset + s) * nl + l].push_back(nb_offset + b.next(s, l));
    return determinize(n, max_states);
}

// Existential projection of one variable: the result, over `outer` (which
// does not bind p's value), moves wherever `inner` can move under either
// choice of p.
Dfa project_exists(const Dfa& inner, const VarSet& outer, const std::string& p,
                   std::size_t max_states) {
    const VarSet& iv = inner.vars();
    auto pidx = iv.index_of(p);
    if (!pidx) throw internal_error("project_exists: variable not in inner alphabet");
    const std::size_t nl = outer.letter_count();
    // map outer letters to inner letters with p forced to 0 / 1
    std::vector<LetterIndex> with0(nl), with1(nl);
    LetterIndex pmask = LetterIndex{1} << (iv.size() - 1 - *pidx);
    for (LetterIndex l = 0; l < nl; ++l) {
        LetterIndex bits = 0;
        for (std::size_t j = 0; j < iv.size(); ++j) {
            if (iv.name(j) == p) continue;
            auto oj = outer.index_of(iv.name(j));
            if (!oj) throw internal_error("project_exists: alphabets inconsistent");
            if ((l >> (outer.size() - 1 - *oj)) & 1u)
                bits |= LetterIndex{1} << (iv.size() - 1 - j);
        }
        with0[l] = bits;
        with1[l] = bits | pmask;
    }
    Nfa n;
    n.vars = outer;
    n.num_states = inner.num_states();
    n.initial = {inner.init()};
    n.accepting.assign(n.num_states, false);
    for (State s = 0; s < inner.num_states(); ++s) n.accepting[s] = inner.accepting(s);
    n.moves.assign(n.num_states * nl, {});
    for (State s = 0; s < inner.num_states(); ++s) {
        for (LetterIndex l = 0; l < nl; ++l) {
            auto& t = n.moves[s * nl + l];
            t.push_back(inner.next(s, with0[l]));
            State u = inner.next(s, with1[l]);
            if (u != t.back()) t.push_back(u);
            std::sort(t.begin(), t.end());
        }
    }
    return determinize(n, max_states);
}

Dfa compile_core(const QddcFormula& d, const VarSet& vars, const CompileOptions& opts) {
    using K = QddcFormula::Kind;
    auto check_cap = [&](const Dfa& a) {
        if (a.num_states() > opts.max_states)
            throw capacity_error("compiled automaton exceeded the state bound of " +
                                 std::to_string(opts.max_states));
        return a;
    };
    switch (d.kind()) {
        case K::Point:
            return minimize(point_automaton(PropTruthTable(d.prop(), vars), vars));
        case K::AllButLast:
            return minimize(all_but_last_automaton(PropTruthTable(d.prop(), vars), vars));
        case K::All:
            return minimize(all_automaton(PropTruthTable(d.prop(), vars), vars));
        case K::SlenCmp: return minimize(slen_automaton(d.cmp(), d.bound(), vars));
        case K::ScountCmp:
            return minimize(
                scount_automaton(PropTruthTable(d.prop(), vars), d.cmp(), d.bound(), vars));
        case K::SdurCmp:
            return minimize(
                sdur_automaton(PropTruthTable(d.prop(), vars), d.cmp(), d.bound(), vars));
        case K::Chop: {
            Dfa l = compile_core(d.lhs(), vars, opts);
            Dfa r = compile_core(d.rhs(), vars, opts);
            return minimize(check_cap(fuse(l, r, opts.max_states)));
        }
        case K::Not: return minimize(complement(compile_core(d.child(), vars, opts)));
        case K::And: {
            Dfa l = compile_core(d.lhs(), vars, opts);
            Dfa r = compile_core(d.rhs(), vars, opts);
            return minimize(check_cap(product(l, r, [](bool x, bool y) { return x && y; })));
        }
        case K::Or: {
            Dfa l = compile_core(d.lhs(), vars, opts);
            Dfa r = compile_core(d.rhs(), vars, opts);
            return minimize(check_cap(product(l, r, [](bool x, bool y) { return x || y; })));
        }
        case K::Exists: {
            // The body is compiled over an alphabet containing the bound
            // variable; the projection then moves under either choice of its
            // value. When the name shadows an ambient variable the outer
            // alphabet keeps the slot but the projected moves never read it.
            VarSet inner_vars = vars.contains(d.var()) ? vars : vars.with(d.var());
            Dfa inner = compile_core(d.child(), inner_vars, opts);
            return minimize(check_cap(project_exists(inner, vars, d.var(), opts.max_states)));
        }
        default:
            throw internal_error("compile: non-core node after desugaring");
    }
}

} // namespace

Dfa compile(const QddcFormula& d, const VarSet& vars, const CompileOptions& opts) {
    for (const auto& v : d.free_vars())
        if (!vars.contains(v))
            throw declaration_error("formula uses undeclared variable: " + v);
    return compile_core(desugar(d), vars, opts);
}

} // namespace qshield
