#include "qshield/dfa.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "qshield/errors.hpp"

namespace qshield {

namespace {

constexpr State k_unset = static_cast<State>(-1);

void require_same_alphabet(const Dfa& a, const Dfa& b, const char* op) {
    if (a.vars() != b.vars())
        throw declaration_error(std::string("alphabet mismatch in ") + op + ": '" +
                                a.vars().to_string() + "' vs '" + b.vars().to_string() + "'");
}

} // namespace

Dfa::Dfa(VarSet vars, std::size_t num_states, State init)
    : vars_(std::move(vars)),
      num_letters_(vars_.letter_count()),
      init_(init),
      delta_(num_states * vars_.letter_count(), k_unset),
      accepting_(num_states, false) {
    if (init >= num_states) throw internal_error("initial state out of range");
}

void Dfa::check_total() const {
    for (State t : delta_)
        if (t == k_unset || t >= num_states())
            throw internal_error("automaton transition table is not total");
}

State Dfa::run(State from, const std::vector<LetterIndex>& word) const {
    State s = from;
    for (LetterIndex a : word) s = next(s, a);
    return s;
}

bool Dfa::accepts(const Trace& t) const {
    if (t.vars != vars_)
        throw declaration_error("alphabet mismatch: trace over '" + t.vars.to_string() +
                                "', automaton over '" + vars_.to_string() + "'");
    if (t.letters.empty()) throw declaration_error("trace must be non-empty");
    return accepting(run(init_, t.letters));
}

std::vector<bool> Dfa::prefix_accepts(const Trace& t) const {
    if (t.vars != vars_) throw declaration_error("alphabet mismatch");
    std::vector<bool> out;
    out.reserve(t.size());
    State s = init_;
    for (LetterIndex a : t.letters) {
        s = next(s, a);
        out.push_back(accepting(s));
    }
    return out;
}

std::vector<State> Dfa::reachable_states() const {
    std::vector<bool> seen(num_states(), false);
    std::vector<State> order;
    order.reserve(num_states());
    std::deque<State> queue{init_};
    seen[init_] = true;
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        order.push_back(s);
        for (LetterIndex a = 0; a < letter_count(); ++a) {
            State t = next(s, a);
            if (!seen[t]) {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    return order;
}

std::size_t Dfa::num_accepting() const {
    return static_cast<std::size_t>(std::count(accepting_.begin(), accepting_.end(), true));
}

Dfa determinize(const Nfa& n, std::size_t max_states) {
    const std::size_t nl = n.letter_count();
    std::map<std::vector<State>, State> ids;
    std::vector<std::vector<State>> subsets;
    auto intern = [&](std::vector<State> subset) -> State {
        auto [it, inserted] = ids.emplace(std::move(subset), static_cast<State>(subsets.size()));
        if (inserted) {
            subsets.push_back(it->first);
            if (subsets.size() > max_states)
                throw capacity_error("subset construction exceeded the state bound of " +
                                     std::to_string(max_states));
        }
        return it->second;
    };

    std::vector<State> init_subset = n.initial;
    std::sort(init_subset.begin(), init_subset.end());
    init_subset.erase(std::unique(init_subset.begin(), init_subset.end()), init_subset.end());
    State init = intern(std::move(init_subset));

    std::vector<std::vector<State>> delta_rows; // parallel to subsets
    for (State s = 0; s < subsets.size(); ++s) {
        const std::vector<State> current = subsets[s]; // copy: subsets grows below
        std::vector<State> row(nl);
        for (LetterIndex a = 0; a < nl; ++a) {
            std::vector<State> target;
            for (State q : current) {
                const auto& succ = n.moves[q * nl + a];
                target.insert(target.end(), succ.begin(), succ.end());
            }
            std::sort(target.begin(), target.end());
            target.erase(std::unique(target.begin(), target.end()), target.end());
            row[a] = intern(std::move(target));
        }
        delta_rows.push_back(std::move(row));
    }

    Dfa out(n.vars, subsets.size(), init);
    for (State s = 0; s < subsets.size(); ++s) {
        for (LetterIndex a = 0; a < nl; ++a) out.set_transition(s, a, delta_rows[s][a]);
        bool acc = false;
        for (State q : subsets[s]) acc = acc || n.accepting[q];
        out.set_accepting(s, acc);
    }
    return out;
}

Dfa minimize(const Dfa& a) {
    a.check_total();
    // trim to reachable states
    std::vector<State> order = a.reachable_states();
    std::vector<State> remap(a.num_states(), k_unset);
    for (State i = 0; i < order.size(); ++i) remap[order[i]] = i;
    const std::size_t n = order.size();
    const std::size_t nl = a.letter_count();

    // Moore refinement: split by acceptance, then by successor-block rows.
    std::vector<int> block(n);
    for (State s = 0; s < n; ++s) block[s] = a.accepting(order[s]) ? 1 : 0;
    int num_blocks = 2;
    while (true) {
        std::map<std::vector<int>, int> sig_ids;
        std::vector<int> next_block(n);
        for (State s = 0; s < n; ++s) {
            std::vector<int> sig;
            sig.reserve(nl + 1);
            sig.push_back(block[s]);
            for (LetterIndex l = 0; l < nl; ++l)
                sig.push_back(block[remap[a.next(order[s], l)]]);
            auto [it, ins] = sig_ids.emplace(std::move(sig), static_cast<int>(sig_ids.size()));
            next_block[s] = it->second;
        }
        bool stable = static_cast<int>(sig_ids.size()) == num_blocks;
        num_blocks = static_cast<int>(sig_ids.size());
        block = std::move(next_block);
        if (stable) break;
    }

    Dfa out(a.vars(), static_cast<std::size_t>(num_blocks), static_cast<State>(block[remap[a.init()]]));
    std::vector<bool> done(static_cast<std::size_t>(num_blocks), false);
    for (State s = 0; s < n; ++s) {
        State b = static_cast<State>(block[s]);
        if (done[b]) continue;
        done[b] = true;
        out.set_accepting(b, a.accepting(order[s]));
        for (LetterIndex l = 0; l < nl; ++l)
            out.set_transition(b, l, static_cast<State>(block[remap[a.next(order[s], l)]]));
    }
    return out;
}

Dfa product(const Dfa& a, const Dfa& b, const std::function<bool(bool, bool)>& combine) {
    require_same_alphabet(a, b, "product");
    const std::size_t nl = a.letter_count();
    std::unordered_map<std::uint64_t, State> ids;
    std::vector<std::pair<State, State>> pairs;
    auto intern = [&](State x, State y) -> State {
        std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | y;
        auto [it, ins] = ids.emplace(key, static_cast<State>(pairs.size()));
        if (ins) pairs.emplace_back(x, y);
        return it->second;
    };
    State init = intern(a.init(), b.init());
    std::vector<State> delta;
    for (State s = 0; s < pairs.size(); ++s) {
        auto [x, y] = pairs[s];
        for (LetterIndex l = 0; l < nl; ++l) delta.push_back(intern(a.next(x, l), b.next(y, l)));
    }
    Dfa out(a.vars(), pairs.size(), init);
    for (State s = 0; s < pairs.size(); ++s) {
        for (LetterIndex l = 0; l < nl; ++l) out.set_transition(s, l, delta[s * nl + l]);
        out.set_accepting(s, combine(a.accepting(pairs[s].first), b.accepting(pairs[s].second)));
    }
    return out;
}

Dfa complement(const Dfa& a) {
    a.check_total();
    // fresh initial state duplicating the old one's row, so the empty-word
    // bit can be cleared without touching words that loop back to the start
    const std::size_t n = a.num_states();
    const std::size_t nl = a.letter_count();
    Dfa out(a.vars(), n + 1, static_cast<State>(n));
    for (State s = 0; s < n; ++s) {
        for (LetterIndex l = 0; l < nl; ++l) out.set_transition(s, l, a.next(s, l));
        out.set_accepting(s, !a.accepting(s));
    }
    for (LetterIndex l = 0; l < nl; ++l)
        out.set_transition(static_cast<State>(n), l, a.next(a.init(), l));
    out.set_accepting(static_cast<State>(n), false);
    return out;
}

namespace {

// Walks reachable pairs; `check` sees each pair reached by a non-empty path.
// Returns false as soon as `check` does.
bool scan_pairs(const Dfa& a, const Dfa& b, const std::function<bool(State, State)>& check) {
    const std::size_t nl = a.letter_count();
    std::unordered_set<std::uint64_t> seen;
    std::deque<std::pair<State, State>> queue;
    auto key = [](State x, State y) {
        return (static_cast<std::uint64_t>(x) << 32) | y;
    };
    seen.insert(key(a.init(), b.init()));
    queue.emplace_back(a.init(), b.init());
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (LetterIndex l = 0; l < nl; ++l) {
            State nx = a.next(x, l), ny = b.next(y, l);
            if (!check(nx, ny)) return false;
            if (seen.insert(key(nx, ny)).second) queue.emplace_back(nx, ny);
        }
    }
    return true;
}

} // namespace

bool equivalent(const Dfa& a, const Dfa& b) {
    require_same_alphabet(a, b, "equivalent");
    return scan_pairs(a, b, [&](State x, State y) { return a.accepting(x) == b.accepting(y); });
}

bool subset_language(const Dfa& a, const Dfa& b) {
    require_same_alphabet(a, b, "subset_language");
    return scan_pairs(a, b, [&](State x, State y) { return !a.accepting(x) || b.accepting(y); });
}

bool language_empty(const Dfa& a) {
    for (State s : a.reachable_states()) {
        if (s == a.init()) continue; // zero-letter point does not count
        if (a.accepting(s)) return false;
    }
    // the initial state only accepts a non-empty word if it is re-reachable
    if (!a.accepting(a.init())) return true;
    const std::size_t nl = a.letter_count();
    for (State s : a.reachable_states())
        for (LetterIndex l = 0; l < nl; ++l)
            if (a.next(s, l) == a.init()) return false;
    return true;
}

bool is_prefix_closed(const Dfa& a) {
    std::vector<State> reach = a.reachable_states();
    std::vector<bool> reachable(a.num_states(), false);
    for (State s : reach) reachable[s] = true;

    // states reachable by at least one letter
    std::vector<bool> r1(a.num_states(), false);
    std::deque<State> queue;
    for (LetterIndex l = 0; l < a.letter_count(); ++l) {
        State t = a.next(a.init(), l);
        if (!r1[t]) {
            r1[t] = true;
            queue.push_back(t);
        }
    }
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        for (LetterIndex l = 0; l < a.letter_count(); ++l) {
            State t = a.next(s, l);
            if (!r1[t]) {
                r1[t] = true;
                queue.push_back(t);
            }
        }
    }

    // states that can reach an accepting state (within the reachable part)
    std::vector<std::vector<State>> preds(a.num_states());
    for (State s : reach)
        for (LetterIndex l = 0; l < a.letter_count(); ++l) preds[a.next(s, l)].push_back(s);
    std::vector<bool> can_accept(a.num_states(), false);
    for (State s : reach)
        if (a.accepting(s)) {
            can_accept[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        for (State p : preds[s])
            if (!can_accept[p]) {
                can_accept[p] = true;
                queue.push_back(p);
            }
    }

    for (State s = 0; s < a.num_states(); ++s)
        if (r1[s] && can_accept[s] && !a.accepting(s)) return false;
    return true;
}

std::vector<LetterIndex> letter_restriction(const VarSet& wide, const VarSet& narrow) {
    if (!narrow.subset_of(wide))
        throw declaration_error("'" + narrow.to_string() + "' is not a sub-alphabet of '" +
                                wide.to_string() + "'");
    std::vector<std::size_t> src_bit(narrow.size());
    for (std::size_t i = 0; i < narrow.size(); ++i)
        src_bit[i] = wide.size() - 1 - *wide.index_of(narrow.name(i));
    std::vector<LetterIndex> map(wide.letter_count());
    for (LetterIndex w = 0; w < wide.letter_count(); ++w) {
        LetterIndex out = 0;
        for (std::size_t i = 0; i < narrow.size(); ++i)
            if ((w >> src_bit[i]) & 1u) out |= LetterIndex{1} << (narrow.size() - 1 - i);
        map[w] = out;
    }
    return map;
}

Dfa extend_alphabet(const Dfa& a, const VarSet& wider) {
    if (a.vars() == wider) return a;
    std::vector<LetterIndex> map = letter_restriction(wider, a.vars());
    Dfa out(wider, a.num_states(), a.init());
    for (State s = 0; s < a.num_states(); ++s) {
        out.set_accepting(s, a.accepting(s));
        for (LetterIndex w = 0; w < wider.letter_count(); ++w)
            out.set_transition(s, w, a.next(s, map[w]));
    }
    return out;
}

} // namespace qshield
