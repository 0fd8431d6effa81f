#include "qshield/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "qshield/errors.hpp"

namespace qshield {

LetterSplit::LetterSplit(const VarSet& ambient, const IoPartition& io) {
    for (const auto& n : io.inputs.names())
        if (io.outputs.contains(n))
            throw declaration_error("variable on both sides of the io split: " + n);
    if (io.inputs.size() + io.outputs.size() != ambient.size() ||
        !io.inputs.subset_of(ambient) || !io.outputs.subset_of(ambient))
        throw declaration_error("io split does not partition the alphabet '" +
                                ambient.to_string() + "'");
    num_inputs_ = io.inputs.letter_count();
    num_outputs_ = io.outputs.letter_count();
    in_of_ = letter_restriction(ambient, io.inputs);
    out_of_ = letter_restriction(ambient, io.outputs);
    joint_.assign(num_inputs_ * num_outputs_, 0);
    for (LetterIndex l = 0; l < ambient.letter_count(); ++l)
        joint_[in_of_[l] * num_outputs_ + out_of_[l]] = l;
}

OutputOrder OutputOrder::parse(const std::string& text, const VarSet& outputs) {
    OutputOrder ord;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        bool value = true;
        std::string name = tok;
        if (!name.empty() && name[0] == '!') {
            value = false;
            name = name.substr(1);
        }
        if (name.empty() || !outputs.contains(name))
            throw declaration_error("output order literal '" + tok +
                                    "' does not name an output variable");
        for (const auto& [seen, ignored] : ord.literals)
            if (seen == name)
                throw declaration_error("output variable listed twice in order: " + name);
        ord.literals.emplace_back(name, value);
    }
    return ord;
}

std::string OutputOrder::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < literals.size(); ++i) {
        if (i) out += ' ';
        if (!literals[i].second) out += '!';
        out += literals[i].first;
    }
    return out;
}

Supervisor minimize_supervisor(const Supervisor& sup) {
    Dfa m = minimize(sup.dfa);
    std::optional<State> reject;
    for (State s = 0; s < m.num_states(); ++s) {
        if (m.accepting(s)) continue;
        if (reject)
            throw internal_error("supervisor minimization produced two non-accepting states");
        reject = s;
    }
    if (!reject) {
        // fully permissive: re-attach an (unreachable) sink to keep the shape
        Dfa withsink(m.vars(), m.num_states() + 1, m.init());
        State sink = static_cast<State>(m.num_states());
        for (State s = 0; s < m.num_states(); ++s) {
            withsink.set_accepting(s, true);
            for (LetterIndex l = 0; l < m.letter_count(); ++l)
                withsink.set_transition(s, l, m.next(s, l));
        }
        for (LetterIndex l = 0; l < m.letter_count(); ++l) withsink.set_transition(sink, l, sink);
        withsink.set_accepting(sink, false);
        return Supervisor{std::move(withsink), sup.io, sink};
    }
    return Supervisor{std::move(m), sup.io, *reject};
}

std::variant<Supervisor, Unrealizable> mps(const Dfa& hard, const IoPartition& io) {
    hard.check_total();
    LetterSplit split(hard.vars(), io);
    const std::size_t n = hard.num_states();

    std::vector<bool> winning(n);
    for (State s = 0; s < n; ++s) winning[s] = hard.accepting(s);
    auto controllable = [&](State q) {
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            bool some = false;
            for (LetterIndex o = 0; o < split.num_outputs() && !some; ++o)
                some = winning[hard.next(q, split.joint(i, o))];
            if (!some) return false;
        }
        return true;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (State q = 0; q < n; ++q) {
            if (!winning[q]) continue;
            if (!controllable(q)) {
                winning[q] = false;
                changed = true;
            }
        }
    }

    // the game is won iff from the start every input has a safe answer
    if (!controllable(hard.init())) {
        Unrealizable u;
        for (State q = 0; q < n; ++q)
            if (hard.accepting(q) && !winning[q]) u.losing_region.push_back(q);
        return u;
    }

    // keep exactly the transitions that stay within the fixpoint
    std::vector<State> remap(n, static_cast<State>(-1));
    std::vector<State> kept;
    auto intern = [&](State q) {
        if (remap[q] == static_cast<State>(-1)) {
            remap[q] = static_cast<State>(kept.size());
            kept.push_back(q);
        }
        return remap[q];
    };
    intern(hard.init());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        State q = kept[k];
        for (LetterIndex l = 0; l < hard.letter_count(); ++l) {
            State t = hard.next(q, l);
            if (winning[t]) intern(t);
        }
    }
    const State reject = static_cast<State>(kept.size());
    Dfa out(hard.vars(), kept.size() + 1, 0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        out.set_accepting(static_cast<State>(k), true);
        for (LetterIndex l = 0; l < hard.letter_count(); ++l) {
            State t = hard.next(kept[k], l);
            out.set_transition(static_cast<State>(k), l,
                               winning[t] ? remap[t] : reject);
        }
    }
    for (LetterIndex l = 0; l < hard.letter_count(); ++l) out.set_transition(reject, l, reject);
    out.set_accepting(reject, false);
    return minimize_supervisor(Supervisor{std::move(out), io, reject});
}

namespace {

// Product of a supervisor with the monitors of those soft formulas whose
// truth needs memory; current-letter formulas are folded into a per-letter
// weight vector instead, so a Hamming-style soft spec leaves the arena equal
// to the supervisor itself.
struct Arena {
    std::vector<std::vector<State>> nodes; // (sup state, monitor states...)
    std::map<std::vector<State>, State> ids;
    std::vector<State> moves;           // node * letters -> node, or npos if rejected
    std::vector<std::uint64_t> weights; // node * letters -> transition weight
    std::size_t letters = 0;
    static constexpr State npos = static_cast<State>(-1);
};

bool current_letter_only(const Dfa& monitor) {
    for (LetterIndex l = 0; l < monitor.letter_count(); ++l) {
        bool first = monitor.accepting(monitor.next(0, l));
        for (State q = 1; q < monitor.num_states(); ++q)
            if (monitor.accepting(monitor.next(q, l)) != first) return false;
    }
    return true;
}

Arena build_arena(const Supervisor& sup, const SoftSpec& soft, const SynthOptions& opts) {
    const VarSet& vars = sup.dfa.vars();
    const std::size_t nl = vars.letter_count();

    std::vector<std::uint64_t> letter_weight(nl, 0);
    std::vector<std::pair<Dfa, std::uint64_t>> monitors;
    for (const auto& req : soft) {
        if (req.weight == 0) continue;
        Dfa m = compile(req.formula, vars, opts.compile);
        if (current_letter_only(m)) {
            for (LetterIndex l = 0; l < nl; ++l)
                if (m.accepting(m.next(0, l))) letter_weight[l] += req.weight;
        } else {
            monitors.emplace_back(std::move(m), req.weight);
        }
    }

    Arena ar;
    ar.letters = nl;
    auto intern = [&](std::vector<State> key) -> State {
        auto [it, ins] = ar.ids.emplace(std::move(key), static_cast<State>(ar.nodes.size()));
        if (ins) ar.nodes.push_back(it->first);
        return it->second;
    };
    std::vector<State> start{sup.dfa.init()};
    for (const auto& [m, w] : monitors) start.push_back(m.init());
    intern(std::move(start));

    for (State a = 0; a < ar.nodes.size(); ++a) {
        const std::vector<State> node = ar.nodes[a]; // copy: nodes grows below
        for (LetterIndex l = 0; l < nl; ++l) {
            State sup_next = sup.dfa.next(node[0], l);
            if (sup_next == sup.reject) {
                ar.moves.push_back(Arena::npos);
                ar.weights.push_back(0);
                continue;
            }
            std::vector<State> succ{sup_next};
            std::uint64_t w = letter_weight[l];
            for (std::size_t j = 0; j < monitors.size(); ++j) {
                State mn = monitors[j].first.next(node[j + 1], l);
                succ.push_back(mn);
                if (monitors[j].first.accepting(mn)) w += monitors[j].second;
            }
            ar.moves.push_back(intern(std::move(succ)));
            ar.weights.push_back(w);
        }
    }
    return ar;
}

template <typename Scalar>
std::vector<Scalar> iterate_values(const Arena& ar, const LetterSplit& split, unsigned horizon) {
    std::vector<Scalar> v(ar.nodes.size(), Scalar(0));
    std::vector<Scalar> next(ar.nodes.size());
    for (unsigned step = 0; step < horizon; ++step) {
        for (State a = 0; a < ar.nodes.size(); ++a) {
            Scalar total(0);
            for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
                bool have = false;
                Scalar best(0);
                for (LetterIndex o = 0; o < split.num_outputs(); ++o) {
                    LetterIndex l = split.joint(i, o);
                    State t = ar.moves[a * ar.letters + l];
                    if (t == Arena::npos) continue;
                    Scalar cand = Scalar(ar.weights[a * ar.letters + l]) + v[t];
                    if (!have || cand > best) {
                        best = cand;
                        have = true;
                    }
                }
                if (!have) throw internal_error("value iteration reached a blocking state");
                total += best;
            }
            next[a] = total / Scalar(static_cast<std::uint32_t>(split.num_inputs()));
        }
        v.swap(next);
    }
    return v;
}

template <typename Scalar>
bool value_tie(const Scalar& a, const Scalar& b) {
    return a == b;
}

template <>
bool value_tie<double>(const double& a, const double& b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// keep[node * letters + l] = 1 for the argmax transitions at the horizon
template <typename Scalar>
std::vector<char> prune_arena(const Arena& ar, const LetterSplit& split, unsigned horizon) {
    std::vector<Scalar> v = iterate_values<Scalar>(ar, split, horizon);
    std::vector<char> keep(ar.moves.size(), 0);
    for (State a = 0; a < ar.nodes.size(); ++a) {
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            bool have = false;
            Scalar best(0);
            for (LetterIndex o = 0; o < split.num_outputs(); ++o) {
                LetterIndex l = split.joint(i, o);
                State t = ar.moves[a * ar.letters + l];
                if (t == Arena::npos) continue;
                Scalar cand = Scalar(ar.weights[a * ar.letters + l]) + v[t];
                if (!have || cand > best) {
                    best = cand;
                    have = true;
                }
            }
            for (LetterIndex o = 0; o < split.num_outputs(); ++o) {
                LetterIndex l = split.joint(i, o);
                State t = ar.moves[a * ar.letters + l];
                if (t == Arena::npos) continue;
                Scalar cand = Scalar(ar.weights[a * ar.letters + l]) + v[t];
                if (value_tie<Scalar>(cand, best)) keep[a * ar.letters + l] = 1;
            }
        }
    }
    return keep;
}

} // namespace

Supervisor mphos(const Supervisor& sup, const SoftSpec& soft, unsigned horizon,
                 const SynthOptions& opts) {
    LetterSplit split = sup.split();
    Arena ar = build_arena(sup, soft, opts);
    std::vector<char> keep = opts.exact ? prune_arena<Rational>(ar, split, horizon)
                                        : prune_arena<double>(ar, split, horizon);
    const std::size_t nl = ar.letters;
    const State reject = static_cast<State>(ar.nodes.size());
    Dfa out(sup.dfa.vars(), ar.nodes.size() + 1, 0);
    for (State a = 0; a < ar.nodes.size(); ++a) {
        out.set_accepting(a, true);
        for (LetterIndex l = 0; l < nl; ++l)
            out.set_transition(a, l, keep[a * nl + l] ? ar.moves[a * nl + l] : reject);
    }
    for (LetterIndex l = 0; l < nl; ++l) out.set_transition(reject, l, reject);
    out.set_accepting(reject, false);
    return minimize_supervisor(Supervisor{std::move(out), sup.io, reject});
}

ValueTable value_table(const Supervisor& sup, const SoftSpec& soft, unsigned horizon,
                       const SynthOptions& opts) {
    LetterSplit split = sup.split();
    Arena ar = build_arena(sup, soft, opts);
    return ValueTable{iterate_values<Rational>(ar, split, horizon), horizon};
}

Rational h_optimal_value(const Supervisor& sup, const SoftSpec& soft, unsigned horizon,
                         const SynthOptions& opts) {
    return value_table(sup, soft, horizon, opts).value[0];
}

Controller determinize(const Supervisor& sup, const OutputOrder& ord) {
    LetterSplit split = sup.split();
    const VarSet& outs = sup.io.outputs;

    // full literal list: explicit order first, unlisted variables prefer false
    std::vector<std::pair<std::size_t, bool>> lits;
    for (const auto& [name, value] : ord.literals) {
        auto idx = outs.index_of(name);
        if (!idx) throw declaration_error("order literal outside outputs: " + name);
        lits.emplace_back(*idx, value);
    }
    for (std::size_t i = 0; i < outs.size(); ++i) {
        bool listed = false;
        for (const auto& [idx, value] : lits) listed = listed || idx == i;
        if (!listed) lits.emplace_back(i, false);
    }
    auto better = [&](LetterIndex a, LetterIndex b) {
        for (const auto& [idx, want] : lits) {
            bool av = ((a >> (outs.size() - 1 - idx)) & 1u) == (want ? 1u : 0u);
            bool bv = ((b >> (outs.size() - 1 - idx)) & 1u) == (want ? 1u : 0u);
            if (av != bv) return av;
        }
        return false;
    };

    Dfa out = sup.dfa; // copy, then redirect the non-chosen outputs
    for (State s : sup.dfa.reachable_states()) {
        if (s == sup.reject) continue;
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            bool have = false;
            LetterIndex pick = 0;
            for (LetterIndex o = 0; o < split.num_outputs(); ++o) {
                if (!sup.allows(s, split.joint(i, o))) continue;
                if (!have || better(o, pick)) {
                    pick = o;
                    have = true;
                }
            }
            if (!have) throw internal_error("determinize: supervisor is blocking");
            for (LetterIndex o = 0; o < split.num_outputs(); ++o)
                if (o != pick) out.set_transition(s, split.joint(i, o), sup.reject);
        }
    }
    Supervisor det = minimize_supervisor(Supervisor{std::move(out), sup.io, sup.reject});
    if (!is_deterministic(det)) throw internal_error("determinize produced nondeterminism");
    return Controller{std::move(det)};
}

bool leq_det(const Supervisor& s1, const Supervisor& s2) {
    if (s1.io.inputs != s2.io.inputs || s1.io.outputs != s2.io.outputs)
        throw declaration_error("leq_det: supervisors have different interfaces");
    return subset_language(s2.dfa, s1.dfa);
}

bool is_non_blocking(const Supervisor& sup) {
    LetterSplit split = sup.split();
    for (State s : sup.dfa.reachable_states()) {
        if (!sup.dfa.accepting(s)) continue;
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            bool some = false;
            for (LetterIndex o = 0; o < split.num_outputs() && !some; ++o)
                some = sup.allows(s, split.joint(i, o));
            if (!some) return false;
        }
    }
    return true;
}

bool is_deterministic(const Supervisor& sup) {
    LetterSplit split = sup.split();
    for (State s : sup.dfa.reachable_states()) {
        if (!sup.dfa.accepting(s)) continue;
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            int count = 0;
            for (LetterIndex o = 0; o < split.num_outputs(); ++o)
                if (sup.allows(s, split.joint(i, o))) ++count;
            if (count > 1) return false;
        }
    }
    return true;
}

std::string export_controller_table(const Controller& c) {
    const Supervisor& sup = c.sup;
    LetterSplit split = sup.split();

    // live states renumbered in BFS order, reject dropped
    std::vector<State> order;
    std::vector<State> remap(sup.dfa.num_states(), static_cast<State>(-1));
    for (State s : sup.dfa.reachable_states()) {
        if (s == sup.reject) continue;
        remap[s] = static_cast<State>(order.size());
        order.push_back(s);
    }

    std::ostringstream out;
    out << "controller\n";
    out << "inputs: " << sup.io.inputs.to_string() << '\n';
    out << "outputs: " << sup.io.outputs.to_string() << '\n';
    out << "states: " << order.size() << '\n';
    out << "init: " << remap[sup.dfa.init()] << '\n';
    for (State s : order) {
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            int found = 0;
            LetterIndex pick = 0;
            for (LetterIndex o = 0; o < split.num_outputs(); ++o)
                if (sup.allows(s, split.joint(i, o))) {
                    pick = o;
                    ++found;
                }
            if (found != 1)
                throw internal_error("controller table export on a nondeterministic machine");
            State target = sup.dfa.next(s, split.joint(i, pick));
            out << remap[s] << ' ' << i << " -> " << pick << ' ' << remap[target] << '\n';
        }
    }
    return out.str();
}

} // namespace qshield
