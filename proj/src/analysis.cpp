#include "qshield/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "qshield/errors.hpp"

namespace qshield {

InstrumentedShield::InstrumentedShield(const Controller& c, const ShieldSpec& spec,
                                       bool track_req, const CompileOptions& opts)
    : in_vars_(spec.iface.game_inputs()),
      ext_vars_(spec.iface.ambient().with(k_sse_ok_name).with(k_deviation_name)),
      num_inputs_(in_vars_.letter_count()) {
    ControllerTable table = ControllerTable::from_controller(c);
    if (table.inputs != in_vars_)
        throw declaration_error("controller inputs do not match the shield interface");

    std::optional<Dfa> monitor;
    if (track_req) {
        if (spec.req_import) monitor = *spec.req_import;
        else monitor = compile(*spec.req, in_vars_, opts);
    }
    const std::size_t mon_states = monitor ? monitor->num_states() : 1;
    const std::size_t out_bits = spec.iface.shield_outputs.size();

    auto pack = [&](State ctrl, State mon) {
        return static_cast<State>(ctrl * mon_states + mon);
    };
    init_ = pack(table.init, monitor ? monitor->init() : 0);
    moves_.resize(table.num_states() * mon_states * num_inputs_);
    for (State cs = 0; cs < table.num_states(); ++cs) {
        for (State ms = 0; ms < mon_states; ++ms) {
            for (LetterIndex in = 0; in < num_inputs_; ++in) {
                Move mv;
                mv.output = table.choice[cs * num_inputs_ + in];
                State mon_next = monitor ? monitor->next(ms, in) : 0;
                mv.sse_ok = monitor ? monitor->accepting(mon_next) : false;
                LetterIndex sse_part =
                    in & static_cast<LetterIndex>((1u << out_bits) - 1);
                mv.deviation = sse_part != mv.output;
                mv.to = pack(table.next[cs * num_inputs_ + in], mon_next);
                mv.ext_letter = static_cast<LetterIndex>(
                    (in << (out_bits + 2)) | (mv.output << 2) | (mv.sse_ok ? 2u : 0u) |
                    (mv.deviation ? 1u : 0u));
                moves_[pack(cs, ms) * num_inputs_ + in] = mv;
            }
        }
    }
}

std::size_t Dtmc::num_transitions() const {
    std::size_t m = 0;
    for (const auto& row : rows) m += row.size();
    return m;
}

void Dtmc::check_stochastic() const {
    for (const auto& row : rows) {
        Rational sum = 0;
        for (const auto& [to, p] : row) sum += p;
        if (sum != 1) throw internal_error("markov chain row does not sum to one");
    }
}

Dtmc build_dtmc(const Controller& c, const ShieldSpec& spec, const QddcFormula& d,
                const AnalysisOptions& opts) {
    bool needs_req = d.free_vars().count(k_sse_ok_name) > 0;
    InstrumentedShield inst(c, spec, needs_req, opts.compile);
    Dfa monitor = compile(d, inst.ext_vars(), opts.compile);

    const Rational step_p(1, static_cast<unsigned>(inst.num_inputs()));
    std::unordered_map<std::uint64_t, State> ids;
    std::vector<std::pair<State, State>> nodes; // (exec state, monitor state)
    auto intern = [&](State e, State m) {
        std::uint64_t key = (static_cast<std::uint64_t>(e) << 32) | m;
        auto [it, ins] = ids.emplace(key, static_cast<State>(nodes.size()));
        if (ins) nodes.emplace_back(e, m);
        return it->second;
    };
    Dtmc out;
    out.init = intern(inst.init(), monitor.init());
    for (State s = 0; s < nodes.size(); ++s) {
        auto [es, ms] = nodes[s];
        std::map<State, Rational> row;
        for (LetterIndex in = 0; in < inst.num_inputs(); ++in) {
            const auto& mv = inst.move(es, in);
            State t = intern(mv.to, monitor.next(ms, mv.ext_letter));
            row[t] += step_p;
        }
        out.rows.emplace_back(row.begin(), row.end());
    }
    out.accepting.resize(nodes.size());
    for (State s = 0; s < nodes.size(); ++s)
        out.accepting[s] = monitor.accepting(nodes[s].second);
    out.check_stochastic();
    return out;
}

namespace {

// Bottom strongly connected components via iterative Tarjan.
struct SccInfo {
    std::vector<int> comp;              // state -> component id
    std::vector<std::vector<State>> members;
    std::vector<bool> bottom;           // component id -> is BSCC
};

SccInfo scc_decompose(const Dtmc& m) {
    const std::size_t n = m.num_states();
    SccInfo info;
    info.comp.assign(n, -1);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<State> stack;
    int next_index = 0;

    struct Frame {
        State v;
        std::size_t edge;
    };
    for (State root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, edge] = call.back();
            if (edge < m.rows[v].size()) {
                State w = m.rows[v][edge].first;
                ++edge;
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    int id = static_cast<int>(info.members.size());
                    info.members.emplace_back();
                    State w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        info.comp[w] = id;
                        info.members[id].push_back(w);
                    } while (w != v);
                }
                State child = v;
                call.pop_back();
                if (!call.empty())
                    low[call.back().v] = std::min(low[call.back().v], low[child]);
            }
        }
    }
    info.bottom.assign(info.members.size(), true);
    for (State s = 0; s < n; ++s)
        for (const auto& [t, p] : m.rows[s])
            if (info.comp[t] != info.comp[s]) info.bottom[info.comp[s]] = false;
    return info;
}

// Gaussian elimination with pivoting; exact for Rational, guarded for double.
template <typename Scalar>
std::vector<Scalar> solve_linear(std::vector<std::vector<Scalar>> a, std::vector<Scalar> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        if constexpr (std::is_same_v<Scalar, double>) {
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        } else {
            while (pivot < n && a[pivot][col] == 0) ++pivot;
        }
        if (pivot >= n || a[pivot][col] == Scalar(0))
            throw internal_error("singular linear system in chain analysis");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == Scalar(0)) continue;
            Scalar f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<Scalar> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

template <typename Scalar>
Scalar scalar_from_rational(const Rational& r) {
    if constexpr (std::is_same_v<Scalar, double>) return to_double(r);
    else return r;
}

// Long-run probability of the accepting label.
template <typename Scalar>
Scalar long_run_value(const Dtmc& m, double* max_residual) {
    SccInfo scc = scc_decompose(m);
    const std::size_t n = m.num_states();

    // stationary accepting mass per bottom component
    std::vector<Scalar> bscc_mass(scc.members.size(), Scalar(0));
    std::vector<int> bottom_ids;
    for (std::size_t id = 0; id < scc.members.size(); ++id) {
        if (!scc.bottom[id]) continue;
        bottom_ids.push_back(static_cast<int>(id));
        const auto& states = scc.members[id];
        const std::size_t k = states.size();
        std::vector<std::size_t> pos(n, 0);
        for (std::size_t i = 0; i < k; ++i) pos[states[i]] = i;
        // pi (P - I) = 0 restated column-wise, first equation replaced by sum = 1
        std::vector<std::vector<Scalar>> a(k, std::vector<Scalar>(k, Scalar(0)));
        std::vector<Scalar> b(k, Scalar(0));
        for (std::size_t j = 0; j < k; ++j) a[0][j] = Scalar(1);
        b[0] = Scalar(1);
        for (std::size_t row = 1; row < k; ++row) {
            State target = states[row];
            a[row][row] -= Scalar(1);
            for (std::size_t j = 0; j < k; ++j)
                for (const auto& [t, p] : m.rows[states[j]])
                    if (t == target) a[row][j] += scalar_from_rational<Scalar>(p);
        }
        std::vector<Scalar> pi = solve_linear<Scalar>(a, b);
        if constexpr (std::is_same_v<Scalar, double>) {
            // residual of the untouched balance equations
            for (std::size_t row = 1; row < k; ++row) {
                double lhs = -pi[row];
                for (std::size_t j = 0; j < k; ++j)
                    for (const auto& [t, p] : m.rows[states[j]])
                        if (t == states[row]) lhs += to_double(p) * pi[j];
                *max_residual = std::max(*max_residual, std::abs(lhs));
            }
        }
        Scalar acc(0);
        for (std::size_t i = 0; i < k; ++i)
            if (m.accepting[states[i]]) acc += pi[i];
        bscc_mass[id] = acc;
    }

    // reachability from transient states into each bottom component
    std::vector<State> transient;
    std::vector<std::size_t> tpos(n, static_cast<std::size_t>(-1));
    for (State s = 0; s < n; ++s)
        if (!scc.bottom[scc.comp[s]]) {
            tpos[s] = transient.size();
            transient.push_back(s);
        }

    if (tpos[m.init] == static_cast<std::size_t>(-1))
        return bscc_mass[scc.comp[m.init]];

    Scalar total(0);
    const std::size_t k = transient.size();
    for (int id : bottom_ids) {
        if (bscc_mass[id] == Scalar(0)) continue; // contributes nothing
        std::vector<std::vector<Scalar>> a(k, std::vector<Scalar>(k, Scalar(0)));
        std::vector<Scalar> b(k, Scalar(0));
        for (std::size_t i = 0; i < k; ++i) {
            a[i][i] = Scalar(1);
            for (const auto& [t, p] : m.rows[transient[i]]) {
                if (tpos[t] != static_cast<std::size_t>(-1))
                    a[i][tpos[t]] -= scalar_from_rational<Scalar>(p);
                else if (scc.comp[t] == id)
                    b[i] += scalar_from_rational<Scalar>(p);
            }
        }
        std::vector<Scalar> h = solve_linear<Scalar>(a, b);
        if constexpr (std::is_same_v<Scalar, double>) {
            for (std::size_t i = 0; i < k; ++i) {
                double lhs = h[i];
                for (const auto& [t, p] : m.rows[transient[i]]) {
                    if (tpos[t] != static_cast<std::size_t>(-1))
                        lhs -= to_double(p) * h[tpos[t]];
                    else if (scc.comp[t] == id)
                        lhs -= to_double(p);
                }
                *max_residual = std::max(*max_residual, std::abs(lhs));
            }
        }
        total += h[tpos[m.init]] * bscc_mass[id];
    }
    return total;
}

} // namespace

Rational expected_value(const Dtmc& m) { return long_run_value<Rational>(m, nullptr); }

double expected_value_float(const Dtmc& m) {
    double residual = 0.0;
    double v = long_run_value<double>(m, &residual);
    if (residual >= 1e-12)
        throw internal_error("float chain solve residual " + std::to_string(residual) +
                             " exceeds 1e-12; use exact mode");
    return v;
}

std::string LatencyResult::to_string() const {
    switch (kind) {
        case Kind::Finite: return std::to_string(length);
        case Kind::Infinite: return "inf";
        case Kind::Undefined: return "undefined";
    }
    throw internal_error("unreachable latency kind");
}

LatencyResult maxlen(const Controller& c, const ShieldSpec& spec, const QddcFormula& d,
                     const AnalysisOptions& opts) {
    bool needs_req = d.free_vars().count(k_sse_ok_name) > 0;
    InstrumentedShield inst(c, spec, needs_req, opts.compile);
    Dfa monitor = compile(d, inst.ext_vars(), opts.compile);
    if (!is_prefix_closed(monitor))
        throw not_prefix_closed("maxlen requires a prefix-closed formula; '" + d.to_string() +
                                "' is not");

    // nodes (execution state, monitor state) with the monitor started fresh
    // at every reachable execution state; only accepting nodes can extend an
    // interval
    const std::size_t mn = monitor.num_states();
    auto id = [&](State e, State q) { return static_cast<State>(e * mn + q); };
    std::vector<State> exec_reach;
    {
        std::vector<bool> seen(inst.num_states(), false);
        std::deque<State> queue{inst.init()};
        seen[inst.init()] = true;
        while (!queue.empty()) {
            State s = queue.front();
            queue.pop_front();
            exec_reach.push_back(s);
            for (LetterIndex in = 0; in < inst.num_inputs(); ++in) {
                State t = inst.move(s, in).to;
                if (!seen[t]) {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }

    // seed layer: one monitor-initial node per reachable execution state
    std::vector<bool> in_graph(inst.num_states() * mn, false);
    std::deque<State> queue;
    bool any = false;
    auto enqueue = [&](State e, State q) {
        if (!monitor.accepting(q)) return;
        any = true;
        State node = id(e, q);
        if (!in_graph[node]) {
            in_graph[node] = true;
            queue.push_back(node);
        }
    };
    for (State e : exec_reach)
        for (LetterIndex in = 0; in < inst.num_inputs(); ++in) {
            const auto& mv = inst.move(e, in);
            enqueue(mv.to, monitor.next(monitor.init(), mv.ext_letter));
        }
    if (!any) return LatencyResult::undefined();

    // close the accepting subgraph
    std::vector<State> nodes;
    while (!queue.empty()) {
        State node = queue.front();
        queue.pop_front();
        nodes.push_back(node);
        State e = node / static_cast<State>(mn), q = node % static_cast<State>(mn);
        for (LetterIndex in = 0; in < inst.num_inputs(); ++in) {
            const auto& mv = inst.move(e, in);
            enqueue(mv.to, monitor.next(q, mv.ext_letter));
        }
    }

    // Kahn topological order over the accepting subgraph; leftovers mean a
    // cycle, i.e. unbounded intervals
    std::unordered_map<State, std::size_t> indeg;
    for (State node : nodes) indeg.emplace(node, 0);
    auto each_edge = [&](State node, auto&& fn) {
        State e = node / static_cast<State>(mn), q = node % static_cast<State>(mn);
        for (LetterIndex in = 0; in < inst.num_inputs(); ++in) {
            const auto& mv = inst.move(e, in);
            State qt = monitor.next(q, mv.ext_letter);
            if (monitor.accepting(qt) && in_graph[id(mv.to, qt)]) fn(id(mv.to, qt));
        }
    };
    for (State node : nodes) each_edge(node, [&](State t) { ++indeg[t]; });
    std::deque<State> ready;
    for (auto& [node, deg] : indeg)
        if (deg == 0) ready.push_back(node);
    std::vector<State> topo;
    while (!ready.empty()) {
        State node = ready.front();
        ready.pop_front();
        topo.push_back(node);
        each_edge(node, [&](State t) {
            if (--indeg[t] == 0) ready.push_back(t);
        });
    }
    if (topo.size() != nodes.size()) return LatencyResult::infinite();

    // longest walk: every node is a seed of length 1 (one edge from the
    // start layer); edges extend by one
    std::unordered_map<State, std::uint64_t> longest;
    for (State node : nodes) longest[node] = 1;
    std::uint64_t best = 1;
    for (State node : topo) {
        std::uint64_t len = longest[node];
        best = std::max(best, len);
        each_edge(node, [&](State t) {
            longest[t] = std::max(longest[t], len + 1);
        });
    }
    // m edges cover an interval of m positions, i.e. length m - 1
    return LatencyResult::finite(best - 1);
}

LatencyResult latency_cycles(const LatencyResult& interval_length) {
    switch (interval_length.kind) {
        case LatencyResult::Kind::Finite:
            return LatencyResult::finite(interval_length.length + 1);
        case LatencyResult::Kind::Undefined: return LatencyResult::finite(0);
        case LatencyResult::Kind::Infinite: return LatencyResult::infinite();
    }
    throw internal_error("unreachable latency kind");
}

SimStats simulate(const Controller& c, const ShieldSpec& spec, std::uint64_t steps,
                  std::uint64_t seed, bool record_trace, const AnalysisOptions& opts) {
    if (steps == 0) throw declaration_error("simulate needs at least one step");
    InstrumentedShield inst(c, spec, true, opts.compile);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<LetterIndex> dist(
        0, static_cast<LetterIndex>(inst.num_inputs() - 1));
    SimStats stats;
    stats.steps = steps;
    State s = inst.init();
    for (std::uint64_t k = 0; k < steps; ++k) {
        LetterIndex in = dist(rng);
        const auto& mv = inst.move(s, in);
        if (mv.deviation) ++stats.deviations;
        if (!mv.sse_ok) ++stats.sse_violations;
        if (record_trace) {
            stats.inputs.push_back(in);
            stats.outputs.push_back(mv.output);
        }
        s = mv.to;
    }
    stats.deviation_freq = static_cast<double>(stats.deviations) / static_cast<double>(steps);
    stats.non_deviation_freq = 1.0 - stats.deviation_freq;
    stats.sse_ok_freq =
        1.0 - static_cast<double>(stats.sse_violations) / static_cast<double>(steps);
    return stats;
}

std::string export_mrmc_tra(const Dtmc& m) {
    std::ostringstream out;
    out << "STATES " << m.num_states() << '\n';
    out << "TRANSITIONS " << m.num_transitions() << '\n';
    for (State s = 0; s < m.num_states(); ++s)
        for (const auto& [t, p] : m.rows[s])
            out << (s + 1) << ' ' << (t + 1) << ' ' << decimal_string(p, 10) << '\n';
    return out.str();
}

std::string export_mrmc_lab(const Dtmc& m) {
    std::ostringstream out;
    out << "#DECLARATION\n";
    out << "accepting\n";
    out << "#END\n";
    for (State s = 0; s < m.num_states(); ++s)
        if (m.accepting[s]) out << (s + 1) << " accepting\n";
    return out.str();
}

} // namespace qshield
