#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qshield/rational.hpp"
#include "qshield/runtime.hpp"
#include "qshield/shield.hpp"

namespace qshield {

// Analysis formula outside the supported fragment of maxlen.
class not_prefix_closed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Execution product of a controller with the REQ(I,O) monitor. Each step
// consumes a letter over I ∪ O and yields the shield output plus an extended
// letter over I ∪ O ∪ O' ∪ {SSEOK, Deviation} carrying the derived indicator
// bits, which is what analysis formulas are monitored against.
class InstrumentedShield {
public:
    // track_req = false drops the requirement monitor (the SSEOK bit reads 0);
    // only valid when no analysis formula mentions SSEOK.
    InstrumentedShield(const Controller& c, const ShieldSpec& spec, bool track_req,
                       const CompileOptions& opts = {});

    struct Move {
        State to;
        LetterIndex output;     // over O'
        LetterIndex ext_letter; // over ext_vars()
        bool deviation;
        bool sse_ok;
    };

    std::size_t num_states() const { return moves_.size() / num_inputs_; }
    State init() const { return init_; }
    std::size_t num_inputs() const { return num_inputs_; }
    const VarSet& in_vars() const { return in_vars_; }   // I then O
    const VarSet& ext_vars() const { return ext_vars_; } // ambient + indicators
    const Move& move(State s, LetterIndex in) const { return moves_[s * num_inputs_ + in]; }

private:
    VarSet in_vars_;
    VarSet ext_vars_;
    std::size_t num_inputs_;
    State init_;
    std::vector<Move> moves_;
};

// Finite discrete-time Markov chain with exact transition probabilities and
// an acceptance label per state.
struct Dtmc {
    std::vector<std::vector<std::pair<State, Rational>>> rows; // per-state sparse row
    State init = 0;
    std::vector<bool> accepting;

    std::size_t num_states() const { return rows.size(); }
    std::size_t num_transitions() const;
    // every row must sum to exactly one
    void check_stochastic() const;
};

struct AnalysisOptions {
    CompileOptions compile;
    bool exact = true; // exact rational linear algebra (double + residual check otherwise)
};

// Product of the instrumented shield with the monitor of `d`, all 2^|I∪O|
// input letters uniformly likely; a state is labeled accepting iff the
// monitor component accepts.
Dtmc build_dtmc(const Controller& c, const ShieldSpec& spec, const QddcFormula& d,
                const AnalysisOptions& opts = {});

// Long-run probability of the accepting label from the initial state:
// reachability-weighted stationary mass of the accepting states across the
// bottom SCCs.
Rational expected_value(const Dtmc& m);
// Double-precision fallback; throws internal_error if a residual exceeds 1e-12.
double expected_value_float(const Dtmc& m);

struct LatencyResult {
    enum class Kind { Finite, Infinite, Undefined };
    Kind kind = Kind::Undefined;
    std::uint64_t length = 0; // meaningful for Finite

    static LatencyResult finite(std::uint64_t n) { return {Kind::Finite, n}; }
    static LatencyResult infinite() { return {Kind::Infinite, 0}; }
    static LatencyResult undefined() { return {Kind::Undefined, 0}; }
    std::string to_string() const;
    bool operator==(const LatencyResult& o) const {
        return kind == o.kind && (kind != Kind::Finite || length == o.length);
    }
};

// Longest interval satisfying the prefix-closed formula `d` across all
// executions of the shield: intervals may start after any reachable history,
// so every reachable product state seeds a fresh monitor. Throws
// not_prefix_closed when A(d) fails the guard.
LatencyResult maxlen(const Controller& c, const ShieldSpec& spec, const QddcFormula& d,
                     const AnalysisOptions& opts = {});

// Latency in cycles: an interval of length n spans n+1 positions, and "no
// interval at all" reads as zero cycles. This is the rendering used for the
// worst-case burst-deviation latency of a shield.
LatencyResult latency_cycles(const LatencyResult& interval_length);

struct SimStats {
    std::uint64_t steps = 0;
    std::uint64_t deviations = 0;
    std::uint64_t sse_violations = 0; // steps with SSEOK false
    double deviation_freq = 0.0;
    double non_deviation_freq = 0.0;
    double sse_ok_freq = 0.0;
    // filled only when record_trace is set
    std::vector<LetterIndex> inputs;
    std::vector<LetterIndex> outputs;
};

// Drives the shield with seeded uniform iid letters over 2^|I∪O|.
SimStats simulate(const Controller& c, const ShieldSpec& spec, std::uint64_t steps,
                  std::uint64_t seed, bool record_trace = false,
                  const AnalysisOptions& opts = {});

// MRMC-compatible export: `.tra` lists STATES/TRANSITIONS then one
// `src dst prob` line per transition (1-based), `.lab` declares the labels
// and marks the accepting states.
std::string export_mrmc_tra(const Dtmc& m);
std::string export_mrmc_lab(const Dtmc& m);

} // namespace qshield
