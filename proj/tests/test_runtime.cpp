#include <doctest.h>

#include "qshield/analysis.hpp"
#include "qshield/runtime.hpp"
#include "test_util.hpp"

using namespace qshield;

namespace {

ShieldResult synth_file(const char* name, ShieldSpec* spec_out = nullptr) {
    ShieldSpec spec = load_shield_spec(std::string(QSHIELD_SPEC_DIR) + "/" + name);
    auto result = synthesize(spec);
    REQUIRE(std::holds_alternative<ShieldResult>(result));
    if (spec_out) *spec_out = spec;
    return std::get<ShieldResult>(std::move(result));
}

} // namespace

TEST_CASE("controller table export parses back identically") {
    ShieldSpec spec;
    ShieldResult r = synth_file("passthrough.qs", &spec);
    std::string text = export_controller_table(r.controller);
    ControllerTable parsed = ControllerTable::parse(text);
    ControllerTable direct = ControllerTable::from_controller(r.controller);
    CHECK(parsed.inputs == direct.inputs);
    CHECK(parsed.outputs == direct.outputs);
    CHECK(parsed.init == direct.init);
    CHECK(parsed.next == direct.next);
    CHECK(parsed.choice == direct.choice);
}

TEST_CASE("corrupt controller tables are rejected") {
    ShieldResult r = synth_file("passthrough.qs");
    std::string text = export_controller_table(r.controller);
    // drop the last row: the table has a gap
    std::string truncated = text.substr(0, text.find_last_of('\n', text.size() - 2) + 1);
    CHECK_THROWS_AS(ControllerTable::parse(truncated), parse_error);
    CHECK_THROWS_AS(ControllerTable::parse(std::string("controller\ninputs: a\n")),
                    parse_error);
}

TEST_CASE("pass-through instance echoes and reports no deviation") {
    ShieldSpec spec;
    ShieldResult r = synth_file("passthrough.qs", &spec);
    ControllerTable table = ControllerTable::from_controller(r.controller);
    Dfa monitor = compile(*spec.req, spec.iface.game_inputs());
    ShieldInstance inst(table, monitor);
    for (LetterIndex in = 0; in < table.inputs.letter_count(); ++in) {
        StepResult step = inst.step(in);
        CHECK(step.output == (in & 0b11)); // trailing O bits echoed
        CHECK(!step.deviation);
        REQUIRE(step.sse_ok.has_value());
        CHECK(*step.sse_ok); // requirement `true` always satisfied
    }
    CHECK(inst.steps() == table.inputs.letter_count());
    CHECK(inst.deviations() == 0);
}

TEST_CASE("reset restores the initial state and counters") {
    ShieldSpec spec;
    ShieldResult r = synth_file("passthrough.qs", &spec);
    ShieldInstance inst(ControllerTable::from_controller(r.controller), std::nullopt);
    std::vector<LetterIndex> word{3, 1, 7, 2, 0};
    std::vector<LetterIndex> first;
    for (LetterIndex in : word) first.push_back(inst.step(in).output);
    inst.reset();
    CHECK(inst.steps() == 0);
    CHECK(inst.deviations() == 0);
    std::vector<LetterIndex> second;
    for (LetterIndex in : word) second.push_back(inst.step(in).output);
    CHECK(first == second);
    inst.reset();
    inst.reset(); // idempotent
    CHECK(inst.steps() == 0);
}

TEST_CASE("streaming equals batch replay through the controller automaton") {
    ShieldSpec spec;
    ShieldResult r = synth_file("until5_v2k1_nodm.qs", &spec);
    ControllerTable table = ControllerTable::from_controller(r.controller);
    ShieldInstance inst(table, std::nullopt);

    std::mt19937_64 rng(131);
    const Supervisor& sup = r.controller.sup;
    LetterSplit split = sup.split();
    State dfa_state = sup.dfa.init();
    for (int k = 0; k < 400; ++k) {
        LetterIndex in = static_cast<LetterIndex>(rng() % table.inputs.letter_count());
        StepResult step = inst.step(in);
        // batch: advance the controller DFA by the joint letter
        LetterIndex joint = split.joint(in, step.output);
        CHECK(sup.allows(dfa_state, joint));
        dfa_state = sup.dfa.next(dfa_state, joint);
        CHECK(sup.dfa.accepting(dfa_state));
    }
}

TEST_CASE("emitted traces satisfy the hard deviation constraint") {
    // V3(1,1): on any prefix with at most one SSE error there is at most one
    // deviation; replay and check with the reference evaluator
    ShieldSpec spec;
    ShieldResult r = synth_file("until5_v3e1d1_nodm.qs", &spec);
    InstrumentedShield inst(r.controller, spec, true);
    VarSet ext = inst.ext_vars();
    QddcFormula hdc = hdc_formula(spec.type)
                          .rename_free({}); // over SSEOK/Deviation, valid over ext too
    std::mt19937_64 rng(137);
    for (int round = 0; round < 20; ++round) {
        State s = inst.init();
        Trace t{ext, {}};
        for (int k = 0; k < 10; ++k) {
            LetterIndex in = static_cast<LetterIndex>(rng() % inst.num_inputs());
            const auto& mv = inst.move(s, in);
            t.letters.push_back(mv.ext_letter);
            s = mv.to;
        }
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK_MESSAGE(evaluate(hdc, t, {0, i}), "prefix ", i, " violates the HDC");
    }
}

TEST_CASE("bit line protocol") {
    VarSet vars({"i", "a", "b"});
    CHECK(parse_bit_line("1 0 1", vars) == LetterIndex{0b101});
    CHECK(parse_bit_line("   ", vars) == std::nullopt);
    CHECK_THROWS_AS(parse_bit_line("1 0", vars), parse_error);
    CHECK_THROWS_AS(parse_bit_line("1 0 2", vars), parse_error);

    StepResult r;
    r.output = 0b10;
    r.deviation = false;
    r.sse_ok = true;
    CHECK(format_step_line(r, VarSet({"a'", "b'"})) == "1 0 dev=0 ok=1");
    r.sse_ok.reset();
    r.deviation = true;
    CHECK(format_step_line(r, VarSet({"a'", "b'"})) == "1 0 dev=1");
}

TEST_CASE("malformed input letters are rejected") {
    ShieldResult r = synth_file("passthrough.qs");
    ShieldInstance inst(ControllerTable::from_controller(r.controller), std::nullopt);
    CHECK_THROWS_AS(inst.step(1u << 10), declaration_error);
}

TEST_CASE("derived indicator bits equal the reference prefix truths") {
    // the SSEOK bit must be the prefix truth of REQ(I,O) and the Deviation
    // bit the current-letter mismatch, exactly as the cascade conjuncts
    // pref(EP(w) <=> D) would force
    ShieldSpec spec;
    ShieldResult r = synth_file("until5_v2k1_nodm.qs", &spec);
    InstrumentedShield inst(r.controller, spec, true);
    VarSet game = spec.iface.game_inputs();
    VarSet ext = inst.ext_vars();
    std::mt19937_64 rng(139);
    for (int round = 0; round < 30; ++round) {
        State s = inst.init();
        Trace io_trace{game, {}};
        std::vector<bool> sse_bits, dev_bits;
        std::vector<LetterIndex> outs;
        for (int k = 0; k < 9; ++k) {
            LetterIndex in = static_cast<LetterIndex>(rng() % inst.num_inputs());
            const auto& mv = inst.move(s, in);
            io_trace.letters.push_back(in);
            sse_bits.push_back(mv.sse_ok);
            dev_bits.push_back(mv.deviation);
            outs.push_back(mv.output);
            s = mv.to;
        }
        for (std::size_t i = 0; i < io_trace.size(); ++i) {
            CHECK(sse_bits[i] == evaluate(*spec.req, io_trace, {0, i}));
            LetterIndex sse_out = io_trace.letters[i] & 0b11;
            CHECK(dev_bits[i] == (sse_out != outs[i]));
        }
    }
}

TEST_CASE("no run exceeds the analytic burst-deviation bound") {
    ShieldSpec spec;
    ShieldResult r = synth_file("until5_v2k3_nodm.qs", &spec);
    QddcFormula burst = QddcFormula::all(PropFormula::conj(
        PropFormula::var(k_sse_ok_name), PropFormula::var(k_deviation_name)));
    LatencyResult cycles = latency_cycles(maxlen(r.controller, spec, burst));
    REQUIRE(cycles.kind == LatencyResult::Kind::Finite);

    InstrumentedShield inst(r.controller, spec, true);
    std::mt19937_64 rng(149);
    State s = inst.init();
    std::uint64_t streak = 0, longest = 0;
    for (int k = 0; k < 200000; ++k) {
        LetterIndex in = static_cast<LetterIndex>(rng() % inst.num_inputs());
        const auto& mv = inst.move(s, in);
        streak = (mv.sse_ok && mv.deviation) ? streak + 1 : 0;
        longest = std::max(longest, streak);
        s = mv.to;
    }
    CHECK(longest <= cycles.length);
    CHECK(longest > 0); // the bound is attainable, so long runs should show bursts
}
