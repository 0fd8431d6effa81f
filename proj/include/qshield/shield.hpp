#pragma once

#include <optional>
#include <string>
#include <variant>

#include "qshield/qddc_parse.hpp"
#include "qshield/synthesis.hpp"

namespace qshield {

// Reserved indicator names. Interface variables may not use them.
inline const std::string k_sse_ok_name = "SSEOK";
inline const std::string k_deviation_name = "Deviation";

struct ShieldInterface {
    VarSet inputs;         // I
    VarSet sse_outputs;    // O
    VarSet shield_outputs; // O', paired with O by position

    VarSet ambient() const;     // I then O then O'
    VarSet game_inputs() const; // I then O
    void validate() const;
};

enum class ShieldTypeKind { V0, V1, V2, V3, Custom };

struct ShieldType {
    ShieldTypeKind kind = ShieldTypeKind::V0;
    unsigned k = 1;         // V1, V2
    unsigned e = 0, d = 0;  // V3
    std::optional<QddcFormula> custom; // over {SSEOK, Deviation}

    static ShieldType v0();
    static ShieldType v1(unsigned k);
    static ShieldType v2(unsigned k);
    static ShieldType v3(unsigned e, unsigned d);
    static ShieldType custom_hdc(QddcFormula f);
    std::string to_string() const;
};

struct ShieldSpec {
    ShieldInterface iface;
    std::optional<QddcFormula> req; // over I ∪ O
    std::optional<Dfa> req_import;  // imported monitor over I ∪ O (alternative to req)
    ShieldType type;
    bool dm = true;
    unsigned horizon = 10;
    // no silent default: the order materially changes the shield, so
    // synthesis refuses to run without one
    std::optional<OutputOrder> ord;
    MacroTable macros = MacroTable::with_builtins();

    void validate() const;
    IoPartition game_io() const; // inputs I ∪ O, outputs O'
};

// Hard deviation constraint over {SSEOK, Deviation} for each shield type:
// V0 is `true`, V1 bounds every deviation burst by k, V2 bounds bursts of
// deviation-while-SSEOK by k and forbids spurious deviation, V3 allows at
// most d deviations per e errors and forbids spurious deviation.
QddcFormula hdc_formula(const ShieldType& type);

// The requirement with every SSE output renamed to its paired shield output.
QddcFormula req_primed(const ShieldSpec& spec);

// Indicator definitions: SSEOK witnesses REQ(I,O), Deviation witnesses a
// current-letter mismatch between the paired outputs.
std::vector<IndicatorDef> shield_inddef(const ShieldSpec& spec);

// Requirement monitors over the full shield alphabet (compiled or imported).
Dfa req_io_monitor(const ShieldSpec& spec, const CompileOptions& opts = {});
Dfa req_primed_monitor(const ShieldSpec& spec, const CompileOptions& opts = {});

// The hard requirement automaton over I ∪ O ∪ O': the product of the
// REQ(I,O') monitor with the HDC monitor, where SSEOK and Deviation are
// derived per transition (from the REQ(I,O) monitor and the letter) rather
// than added as game variables. Its language equals that of the cascade
// formula REQ(I,O') && HDC << INDDEF with the indicator variables projected
// away.
Dfa build_hshield(const ShieldSpec& spec, const CompileOptions& opts = {});

// One weight-1 soft requirement per output pair, rewarding o_i = o'_i at the
// current position; the per-step weight is |O| minus the Hamming distance.
SoftSpec hamming_soft(const ShieldInterface& iface);

struct ShieldStats {
    std::size_t hshield_states = 0;
    std::size_t mps_states = 0;
    std::size_t mphos_states = 0; // 0 when dm is off
    std::size_t controller_states = 0;
    std::size_t controller_live_states = 0; // excluding the reject sink
    std::size_t cascade_states = 0;         // see cascade_form_state_count
    double seconds = 0.0;
};

struct ShieldResult {
    Controller controller;
    Supervisor mps_sup;
    std::optional<Supervisor> mphos_sup;
    ShieldStats stats;
};

// Full pipeline: build_hshield -> mps -> (mphos) -> determinize.
std::variant<ShieldResult, Unrealizable> synthesize(const ShieldSpec& spec,
                                                    const SynthOptions& opts = {});

// Minimized state count of the controller in the cascade signature
// (inputs I ∪ O, outputs O' ∪ {SSEOK, Deviation}): materializing the
// indicator bits as Mealy outputs keeps the REQ(I,O) monitor inside the
// machine, which is how shield sizes are conventionally quoted. The plain
// controller is usually smaller because this toolkit derives the indicators
// at analysis time instead.
std::size_t cascade_form_state_count(const Controller& c, const ShieldSpec& spec,
                                     const CompileOptions& opts = {});

// Shield spec file: line-oriented `key: value` sections (inputs:,
// sse_outputs:, shield_outputs:, req:, req_file:, shield_type:, dm:,
// horizon:, order:) plus `macro name(params) = body` lines. `//` comments;
// a trailing backslash continues a line. `req_file:` paths are resolved by
// the caller (see load_shield_spec).
ShieldSpec parse_shield_spec(const std::string& text);
ShieldSpec load_shield_spec(const std::string& path);

} // namespace qshield
