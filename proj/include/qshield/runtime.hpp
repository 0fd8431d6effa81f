#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qshield/synthesis.hpp"

namespace qshield {

// Flattened deterministic Mealy table: the executable form of a controller.
// Input variables are the shield's I followed by the SSE outputs O; the last
// |outputs| input variables are paired positionally with the outputs for the
// deviation flag.
struct ControllerTable {
    VarSet inputs;
    VarSet outputs;
    State init = 0;
    std::vector<State> next;         // state * 2^|inputs| + in -> state
    std::vector<LetterIndex> choice; // state * 2^|inputs| + in -> output letter

    std::size_t num_states() const { return next.size() / inputs.letter_count(); }

    static ControllerTable from_controller(const Controller& c);
    // Parses the `export_controller_table` format; verifies the table has no
    // gaps and no out-of-range entries (a corrupt export is fatal).
    static ControllerTable parse(std::istream& in);
    static ControllerTable parse(const std::string& text);
};

struct StepResult {
    LetterIndex output = 0;            // letter over the outputs
    bool deviation = false;            // output differs from the paired input bits
    std::optional<bool> sse_ok;        // requirement monitor verdict, if attached
};

// Step-wise executor for one shield stream. Deterministic: the same input
// sequence always produces the same outputs.
class ShieldInstance {
public:
    explicit ShieldInstance(ControllerTable table, std::optional<Dfa> req_monitor = {});

    // `input` is a letter over table.inputs. Never blocks: controllers are
    // total on inputs.
    StepResult step(LetterIndex input);
    void reset();

    State state() const { return state_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t deviations() const { return deviations_; }

    const ControllerTable& table() const { return table_; }

private:
    ControllerTable table_;
    std::optional<Dfa> monitor_; // over table.inputs
    State state_;
    State monitor_state_ = 0;
    std::uint64_t steps_ = 0;
    std::uint64_t deviations_ = 0;
    std::size_t paired_;
};

// Line protocol: one input line = space-separated 0/1 bits for the input
// variables in declared order; one output line = bits for the outputs
// followed by `dev=<0|1>` and, when a monitor is attached, `ok=<0|1>`.
std::optional<LetterIndex> parse_bit_line(const std::string& line, const VarSet& vars);
std::string format_step_line(const StepResult& r, const VarSet& outputs);

} // namespace qshield
