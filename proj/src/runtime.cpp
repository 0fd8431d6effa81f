#include "qshield/runtime.hpp"

#include <sstream>

#include "qshield/errors.hpp"

namespace qshield {

ControllerTable ControllerTable::from_controller(const Controller& c) {
    const Supervisor& sup = c.sup;
    LetterSplit split = sup.split();
    ControllerTable t;
    t.inputs = sup.io.inputs;
    t.outputs = sup.io.outputs;

    std::vector<State> order;
    std::vector<State> remap(sup.dfa.num_states(), static_cast<State>(-1));
    for (State s : sup.dfa.reachable_states()) {
        if (s == sup.reject) continue;
        remap[s] = static_cast<State>(order.size());
        order.push_back(s);
    }
    t.init = remap[sup.dfa.init()];
    t.next.assign(order.size() * split.num_inputs(), 0);
    t.choice.assign(order.size() * split.num_inputs(), 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        for (LetterIndex i = 0; i < split.num_inputs(); ++i) {
            int found = 0;
            LetterIndex pick = 0;
            for (LetterIndex o = 0; o < split.num_outputs(); ++o)
                if (sup.allows(order[k], split.joint(i, o))) {
                    pick = o;
                    ++found;
                }
            if (found != 1) throw internal_error("controller is not output-deterministic");
            t.choice[k * split.num_inputs() + i] = pick;
            t.next[k * split.num_inputs() + i] =
                remap[sup.dfa.next(order[k], split.joint(i, pick))];
        }
    }
    return t;
}

ControllerTable ControllerTable::parse(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            auto hash = line.find("//");
            if (hash != std::string::npos) line.erase(hash);
            auto last = line.find_last_not_of(" \t\r");
            if (last == std::string::npos) continue;
            line.erase(last + 1);
            return true;
        }
        return false;
    };
    auto header = [&](const char* key) -> std::string {
        if (!next_line()) throw parse_error(std::string("controller table: missing '") + key + "'");
        std::string prefix = std::string(key);
        if (line.rfind(prefix, 0) != 0)
            throw parse_error("controller table: expected '" + prefix + "', got '" + line + "'");
        return line.substr(prefix.size());
    };

    header("controller");
    ControllerTable t;
    {
        std::istringstream s(header("inputs:"));
        std::vector<std::string> names;
        for (std::string n; s >> n;) names.push_back(n);
        t.inputs = VarSet(names);
    }
    {
        std::istringstream s(header("outputs:"));
        std::vector<std::string> names;
        for (std::string n; s >> n;) names.push_back(n);
        t.outputs = VarSet(names);
    }
    std::size_t states = 0;
    {
        std::istringstream s(header("states:"));
        if (!(s >> states) || states == 0)
            throw parse_error("controller table: bad state count");
    }
    {
        std::istringstream s(header("init:"));
        if (!(s >> t.init) || t.init >= states)
            throw parse_error("controller table: bad init state");
    }
    const std::size_t ni = t.inputs.letter_count();
    const State unset = static_cast<State>(-1);
    t.next.assign(states * ni, unset);
    t.choice.assign(states * ni, 0);
    while (next_line()) {
        std::istringstream s(line);
        State from, to;
        LetterIndex in_l, out_l;
        std::string arrow;
        if (!(s >> from >> in_l >> arrow >> out_l >> to) || arrow != "->")
            throw parse_error("controller table: bad row '" + line + "'");
        if (from >= states || to >= states || in_l >= ni ||
            out_l >= t.outputs.letter_count())
            throw parse_error("controller table: row out of range: '" + line + "'");
        if (t.next[from * ni + in_l] != unset)
            throw parse_error("controller table: duplicate row: '" + line + "'");
        t.next[from * ni + in_l] = to;
        t.choice[from * ni + in_l] = out_l;
    }
    for (State v : t.next)
        if (v == unset)
            throw parse_error("controller table: missing rows (corrupt export)");
    return t;
}

ControllerTable ControllerTable::parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

ShieldInstance::ShieldInstance(ControllerTable table, std::optional<Dfa> req_monitor)
    : table_(std::move(table)), monitor_(std::move(req_monitor)), state_(table_.init) {
    if (monitor_) {
        if (monitor_->vars() != table_.inputs)
            throw declaration_error(
                "requirement monitor alphabet must equal the controller inputs");
        monitor_state_ = monitor_->init();
    }
    if (table_.outputs.size() > table_.inputs.size())
        throw declaration_error("controller table pairs more outputs than inputs");
    paired_ = table_.inputs.size() - table_.outputs.size(); // first paired input bit
}

StepResult ShieldInstance::step(LetterIndex input) {
    if (input >= table_.inputs.letter_count())
        throw declaration_error("input letter out of range for the controller alphabet");
    const std::size_t ni = table_.inputs.letter_count();
    StepResult r;
    r.output = table_.choice[state_ * ni + input];
    // the trailing |outputs| input bits carry the SSE outputs, paired by position
    LetterIndex sse_bits =
        input & static_cast<LetterIndex>((1u << table_.outputs.size()) - 1);
    r.deviation = sse_bits != r.output;
    state_ = table_.next[state_ * ni + input];
    ++steps_;
    if (r.deviation) ++deviations_;
    if (monitor_) {
        monitor_state_ = monitor_->next(monitor_state_, input);
        r.sse_ok = monitor_->accepting(monitor_state_);
    }
    return r;
}

void ShieldInstance::reset() {
    state_ = table_.init;
    if (monitor_) monitor_state_ = monitor_->init();
    steps_ = 0;
    deviations_ = 0;
}

std::optional<LetterIndex> parse_bit_line(const std::string& line, const VarSet& vars) {
    std::istringstream in(line);
    std::vector<int> bits;
    for (std::string tok; in >> tok;) {
        if (tok == "0") bits.push_back(0);
        else if (tok == "1") bits.push_back(1);
        else throw parse_error("bit line: expected 0 or 1, got '" + tok + "'");
    }
    if (bits.empty()) return std::nullopt;
    if (bits.size() != vars.size())
        throw parse_error("bit line: expected " + std::to_string(vars.size()) +
                          " bits for '" + vars.to_string() + "', got " +
                          std::to_string(bits.size()));
    LetterIndex l = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) l |= LetterIndex{1} << (vars.size() - 1 - i);
    return l;
}

std::string format_step_line(const StepResult& r, const VarSet& outputs) {
    std::string out;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (i) out += ' ';
        out += ((r.output >> (outputs.size() - 1 - i)) & 1u) ? '1' : '0';
    }
    out += outputs.size() ? " " : "";
    out += "dev=";
    out += r.deviation ? '1' : '0';
    if (r.sse_ok) {
        out += " ok=";
        out += *r.sse_ok ? '1' : '0';
    }
    return out;
}

} // namespace qshield
